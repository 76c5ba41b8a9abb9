// DFS-family executors. One frame per walk event: entering a node (it turns
// gray and receives its parent) or finishing one (it turns black and is popped
// from the s_prev stack). Neighbours are explored in increasing id order.
#include <algorithm>
#include <functional>

#include "exec_common.hpp"

namespace hintrelic::trace::detail {
namespace {

enum Color { kWhite = 0, kGray = 1, kBlack = 2 };

constexpr double kTick = 0.01;

struct Walk {
  explicit Walk(int n_)
      : n(n_), color(n_, kWhite), pi(n_), d(n_, 0.0), f(n_, 0.0), s_prev(n_) {
    for (int i = 0; i < n; ++i) pi[i] = s_prev[i] = i;
  }

  int n;
  std::vector<int> color;
  std::vector<int> pi;
  std::vector<double> d;
  std::vector<double> f;
  std::vector<int> s_prev;
  int s = 0;
  int u = 0;
  int v = 0;
  int s_last = 0;
  long ticks = 0;

  double time() const { return kTick * static_cast<double>(ticks); }

  FeatureMap base_hints() const {
    Values col(color.begin(), color.end());
    return {{"color", std::move(col)},
            {"s_prev", to_values(s_prev)},
            {"s", mask_one(n, s)},
            {"u", mask_one(n, u)},
            {"v", mask_one(n, v)},
            {"s_last", mask_one(n, s_last)}};
  }
};

struct Hooks {
  // Called after the walk state is updated for an event, before emitting.
  std::function<void(Walk&, int node, int parent)> on_enter = [](Walk&, int, int) {};
  std::function<void(Walk&, int node)> on_finish = [](Walk&, int) {};
  // Emits one frame for the current walk state.
  std::function<void(const Walk&)> emit;
};

// Runs a full DFS tree from `root` over `adj` (neighbours u -> v when
// adj(u, v) is set).
void walk_tree(Walk& w, int root, const std::function<bool(int, int)>& adj, const Hooks& hooks) {
  ++w.ticks;
  w.color[root] = kGray;
  w.pi[root] = root;
  w.d[root] = w.time();
  w.s_prev[root] = root;
  w.s = w.u = w.v = w.s_last = root;
  hooks.on_enter(w, root, root);
  hooks.emit(w);
  while (true) {
    const int u = w.s_last;
    int next = -1;
    for (int v = 0; v < w.n; ++v) {
      if (v != u && adj(u, v) && w.color[v] == kWhite) {
        next = v;
        break;
      }
    }
    ++w.ticks;
    if (next >= 0) {
      w.pi[next] = u;
      w.color[next] = kGray;
      w.d[next] = w.time();
      w.s_prev[next] = u;
      w.s_last = next;
      w.u = u;
      w.v = next;
      hooks.on_enter(w, next, u);
      hooks.emit(w);
      continue;
    }
    w.color[u] = kBlack;
    w.f[u] = w.time();
    w.u = u;
    w.v = u;
    const int below = w.s_prev[u];
    w.s_prev[u] = u;
    w.s_last = below;
    hooks.on_finish(w, u);
    hooks.emit(w);
    if (below == u) break;
  }
}

void walk_all(Walk& w, const std::vector<int>& roots, const std::function<bool(int, int)>& adj,
              const Hooks& hooks) {
  for (int r : roots) {
    if (w.color[r] == kWhite) walk_tree(w, r, adj, hooks);
  }
}

std::vector<int> index_order(int n) {
  std::vector<int> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace

Trajectory run_dfs(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  Recorder rec(AlgorithmId::dfs, g);
  Walk w(n);
  Hooks hooks;
  hooks.emit = [&](const Walk& s) {
    FeatureMap h = s.base_hints();
    h["pi_h"] = to_values(s.pi);
    h["d"] = s.d;
    h["f"] = s.f;
    h["time"] = {s.time()};
    rec.push(std::move(h));
  };
  walk_all(w, index_order(n), [&](int a, int b) { return edge(adj, n, a, b); }, hooks);
  return rec.finish({{"pi", to_values(w.pi)}});
}

Trajectory run_topological_sort(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  Recorder rec(AlgorithmId::topological_sort, g);
  Walk w(n);
  std::vector<int> topo(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) topo[i] = i;
  int head = -1;
  Hooks hooks;
  hooks.on_finish = [&](Walk&, int node) {
    topo[node] = head >= 0 ? head : node;
    head = node;
  };
  hooks.emit = [&](const Walk& s) {
    FeatureMap h = s.base_hints();
    h["topo_h"] = to_values(topo);
    h["topo_head_h"] = mask_one(n, head >= 0 ? head : 0);
    rec.push(std::move(h));
  };
  walk_all(w, index_order(n), [&](int a, int b) { return edge(adj, n, a, b); }, hooks);
  return rec.finish({{"topo", to_values(topo)}, {"topo_head", mask_one(n, head)}});
}

namespace {

// Shared low-link bookkeeping for articulation points and bridges.
struct LowLink {
  explicit LowLink(int n) : low(n, 0.0), child_cnt(n, 0.0) {}
  std::vector<double> low;
  std::vector<double> child_cnt;

  void enter(Walk& w, int node, int parent) {
    low[node] = w.d[node];
    if (parent != node) child_cnt[parent] += 1.0;
  }

  void finish(const Walk& w, const Values& adj, int u) {
    for (int x = 0; x < w.n; ++x) {
      if (x == u || !edge(adj, w.n, u, x)) continue;
      if (w.pi[x] == u) {
        low[u] = std::min(low[u], low[x]);
      } else if (x != w.pi[u]) {
        low[u] = std::min(low[u], w.d[x]);
      }
    }
  }
};

}  // namespace

Trajectory run_articulation_points(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  Recorder rec(AlgorithmId::articulation_points, g);
  Walk w(n);
  LowLink ll(n);
  Values is_cut(static_cast<std::size_t>(n), 0.0);
  Hooks hooks;
  hooks.on_enter = [&](Walk& s, int node, int parent) { ll.enter(s, node, parent); };
  hooks.on_finish = [&](Walk& s, int u) {
    ll.finish(s, adj, u);
    if (s.pi[u] == u) {
      is_cut[u] = ll.child_cnt[u] >= 2.0 ? 1.0 : 0.0;
    } else {
      for (int x = 0; x < n; ++x) {
        if (x != u && s.pi[x] == u && edge(adj, n, u, x) && ll.low[x] >= s.d[u]) is_cut[u] = 1.0;
      }
    }
  };
  hooks.emit = [&](const Walk& s) {
    FeatureMap h = s.base_hints();
    h["is_cut_h"] = is_cut;
    h["pi_h"] = to_values(s.pi);
    h["d"] = s.d;
    h["f"] = s.f;
    h["low"] = ll.low;
    h["child_cnt"] = ll.child_cnt;
    h["time"] = {s.time()};
    rec.push(std::move(h));
  };
  walk_all(w, index_order(n), [&](int a, int b) { return edge(adj, n, a, b); }, hooks);
  return rec.finish({{"is_cut", is_cut}});
}

Trajectory run_bridges(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  Recorder rec(AlgorithmId::bridges, g);
  Walk w(n);
  LowLink ll(n);
  Values is_bridge(static_cast<std::size_t>(n) * n, 0.0);
  Hooks hooks;
  hooks.on_enter = [&](Walk& s, int node, int parent) { ll.enter(s, node, parent); };
  hooks.on_finish = [&](Walk& s, int u) {
    ll.finish(s, adj, u);
    for (int x = 0; x < n; ++x) {
      if (x != u && s.pi[x] == u && edge(adj, n, u, x) && ll.low[x] > s.d[u]) {
        is_bridge[u * n + x] = is_bridge[x * n + u] = 1.0;
      }
    }
  };
  hooks.emit = [&](const Walk& s) {
    FeatureMap h = s.base_hints();
    h["is_bridge_h"] = is_bridge;
    h["pi_h"] = to_values(s.pi);
    h["d"] = s.d;
    h["f"] = s.f;
    h["low"] = ll.low;
    h["time"] = {s.time()};
    rec.push(std::move(h));
  };
  walk_all(w, index_order(n), [&](int a, int b) { return edge(adj, n, a, b); }, hooks);
  return rec.finish({{"is_bridge", is_bridge}});
}

Trajectory run_scc(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  Recorder rec(AlgorithmId::scc, g);
  Walk w(n);
  std::vector<int> scc_id(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) scc_id[i] = i;
  int phase = 0;
  int root = 0;
  bool second_pass = false;
  Hooks hooks;
  hooks.on_enter = [&](Walk& s, int node, int parent) {
    if (!second_pass) return;
    if (parent == node) root = node;
    scc_id[node] = root;
    (void)s;
  };
  hooks.emit = [&](const Walk& s) {
    FeatureMap h = s.base_hints();
    h["scc_id_h"] = to_values(scc_id);
    h["d"] = s.d;
    h["f"] = s.f;
    h["time"] = {s.time()};
    h["phase"] = {static_cast<double>(phase)};
    rec.push(std::move(h));
  };
  // Pass 1 on G records finishing times.
  walk_all(w, index_order(n), [&](int a, int b) { return edge(adj, n, a, b); }, hooks);

  // Pass 2 on the transpose, roots in decreasing finishing time. f keeps the
  // pass-1 values so the root order stays readable from every frame.
  const std::vector<double> finish_times = w.f;
  std::vector<int> roots = index_order(n);
  std::stable_sort(roots.begin(), roots.end(),
                   [&](int a, int b) { return finish_times[a] > finish_times[b]; });
  std::fill(w.color.begin(), w.color.end(), kWhite);
  phase = 1;
  second_pass = true;
  Hooks pass2 = hooks;
  pass2.emit = [&](const Walk& s) {
    Walk view = s;
    view.f = finish_times;
    hooks.emit(view);
  };
  walk_all(w, roots, [&](int a, int b) { return edge(adj, n, b, a); }, pass2);
  return rec.finish({{"scc_id", to_values(scc_id)}});
}

Trajectory run_dag_shortest_paths(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  const Values& weight = g.input("A");
  const Values& src = g.input("s");
  const int source = static_cast<int>(std::find(src.begin(), src.end(), 1.0) - src.begin());
  Recorder rec(AlgorithmId::dag_shortest_paths, g);
  Walk w(n);
  std::vector<int> topo(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) topo[i] = i;
  int head = -1;
  std::vector<int> pi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pi[i] = i;
  Values dist(static_cast<std::size_t>(n), 0.0);
  Values mark(static_cast<std::size_t>(n), 0.0);
  int phase = 0;

  auto emit = [&](const Walk& s) {
    FeatureMap h = s.base_hints();
    // The input already owns "s".
    h["s_h"] = std::move(h.at("s"));
    h.erase("s");
    h["pi_h"] = to_values(pi);
    h["d"] = dist;
    h["mark"] = mark;
    h["topo_h"] = to_values(topo);
    h["topo_head_h"] = mask_one(n, head >= 0 ? head : source);
    h["phase"] = {static_cast<double>(phase)};
    rec.push(std::move(h));
  };
  Hooks hooks;
  hooks.on_finish = [&](Walk&, int node) {
    topo[node] = head >= 0 ? head : node;
    head = node;
  };
  hooks.emit = emit;
  // Only the part reachable from the source is sorted and relaxed; anything
  // else can never receive a finite distance.
  walk_tree(w, source, [&](int a, int b) { return edge(adj, n, a, b); }, hooks);

  phase = 1;
  std::vector<bool> reached(static_cast<std::size_t>(n), false);
  reached[source] = true;
  int u = head;
  while (true) {
    for (int v = 0; v < n; ++v) {
      if (v == u || !edge(adj, n, u, v)) continue;
      const double cand = dist[u] + weight[u * n + v];
      if (!reached[v] || cand < dist[v]) {
        dist[v] = cand;
        pi[v] = u;
        reached[v] = true;
      }
    }
    mark[u] = 1.0;
    w.u = w.v = u;
    emit(w);
    if (topo[u] == u) break;
    u = topo[u];
  }
  return rec.finish({{"pi", to_values(pi)}});
}

}  // namespace hintrelic::trace::detail
