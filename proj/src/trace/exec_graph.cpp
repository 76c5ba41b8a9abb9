// Path and spanning-tree executors.
#include <algorithm>
#include <tuple>

#include "exec_common.hpp"

namespace hintrelic::trace::detail {
namespace {

int source_of(const GraphInstance& g) {
  const Values& s = g.input("s");
  return static_cast<int>(std::find(s.begin(), s.end(), 1.0) - s.begin());
}

std::vector<int> identity_ints(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

Trajectory run_bfs(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  const int s = source_of(g);
  Recorder rec(AlgorithmId::bfs, g);
  Values reach(static_cast<std::size_t>(n), 0.0);
  auto pi = identity_ints(n);
  reach[s] = 1.0;
  rec.push({{"reach_h", reach}, {"pi_h", to_values(pi)}});
  // Synchronous frontier rounds; a node is claimed by its smallest reached neighbour.
  while (true) {
    Values next = reach;
    bool changed = false;
    for (int v = 0; v < n; ++v) {
      if (reach[v] != 0.0) continue;
      for (int u = 0; u < n; ++u) {
        if (reach[u] != 0.0 && edge(adj, n, u, v)) {
          next[v] = 1.0;
          pi[v] = u;
          changed = true;
          break;
        }
      }
    }
    if (!changed) break;
    reach = std::move(next);
    rec.push({{"reach_h", reach}, {"pi_h", to_values(pi)}});
  }
  return rec.finish({{"pi", to_values(pi)}});
}

Trajectory run_bellman_ford(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  const Values& w = g.input("A");
  const int s = source_of(g);
  Recorder rec(AlgorithmId::bellman_ford, g);
  Values d(static_cast<std::size_t>(n), 0.0);
  Values msk(static_cast<std::size_t>(n), 0.0);
  auto pi = identity_ints(n);
  msk[s] = 1.0;
  auto emit = [&] { rec.push({{"pi_h", to_values(pi)}, {"d", d}, {"msk", msk}}); };
  emit();
  while (true) {
    Values nd = d;
    Values nmsk = msk;
    bool changed = false;
    for (int v = 0; v < n; ++v) {
      for (int u = 0; u < n; ++u) {
        if (msk[u] == 0.0 || !edge(adj, n, u, v)) continue;
        const double cand = d[u] + w[u * n + v];
        if (nmsk[v] == 0.0 || cand < nd[v]) {
          nd[v] = cand;
          nmsk[v] = 1.0;
          pi[v] = u;
          changed = true;
        }
      }
    }
    if (!changed) break;
    d = std::move(nd);
    msk = std::move(nmsk);
    emit();
  }
  return rec.finish({{"pi", to_values(pi)}});
}

namespace {

// Dijkstra and Prim differ only in the priority of a relaxed neighbour.
template <class Priority>
Trajectory run_queue(AlgorithmId id, const GraphInstance& g, const char* prio_name,
                     Priority priority) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  const Values& w = g.input("A");
  const int s = source_of(g);
  Recorder rec(id, g);
  Values prio(static_cast<std::size_t>(n), 0.0);
  Values mark(static_cast<std::size_t>(n), 0.0);
  Values in_queue(static_cast<std::size_t>(n), 0.0);
  auto pi = identity_ints(n);
  in_queue[s] = 1.0;
  while (true) {
    int u = -1;
    for (int i = 0; i < n; ++i) {
      if (in_queue[i] != 0.0 && (u < 0 || prio[i] < prio[u])) u = i;
    }
    if (u < 0) break;
    in_queue[u] = 0.0;
    mark[u] = 1.0;
    for (int v = 0; v < n; ++v) {
      if (v == u || mark[v] != 0.0 || !edge(adj, n, u, v)) continue;
      const double cand = priority(prio[u], w[u * n + v]);
      if (in_queue[v] == 0.0 || cand < prio[v]) {
        prio[v] = cand;
        pi[v] = u;
        in_queue[v] = 1.0;
      }
    }
    rec.push({{"pi_h", to_values(pi)},
              {prio_name, prio},
              {"mark", mark},
              {"in_queue", in_queue},
              {"u", mask_one(n, u)}});
  }
  return rec.finish({{"pi", to_values(pi)}});
}

}  // namespace

Trajectory run_dijkstra(const GraphInstance& g) {
  return run_queue(AlgorithmId::dijkstra, g, "d", [](double du, double wuv) { return du + wuv; });
}

Trajectory run_mst_prim(const GraphInstance& g) {
  return run_queue(AlgorithmId::mst_prim, g, "key", [](double, double wuv) { return wuv; });
}

Trajectory run_floyd_warshall(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  const Values& w = g.input("A");
  Recorder rec(AlgorithmId::floyd_warshall, g);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  Values D(nn, 0.0);
  Values msk(nn, 0.0);
  Values Pi(nn, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int ij = i * n + j;
      if (i == j) {
        msk[ij] = 1.0;
        Pi[ij] = i;
      } else if (edge(adj, n, i, j)) {
        D[ij] = w[ij];
        msk[ij] = 1.0;
        Pi[ij] = i;
      } else {
        Pi[ij] = j;
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (msk[i * n + k] == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (msk[k * n + j] == 0.0) continue;
        const double cand = D[i * n + k] + D[k * n + j];
        const int ij = i * n + j;
        if (msk[ij] == 0.0 || cand < D[ij]) {
          D[ij] = cand;
          Pi[ij] = Pi[k * n + j];
          msk[ij] = 1.0;
        }
      }
    }
    rec.push({{"Pi_h", Pi}, {"D", D}, {"msk", msk}, {"k", mask_one(n, k)}});
  }
  return rec.finish({{"Pi", Pi}});
}

Trajectory run_mst_kruskal(const GraphInstance& g) {
  const int n = g.n;
  const Values& adj = g.input("adj");
  const Values& w = g.input("A");
  Recorder rec(AlgorithmId::mst_kruskal, g);
  std::vector<std::tuple<double, int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (edge(adj, n, i, j)) edges.emplace_back(w[i * n + j], i, j);
    }
  }
  std::sort(edges.begin(), edges.end());
  Values in_mst(static_cast<std::size_t>(n) * n, 0.0);
  auto pi = identity_ints(n);
  auto find = [&](int x) {
    while (pi[x] != x) x = pi[x];
    return x;
  };
  auto emit = [&](int u, int v) {
    rec.push({{"in_mst_h", in_mst}, {"pi", to_values(pi)}, {"u", mask_one(n, u)},
              {"v", mask_one(n, v)}});
  };
  emit(0, 0);
  for (const auto& [wt, u, v] : edges) {
    const int ru = find(u);
    const int rv = find(v);
    if (ru != rv) {
      pi[std::max(ru, rv)] = std::min(ru, rv);
      in_mst[u * n + v] = in_mst[v * n + u] = 1.0;
    }
    emit(u, v);
  }
  return rec.finish({{"in_mst", in_mst}});
}

}  // namespace hintrelic::trace::detail
