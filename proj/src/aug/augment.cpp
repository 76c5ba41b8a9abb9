#include "hintrelic/augment.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "hintrelic/rng.hpp"
#include "hintrelic/trace_io.hpp"

namespace hintrelic::aug {

using trace::Family;
using trace::FeatureMap;
using trace::GraphKind;
using trace::Values;

std::string_view to_string(Exactness e) {
  return e == Exactness::exact ? "exact" : "approximate";
}

Exactness exactness(AlgorithmId id) {
  switch (trace::family_of(id)) {
    case Family::dfs_based:
    case Family::graph_based:
      return Exactness::exact;
    case Family::sorting:
      return id == AlgorithmId::insertion_sort ? Exactness::exact : Exactness::approximate;
    case Family::searching:
      return Exactness::approximate;
  }
  throw std::invalid_argument("unknown family");
}

int sample_step(int T, std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("sample_step: T must be >= 1");
  Rng rng(derive_seed(seed, "aug/step"));
  return static_cast<int>(rng.uniform_int(1, T));
}

std::vector<int> first_entry_steps(const Trajectory& t) {
  std::vector<int> steps;
  const int n = t.instance.n;
  Values prev(static_cast<std::size_t>(n), 0.0);
  for (const auto& frame : t.frames) {
    const Values& color = frame.hints.at("color");
    for (int i = 0; i < n; ++i) {
      if (prev[i] == 0.0 && color[i] == 1.0) {
        steps.push_back(frame.step);
        break;
      }
    }
    // Node 0 roots the first tree; once it is black the first search is over.
    if (color[0] == 2.0) break;
    prev = color;
  }
  return steps;
}

int entered_node(const Trajectory& t, int step) {
  if (step < 1 || step > t.steps()) throw std::out_of_range("entered_node: bad step");
  const Values& color = t.frames[step - 1].hints.at("color");
  for (int i = 0; i < t.instance.n; ++i) {
    const double before = step == 1 ? 0.0 : t.frames[step - 2].hints.at("color")[i];
    if (before == 0.0 && color[i] == 1.0) return i;
  }
  throw std::invalid_argument("entered_node: no node is entered at this step");
}

namespace {

// Draws a value in [lo, 1) not contained in `taken`, and records it.
double fresh_value(Rng& rng, std::set<double>& taken, double lo = 0.0) {
  while (true) {
    const double v = rng.uniform(lo, 1.0);
    if (v >= lo && v < 1.0 && taken.insert(v).second) return v;
  }
}

struct Grown {
  GraphInstance g;
  int n_base;
  int n;
};

// Copies the base inputs into an instance with m extra trailing nodes. New
// node features are zero; edge features keep the base block in the corner.
Grown grow(const GraphInstance& base, int m) {
  Grown r{base, base.n, base.n + m};
  const int nb = base.n;
  const int n = r.n;
  r.g.n = n;
  for (auto& [name, v] : r.g.node_inputs) v.resize(static_cast<std::size_t>(n), 0.0);
  for (auto& [name, v] : r.g.edge_inputs) {
    Values grown(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j < nb; ++j) grown[i * n + j] = v[i * nb + j];
    }
    v = std::move(grown);
  }
  // Appended positions sit evenly in the gap after the last base position.
  Values& pos = r.g.node_inputs.at("pos");
  const double last = pos[nb - 1];
  for (int k = 0; k < m; ++k) pos[nb + k] = last + (1.0 - last) * (k + 1) / (m + 1);
  return r;
}

void add_edge(Values& adj, int n, GraphKind kind, int u, int v) {
  adj[u * n + v] = 1.0;
  if (kind == GraphKind::undirected) adj[v * n + u] = 1.0;
}

// Random internal connectivity among appended nodes.
void connect_block(Grown& r, AlgorithmId id, Rng& rng) {
  const GraphKind kind = trace::graph_kind(id);
  const int n = r.n;
  Values& adj = r.g.edge_inputs.at("adj");
  const double p = trace::kEdgeProbabilities[static_cast<std::size_t>(
      rng.uniform_int(0, trace::kEdgeProbabilities.size() - 1))];
  for (int i = r.n_base; i < n; ++i) {
    for (int j = r.n_base; j < n; ++j) {
      if (i == j) continue;
      if ((kind == GraphKind::undirected || kind == GraphKind::dag) && j < i) continue;
      if (rng.bernoulli(p)) add_edge(adj, n, kind, i, j);
    }
  }
  if (!trace::is_weighted(id)) return;
  Values& w = r.g.edge_inputs.at("A");
  std::set<double> taken;
  double lo = 0.0;
  if (id == AlgorithmId::mst_kruskal) {
    // Appended edges must sort after every base edge.
    for (int i = 0; i < r.n_base; ++i) {
      for (int j = 0; j < r.n_base; ++j) lo = std::max(lo, w[i * n + j]);
    }
    taken.insert(lo);
  }
  for (int i = r.n_base; i < n; ++i) {
    for (int j = r.n_base; j < n; ++j) {
      if (adj[i * n + j] == 0.0) continue;
      if (kind == GraphKind::undirected && j < i) continue;
      w[i * n + j] = fresh_value(rng, taken, lo);
      if (kind == GraphKind::undirected) w[j * n + i] = w[i * n + j];
    }
  }
}

}  // namespace

AugmentedPair augment(std::shared_ptr<const Trajectory> base, int t_tilde, std::uint64_t seed,
                      int max_train_n) {
  if (!base) throw std::invalid_argument("augment: null trajectory");
  const Trajectory& t = *base;
  const int T = t.steps();
  const int nb = t.instance.n;
  if (t_tilde < 1 || t_tilde > T) throw std::out_of_range("augment: sampled step out of range");
  const int room = max_train_n + 1 - nb;
  if (room < 1) throw std::invalid_argument("augment: no room for appended nodes");

  Rng rng(derive_seed(seed, "aug/augment"));
  const AlgorithmId id = t.algorithm;
  const Family fam = trace::family_of(id);
  const int m = static_cast<int>(rng.uniform_int(1, room));

  AugmentedPair pair;
  pair.base = base;
  pair.family = exactness(id);
  pair.node_map.resize(static_cast<std::size_t>(nb));
  for (int i = 0; i < nb; ++i) pair.node_map[i] = i;

  Grown r = grow(t.instance, m);
  switch (fam) {
    case Family::sorting:
    case Family::searching: {
      Values& key = r.g.node_inputs.at("key");
      std::set<double> taken(key.begin(), key.begin() + nb);
      if (id == AlgorithmId::binary_search) taken.insert(r.g.graph_inputs.at("target")[0]);
      for (int k = nb; k < r.n; ++k) key[k] = fresh_value(rng, taken);
      pair.sampled_step = T;
      break;
    }
    case Family::graph_based:
      connect_block(r, id, rng);
      pair.sampled_step = T;
      break;
    case Family::dfs_based: {
      const auto entries = first_entry_steps(t);
      if (entries.empty()) throw std::invalid_argument("augment: walk never enters a node");
      pair.sampled_step = entries[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(entries.size()) - 1))];
      const int v = entered_node(t, pair.sampled_step);
      connect_block(r, id, rng);
      Values& adj = r.g.edge_inputs.at("adj");
      for (int w = nb; w < r.n; ++w) add_edge(adj, r.n, trace::graph_kind(id), w, v);
      break;
    }
  }
  pair.aug_instance = std::move(r.g);
  pair.contrast_mask.resize(static_cast<std::size_t>(T));
  for (int s = 1; s <= T; ++s) pair.contrast_mask[s - 1] = s <= pair.sampled_step;
  trace::validate_instance(pair.aug_instance);
  return pair;
}

std::vector<std::string> hint_targets(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::articulation_points:
    case AlgorithmId::bridges:
      return {"pi_h"};
    case AlgorithmId::dfs:
      return {"pi_h", "color", "s_prev"};
    case AlgorithmId::scc:
      return {"scc_id_h", "color", "s_prev"};
    case AlgorithmId::topological_sort:
      return {"topo_h", "color", "s_prev"};
    case AlgorithmId::bellman_ford:
    case AlgorithmId::bfs:
    case AlgorithmId::dijkstra:
    case AlgorithmId::mst_prim:
      return {"pi_h"};
    case AlgorithmId::dag_shortest_paths:
      return {"pi_h", "topo_h", "color"};
    case AlgorithmId::floyd_warshall:
      return {"Pi_h"};
    case AlgorithmId::mst_kruskal:
      return {"pi"};
    case AlgorithmId::heapsort:
      return {"pred_h", "parent"};
    case AlgorithmId::insertion_sort:
    case AlgorithmId::bubble_sort:
    case AlgorithmId::quicksort:
    case AlgorithmId::binary_search:
    case AlgorithmId::minimum:
      return {"pred_h"};
  }
  return {};
}

AugmentedPair generate_pair(AlgorithmId id, int n, std::uint64_t seed, int max_train_n) {
  const bool dfs = trace::family_of(id) == Family::dfs_based;
  for (std::uint64_t attempt = 0;; ++attempt) {
    auto g = trace::sample_instance(id, n, derive_seed(seed, "pair/instance", attempt));
    auto base = std::make_shared<const Trajectory>(trace::execute(g));
    if (dfs && first_entry_steps(*base).size() < 2) continue;
    const int t_tilde = sample_step(base->steps(), derive_seed(seed, "pair/step"));
    return augment(std::move(base), t_tilde, derive_seed(seed, "pair/augment"), max_train_n);
  }
}

std::string pair_to_jsonl(const AugmentedPair& p, const std::string& base_ref) {
  const auto& g = p.aug_instance;
  std::string out = "{\"base_ref\":" + trace::json_string(base_ref);
  out += ",\"t_tilde\":" + std::to_string(p.sampled_step);
  out += ",\"family\":" + trace::json_string(to_string(p.family));
  out += ",\"aug_inputs\":{";
  bool first = true;
  for (const auto& spec : trace::features(g.algorithm, trace::Stage::input)) {
    if (!first) out += ',';
    first = false;
    out += trace::json_string(spec.name) + ":" + trace::json_feature(spec, g.input(spec.name), g.n);
  }
  out += "},\"contrast_mask\":[";
  for (std::size_t k = 0; k < p.contrast_mask.size(); ++k) {
    if (k) out += ',';
    out += p.contrast_mask[k] ? '1' : '0';
  }
  out += "]}";
  return out;
}

}  // namespace hintrelic::aug
