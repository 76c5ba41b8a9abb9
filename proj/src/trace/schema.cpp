#include <stdexcept>
#include <string>

#include "hintrelic/trace.hpp"

namespace hintrelic::trace {
namespace {

constexpr std::array<AlgorithmId, kNumAlgorithms> kAll{
    AlgorithmId::articulation_points, AlgorithmId::bridges,
    AlgorithmId::dfs,                 AlgorithmId::scc,
    AlgorithmId::topological_sort,    AlgorithmId::bellman_ford,
    AlgorithmId::bfs,                 AlgorithmId::dag_shortest_paths,
    AlgorithmId::dijkstra,            AlgorithmId::floyd_warshall,
    AlgorithmId::mst_kruskal,         AlgorithmId::mst_prim,
    AlgorithmId::insertion_sort,      AlgorithmId::bubble_sort,
    AlgorithmId::quicksort,           AlgorithmId::heapsort,
    AlgorithmId::binary_search,       AlgorithmId::minimum,
};

constexpr std::array<std::string_view, kNumAlgorithms> kNames{
    "articulation_points", "bridges",     "dfs",           "scc",        "topological_sort",
    "bellman_ford",        "bfs",         "dag_shortest_paths", "dijkstra", "floyd_warshall",
    "mst_kruskal",         "mst_prim",    "insertion_sort", "bubble_sort", "quicksort",
    "heapsort",            "binary_search", "minimum",
};

FeatureSpec in(std::string name, Location l, Kind k, int classes = 0) {
  return {std::move(name), Stage::input, l, k, classes};
}
FeatureSpec hint(std::string name, Location l, Kind k, int classes = 0) {
  return {std::move(name), Stage::hint, l, k, classes};
}
FeatureSpec out(std::string name, Location l, Kind k, int classes = 0) {
  return {std::move(name), Stage::output, l, k, classes};
}

constexpr auto N = Location::node;
constexpr auto E = Location::edge;
constexpr auto G = Location::graph;

std::vector<FeatureSpec> dfs_walk_hints(const std::string& stack_top = "s") {
  return {hint("s_prev", N, Kind::pointer), hint(stack_top, N, Kind::mask_one),
          hint("u", N, Kind::mask_one), hint("v", N, Kind::mask_one),
          hint("s_last", N, Kind::mask_one)};
}

std::vector<FeatureSpec> build(AlgorithmId id) {
  std::vector<FeatureSpec> s;
  auto add = [&s](std::vector<FeatureSpec> more) {
    for (auto& f : more) s.push_back(std::move(f));
  };
  s.push_back(in("pos", N, Kind::scalar));
  switch (id) {
    case AlgorithmId::insertion_sort:
    case AlgorithmId::bubble_sort:
      add({in("key", N, Kind::scalar), hint("pred_h", N, Kind::pointer),
           hint("i", N, Kind::mask_one), hint("j", N, Kind::mask_one),
           out("pred", N, Kind::pointer)});
      break;
    case AlgorithmId::quicksort:
      add({in("key", N, Kind::scalar), hint("pred_h", N, Kind::pointer),
           hint("p", N, Kind::mask_one), hint("r", N, Kind::mask_one),
           hint("i", N, Kind::mask_one), hint("j", N, Kind::mask_one),
           out("pred", N, Kind::pointer)});
      break;
    case AlgorithmId::heapsort:
      add({in("key", N, Kind::scalar), hint("pred_h", N, Kind::pointer),
           hint("parent", N, Kind::pointer), hint("i", N, Kind::mask_one),
           hint("j", N, Kind::mask_one), hint("largest", N, Kind::mask_one),
           hint("heap_size", N, Kind::mask), hint("phase", G, Kind::categorical, 3),
           out("pred", N, Kind::pointer)});
      break;
    case AlgorithmId::minimum:
      add({in("key", N, Kind::scalar), hint("pred_h", N, Kind::pointer),
           hint("min_h", N, Kind::mask_one), hint("i", N, Kind::mask_one),
           out("min", N, Kind::mask_one)});
      break;
    case AlgorithmId::binary_search:
      add({in("key", N, Kind::scalar), in("target", G, Kind::scalar),
           hint("pred_h", N, Kind::pointer), hint("low", N, Kind::mask_one),
           hint("high", N, Kind::mask_one), hint("mid", N, Kind::mask_one),
           out("return", N, Kind::mask_one)});
      break;
    case AlgorithmId::bfs:
      add({in("s", N, Kind::mask_one), in("adj", E, Kind::mask),
           hint("reach_h", N, Kind::mask), hint("pi_h", N, Kind::pointer),
           out("pi", N, Kind::pointer)});
      break;
    case AlgorithmId::dfs:
      add({in("adj", E, Kind::mask), hint("pi_h", N, Kind::pointer),
           hint("color", N, Kind::categorical, 3), hint("d", N, Kind::scalar),
           hint("f", N, Kind::scalar)});
      add(dfs_walk_hints());
      add({hint("time", G, Kind::scalar), out("pi", N, Kind::pointer)});
      break;
    case AlgorithmId::topological_sort:
      add({in("adj", E, Kind::mask), hint("topo_h", N, Kind::pointer),
           hint("topo_head_h", N, Kind::mask_one), hint("color", N, Kind::categorical, 3)});
      add(dfs_walk_hints());
      add({out("topo", N, Kind::pointer), out("topo_head", N, Kind::mask_one)});
      break;
    case AlgorithmId::articulation_points:
      add({in("adj", E, Kind::mask), hint("is_cut_h", N, Kind::mask),
           hint("pi_h", N, Kind::pointer), hint("color", N, Kind::categorical, 3),
           hint("d", N, Kind::scalar), hint("f", N, Kind::scalar), hint("low", N, Kind::scalar)});
      add(dfs_walk_hints());
      add({hint("child_cnt", N, Kind::scalar), hint("time", G, Kind::scalar),
           out("is_cut", N, Kind::mask)});
      break;
    case AlgorithmId::bridges:
      add({in("adj", E, Kind::mask), hint("is_bridge_h", E, Kind::mask),
           hint("pi_h", N, Kind::pointer), hint("color", N, Kind::categorical, 3),
           hint("d", N, Kind::scalar), hint("f", N, Kind::scalar), hint("low", N, Kind::scalar)});
      add(dfs_walk_hints());
      add({hint("time", G, Kind::scalar), out("is_bridge", E, Kind::mask)});
      break;
    case AlgorithmId::scc:
      add({in("adj", E, Kind::mask), hint("scc_id_h", N, Kind::pointer),
           hint("color", N, Kind::categorical, 3), hint("d", N, Kind::scalar),
           hint("f", N, Kind::scalar)});
      add(dfs_walk_hints());
      add({hint("time", G, Kind::scalar), hint("phase", G, Kind::mask),
           out("scc_id", N, Kind::pointer)});
      break;
    case AlgorithmId::bellman_ford:
      add({in("s", N, Kind::mask_one), in("A", E, Kind::scalar), in("adj", E, Kind::mask),
           hint("pi_h", N, Kind::pointer), hint("d", N, Kind::scalar), hint("msk", N, Kind::mask),
           out("pi", N, Kind::pointer)});
      break;
    case AlgorithmId::dag_shortest_paths:
      add({in("s", N, Kind::mask_one), in("A", E, Kind::scalar), in("adj", E, Kind::mask),
           hint("pi_h", N, Kind::pointer), hint("d", N, Kind::scalar), hint("mark", N, Kind::mask),
           hint("topo_h", N, Kind::pointer), hint("topo_head_h", N, Kind::mask_one),
           hint("color", N, Kind::categorical, 3)});
      add(dfs_walk_hints("s_h"));
      add({hint("phase", G, Kind::mask), out("pi", N, Kind::pointer)});
      break;
    case AlgorithmId::dijkstra:
      add({in("s", N, Kind::mask_one), in("A", E, Kind::scalar), in("adj", E, Kind::mask),
           hint("pi_h", N, Kind::pointer), hint("d", N, Kind::scalar), hint("mark", N, Kind::mask),
           hint("in_queue", N, Kind::mask), hint("u", N, Kind::mask_one),
           out("pi", N, Kind::pointer)});
      break;
    case AlgorithmId::floyd_warshall:
      add({in("A", E, Kind::scalar), in("adj", E, Kind::mask), hint("Pi_h", E, Kind::pointer),
           hint("D", E, Kind::scalar), hint("msk", E, Kind::mask), hint("k", N, Kind::mask_one),
           out("Pi", E, Kind::pointer)});
      break;
    case AlgorithmId::mst_kruskal:
      add({in("A", E, Kind::scalar), in("adj", E, Kind::mask), hint("in_mst_h", E, Kind::mask),
           hint("pi", N, Kind::pointer), hint("u", N, Kind::mask_one),
           hint("v", N, Kind::mask_one), out("in_mst", E, Kind::mask)});
      break;
    case AlgorithmId::mst_prim:
      add({in("s", N, Kind::mask_one), in("A", E, Kind::scalar), in("adj", E, Kind::mask),
           hint("pi_h", N, Kind::pointer), hint("key", N, Kind::scalar), hint("mark", N, Kind::mask),
           hint("in_queue", N, Kind::mask), hint("u", N, Kind::mask_one),
           out("pi", N, Kind::pointer)});
      break;
  }
  // Stable partition into input, hint, output blocks.
  std::vector<FeatureSpec> ordered;
  for (Stage st : {Stage::input, Stage::hint, Stage::output}) {
    for (const auto& f : s) {
      if (f.stage == st) ordered.push_back(f);
    }
  }
  return ordered;
}

}  // namespace

const std::array<AlgorithmId, kNumAlgorithms>& all_algorithms() { return kAll; }

std::string_view to_string(AlgorithmId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<AlgorithmId> parse_algorithm(std::string_view name) {
  for (std::size_t i = 0; i < kNumAlgorithms; ++i) {
    if (kNames[i] == name) return kAll[i];
  }
  return std::nullopt;
}

Family family_of(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::articulation_points:
    case AlgorithmId::bridges:
    case AlgorithmId::dfs:
    case AlgorithmId::scc:
    case AlgorithmId::topological_sort:
      return Family::dfs_based;
    case AlgorithmId::bellman_ford:
    case AlgorithmId::bfs:
    case AlgorithmId::dag_shortest_paths:
    case AlgorithmId::dijkstra:
    case AlgorithmId::floyd_warshall:
    case AlgorithmId::mst_kruskal:
    case AlgorithmId::mst_prim:
      return Family::graph_based;
    case AlgorithmId::insertion_sort:
    case AlgorithmId::bubble_sort:
    case AlgorithmId::quicksort:
    case AlgorithmId::heapsort:
      return Family::sorting;
    case AlgorithmId::binary_search:
    case AlgorithmId::minimum:
      return Family::searching;
  }
  throw std::invalid_argument("unknown algorithm");
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::dfs_based: return "dfs_based";
    case Family::graph_based: return "graph_based";
    case Family::sorting: return "sorting";
    case Family::searching: return "searching";
  }
  return "?";
}

GraphKind graph_kind(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::dfs:
    case AlgorithmId::scc:
      return GraphKind::directed;
    case AlgorithmId::topological_sort:
    case AlgorithmId::dag_shortest_paths:
      return GraphKind::dag;
    case AlgorithmId::articulation_points:
    case AlgorithmId::bridges:
    case AlgorithmId::bellman_ford:
    case AlgorithmId::bfs:
    case AlgorithmId::dijkstra:
    case AlgorithmId::floyd_warshall:
    case AlgorithmId::mst_kruskal:
    case AlgorithmId::mst_prim:
      return GraphKind::undirected;
    default:
      return GraphKind::none;
  }
}

bool is_weighted(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::bellman_ford:
    case AlgorithmId::dag_shortest_paths:
    case AlgorithmId::dijkstra:
    case AlgorithmId::floyd_warshall:
    case AlgorithmId::mst_kruskal:
    case AlgorithmId::mst_prim:
      return true;
    default:
      return false;
  }
}

bool has_source(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::bfs:
    case AlgorithmId::bellman_ford:
    case AlgorithmId::dag_shortest_paths:
    case AlgorithmId::dijkstra:
    case AlgorithmId::mst_prim:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::input: return "input";
    case Stage::hint: return "hint";
    case Stage::output: return "output";
  }
  return "?";
}

std::string_view to_string(Location l) {
  switch (l) {
    case Location::node: return "node";
    case Location::edge: return "edge";
    case Location::graph: return "graph";
  }
  return "?";
}

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::scalar: return "scalar";
    case Kind::mask: return "mask";
    case Kind::mask_one: return "mask_one";
    case Kind::categorical: return "categorical";
    case Kind::pointer: return "pointer";
  }
  return "?";
}

std::size_t value_count(Location loc, int n) {
  const auto nn = static_cast<std::size_t>(n);
  switch (loc) {
    case Location::node: return nn;
    case Location::edge: return nn * nn;
    case Location::graph: return 1;
  }
  return 0;
}

const std::vector<FeatureSpec>& schema(AlgorithmId id) {
  static const auto table = [] {
    std::array<std::vector<FeatureSpec>, kNumAlgorithms> t;
    for (std::size_t i = 0; i < kNumAlgorithms; ++i) t[i] = build(kAll[i]);
    return t;
  }();
  return table[static_cast<std::size_t>(id)];
}

std::vector<FeatureSpec> features(AlgorithmId id, Stage stage) {
  std::vector<FeatureSpec> r;
  for (const auto& f : schema(id)) {
    if (f.stage == stage) r.push_back(f);
  }
  return r;
}

const FeatureSpec& find_feature(AlgorithmId id, std::string_view name) {
  for (const auto& f : schema(id)) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown feature '" + std::string(name) + "' for " +
                              std::string(to_string(id)));
}

std::vector<FeatureSpec> hint_features(const Trajectory& t) {
  auto r = features(t.algorithm, Stage::hint);
  r.insert(r.end(), t.extra_hints.begin(), t.extra_hints.end());
  return r;
}

int max_steps(AlgorithmId id, int n) {
  switch (family_of(id)) {
    case Family::sorting:
      return n * n + n;
    case Family::searching:
      return n + 1;
    case Family::dfs_based:
      return id == AlgorithmId::scc ? 4 * n + 1 : 2 * n + 1;
    case Family::graph_based:
      if (id == AlgorithmId::dag_shortest_paths) return 3 * n + 1;
      if (id == AlgorithmId::mst_kruskal) return n * n + 1;
      return n + 1;
  }
  return n * n + n;
}

}  // namespace hintrelic::trace
