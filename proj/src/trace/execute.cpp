#include <stdexcept>
#include <string>

#include "exec_common.hpp"

namespace hintrelic::trace {

Values order_to_pred(std::span<const int> order) {
  Values pred(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    pred[static_cast<std::size_t>(order[k])] = k == 0 ? order[0] : order[k - 1];
  }
  return pred;
}

std::vector<int> pred_to_order(std::span<const double> pred) {
  const int n = static_cast<int>(pred.size());
  std::vector<int> next(static_cast<std::size_t>(n), -1);
  int head = -1;
  for (int i = 0; i < n; ++i) {
    const int p = static_cast<int>(pred[i]);
    if (p == i) {
      if (head >= 0) throw std::invalid_argument("pred chain has two heads");
      head = i;
    } else {
      if (p < 0 || p >= n || next[p] >= 0) throw std::invalid_argument("pred is not a chain");
      next[p] = i;
    }
  }
  if (head < 0) throw std::invalid_argument("pred chain has no head");
  std::vector<int> order;
  for (int cur = head; cur >= 0 && static_cast<int>(order.size()) < n; cur = next[cur]) {
    order.push_back(cur);
  }
  if (static_cast<int>(order.size()) != n) throw std::invalid_argument("pred chain is broken");
  return order;
}

namespace {

Trajectory dispatch(AlgorithmId id, const GraphInstance& g) {
  using namespace detail;
  switch (id) {
    case AlgorithmId::insertion_sort: return run_insertion_sort(g);
    case AlgorithmId::bubble_sort: return run_bubble_sort(g);
    case AlgorithmId::quicksort: return run_quicksort(g);
    case AlgorithmId::heapsort: return run_heapsort(g);
    case AlgorithmId::minimum: return run_minimum(g);
    case AlgorithmId::binary_search: return run_binary_search(g);
    case AlgorithmId::dfs: return run_dfs(g);
    case AlgorithmId::topological_sort: return run_topological_sort(g);
    case AlgorithmId::articulation_points: return run_articulation_points(g);
    case AlgorithmId::bridges: return run_bridges(g);
    case AlgorithmId::scc: return run_scc(g);
    case AlgorithmId::bfs: return run_bfs(g);
    case AlgorithmId::bellman_ford: return run_bellman_ford(g);
    case AlgorithmId::dag_shortest_paths: return run_dag_shortest_paths(g);
    case AlgorithmId::dijkstra: return run_dijkstra(g);
    case AlgorithmId::floyd_warshall: return run_floyd_warshall(g);
    case AlgorithmId::mst_kruskal: return run_mst_kruskal(g);
    case AlgorithmId::mst_prim: return run_mst_prim(g);
  }
  throw std::invalid_argument("no executor for algorithm");
}

// Executor self-check: every frame carries exactly the hint schema with the
// right shapes and in-range pointers, and the step count is within bounds.
void check_trajectory(const Trajectory& t) {
  const int n = t.instance.n;
  const auto fail = [&](const std::string& what) {
    throw std::logic_error(std::string(to_string(t.algorithm)) + " executor: " + what);
  };
  if (t.steps() < 1) fail("no frames");
  if (t.steps() > max_steps(t.algorithm, n)) fail("too many frames");
  const auto hints = features(t.algorithm, Stage::hint);
  for (const auto& f : t.frames) {
    if (f.hints.size() != hints.size()) fail("frame hint set differs from schema");
    for (const auto& spec : hints) {
      auto it = f.hints.find(spec.name);
      if (it == f.hints.end()) fail("frame misses hint " + spec.name);
      if (it->second.size() != value_count(spec.location, n)) fail("bad shape for " + spec.name);
      if (spec.kind == Kind::pointer) {
        for (double p : it->second) {
          if (p < 0 || p >= n) fail("pointer out of range in " + spec.name);
        }
      }
    }
  }
  for (const auto& spec : features(t.algorithm, Stage::output)) {
    auto it = t.outputs.find(spec.name);
    if (it == t.outputs.end() || it->second.size() != value_count(spec.location, n)) {
      fail("bad output " + spec.name);
    }
  }
}

}  // namespace

Trajectory execute(AlgorithmId id, const GraphInstance& instance) {
  if (instance.algorithm != id) {
    throw std::invalid_argument("instance was sampled for " +
                                std::string(to_string(instance.algorithm)) + ", not " +
                                std::string(to_string(id)));
  }
  validate_instance(instance);
  Trajectory t = dispatch(id, instance);
  check_trajectory(t);
  return t;
}

Reversed reverse_pointers(const Trajectory& t) {
  Reversed r{t, false};
  const int n = t.instance.n;
  std::vector<std::string> names;
  for (const auto& spec : features(t.algorithm, Stage::hint)) {
    if (spec.kind == Kind::pointer && spec.location == Location::node) names.push_back(spec.name);
  }
  if (names.empty()) {
    r.no_pointer_hints = true;
    return r;
  }
  for (const auto& name : names) {
    const std::string rev = "rev_" + name;
    r.trajectory.extra_hints.push_back({rev, Stage::hint, Location::edge, Kind::mask, 0});
    for (auto& frame : r.trajectory.frames) {
      const Values& p = frame.hints.at(name);
      Values m(static_cast<std::size_t>(n) * n, 0.0);
      for (int a = 0; a < n; ++a) m[static_cast<std::size_t>(p[a]) * n + a] = 1.0;
      frame.hints[rev] = std::move(m);
    }
  }
  return r;
}

}  // namespace hintrelic::trace
