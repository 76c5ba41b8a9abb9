#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hintrelic/trace.hpp"

namespace hintrelic::trace::detail {

inline Values mask_one(int n, int index) {
  Values v(static_cast<std::size_t>(n), 0.0);
  v[static_cast<std::size_t>(index)] = 1.0;
  return v;
}

inline Values to_values(std::span<const int> ints) {
  return Values(ints.begin(), ints.end());
}

inline Values identity_pointers(int n) {
  Values v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

inline bool edge(const Values& adj, int n, int u, int v) { return adj[u * n + v] != 0.0; }

// Collects frames while an executor runs.
class Recorder {
 public:
  Recorder(AlgorithmId id, const GraphInstance& g) {
    traj_.algorithm = id;
    traj_.instance = g;
  }

  void push(FeatureMap hints) {
    SnapshotFrame f;
    f.step = static_cast<int>(traj_.frames.size()) + 1;
    f.hints = std::move(hints);
    traj_.frames.push_back(std::move(f));
  }

  int steps() const { return static_cast<int>(traj_.frames.size()); }

  Trajectory finish(FeatureMap outputs) {
    traj_.outputs = std::move(outputs);
    return std::move(traj_);
  }

 private:
  Trajectory traj_;
};

Trajectory run_insertion_sort(const GraphInstance& g);
Trajectory run_bubble_sort(const GraphInstance& g);
Trajectory run_quicksort(const GraphInstance& g);
Trajectory run_heapsort(const GraphInstance& g);
Trajectory run_minimum(const GraphInstance& g);
Trajectory run_binary_search(const GraphInstance& g);

Trajectory run_dfs(const GraphInstance& g);
Trajectory run_topological_sort(const GraphInstance& g);
Trajectory run_articulation_points(const GraphInstance& g);
Trajectory run_bridges(const GraphInstance& g);
Trajectory run_scc(const GraphInstance& g);

Trajectory run_bfs(const GraphInstance& g);
Trajectory run_bellman_ford(const GraphInstance& g);
Trajectory run_dag_shortest_paths(const GraphInstance& g);
Trajectory run_dijkstra(const GraphInstance& g);
Trajectory run_floyd_warshall(const GraphInstance& g);
Trajectory run_mst_kruskal(const GraphInstance& g);
Trajectory run_mst_prim(const GraphInstance& g);

}  // namespace hintrelic::trace::detail
