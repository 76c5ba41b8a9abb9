#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the executors; inputs are read straight from the instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hintrelic/trace.hpp"

namespace oracles {

using hintrelic::trace::GraphInstance;
using hintrelic::trace::Trajectory;
using hintrelic::trace::Values;

inline bool has_edge(const GraphInstance& g, int a, int b) {
  return g.input("adj")[static_cast<std::size_t>(a) * g.n + b] != 0.0;
}
inline double weight(const GraphInstance& g, int a, int b) {
  return g.input("A")[static_cast<std::size_t>(a) * g.n + b];
}

inline int source_of(const GraphInstance& g) {
  const auto& s = g.input("s");
  return static_cast<int>(std::find(s.begin(), s.end(), 1.0) - s.begin());
}

// Follows pred pointers from the head (the node pointing to itself) and
// returns the order, or nullopt when the pointers do not form one chain.
inline std::optional<std::vector<int>> chain_order(const Values& pred) {
  const int n = static_cast<int>(pred.size());
  std::vector<std::vector<int>> next(n);
  int head = -1;
  for (int i = 0; i < n; ++i) {
    const int p = static_cast<int>(pred[i]);
    if (p == i) {
      if (head >= 0) return std::nullopt;
      head = i;
    } else {
      next[p].push_back(i);
    }
  }
  if (head < 0) return std::nullopt;
  std::vector<int> order{head};
  while (static_cast<int>(order.size()) < n) {
    const auto& nx = next[order.back()];
    if (nx.size() != 1) return std::nullopt;
    order.push_back(nx[0]);
  }
  return order;
}

// Keys in the order implied by the pred output; must equal std::sort(keys).
inline bool sorted_by_pred(const GraphInstance& g, const Values& pred) {
  const auto order = chain_order(pred);
  if (!order) return false;
  std::vector<double> keys = g.input("key");
  std::vector<double> via;
  for (int i : *order) via.push_back(keys[i]);
  std::sort(keys.begin(), keys.end());
  return via == keys;
}

// Bellman-Ford by repeated relaxation from `s`; nullopt marks unreachable.
inline std::vector<std::optional<double>> distances(const GraphInstance& g, int s, bool weighted) {
  const int n = g.n;
  std::vector<std::optional<double>> d(n);
  d[s] = 0.0;
  for (int round = 0; round < n; ++round) {
    bool changed = false;
    for (int u = 0; u < n; ++u) {
      if (!d[u]) continue;
      for (int v = 0; v < n; ++v) {
        if (u == v || !has_edge(g, u, v)) continue;
        const double c = *d[u] + (weighted ? weight(g, u, v) : 1.0);
        if (!d[v] || c < *d[v]) {
          d[v] = c;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return d;
}

// Path length implied by parent pointers, summed outward from the source.
// nullopt when the chain loops or uses a missing edge.
inline std::optional<double> chain_distance(const GraphInstance& g, const std::vector<int>& parent, int s, int v,
                                            bool weighted) {
  std::vector<int> path{v};
  while (path.back() != s) {
    const int p = parent[path.back()];
    if (p == path.back() || static_cast<int>(path.size()) > g.n) return std::nullopt;
    if (!has_edge(g, p, path.back())) return std::nullopt;
    path.push_back(p);
  }
  double d = 0.0;
  for (std::size_t k = path.size() - 1; k > 0; --k) d = d + (weighted ? weight(g, path[k], path[k - 1]) : 1.0);
  return d;
}

inline bool reject(std::string* why, std::string msg) {
  if (why) *why = std::move(msg);
  return false;
}

// Parent pointers from a single source agree with reference distances:
// unreachable nodes point to themselves, reachable ones along a path of
// exactly the reference length.
inline bool shortest_path_tree_ok(const GraphInstance& g, const Values& pi, int s, bool weighted,
                                  std::string* why = nullptr) {
  const auto ref = distances(g, s, weighted);
  std::vector<int> parent(pi.begin(), pi.end());
  for (int v = 0; v < g.n; ++v) {
    if (v == s) {
      if (parent[v] != s) return reject(why, "source not self-parented");
      continue;
    }
    if (!ref[v]) {
      if (parent[v] != v) return reject(why, "unreachable node " + std::to_string(v) + " has a parent");
      continue;
    }
    const auto d = chain_distance(g, parent, s, v, weighted);
    if (!d || *d != *ref[v]) {
      if (why) *why = "node " + std::to_string(v) + " path length mismatch";
      return false;
    }
  }
  return true;
}

// All-pairs version for Pi[i][j] = predecessor of j on the i -> j path.
inline bool all_pairs_ok(const GraphInstance& g, const Values& Pi, std::string* why = nullptr) {
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    Values row(Pi.begin() + static_cast<long>(i) * n, Pi.begin() + static_cast<long>(i + 1) * n);
    const auto ref = distances(g, i, true);
    std::vector<int> parent(row.begin(), row.end());
    for (int j = 0; j < n; ++j) {
      if (j == i) {
        if (parent[j] != i) return reject(why, "diagonal");
        continue;
      }
      if (!ref[j]) {
        if (parent[j] != j) return reject(why, "unreachable pair has a parent");
        continue;
      }
      const auto d = chain_distance(g, parent, i, j, true);
      if (!d || *d != *ref[j]) {
        if (why) *why = "pair " + std::to_string(i) + "," + std::to_string(j) + " mismatch";
        return false;
      }
    }
  }
  return true;
}

// Recursive DFS over nodes 0..n-1, neighbours in increasing id.
struct DfsResult {
  std::vector<int> parent;
  std::vector<int> finish_order;
};
inline DfsResult dfs(const GraphInstance& g, bool transpose = false, std::vector<int> roots = {}) {
  const int n = g.n;
  if (roots.empty()) {
    roots.resize(n);
    std::iota(roots.begin(), roots.end(), 0);
  }
  DfsResult r;
  r.parent.resize(n);
  std::iota(r.parent.begin(), r.parent.end(), 0);
  std::vector<bool> seen(n, false);
  std::function<void(int)> visit = [&](int u) {
    seen[u] = true;
    for (int v = 0; v < n; ++v) {
      const bool e = transpose ? has_edge(g, v, u) : has_edge(g, u, v);
      if (e && !seen[v]) {
        r.parent[v] = u;
        visit(v);
      }
    }
    r.finish_order.push_back(u);
  };
  for (int s : roots)
    if (!seen[s]) visit(s);
  return r;
}

// Same-component relation from Kosaraju.
inline std::vector<int> scc_labels(const GraphInstance& g) {
  auto first = dfs(g);
  std::vector<int> roots(first.finish_order.rbegin(), first.finish_order.rend());
  const int n = g.n;
  std::vector<int> label(n, -1);
  std::vector<bool> seen(n, false);
  std::function<void(int, int)> visit = [&](int u, int root) {
    seen[u] = true;
    label[u] = root;
    for (int v = 0; v < n; ++v)
      if (has_edge(g, v, u) && !seen[v]) visit(v, root);
  };
  for (int r : roots)
    if (!seen[r]) visit(r, r);
  return label;
}

// Connected components of an undirected graph with one node or edge removed.
inline int components(const GraphInstance& g, int skip_node = -1, std::pair<int, int> skip_edge = {-1, -1}) {
  const int n = g.n;
  std::vector<bool> seen(n, false);
  int count = 0;
  for (int s = 0; s < n; ++s) {
    if (s == skip_node || seen[s]) continue;
    ++count;
    std::vector<int> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (v == skip_node || seen[v] || !has_edge(g, u, v)) continue;
        if ((u == skip_edge.first && v == skip_edge.second) || (u == skip_edge.second && v == skip_edge.first))
          continue;
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return count;
}

// Minimum spanning forest weight via Prim from every unvisited node.
inline double spanning_forest_weight(const GraphInstance& g) {
  const int n = g.n;
  std::vector<bool> in(n, false);
  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    if (in[s]) continue;
    in[s] = true;
    for (;;) {
      int bu = -1, bv = -1;
      for (int u = 0; u < n; ++u) {
        if (!in[u]) continue;
        for (int v = 0; v < n; ++v) {
          if (in[v] || !has_edge(g, u, v)) continue;
          if (bu < 0 || weight(g, u, v) < weight(g, bu, bv)) bu = u, bv = v;
        }
      }
      if (bu < 0) break;
      in[bv] = true;
      total += weight(g, bu, bv);
    }
  }
  return total;
}


// Weight of the minimum spanning tree of the component holding `s`.
inline double component_tree_weight(const GraphInstance& g, int s) {
  const int n = g.n;
  std::vector<bool> in(n, false);
  in[s] = true;
  double total = 0.0;
  for (;;) {
    int bu = -1, bv = -1;
    for (int u = 0; u < n; ++u) {
      if (!in[u]) continue;
      for (int v = 0; v < n; ++v) {
        if (in[v] || !has_edge(g, u, v)) continue;
        if (bu < 0 || weight(g, u, v) < weight(g, bu, bv)) bu = u, bv = v;
      }
    }
    if (bu < 0) break;
    in[bv] = true;
    total += weight(g, bu, bv);
  }
  return total;
}

inline bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// Checks a trajectory's outputs against the references above.
inline bool outputs_ok(const Trajectory& t, std::string* why = nullptr) {
  using hintrelic::trace::AlgorithmId;
  const GraphInstance& g = t.instance;
  const int n = g.n;
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  auto ints = [](const Values& v) { return std::vector<int>(v.begin(), v.end()); };
  switch (t.algorithm) {
    case AlgorithmId::insertion_sort:
    case AlgorithmId::bubble_sort:
    case AlgorithmId::quicksort:
    case AlgorithmId::heapsort:
      return sorted_by_pred(g, t.outputs.at("pred")) || fail("not sorted");
    case AlgorithmId::minimum: {
      const auto& key = g.input("key");
      const int best = static_cast<int>(std::min_element(key.begin(), key.end()) - key.begin());
      const auto& out = t.outputs.at("min");
      return (out[best] == 1.0 && std::accumulate(out.begin(), out.end(), 0.0) == 1.0) || fail("wrong minimum");
    }
    case AlgorithmId::binary_search: {
      const auto& key = g.input("key");
      const double target = g.input("target")[0];
      const int lb = static_cast<int>(std::lower_bound(key.begin(), key.end(), target) - key.begin());
      const int expect = std::min(lb, n - 1);
      return t.outputs.at("return")[expect] == 1.0 || fail("wrong lower bound");
    }
    case AlgorithmId::bfs:
      return shortest_path_tree_ok(g, t.outputs.at("pi"), source_of(g), false, why);
    case AlgorithmId::bellman_ford:
    case AlgorithmId::dijkstra:
    case AlgorithmId::dag_shortest_paths:
      return shortest_path_tree_ok(g, t.outputs.at("pi"), source_of(g), true, why);
    case AlgorithmId::floyd_warshall:
      return all_pairs_ok(g, t.outputs.at("Pi"), why);
    case AlgorithmId::mst_prim: {
      const int s = source_of(g);
      const auto pi = ints(t.outputs.at("pi"));
      double total = 0.0;
      for (int v = 0; v < n; ++v) {
        if (pi[v] == v) continue;
        if (!has_edge(g, pi[v], v)) return fail("tree edge missing from graph");
        total += weight(g, pi[v], v);
      }
      return near(total, component_tree_weight(g, s)) || fail("tree weight mismatch");
    }
    case AlgorithmId::mst_kruskal: {
      const auto& in = t.outputs.at("in_mst");
      double total = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          if (in[a * n + b] != in[b * n + a]) return fail("asymmetric in_mst");
          if (in[a * n + b] == 1.0) {
            if (!has_edge(g, a, b)) return fail("forest edge missing from graph");
            total += weight(g, a, b);
          }
        }
      return near(total, spanning_forest_weight(g)) || fail("forest weight mismatch");
    }
    case AlgorithmId::dfs:
      return ints(t.outputs.at("pi")) == dfs(g).parent || fail("dfs tree mismatch");
    case AlgorithmId::topological_sort: {
      auto f = dfs(g).finish_order;
      std::vector<int> expect(f.rbegin(), f.rend());
      const auto topo = ints(t.outputs.at("topo"));
      const auto& head = t.outputs.at("topo_head");
      if (head[expect[0]] != 1.0) return fail("wrong head");
      std::vector<int> got{expect[0]};
      while (static_cast<int>(got.size()) < n && topo[got.back()] != got.back()) got.push_back(topo[got.back()]);
      if (got != expect) return fail("topological order mismatch");
      std::vector<int> pos(n);
      for (int k = 0; k < n; ++k) pos[got[k]] = k;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b && has_edge(g, a, b) && pos[a] > pos[b]) return fail("edge against order");
      return true;
    }
    case AlgorithmId::scc: {
      const auto ref = scc_labels(g);
      const auto got = ints(t.outputs.at("scc_id"));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if ((ref[a] == ref[b]) != (got[a] == got[b])) return fail("component mismatch");
      return true;
    }
    case AlgorithmId::articulation_points: {
      const int base = components(g);
      const auto& out = t.outputs.at("is_cut");
      for (int v = 0; v < n; ++v) {
        const bool cut = components(g, v) > base;
        if (cut != (out[v] == 1.0)) return fail("cut vertex " + std::to_string(v));
      }
      return true;
    }
    case AlgorithmId::bridges: {
      const int base = components(g);
      const auto& out = t.outputs.at("is_bridge");
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const bool bridge = a != b && has_edge(g, a, b) && components(g, -1, {a, b}) > base;
          if (bridge != (out[a * n + b] == 1.0)) return fail("bridge " + std::to_string(a) + "," + std::to_string(b));
        }
      return true;
    }
  }
  return fail("unhandled algorithm");
}

}  // namespace oracles
