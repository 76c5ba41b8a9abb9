#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "hintrelic/rng.hpp"
#include "hintrelic/trace.hpp"

namespace hintrelic::trace {
namespace {

FeatureMap& map_for(GraphInstance& g, Location loc) {
  switch (loc) {
    case Location::node: return g.node_inputs;
    case Location::edge: return g.edge_inputs;
    case Location::graph: return g.graph_inputs;
  }
  throw std::logic_error("bad location");
}

const FeatureMap& map_for(const GraphInstance& g, Location loc) {
  return map_for(const_cast<GraphInstance&>(g), loc);
}

// Draws `count` distinct values uniform on [0,1) by rejection.
std::vector<double> distinct_uniform(Rng& rng, std::size_t count) {
  std::vector<double> out;
  std::set<double> seen;
  out.reserve(count);
  while (out.size() < count) {
    const double v = rng.uniform();
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

void fill_graph(GraphInstance& g, AlgorithmId id, Rng& rng) {
  const int n = g.n;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const double p = kEdgeProbabilities[static_cast<std::size_t>(
      rng.uniform_int(0, kEdgeProbabilities.size() - 1))];
  Values adj(nn, 0.0);
  const GraphKind kind = graph_kind(id);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (kind == GraphKind::undirected && j < i) continue;
      if (kind == GraphKind::dag && j < i) continue;
      if (rng.bernoulli(p)) {
        adj[i * n + j] = 1.0;
        if (kind == GraphKind::undirected) adj[j * n + i] = 1.0;
      }
    }
  }
  if (is_weighted(id)) {
    Values w(nn, 0.0);
    std::size_t edges = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (adj[i * n + j] != 0.0 && (kind != GraphKind::undirected || i < j)) ++edges;
      }
    }
    const auto weights = distinct_uniform(rng, edges);
    std::size_t next = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (adj[i * n + j] == 0.0 || (kind == GraphKind::undirected && i > j)) continue;
        w[i * n + j] = weights[next++];
        if (kind == GraphKind::undirected) w[j * n + i] = w[i * n + j];
      }
    }
    g.edge_inputs["A"] = std::move(w);
  }
  g.edge_inputs["adj"] = std::move(adj);
  if (has_source(id)) {
    Values s(static_cast<std::size_t>(n), 0.0);
    s[static_cast<std::size_t>(rng.uniform_int(0, n - 1))] = 1.0;
    g.node_inputs["s"] = std::move(s);
  }
}

}  // namespace

const Values& GraphInstance::input(std::string_view name) const {
  for (const FeatureMap* m : {&node_inputs, &edge_inputs, &graph_inputs}) {
    if (auto it = m->find(name); it != m->end()) return it->second;
  }
  throw std::invalid_argument("instance has no input '" + std::string(name) + "'");
}

Values& GraphInstance::input(std::string_view name) {
  return const_cast<Values&>(std::as_const(*this).input(name));
}

GraphInstance sample_instance(AlgorithmId id, int n, std::uint64_t seed) {
  const bool graph = family_of(id) == Family::dfs_based || family_of(id) == Family::graph_based;
  if (n < 1 || (graph && n < 2)) {
    throw std::invalid_argument("sample_instance: invalid node count " + std::to_string(n) +
                                " for " + std::string(to_string(id)));
  }
  Rng rng(derive_seed(seed, "trace/sample"));
  GraphInstance g;
  g.algorithm = id;
  g.n = n;
  g.seed = seed;
  Values pos(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pos[i] = static_cast<double>(i) / n;
  g.node_inputs["pos"] = std::move(pos);

  switch (family_of(id)) {
    case Family::sorting:
    case Family::searching: {
      auto keys = distinct_uniform(rng, static_cast<std::size_t>(n));
      if (id == AlgorithmId::binary_search) {
        std::sort(keys.begin(), keys.end());
        double target = rng.uniform();
        while (std::find(keys.begin(), keys.end(), target) != keys.end()) target = rng.uniform();
        g.graph_inputs["target"] = {target};
      }
      g.node_inputs["key"] = std::move(keys);
      break;
    }
    case Family::dfs_based:
    case Family::graph_based:
      fill_graph(g, id, rng);
      break;
  }
  return g;
}

void validate_instance(const GraphInstance& g) {
  const auto fail = [&](const std::string& what) {
    throw std::invalid_argument(std::string(to_string(g.algorithm)) + " instance: " + what);
  };
  if (g.n < 1) fail("node count must be >= 1");
  std::size_t expected_inputs = 0;
  for (const auto& spec : schema(g.algorithm)) {
    if (spec.stage != Stage::input) continue;
    ++expected_inputs;
    const FeatureMap& m = map_for(g, spec.location);
    auto it = m.find(spec.name);
    if (it == m.end()) fail("missing input '" + spec.name + "'");
    const Values& v = it->second;
    if (v.size() != value_count(spec.location, g.n)) {
      fail("input '" + spec.name + "' has " + std::to_string(v.size()) + " values, expected " +
           std::to_string(value_count(spec.location, g.n)));
    }
    for (double x : v) {
      if (!std::isfinite(x)) fail("input '" + spec.name + "' contains a non-finite value");
    }
    if (spec.kind == Kind::mask || spec.kind == Kind::mask_one) {
      double ones = 0;
      for (double x : v) {
        if (x != 0.0 && x != 1.0) fail("mask '" + spec.name + "' is not 0/1");
        ones += x;
      }
      if (spec.kind == Kind::mask_one && ones != 1.0) fail("'" + spec.name + "' is not one-hot");
    }
  }
  const std::size_t present = g.node_inputs.size() + g.edge_inputs.size() + g.graph_inputs.size();
  if (present != expected_inputs) fail("unexpected extra inputs");

  const Values& pos = g.input("pos");
  for (int i = 0; i < g.n; ++i) {
    if (pos[i] < 0.0 || pos[i] >= 1.0) fail("pos outside [0,1)");
    if (i > 0 && !(pos[i] > pos[i - 1])) fail("pos not strictly increasing");
  }
  const GraphKind kind = graph_kind(g.algorithm);
  if (kind != GraphKind::none) {
    const Values& adj = g.input("adj");
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
      if (adj[i * n + i] != 0.0) fail("self loop in adjacency");
      for (int j = 0; j < n; ++j) {
        if (kind == GraphKind::undirected && adj[i * n + j] != adj[j * n + i]) {
          fail("undirected adjacency is not symmetric");
        }
      }
    }
    // Sampled DAGs are oriented low -> high id, but augmentations add
    // high -> low edges into the base, so only acyclicity is required.
    if (kind == GraphKind::dag) {
      std::vector<int> indeg(n, 0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (adj[i * n + j] != 0.0) ++indeg[j];
      std::vector<int> queue;
      for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
      std::size_t seen = 0;
      while (seen < queue.size()) {
        const int u = queue[seen++];
        for (int v = 0; v < n; ++v) {
          if (adj[u * n + v] != 0.0 && --indeg[v] == 0) queue.push_back(v);
        }
      }
      if (static_cast<int>(queue.size()) != n) fail("graph must be acyclic");
    }
    if (is_weighted(g.algorithm)) {
      const Values& w = g.input("A");
      for (int i = 0; i < n * n; ++i) {
        if (adj[i] == 0.0 && w[i] != 0.0) fail("weight on a missing edge");
        if (w[i] < 0.0) fail("negative edge weight");
        if (kind == GraphKind::undirected && w[i] != w[(i % n) * n + i / n]) {
          fail("undirected weights are not symmetric");
        }
      }
    }
  }
}

}  // namespace hintrelic::trace
