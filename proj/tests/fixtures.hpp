#pragma once

// Builders shared by the unit tests and the acceptance binary.

#include <cmath>
#include <memory>
#include <vector>

#include "hintrelic/augment.hpp"
#include "hintrelic/model.hpp"
#include "hintrelic/trace.hpp"

namespace fixtures {

using namespace hintrelic;

// Sorting instance with the given keys, positions i/n.
inline trace::GraphInstance keyed(trace::AlgorithmId id, const std::vector<double>& keys) {
  trace::GraphInstance g;
  g.algorithm = id;
  g.n = static_cast<int>(keys.size());
  trace::Values pos;
  for (int i = 0; i < g.n; ++i) pos.push_back(static_cast<double>(i) / g.n);
  g.node_inputs["pos"] = pos;
  g.node_inputs["key"] = keys;
  return g;
}

// Bubble sort pair with explicit keys and map; every step contrasted.
inline aug::AugmentedPair hand_pair(const std::vector<double>& base_keys, const std::vector<double>& aug_keys,
                                    std::vector<int> node_map) {
  const auto id = trace::AlgorithmId::bubble_sort;
  aug::AugmentedPair p;
  p.base = std::make_shared<const trace::Trajectory>(trace::execute(keyed(id, base_keys)));
  p.aug_instance = keyed(id, aug_keys);
  p.node_map = std::move(node_map);
  p.sampled_step = p.base->steps();
  p.family = aug::exactness(id);
  p.contrast_mask.assign(static_cast<std::size_t>(p.base->steps()), true);
  return p;
}

// Relabels node i as p[i] in every input.
inline trace::GraphInstance permute_instance(const trace::GraphInstance& g, const std::vector<int>& p) {
  auto h = g;
  const int n = g.n;
  for (auto& [k, v] : h.node_inputs) {
    const auto& o = g.node_inputs.at(k);
    for (int i = 0; i < n; ++i) v[p[i]] = o[i];
  }
  for (auto& [k, v] : h.edge_inputs) {
    const auto& o = g.edge_inputs.at(k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v[p[i] * n + p[j]] = o[i * n + j];
  }
  return h;
}

// Number of leading node axes of an output's logits.
inline int node_axes(const trace::FeatureSpec& spec) {
  const int base = spec.location == trace::Location::node ? 1 : spec.location == trace::Location::edge ? 2 : 0;
  return base + (spec.kind == trace::Kind::pointer ? 1 : 0);
}

// max |a[c] - b[p(c)]| with p applied to every node axis.
inline double conjugation_error(const trace::FeatureSpec& spec, const ad::Tensor& a, const ad::Tensor& b,
                                const std::vector<int>& p, int n) {
  const int axes = node_axes(spec);
  std::size_t cells = 1;
  for (int k = 0; k < axes; ++k) cells *= static_cast<std::size_t>(n);
  const std::size_t inner = a.size() / cells;
  double err = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rest = c, mapped = 0, stride = cells;
    for (int k = 0; k < axes; ++k) {
      stride /= static_cast<std::size_t>(n);
      const std::size_t idx = rest / stride;
      rest %= stride;
      mapped += static_cast<std::size_t>(p[idx]) * stride;
    }
    for (std::size_t r = 0; r < inner; ++r)
      err = std::max(err, std::abs(a.at(c * inner + r) - b.at(mapped * inner + r)));
  }
  return err;
}

}  // namespace fixtures
