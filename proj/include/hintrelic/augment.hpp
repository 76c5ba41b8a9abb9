#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hintrelic/trace.hpp"

namespace hintrelic::aug {

using trace::AlgorithmId;
using trace::GraphInstance;
using trace::Trajectory;

enum class Exactness { exact, approximate };
std::string_view to_string(Exactness e);
Exactness exactness(AlgorithmId id);

struct AugmentedPair {
  std::shared_ptr<const Trajectory> base;
  GraphInstance aug_instance;
  // node_map[i] is the augmented id of base node i.
  std::vector<int> node_map;
  int sampled_step = 1;
  Exactness family = Exactness::approximate;
  // contrast_mask[t-1] covers step t of the base trajectory.
  std::vector<bool> contrast_mask;
};

// Uniform on {1..T}.
int sample_step(int T, std::uint64_t seed);

// Steps of the first DFS tree at which a node is entered for the first time.
std::vector<int> first_entry_steps(const Trajectory& t);
// Node entered at a given step of the walk.
int entered_node(const Trajectory& t, int step);

// Appends 1..(max_train_n + 1 - n) nodes per the algorithm family. For the
// DFS family t_tilde is redrawn over first-entry steps of the first tree; the
// graph, sorting and searching families contrast the whole trajectory, so
// their sampled step is recorded as T.
AugmentedPair augment(std::shared_ptr<const Trajectory> base, int t_tilde, std::uint64_t seed,
                      int max_train_n);

// Hints contrasted by the relic objective.
std::vector<std::string> hint_targets(AlgorithmId id);

// Samples an instance, runs it and augments it. DFS-family instances whose
// first search tree is a single node are resampled.
AugmentedPair generate_pair(AlgorithmId id, int n, std::uint64_t seed, int max_train_n);

// {"base_ref", "t_tilde", "family", "aug_inputs", "contrast_mask"} on one line.
std::string pair_to_jsonl(const AugmentedPair& p, const std::string& base_ref);

}  // namespace hintrelic::aug
