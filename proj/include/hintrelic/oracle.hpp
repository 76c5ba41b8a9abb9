#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hintrelic/augment.hpp"

namespace hintrelic::oracle {

struct Divergence {
  // Output mismatches are reported at step T_base + 1.
  int step = 0;
  std::string hint;
  // Flat index into the base-restricted feature, -1 for whole-frame events.
  long index = -1;
};

struct ValidityReport {
  int equivalent_up_to = 0;
  bool full_match = false;
  std::optional<Divergence> first_divergence;
  std::string diagnostic;
};

// Runs the executor on the augmented instance and compares the contrasted
// hints frame by frame on base nodes. A pointer into appended nodes is
// followed along the augmented pointer chain until it lands back on a base
// node; a chain that never does counts as the source pointing at itself.
ValidityReport check_equivalence(const aug::AugmentedPair& pair);

// DFS family: frames up to the sampled step agree. Graph family and
// insertion sort: full match. Approximate families always pass.
bool certify_family(const aug::AugmentedPair& pair, const ValidityReport& report);

struct ValidationSummary {
  trace::AlgorithmId algorithm;
  int pairs_checked = 0;
  double pass_rate = 0.0;
  double mean_equivalent_up_to = 0.0;
  std::vector<std::string> failures;
};

// Generates `pairs` pairs with base n uniform on [min_n, max_n] and checks each.
ValidationSummary validate_algorithm(trace::AlgorithmId id, int pairs, std::uint64_t seed,
                                     int min_n = 2, int max_n = 8);

std::string csv_header();
std::string csv_row(const ValidationSummary& s);

}  // namespace hintrelic::oracle
