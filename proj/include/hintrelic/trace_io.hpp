#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hintrelic/trace.hpp"

namespace hintrelic::trace {

// %.17g, which round-trips every finite double.
std::string format_double(double v);

// One trajectory per line:
//   {"algorithm", "n", "seed", "inputs", "hints": [frame...], "outputs"}
// Keys follow schema order. Edge features are nested row arrays, graph
// features bare numbers; masks, pointers and classes are written as integers.
// Reversal hints are not serialized.
std::string to_jsonl(const Trajectory& t);
Trajectory from_jsonl(std::string_view line);

void write_jsonl(std::ostream& os, const std::vector<Trajectory>& ts);
std::vector<Trajectory> read_jsonl(std::istream& is);

// Shared by the pair and dataset writers.
std::string json_feature(const FeatureSpec& spec, const Values& v, int n);
std::string json_string(std::string_view s);

}  // namespace hintrelic::trace
