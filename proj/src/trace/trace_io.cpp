#include "hintrelic/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hintrelic::trace {
namespace {

bool integral_kind(Kind k) { return k != Kind::scalar; }

void append_value(std::string& out, double v, bool integral) {
  if (integral) {
    out += std::to_string(static_cast<long long>(v));
  } else {
    out += format_double(v);
  }
}

Values parse_feature(const FeatureSpec& spec, const nlohmann::json& j, int n) {
  Values v;
  v.reserve(value_count(spec.location, n));
  switch (spec.location) {
    case Location::graph:
      v.push_back(j.get<double>());
      break;
    case Location::node:
      for (const auto& x : j) v.push_back(x.get<double>());
      break;
    case Location::edge:
      for (const auto& row : j) {
        for (const auto& x : row) v.push_back(x.get<double>());
      }
      break;
  }
  if (v.size() != value_count(spec.location, n)) {
    throw std::invalid_argument("feature '" + spec.name + "' has the wrong shape");
  }
  return v;
}

FeatureMap& input_map(GraphInstance& g, Location loc) {
  switch (loc) {
    case Location::node: return g.node_inputs;
    case Location::edge: return g.edge_inputs;
    case Location::graph: break;
  }
  return g.graph_inputs;
}

const Values& input_of(const GraphInstance& g, const FeatureSpec& spec) {
  const FeatureMap& m = spec.location == Location::node   ? g.node_inputs
                        : spec.location == Location::edge ? g.edge_inputs
                                                          : g.graph_inputs;
  return m.at(spec.name);
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("cannot serialize a non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string json_feature(const FeatureSpec& spec, const Values& v, int n) {
  const bool integral = integral_kind(spec.kind);
  std::string out;
  switch (spec.location) {
    case Location::graph:
      append_value(out, v.at(0), integral);
      break;
    case Location::node:
      out += '[';
      for (int i = 0; i < n; ++i) {
        if (i) out += ',';
        append_value(out, v[i], integral);
      }
      out += ']';
      break;
    case Location::edge:
      out += '[';
      for (int i = 0; i < n; ++i) {
        if (i) out += ',';
        out += '[';
        for (int j = 0; j < n; ++j) {
          if (j) out += ',';
          append_value(out, v[static_cast<std::size_t>(i) * n + j], integral);
        }
        out += ']';
      }
      out += ']';
      break;
  }
  return out;
}

std::string to_jsonl(const Trajectory& t) {
  const int n = t.instance.n;
  std::string out = "{\"algorithm\":" + json_string(to_string(t.algorithm));
  out += ",\"n\":" + std::to_string(n);
  out += ",\"seed\":" + std::to_string(t.instance.seed);
  auto block = [&](Stage stage, auto&& lookup) {
    std::string s = "{";
    bool first = true;
    for (const auto& spec : schema(t.algorithm)) {
      if (spec.stage != stage) continue;
      if (!first) s += ',';
      first = false;
      s += json_string(spec.name) + ":" + json_feature(spec, lookup(spec), n);
    }
    return s + "}";
  };
  out += ",\"inputs\":" + block(Stage::input, [&](const FeatureSpec& f) -> const Values& {
    return input_of(t.instance, f);
  });
  out += ",\"hints\":[";
  for (std::size_t k = 0; k < t.frames.size(); ++k) {
    if (k) out += ',';
    const auto& frame = t.frames[k];
    out += block(Stage::hint, [&](const FeatureSpec& f) -> const Values& {
      return frame.hints.at(f.name);
    });
  }
  out += "],\"outputs\":" + block(Stage::output, [&](const FeatureSpec& f) -> const Values& {
    return t.outputs.at(f.name);
  });
  out += '}';
  return out;
}

Trajectory from_jsonl(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  const auto name = j.at("algorithm").get<std::string>();
  const auto id = parse_algorithm(name);
  if (!id) throw std::invalid_argument("unknown algorithm '" + name + "'");
  Trajectory t;
  t.algorithm = *id;
  t.instance.algorithm = *id;
  const int n = j.at("n").get<int>();
  t.instance.n = n;
  t.instance.seed = j.at("seed").get<std::uint64_t>();
  const auto& frames = j.at("hints");
  t.frames.resize(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) t.frames[k].step = static_cast<int>(k) + 1;
  for (const auto& spec : schema(*id)) {
    switch (spec.stage) {
      case Stage::input:
        input_map(t.instance, spec.location)[spec.name] =
            parse_feature(spec, j.at("inputs").at(spec.name), n);
        break;
      case Stage::hint:
        for (std::size_t k = 0; k < frames.size(); ++k) {
          t.frames[k].hints[spec.name] = parse_feature(spec, frames[k].at(spec.name), n);
        }
        break;
      case Stage::output:
        t.outputs[spec.name] = parse_feature(spec, j.at("outputs").at(spec.name), n);
        break;
    }
  }
  return t;
}

void write_jsonl(std::ostream& os, const std::vector<Trajectory>& ts) {
  for (const auto& t : ts) os << to_jsonl(t) << '\n';
}

std::vector<Trajectory> read_jsonl(std::istream& is) {
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(from_jsonl(line));
  }
  return out;
}

}  // namespace hintrelic::trace
