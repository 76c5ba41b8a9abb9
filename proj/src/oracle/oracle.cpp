#include "hintrelic/oracle.hpp"

#include <cstdio>
#include <stdexcept>

#include "hintrelic/rng.hpp"

namespace hintrelic::oracle {

using trace::FeatureSpec;
using trace::Kind;
using trace::Location;
using trace::Values;

namespace {

struct Mapping {
  const std::vector<int>& fwd;  // base -> aug
  std::vector<int> inv;         // aug -> base or -1
  int n_base;
  int n_aug;
};

// Base index a pointer of base node `src` refers to, following the augmented
// chain out of appended territory.
double pull_pointer(const Mapping& m, const Values& p_aug, int src) {
  int cur = static_cast<int>(p_aug[m.fwd[src]]);
  std::vector<bool> seen(static_cast<std::size_t>(m.n_aug), false);
  while (m.inv[cur] < 0) {
    if (seen[cur]) return src;
    seen[cur] = true;
    cur = static_cast<int>(p_aug[cur]);
  }
  return m.inv[cur];
}

// Restricts an augmented feature to base indices, in base layout.
Values restrict(const Mapping& m, const FeatureSpec& spec, const Values& v) {
  const int nb = m.n_base;
  Values out;
  switch (spec.location) {
    case Location::graph:
      return v;
    case Location::node:
      out.resize(static_cast<std::size_t>(nb));
      for (int i = 0; i < nb; ++i) {
        out[i] = spec.kind == Kind::pointer ? pull_pointer(m, v, i) : v[m.fwd[i]];
      }
      return out;
    case Location::edge:
      out.resize(static_cast<std::size_t>(nb) * nb);
      for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nb; ++j) {
          const double x = v[static_cast<std::size_t>(m.fwd[i]) * m.n_aug + m.fwd[j]];
          out[i * nb + j] = spec.kind == Kind::pointer ? m.inv[static_cast<int>(x)] : x;
        }
      }
      return out;
  }
  return out;
}

std::optional<long> first_mismatch(const Values& a, const Values& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return static_cast<long>(k);
  }
  return std::nullopt;
}

}  // namespace

ValidityReport check_equivalence(const aug::AugmentedPair& pair) {
  ValidityReport rep;
  const trace::Trajectory& base = *pair.base;
  trace::Trajectory other;
  try {
    other = trace::execute(pair.aug_instance);
  } catch (const std::exception& e) {
    rep.diagnostic = e.what();
    rep.first_divergence = Divergence{1, "(executor failed)", -1};
    return rep;
  }
  Mapping m{pair.node_map, std::vector<int>(static_cast<std::size_t>(other.instance.n), -1),
            base.instance.n, other.instance.n};
  for (int i = 0; i < m.n_base; ++i) m.inv[m.fwd[i]] = i;

  std::vector<FeatureSpec> contrasted;
  for (const auto& name : aug::hint_targets(base.algorithm)) {
    contrasted.push_back(trace::find_feature(base.algorithm, name));
  }
  const int T = base.steps();
  const int common = std::min(T, other.steps());
  for (int s = 1; s <= common && !rep.first_divergence; ++s) {
    for (const auto& spec : contrasted) {
      const Values got = restrict(m, spec, other.frames[s - 1].hints.at(spec.name));
      if (auto k = first_mismatch(base.frames[s - 1].hints.at(spec.name), got)) {
        rep.first_divergence = Divergence{s, spec.name, *k};
        break;
      }
    }
    if (!rep.first_divergence) rep.equivalent_up_to = s;
  }
  if (rep.first_divergence) return rep;
  if (other.steps() < T) {
    rep.first_divergence = Divergence{other.steps() + 1, "(trajectory ended)", -1};
    return rep;
  }
  for (const auto& spec : trace::features(base.algorithm, trace::Stage::output)) {
    const Values got = restrict(m, spec, other.outputs.at(spec.name));
    if (auto k = first_mismatch(base.outputs.at(spec.name), got)) {
      rep.first_divergence = Divergence{T + 1, spec.name, *k};
      return rep;
    }
  }
  rep.full_match = true;
  return rep;
}

bool certify_family(const aug::AugmentedPair& pair, const ValidityReport& report) {
  if (pair.family == aug::Exactness::approximate) return true;
  if (trace::family_of(pair.base->algorithm) == trace::Family::dfs_based) {
    return report.equivalent_up_to >= pair.sampled_step;
  }
  return report.full_match;
}

ValidationSummary validate_algorithm(trace::AlgorithmId id, int pairs, std::uint64_t seed,
                                     int min_n, int max_n) {
  ValidationSummary s;
  s.algorithm = id;
  Rng sizes(derive_seed(seed, "oracle/sizes"));
  int passed = 0;
  double sum_eq = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const int n = static_cast<int>(sizes.uniform_int(min_n, max_n));
    const auto pair = aug::generate_pair(id, n, derive_seed(seed, "oracle/pair", k), max_n);
    const auto rep = check_equivalence(pair);
    sum_eq += rep.equivalent_up_to;
    if (certify_family(pair, rep)) {
      ++passed;
    } else {
      std::string why = "pair " + std::to_string(k) + ": t~=" + std::to_string(pair.sampled_step);
      if (rep.first_divergence) {
        why += " diverged at step " + std::to_string(rep.first_divergence->step) + " on " +
               rep.first_divergence->hint + "[" + std::to_string(rep.first_divergence->index) + "]";
      }
      if (!rep.diagnostic.empty()) why += " (" + rep.diagnostic + ")";
      s.failures.push_back(why);
    }
  }
  s.pairs_checked = pairs;
  s.pass_rate = pairs > 0 ? static_cast<double>(passed) / pairs : 0.0;
  s.mean_equivalent_up_to = pairs > 0 ? sum_eq / pairs : 0.0;
  return s;
}

std::string csv_header() { return "algorithm,pairs_checked,pass_rate,mean_equivalent_up_to"; }

std::string csv_row(const ValidationSummary& s) {
  char buf[128];
  std::snprintf(buf, sizeof buf, ",%d,%.6f,%.6f", s.pairs_checked, s.pass_rate,
                s.mean_equivalent_up_to);
  return std::string(trace::to_string(s.algorithm)) + buf;
}

}  // namespace hintrelic::oracle
