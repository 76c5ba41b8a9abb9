#include "hintrelic/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>

#include <fmt/format.h>

namespace hintrelic::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw std::invalid_argument(fmt::format("{}: bad number '{}'", key, v));
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& is, const std::string& origin) {
  ConfigFile c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(fmt::format("{}:{}: expected key=value", origin, lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known = false;
    for (const auto& k : known_keys()) known = known || k == key;
    if (!known) throw std::invalid_argument(fmt::format("{}:{}: unknown key '{}'", origin, lineno, key));
    c.entries_[key] = value;
  }
  return c;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  return parse(is, path);
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "seed",          "run.algorithm",    "run.mode",       "run.batch_size", "run.train_steps",
      "run.train_sizes", "run.eval_size",  "run.val_count",  "run.test_count", "run.seeds",
      "run.log_every", "run.eval_every",   "optim.lr",       "optim.clip",     "model.hidden_dim",
      "model.triplet_dim", "relic.alpha",  "relic.tau",      "relic.include_positive",
      "data.sizes",    "data.count",       "data.test_size", "validate.pairs", "ablate.modes",
  };
  return keys;
}

std::optional<std::string> Layered::raw(const std::string& key) const {
  if (auto it = flags_.find(key); it != flags_.end()) return it->second;
  if (auto v = file_.get(key)) return v;
  if (key == "seed" && env_seed_) return env_seed_;
  return std::nullopt;
}

std::string Layered::source(const std::string& key) const {
  if (flags_.count(key)) return "flag";
  if (file_.get(key)) return "config";
  if (key == "seed" && env_seed_) return "env";
  return "default";
}

int Layered::get_int(const std::string& key, int fallback) const {
  const auto v = raw(key);
  return v ? parse_number<int>(key, *v) : fallback;
}

double Layered::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("{}: bad number '{}'", key, *v));
  }
}

bool Layered::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw std::invalid_argument(fmt::format("{}: expected true or false, got '{}'", key, *v));
}

std::uint64_t Layered::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

std::string Layered::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

std::uint64_t master_seed(const Layered& l) { return l.get_u64("seed", 0); }

std::pair<int, int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  auto num = [&](const std::string& part) {
    return parse_number<int>("range", trim(part));
  };
  std::pair<int, int> r = dots == std::string::npos ? std::pair{num(s), num(s)}
                                                    : std::pair{num(s.substr(0, dots)), num(s.substr(dots + 2))};
  if (r.first > r.second || r.first < 1) throw std::invalid_argument("bad range '" + s + "'");
  return r;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string part = trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!part.empty()) out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

harness::RunConfig resolve_run_config(const Layered& l) {
  harness::RunConfig c = harness::RunConfig::desk();
  const std::string alg = l.get_string("run.algorithm", std::string(trace::to_string(c.algorithm)));
  const auto id = trace::parse_algorithm(alg);
  if (!id) throw std::invalid_argument("unknown algorithm '" + alg + "'");
  c.algorithm = *id;
  const std::string mode = l.get_string("run.mode", std::string(harness::to_string(c.mode)));
  const auto m = harness::parse_mode(mode);
  if (!m) throw std::invalid_argument("unknown mode '" + mode + "'");
  c.mode = *m;
  c.batch_size = l.get_int("run.batch_size", c.batch_size);
  c.train_steps = l.get_int("run.train_steps", c.train_steps);
  if (auto sizes = l.raw("run.train_sizes")) {
    const auto [lo, hi] = parse_range(*sizes);
    c.train_min_n = lo;
    c.train_max_n = hi;
  }
  c.eval_size = l.get_int("run.eval_size", c.eval_size);
  c.val_count = l.get_int("run.val_count", c.val_count);
  c.test_count = l.get_int("run.test_count", c.test_count);
  c.log_every = l.get_int("run.log_every", c.log_every);
  c.eval_every = l.get_int("run.eval_every", c.eval_every);
  c.lr = l.get_double("optim.lr", c.lr);
  c.clip = l.get_double("optim.clip", c.clip);
  c.hidden_dim = l.get_int("model.hidden_dim", c.hidden_dim);
  c.triplet_dim = l.get_int("model.triplet_dim", c.triplet_dim);
  c.alpha = l.get_double("relic.alpha", c.alpha);
  c.tau = l.get_double("relic.tau", c.tau);
  c.include_positive = l.get_bool("relic.include_positive", c.include_positive);
  const int k = l.get_int("run.seeds", 1);
  if (k < 1) throw std::invalid_argument("run.seeds must be >= 1");
  const std::uint64_t base = master_seed(l);
  c.seeds.clear();
  for (int i = 0; i < k; ++i) c.seeds.push_back(base + static_cast<std::uint64_t>(i));
  c.validate();
  return c;
}

}  // namespace hintrelic::config
