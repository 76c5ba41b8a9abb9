#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hintrelic/harness.hpp"

namespace hintrelic::config {

// Flat key=value text. Keys carry a section prefix (run.batch_size=16);
// '#' starts a comment; blank lines are ignored.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& is, const std::string& origin = "<config>");
  static ConfigFile load(const std::string& path);

  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

 private:
  std::map<std::string, std::string> entries_;
};

// Every key a config file may use.
const std::vector<std::string>& known_keys();

// Values from command-line flags take precedence over the config file,
// which takes precedence over built-in defaults.
class Layered {
 public:
  Layered(std::map<std::string, std::string> flags, ConfigFile file, std::optional<std::string> env_seed = {})
      : flags_(std::move(flags)), file_(std::move(file)), env_seed_(std::move(env_seed)) {}

  std::optional<std::string> raw(const std::string& key) const;
  // Where a key's value comes from: "flag", "config", "env" or "default".
  std::string source(const std::string& key) const;

  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

 private:
  std::map<std::string, std::string> flags_;
  ConfigFile file_;
  std::optional<std::string> env_seed_;
};

// Master seed: flag `seed`, then config `seed`, then HINTRELIC_SEED, then 0.
std::uint64_t master_seed(const Layered& l);

// "4..16" or "8" -> inclusive range.
std::pair<int, int> parse_range(const std::string& s);
std::vector<std::string> split_list(const std::string& s);

// RunConfig from layered settings over the desk defaults. The seed list is
// master_seed + 0..k-1 for run.seeds=k.
harness::RunConfig resolve_run_config(const Layered& l);

}  // namespace hintrelic::config
