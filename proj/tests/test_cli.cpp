#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "hintrelic/config.hpp"
#include "hintrelic/harness.hpp"
#include "hintrelic/trace_io.hpp"

using namespace hintrelic;
using namespace hintrelic::config;

namespace fs = std::filesystem;

namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream is(text);
  return ConfigFile::parse(is);
}

int run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" HINTRELIC_CLI "' " + args + " >cli.out 2>cli.err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hintrelic_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(ConfigFileTest, ParsesKeyValueLines) {
  const auto c = parse("# comment\n\nrun.batch_size = 8  # trailing\nrelic.tau=0.2\r\nseed=4\n");
  EXPECT_EQ(c.get("run.batch_size"), "8");
  EXPECT_EQ(c.get("relic.tau"), "0.2");
  EXPECT_EQ(c.get("seed"), "4");
  EXPECT_FALSE(c.get("run.mode"));
}

TEST(ConfigFileTest, RejectsMalformedInput) {
  EXPECT_THROW(parse("run.batch_size 8\n"), std::invalid_argument);
  EXPECT_THROW(parse("run.no_such_key=1\n"), std::invalid_argument);
  EXPECT_THROW(ConfigFile::load("/nonexistent/path.cfg"), std::runtime_error);
}

// Every combination of flag / config / default for a few typed keys.
TEST(Precedence, Matrix) {
  struct Key {
    std::string key, flag, file;
    std::function<std::string(const harness::RunConfig&)> read;
    std::string fallback;
  };
  const auto desk = harness::RunConfig::desk();
  const std::vector<Key> keys{
      {"run.batch_size", "7", "9", [](const auto& c) { return std::to_string(c.batch_size); },
       std::to_string(desk.batch_size)},
      {"optim.lr", "0.5", "0.25", [](const auto& c) { return fmt::format("{}", c.lr); }, fmt::format("{}", desk.lr)},
      {"run.mode", "baseline", "no_hints", [](const auto& c) { return std::string(harness::to_string(c.mode)); },
       std::string(harness::to_string(desk.mode))},
      {"relic.include_positive", "true", "false",
       [](const auto& c) { return std::string(c.include_positive ? "true" : "false"); }, "false"},
      {"run.train_sizes", "3..6", "5..7", [](const auto& c) { return fmt::format("{}..{}", c.train_min_n, c.train_max_n); },
       fmt::format("{}..{}", desk.train_min_n, desk.train_max_n)},
  };
  for (const auto& k : keys) {
    for (int mask = 0; mask < 4; ++mask) {
      const bool has_flag = mask & 1, has_file = mask & 2;
      std::map<std::string, std::string> flags;
      ConfigFile file;
      if (has_flag) flags[k.key] = k.flag;
      if (has_file) file.set(k.key, k.file);
      const Layered l(flags, file);
      const auto cfg = resolve_run_config(l);
      const std::string expect = has_flag ? k.flag : has_file ? k.file : k.fallback;
      EXPECT_EQ(k.read(cfg), expect) << k.key << " mask " << mask;
      EXPECT_EQ(l.source(k.key), has_flag ? "flag" : has_file ? "config" : "default");
    }
  }
}

TEST(Precedence, SeedFallsBackToEnvironment) {
  ConfigFile file;
  EXPECT_EQ(master_seed(Layered({}, file)), 0u);
  EXPECT_EQ(master_seed(Layered({}, file, "17")), 17u);
  file.set("seed", "5");
  EXPECT_EQ(master_seed(Layered({}, file, "17")), 5u);
  EXPECT_EQ(master_seed(Layered({{"seed", "3"}}, file, "17")), 3u);
  EXPECT_EQ(Layered({}, ConfigFile{}, "17").source("seed"), "env");
  // Seed list derives from the master seed.
  const auto cfg = resolve_run_config(Layered({{"run.seeds", "3"}}, ConfigFile{}, "10"));
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
}

TEST(Precedence, BadValuesRejected) {
  EXPECT_THROW(resolve_run_config(Layered({{"run.batch_size", "x"}}, ConfigFile{})), std::invalid_argument);
  EXPECT_THROW(resolve_run_config(Layered({{"run.mode", "nope"}}, ConfigFile{})), std::invalid_argument);
  EXPECT_THROW(resolve_run_config(Layered({{"run.algorithm", "nope"}}, ConfigFile{})), std::invalid_argument);
  EXPECT_THROW(resolve_run_config(Layered({{"relic.include_positive", "maybe"}}, ConfigFile{})),
               std::invalid_argument);
  EXPECT_THROW(resolve_run_config(Layered({{"run.eval_size", "8"}}, ConfigFile{})), std::invalid_argument);
}

TEST(Ranges, Parse) {
  EXPECT_EQ(parse_range("4..16"), std::make_pair(4, 16));
  EXPECT_EQ(parse_range("8"), std::make_pair(8, 8));
  EXPECT_THROW(parse_range("9..3"), std::invalid_argument);
  EXPECT_THROW(parse_range("a..b"), std::invalid_argument);
  EXPECT_THROW(parse_range("0..3"), std::invalid_argument);
  EXPECT_EQ(split_list("a, b,,c"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(run_cli("", dir), 2);
  EXPECT_EQ(run_cli("frobnicate", dir), 2);
  EXPECT_EQ(run_cli("gen --no-such-flag 1", dir), 2);
  EXPECT_EQ(run_cli("gen --algorithm not_an_algorithm", dir), 2);
  EXPECT_EQ(run_cli("gen --sizes 9..2", dir), 2);
  EXPECT_EQ(run_cli("train --steps abc", dir), 2);
  EXPECT_EQ(run_cli("eval --checkpoint missing.ckpt", dir), 1);
  EXPECT_EQ(run_cli("--help", dir), 0);
}

TEST(Cli, GenRoundTripsThroughFiles) {
  const auto dir = scratch("gen");
  ASSERT_EQ(run_cli("gen --algorithm dijkstra --sizes 4..6 --count 20 --seed 7 --out data", dir), 0);
  std::ifstream is(dir / "data" / "dijkstra_train.jsonl");
  const auto loaded = trace::read_jsonl(is);
  const auto memory = harness::make_split(trace::AlgorithmId::dijkstra, 4, 6, 20,
                                          harness::split_seed(7, harness::Split::train));
  ASSERT_EQ(loaded.size(), memory.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(loaded[i], memory[i]);
}

TEST(Cli, ConfigFileAndFlagPrecedenceEndToEnd) {
  const auto dir = scratch("prec");
  std::ofstream(dir / "c.cfg") << "data.count=4\ndata.sizes=4..5\nseed=9\n";
  ASSERT_EQ(run_cli("gen --config c.cfg --algorithm minimum --count 6 --out d", dir), 0);
  std::ifstream is(dir / "d" / "minimum_val.jsonl");
  const auto ts = trace::read_jsonl(is);
  EXPECT_EQ(ts.size(), 6u);
  const auto expect = harness::make_split(trace::AlgorithmId::minimum, 4, 5, 6, harness::split_seed(9, harness::Split::val));
  EXPECT_EQ(ts, expect);
  // The environment seed applies only when neither flag nor config sets one.
  ASSERT_EQ(run_cli("gen --algorithm minimum --count 2 --sizes 4..4 --out e", dir), 0);
  ASSERT_EQ(std::system(("cd '" + dir.string() + "' && HINTRELIC_SEED=9 '" HINTRELIC_CLI
                         "' gen --algorithm minimum --count 6 --sizes 4..5 --out f >/dev/null")
                            .c_str()),
            0);
  std::ifstream fs_(dir / "f" / "minimum_val.jsonl");
  EXPECT_EQ(trace::read_jsonl(fs_), expect);
}

TEST(Cli, ValidateWritesCsv) {
  const auto dir = scratch("validate");
  ASSERT_EQ(run_cli("validate --algorithm bfs,minimum --pairs 20 --out v.csv", dir), 0);
  std::ifstream is(dir / "v.csv");
  std::string header, a, b;
  std::getline(is, header);
  std::getline(is, a);
  std::getline(is, b);
  EXPECT_EQ(header, "algorithm,pairs_checked,pass_rate,mean_equivalent_up_to");
  EXPECT_EQ(a.rfind("bfs,20,1.000000,", 0), 0u);
  EXPECT_EQ(b.rfind("minimum,20,", 0), 0u);
}
