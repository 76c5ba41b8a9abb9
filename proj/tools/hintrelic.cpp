#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hintrelic/augment.hpp"
#include "hintrelic/config.hpp"
#include "hintrelic/harness.hpp"
#include "hintrelic/oracle.hpp"
#include "hintrelic/rng.hpp"
#include "hintrelic/trace_io.hpp"

namespace fs = std::filesystem;
using namespace hintrelic;

namespace {

// Flags are bound to strings and only enter the settings map when given, so
// an absent flag falls through to the config file and then the default.
class FlagSet {
 public:
  explicit FlagSet(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "key=value settings file");
    add("--seed", "seed", "master seed (falls back to HINTRELIC_SEED)");
  }
  void add(const std::string& flag, const std::string& key, const std::string& help) {
    auto& slot = storage_.emplace_back();
    bound_.push_back({app_->add_option(flag, slot, help), key, &slot});
  }

  config::Layered settings() const {
    std::map<std::string, std::string> flags;
    for (const auto& b : bound_)
      if (b.opt->count() > 0) flags[b.key] = *b.value;
    config::ConfigFile file;
    if (!config_path_.empty()) file = config::ConfigFile::load(config_path_);
    std::optional<std::string> env;
    if (const char* e = std::getenv("HINTRELIC_SEED"); e && *e) env = e;
    return config::Layered(std::move(flags), std::move(file), env);
  }

 private:
  struct Bound {
    CLI::Option* opt;
    std::string key;
    std::string* value;
  };
  CLI::App* app_;
  std::string config_path_;
  std::deque<std::string> storage_;
  std::vector<Bound> bound_;
};

void add_run_flags(FlagSet& f) {
  f.add("--algorithm", "run.algorithm", "algorithm name");
  f.add("--mode", "run.mode", "no_hints|baseline|baseline_reversal|relic_no_kl|relic|relic_no_reversal");
  f.add("--steps", "run.train_steps", "training steps");
  f.add("--batch-size", "run.batch_size", "instances per step");
  f.add("--train-sizes", "run.train_sizes", "training sizes, e.g. 4..8");
  f.add("--eval-size", "run.eval_size", "test instance size");
  f.add("--val-count", "run.val_count", "validation instances");
  f.add("--test-count", "run.test_count", "test instances");
  f.add("--seeds", "run.seeds", "number of seeds");
  f.add("--log-every", "run.log_every", "train log interval");
  f.add("--eval-every", "run.eval_every", "evaluation interval (0: end only)");
  f.add("--lr", "optim.lr", "Adam learning rate");
  f.add("--clip", "optim.clip", "gradient norm clip");
  f.add("--hidden", "model.hidden_dim", "hidden width");
  f.add("--triplet", "model.triplet_dim", "triplet width");
  f.add("--alpha", "relic.alpha", "KL weight");
  f.add("--tau", "relic.tau", "similarity temperature");
  f.add("--include-positive", "relic.include_positive", "keep the positive in the denominator (true|false)");
}

trace::AlgorithmId algorithm_of(const config::Layered& l, const std::string& fallback = "minimum") {
  const std::string name = l.get_string("run.algorithm", fallback);
  const auto id = trace::parse_algorithm(name);
  if (!id) throw std::invalid_argument("unknown algorithm '" + name + "'");
  return *id;
}

std::vector<trace::AlgorithmId> algorithms_of(const config::Layered& l) {
  const std::string spec = l.get_string("run.algorithm", "all");
  if (spec == "all") return {trace::all_algorithms().begin(), trace::all_algorithms().end()};
  std::vector<trace::AlgorithmId> out;
  for (const auto& name : config::split_list(spec)) {
    const auto id = trace::parse_algorithm(name);
    if (!id) throw std::invalid_argument("unknown algorithm '" + name + "'");
    out.push_back(*id);
  }
  return out;
}

void write_lines(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

int cmd_gen(const config::Layered& l, const std::string& out) {
  const auto id = algorithm_of(l);
  const auto [lo, hi] = config::parse_range(l.get_string("data.sizes", "4..8"));
  const int count = l.get_int("data.count", 1000);
  const int test_n = l.get_int("data.test_size", hi);
  fs::create_directories(out);
  for (const auto& p : harness::build_dataset(id, lo, hi, test_n, count, config::master_seed(l), out))
    std::cout << p << '\n';
  return 0;
}

int cmd_augment(const config::Layered& l, const std::string& out, int max_n_flag) {
  const auto id = algorithm_of(l);
  const auto [lo, hi] = config::parse_range(l.get_string("data.sizes", "4..8"));
  const int count = l.get_int("data.count", 100);
  const int max_n = max_n_flag > 0 ? max_n_flag : hi;
  if (max_n < hi) throw std::invalid_argument("--max-n must be at least the largest base size");
  const std::uint64_t seed = derive_seed(config::master_seed(l), "cli/augment");
  fs::create_directories(out);
  const fs::path base_path = fs::path(out) / fmt::format("{}_base.jsonl", trace::to_string(id));
  const fs::path pair_path = fs::path(out) / fmt::format("{}_pairs.jsonl", trace::to_string(id));
  std::ofstream base_os(base_path), pair_os(pair_path);
  if (!base_os || !pair_os) throw std::runtime_error("cannot write into " + out);
  Rng sizes(derive_seed(seed, "size"));
  for (int i = 0; i < count; ++i) {
    const int n = static_cast<int>(sizes.uniform_int(lo, hi));
    const auto pair = aug::generate_pair(id, n, derive_seed(seed, "pair", static_cast<std::uint64_t>(i)), max_n);
    base_os << trace::to_jsonl(*pair.base) << '\n';
    pair_os << aug::pair_to_jsonl(pair, fmt::format("{}:{}", base_path.filename().string(), i)) << '\n';
  }
  std::cout << base_path.string() << '\n' << pair_path.string() << '\n';
  return 0;
}

int cmd_validate(const config::Layered& l, const std::string& out) {
  const auto ids = algorithms_of(l);
  const int pairs = l.get_int("validate.pairs", 1000);
  const auto [lo, hi] = config::parse_range(l.get_string("data.sizes", "2..8"));
  std::ostringstream csv;
  csv << oracle::csv_header() << '\n';
  bool gate = true;
  for (auto id : ids) {
    const auto s = oracle::validate_algorithm(id, pairs, config::master_seed(l), lo, hi);
    csv << oracle::csv_row(s) << '\n';
    if (aug::exactness(id) == aug::Exactness::exact && s.pass_rate < 1.0) {
      gate = false;
      for (const auto& f : s.failures) std::cerr << trace::to_string(id) << ": " << f << '\n';
    }
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_lines(out, csv.str());
  }
  if (!gate) std::cerr << "validation gate failed\n";
  return gate ? 0 : 1;
}

int cmd_train(const config::Layered& l, const std::string& out) {
  const auto cfg = config::resolve_run_config(l);
  fs::create_directories(out);
  const fs::path metrics = fs::path(out) / "metrics.csv";
  std::ofstream os(metrics);
  os << harness::metrics_csv_header() << '\n';
  bool aborted = false;
  for (auto seed : cfg.seeds) {
    const auto r = harness::train(cfg, seed, out, &std::cerr);
    for (const auto& row : r.rows) os << harness::metrics_csv_row(row) << '\n';
    std::cout << fmt::format("{} val_f1={:.4f} test_f1={:.4f} untrained_test_f1={:.4f}{}\n", r.run_id,
                             r.val_f1, r.test_f1, r.untrained_test_f1, r.aborted ? " ABORTED" : "");
    aborted = aborted || r.aborted;
  }
  std::cout << metrics.string() << '\n';
  return aborted ? 1 : 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& split) {
  const auto run = harness::load_run(checkpoint);
  std::vector<trace::Trajectory> ts;
  if (!data.empty()) {
    std::ifstream is(data);
    if (!is) throw std::runtime_error("cannot open " + data);
    ts = trace::read_jsonl(is);
  } else if (split == "val") {
    const auto& c = run.config;
    ts = harness::make_split(c.algorithm, c.train_min_n, c.train_max_n, c.val_count,
                             harness::split_seed(run.seed, harness::Split::val));
  } else if (split == "test") {
    const auto& c = run.config;
    ts = harness::make_split(c.algorithm, c.eval_size, c.eval_size, c.test_count,
                             harness::split_seed(run.seed, harness::Split::test));
  } else {
    throw std::invalid_argument("--split must be val or test");
  }
  for (const auto& t : ts)
    if (t.algorithm != run.config.algorithm) throw std::invalid_argument("dataset algorithm does not match run");
  std::cout << fmt::format("micro_f1={:.6f} instances={}\n", harness::evaluate(run.model, ts), ts.size());
  return 0;
}

int cmd_ablate(const config::Layered& l, const std::string& out) {
  auto base = config::resolve_run_config(l);
  const auto ids = algorithms_of(l);
  std::vector<harness::Mode> modes;
  const std::string mode_spec = l.get_string("ablate.modes", "all");
  if (mode_spec == "all") {
    modes = harness::all_modes();
  } else {
    for (const auto& name : config::split_list(mode_spec)) {
      const auto m = harness::parse_mode(name);
      if (!m) throw std::invalid_argument("unknown mode '" + name + "'");
      modes.push_back(*m);
    }
  }
  fs::create_directories(out);
  std::ofstream os(fs::path(out) / "metrics.csv");
  os << harness::metrics_csv_header() << '\n';
  std::vector<harness::MetricsRow> all;
  for (auto id : ids) {
    for (auto mode : modes) {
      if (!harness::ablation_runs(id, mode)) continue;
      auto cfg = base;
      cfg.algorithm = id;
      cfg.mode = mode;
      for (auto seed : cfg.seeds) {
        const auto r = harness::train(cfg, seed, out, &std::cerr);
        for (const auto& row : r.rows) os << harness::metrics_csv_row(row) << '\n';
        os.flush();
        all.insert(all.end(), r.rows.begin(), r.rows.end());
        std::cout << fmt::format("{} test_f1={:.4f}\n", r.run_id, r.test_f1) << std::flush;
      }
    }
  }
  const auto table = harness::table_from_rows(all);
  const std::string text = harness::ablation_report(table, modes);
  write_lines(fs::path(out) / "report.txt", text);
  write_lines(fs::path(out) / "report.csv", harness::ablation_csv(table, modes));
  std::cout << text;
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& csv_out) {
  std::vector<harness::MetricsRow> rows;
  for (const auto& path : inputs) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    auto r = harness::read_metrics_csv(is);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const auto table = harness::table_from_rows(rows);
  std::vector<harness::Mode> modes;
  for (auto m : harness::all_modes()) {
    bool present = false;
    for (const auto& [id, cells] : table) present = present || cells.count(m) > 0;
    if (present) modes.push_back(m);
  }
  std::cout << harness::ablation_report(table, modes);
  if (!csv_out.empty()) write_lines(csv_out, harness::ablation_csv(table, modes));
  return 0;
}

int cmd_gradcheck(const config::Layered& l, bool primitives_only, double tolerance) {
  const auto entries = harness::gradcheck_suite(config::master_seed(l), !primitives_only);
  bool ok = true;
  for (const auto& e : entries) {
    const bool pass = e.max_rel_error <= tolerance;
    ok = ok && pass;
    std::cout << fmt::format("{:<28} {:>10.3e} over {:>4} coords  {}\n", e.name, e.max_rel_error, e.checked,
                             pass ? "ok" : "FAIL " + e.worst);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algorithmic reasoning with contrastive hint learning"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<FlagSet>> sets;
  auto flags_for = [&](CLI::App* sub) -> FlagSet& { return *sets.emplace_back(std::make_unique<FlagSet>(sub)); };

  std::string out_dir = "data", out_file, checkpoint, data, split = "test", csv_out;
  std::vector<std::string> inputs;
  int max_n = 0;
  bool primitives_only = false;
  double tolerance = 1e-4;

  auto* gen = app.add_subcommand("gen", "write train/val/test JSONL trajectories");
  auto& gen_f = flags_for(gen);
  gen_f.add("--algorithm", "run.algorithm", "algorithm name");
  gen_f.add("--sizes", "data.sizes", "size range, e.g. 4..16");
  gen_f.add("--count", "data.count", "trajectories per split");
  gen_f.add("--test-size", "data.test_size", "test instance size (default: top of --sizes)");
  gen->add_option("--out", out_dir, "output directory");

  auto* augc = app.add_subcommand("augment", "write base trajectories and augmented pairs");
  auto& aug_f = flags_for(augc);
  aug_f.add("--algorithm", "run.algorithm", "algorithm name");
  aug_f.add("--sizes", "data.sizes", "base size range");
  aug_f.add("--count", "data.count", "pairs");
  augc->add_option("--max-n", max_n, "largest training size (default: top of --sizes)");
  augc->add_option("--out", out_dir, "output directory");

  auto* val = app.add_subcommand("validate", "check augmentation equivalence per algorithm");
  auto& val_f = flags_for(val);
  val_f.add("--algorithm", "run.algorithm", "algorithm name, comma list or all");
  val_f.add("--pairs", "validate.pairs", "pairs per algorithm");
  val_f.add("--sizes", "data.sizes", "base size range");
  val->add_option("--out", out_file, "CSV output (default: stdout)");

  auto* tr = app.add_subcommand("train", "train one configuration");
  auto& tr_f = flags_for(tr);
  add_run_flags(tr_f);
  std::string train_out = "runs";
  tr->add_option("--out", train_out, "run directory");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", checkpoint, "path to <run>.ckpt")->required();
  ev->add_option("--data", data, "JSONL trajectories (default: the run's own split)");
  ev->add_option("--split", split, "val or test");

  auto* ab = app.add_subcommand("ablate", "train the algorithm x mode matrix and report");
  auto& ab_f = flags_for(ab);
  add_run_flags(ab_f);
  ab_f.add("--modes", "ablate.modes", "comma list of modes or all");
  std::string ablate_out = "ablation";
  ab->add_option("--out", ablate_out, "output directory");

  auto* rep = app.add_subcommand("report", "aggregate metrics CSVs into the ablation table");
  rep->add_option("metrics", inputs, "metrics CSV files")->required();
  rep->add_option("--csv", csv_out, "also write the table as CSV");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every primitive and the loss");
  auto& gc_f = flags_for(gc);
  gc->add_flag("--primitives-only", primitives_only, "skip the model-level checks");
  gc->add_option("--tolerance", tolerance, "max relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_f.settings(), out_dir);
    if (augc->parsed()) return cmd_augment(aug_f.settings(), out_dir, max_n);
    if (val->parsed()) return cmd_validate(val_f.settings(), out_file);
    if (tr->parsed()) return cmd_train(tr_f.settings(), train_out);
    if (ev->parsed()) return cmd_eval(checkpoint, data, split);
    if (ab->parsed()) return cmd_ablate(ab_f.settings(), ablate_out);
    if (rep->parsed()) return cmd_report(inputs, csv_out);
    if (gc->parsed()) return cmd_gradcheck(gc_f.settings(), primitives_only, tolerance);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
