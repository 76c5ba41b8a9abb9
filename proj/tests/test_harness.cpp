#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hintrelic/harness.hpp"
#include "hintrelic/rng.hpp"
#include "hintrelic/trace_io.hpp"

using namespace hintrelic;
using namespace hintrelic::harness;
using trace::AlgorithmId;
using trace::Kind;
using trace::Location;

namespace fs = std::filesystem;

namespace {

RunConfig tiny(AlgorithmId id, Mode mode) {
  RunConfig c;
  c.algorithm = id;
  c.mode = mode;
  c.batch_size = 2;
  c.train_steps = 3;
  c.train_min_n = 4;
  c.train_max_n = 5;
  c.eval_size = 7;
  c.val_count = 3;
  c.test_count = 3;
  c.hidden_dim = 8;
  c.triplet_dim = 2;
  c.log_every = 1;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hintrelic_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// The serialized inputs block, which ignores the seed field.
std::string inputs_of(const trace::Trajectory& t) {
  const std::string line = trace::to_jsonl(t);
  const auto a = line.find("\"inputs\""), b = line.find("\"hints\"");
  return line.substr(a, b - a);
}

// Straight per-element count: matches for pointer, categorical and
// whole-instance mask_one; tp/fp/fn for masks, keyed by feature name.
struct Brute {
  long correct = 0, total = 0;
  std::map<std::string, std::array<long, 4>> masks;  // tp, fp, fn, count
  void add(const trace::FeatureSpec& s, const trace::Values& p, const trace::Values& y) {
    if (s.kind == Kind::mask) {
      auto& m = masks[s.name];
      for (std::size_t k = 0; k < y.size(); ++k) {
        if (p[k] == 1.0 && y[k] == 1.0) ++m[0];
        if (p[k] == 1.0 && y[k] == 0.0) ++m[1];
        if (p[k] == 0.0 && y[k] == 1.0) ++m[2];
        ++m[3];
      }
    } else if (s.kind == Kind::mask_one) {
      bool same = true;
      for (std::size_t k = 0; k < y.size(); ++k) same = same && p[k] == y[k];
      correct += same;
      ++total;
    } else {
      for (std::size_t k = 0; k < y.size(); ++k) correct += p[k] == y[k];
      total += static_cast<long>(y.size());
    }
  }
  double value() const {
    double num = static_cast<double>(correct), den = static_cast<double>(total);
    for (const auto& [name, m] : masks) {
      const double f1 = (m[0] + m[1] + m[2]) == 0 ? 1.0 : 2.0 * m[0] / static_cast<double>(2 * m[0] + m[1] + m[2]);
      num += f1 * static_cast<double>(m[3]);
      den += static_cast<double>(m[3]);
    }
    return num / den;
  }
};

}  // namespace

TEST(Modes, NamesAndOrder) {
  std::vector<std::string> names;
  for (auto m : all_modes()) {
    names.emplace_back(to_string(m));
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"no_hints", "baseline", "baseline_reversal", "relic_no_kl", "relic",
                                             "relic_no_reversal"}));
  EXPECT_FALSE(parse_mode("relics"));
  EXPECT_TRUE(is_relic(Mode::relic_no_kl));
  EXPECT_FALSE(is_relic(Mode::baseline_reversal));
}

TEST(RunConfigTest, Validation) {
  RunConfig c = RunConfig::desk();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.hidden_dim, 32);
  EXPECT_EQ(c.train_steps, 2000);
  EXPECT_EQ(c.eval_size, 16);
  EXPECT_NO_THROW(RunConfig::full_scale().validate());
  EXPECT_EQ(RunConfig::full_scale().hidden_dim, 128);
  c.eval_size = c.train_max_n;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig::desk();
  c.seeds.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig::desk();
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Dataset, DeterministicAndSeedIsolated) {
  const auto a = make_split(AlgorithmId::bfs, 4, 8, 50, split_seed(3, Split::train));
  const auto b = make_split(AlgorithmId::bfs, 4, 8, 50, split_seed(3, Split::train));
  EXPECT_EQ(a, b);
  std::set<std::uint64_t> train_seeds;
  for (const auto& t : a) {
    EXPECT_GE(t.instance.n, 4);
    EXPECT_LE(t.instance.n, 8);
    train_seeds.insert(t.instance.seed);
  }
  // Small graphs can coincide by chance, so content overlap is checked on
  // continuous keys.
  std::set<std::string> train_inputs;
  for (const auto& t : make_split(AlgorithmId::minimum, 4, 8, 50, split_seed(3, Split::train)))
    train_inputs.insert(inputs_of(t));
  for (auto split : {Split::val, Split::test}) {
    EXPECT_NE(split_seed(3, split), split_seed(3, Split::train));
    for (const auto& t : make_split(AlgorithmId::bfs, 4, 8, 50, split_seed(3, split)))
      EXPECT_FALSE(train_seeds.count(t.instance.seed));
    for (const auto& t : make_split(AlgorithmId::minimum, 4, 8, 50, split_seed(3, split)))
      EXPECT_FALSE(train_inputs.count(inputs_of(t)));
  }
}

TEST(Dataset, BuildWritesThreeSplits) {
  const auto dir = scratch_dir("dataset");
  const auto paths = build_dataset(AlgorithmId::minimum, 4, 6, 9, 12, 5, dir.string());
  ASSERT_EQ(paths.size(), 3u);
  for (const auto& p : paths) {
    std::ifstream is(p);
    const auto ts = trace::read_jsonl(is);
    EXPECT_EQ(ts.size(), 12u);
    if (fs::path(p).filename() == "minimum_test.jsonl")
      for (const auto& t : ts) EXPECT_EQ(t.instance.n, 9);
  }
  const auto again = build_dataset(AlgorithmId::minimum, 4, 6, 9, 12, 5, (dir / "b").string());
  for (std::size_t i = 0; i < 3; ++i) {
    std::ifstream x(paths[i]), y(again[i]);
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    EXPECT_EQ(sx.str(), sy.str());
  }
}

TEST(Metrics, MicroF1MatchesBruteForce) {
  Rng rng(51);
  const std::vector<trace::FeatureSpec> specs{
      {"p", trace::Stage::output, Location::node, Kind::pointer, 0},
      {"c", trace::Stage::output, Location::node, Kind::categorical, 3},
      {"o", trace::Stage::output, Location::node, Kind::mask_one, 0},
      {"m", trace::Stage::output, Location::node, Kind::mask, 0},
      {"e", trace::Stage::output, Location::edge, Kind::mask, 0},
  };
  for (int set = 0; set < 100; ++set) {
    MicroF1 f1;
    Brute brute;
    const int items = static_cast<int>(rng.uniform_int(1, 6));
    for (int it = 0; it < items; ++it) {
      const int n = static_cast<int>(rng.uniform_int(1, 6));
      for (const auto& s : specs) {
        if (rng.bernoulli(0.3)) continue;
        const std::size_t len = trace::value_count(s.location, n);
        trace::Values p(len), y(len);
        for (std::size_t k = 0; k < len; ++k) {
          if (s.kind == Kind::pointer) p[k] = rng.uniform_int(0, n - 1), y[k] = rng.uniform_int(0, n - 1);
          if (s.kind == Kind::categorical) p[k] = rng.uniform_int(0, 2), y[k] = rng.uniform_int(0, 2);
          if (s.kind == Kind::mask) p[k] = rng.bernoulli(0.4), y[k] = rng.bernoulli(0.4);
        }
        if (s.kind == Kind::mask_one) {
          p[rng.uniform_int(0, n - 1)] = 1.0;
          y[rng.uniform_int(0, n - 1)] = 1.0;
        }
        f1.add(s, p, y);
        brute.add(s, p, y);
      }
    }
    if (brute.total == 0 && brute.masks.empty()) continue;
    EXPECT_EQ(f1.value(), brute.value()) << "set " << set;
    EXPECT_GE(f1.value(), 0.0);
    EXPECT_LE(f1.value(), 1.0);
  }
}

TEST(Metrics, ScalarOutputsRejected) {
  MicroF1 f1;
  EXPECT_THROW(f1.add({"s", trace::Stage::output, Location::node, Kind::scalar, 0}, {0.0}, {0.0}),
               std::invalid_argument);
  EXPECT_THROW(f1.value(), std::invalid_argument);
}

TEST(Metrics, CsvRoundTrip) {
  MetricsRow r;
  r.run_id = "bfs-relic-s2";
  r.algorithm = "bfs";
  r.mode = "relic";
  r.seed = 2;
  r.step = 40;
  r.split = "train";
  r.loss_total = 0.1 + 0.2;
  r.loss_contrastive = -1e-300;
  MetricsRow t = r;
  t.split = "test";
  t.loss_total.reset();
  t.micro_f1 = 2.0 / 3.0;
  std::stringstream ss;
  ss << metrics_csv_header() << '\n' << metrics_csv_row(r) << '\n' << metrics_csv_row(t) << '\n';
  const auto back = read_metrics_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(metrics_csv_row(back[0]), metrics_csv_row(r));
  EXPECT_EQ(metrics_csv_row(back[1]), metrics_csv_row(t));
  EXPECT_EQ(*back[1].micro_f1, 2.0 / 3.0);
  EXPECT_EQ(metrics_csv_header(),
            "run_id,algorithm,mode,seed,step,split,micro_f1,loss_total,loss_output,loss_hint,loss_contrastive,loss_kl");
}

TEST(Metrics, TableUsesFinalTestRow) {
  std::vector<MetricsRow> rows;
  auto row = [](std::string alg, std::string mode, std::uint64_t seed, long step, std::string split, double f) {
    MetricsRow r;
    r.run_id = alg + "-" + mode + "-s" + std::to_string(seed);
    r.algorithm = alg;
    r.mode = mode;
    r.seed = seed;
    r.step = step;
    r.split = split;
    r.micro_f1 = f;
    return r;
  };
  rows.push_back(row("bfs", "relic", 0, 10, "test", 0.1));
  rows.push_back(row("bfs", "relic", 0, 20, "test", 0.5));
  rows.push_back(row("bfs", "relic", 0, 20, "val", 0.9));
  rows.push_back(row("bfs", "relic", 1, 20, "test", 0.7));
  const auto t = table_from_rows(rows);
  const Cell c = t.at(AlgorithmId::bfs).at(Mode::relic);
  EXPECT_EQ(c.seeds, 2);
  EXPECT_DOUBLE_EQ(c.mean, 0.6);
  EXPECT_NEAR(c.se, std::sqrt(0.02) / std::sqrt(2.0), 1e-15);
}

TEST(Report, AggregateStandardError) {
  const Cell one = aggregate({0.5});
  EXPECT_EQ(one.se, 0.0);
  EXPECT_EQ(one.seeds, 1);
  const Cell three = aggregate({0.2, 0.4, 0.9});
  EXPECT_NEAR(three.mean, 0.5, 1e-15);
  const double sd = std::sqrt(((0.09) + (0.01) + (0.16)) / 2.0);
  EXPECT_NEAR(three.se, sd / std::sqrt(3.0), 1e-15);
}

TEST(Report, FiveColumnLayoutWithDfsDash) {
  MetricsTable t;
  const std::vector<Mode> cols{Mode::no_hints, Mode::baseline, Mode::baseline_reversal, Mode::relic_no_kl,
                               Mode::relic};
  for (auto id : {AlgorithmId::dfs, AlgorithmId::bfs, AlgorithmId::heapsort}) {
    for (auto m : cols) {
      if (!ablation_runs(id, m)) continue;
      t[id][m] = aggregate({0.5, 0.6});
    }
  }
  EXPECT_FALSE(ablation_runs(AlgorithmId::dfs, Mode::relic));
  EXPECT_FALSE(ablation_runs(AlgorithmId::dfs, Mode::relic_no_kl));
  EXPECT_TRUE(ablation_runs(AlgorithmId::bfs, Mode::relic));
  const std::string text = ablation_report(t, cols);
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  ASSERT_GE(lines.size(), 4u);
  // Header: algorithm column then the five titles in order.
  std::size_t at = 0;
  for (auto m : cols) {
    const auto pos = lines[0].find(std::string(column_title(m)), at);
    ASSERT_NE(pos, std::string::npos) << column_title(m);
    at = pos + 1;
  }
  EXPECT_EQ(lines[0].rfind("Alg.", 0), 0u);
  // Every line of the table has the same width in code points.
  auto columns = [](const std::string& l) {
    return std::count_if(l.begin(), l.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0) != 0x80; });
  };
  long width = 0;
  for (const auto& l : lines) width = std::max<long>(width, columns(l));
  for (const auto& l : lines)
    if (l.find('|') != std::string::npos) EXPECT_EQ(columns(l), width) << l;
  std::string dfs_line, bfs_line;
  for (const auto& l : lines) {
    if (l.rfind(display_name(AlgorithmId::dfs), 0) == 0) dfs_line = l;
    if (l.rfind(display_name(AlgorithmId::bfs), 0) == 0) bfs_line = l;
  }
  ASSERT_FALSE(dfs_line.empty());
  ASSERT_FALSE(bfs_line.empty());
  EXPECT_EQ(std::count(bfs_line.begin(), bfs_line.end(), '%'), 5);
  EXPECT_EQ(std::count(dfs_line.begin(), dfs_line.end(), '%'), 3);
  // The two contrastive cells of the DFS row print a lone dash.
  std::vector<std::string> cells;
  std::stringstream ds(dfs_line);
  for (std::string c; std::getline(ds, c, '|');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 6u);
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(' '));
    s.erase(s.find_last_not_of(' ') + 1);
    return s;
  };
  EXPECT_EQ(trim(cells[4]), "-");
  EXPECT_EQ(trim(cells[5]), "-");
  EXPECT_EQ(trim(cells[1]), "55.00% ± 5.00") << cells[1];

  const std::string csv = ablation_csv(t, cols);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).rfind("algorithm,", 0), 0u);
}

TEST(Training, RelicModesNeverUseHintSupervision) {
  for (auto mode : {Mode::relic, Mode::relic_no_kl, Mode::relic_no_reversal, Mode::no_hints}) {
    const auto before = hint_supervision_calls();
    const auto r = train(tiny(AlgorithmId::bfs, mode), 1);
    EXPECT_EQ(hint_supervision_calls(), before) << to_string(mode);
    EXPECT_FALSE(r.aborted);
    for (const auto& row : r.rows)
      if (row.split == "train") EXPECT_FALSE(row.loss_hint);
  }
  const auto before = hint_supervision_calls();
  train(tiny(AlgorithmId::bfs, Mode::baseline), 1);
  EXPECT_GT(hint_supervision_calls(), before);
}

TEST(Training, HintSupervisionRefusesRelicModels) {
  model::ModelConfig c;
  c.hidden_dim = 8;
  c.mode = model::HintMode::relic;
  const model::Model m(AlgorithmId::bfs, c);
  const auto t = trace::execute(trace::sample_instance(AlgorithmId::bfs, 4, 1));
  EXPECT_THROW(hint_supervision_loss(m, {}, t.frames[0], 4), std::logic_error);
}

TEST(Training, DeterministicMetrics) {
  const auto a = train(tiny(AlgorithmId::insertion_sort, Mode::relic), 3);
  const auto b = train(tiny(AlgorithmId::insertion_sort, Mode::relic), 3);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(metrics_csv_row(a.rows[i]), metrics_csv_row(b.rows[i]));
  const auto c = train(tiny(AlgorithmId::insertion_sort, Mode::relic), 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    differs = differs || a.rows[i].loss_total != c.rows[i].loss_total;
  EXPECT_TRUE(differs);
}

TEST(Training, NoKlModeEqualsAlphaZero) {
  auto no_kl = tiny(AlgorithmId::bfs, Mode::relic_no_kl);
  auto zero = tiny(AlgorithmId::bfs, Mode::relic);
  zero.alpha = 0.0;
  const auto a = train(no_kl, 2);
  const auto b = train(zero, 2);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].micro_f1, b.rows[i].micro_f1);
    EXPECT_EQ(a.rows[i].loss_total, b.rows[i].loss_total);
    EXPECT_EQ(a.rows[i].loss_contrastive, b.rows[i].loss_contrastive);
    EXPECT_EQ(a.rows[i].loss_output, b.rows[i].loss_output);
  }
  const auto pa = a.model.parameters(), pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].value(), pb[i].value());
}

TEST(Training, CheckpointReloadsToSameScores) {
  const auto dir = scratch_dir("ckpt");
  const auto cfg = tiny(AlgorithmId::minimum, Mode::relic);
  const auto r = train(cfg, 6, dir.string());
  ASSERT_FALSE(r.checkpoint.empty());
  const auto loaded = load_run(r.checkpoint);
  EXPECT_EQ(loaded.seed, 6u);
  EXPECT_EQ(loaded.config.algorithm, cfg.algorithm);
  const auto test = make_split(cfg.algorithm, cfg.eval_size, cfg.eval_size, cfg.test_count,
                               split_seed(6, Split::test));
  EXPECT_EQ(evaluate(loaded.model, test), r.test_f1);
}

TEST(Training, LogsTrainValTestRows) {
  const auto r = train(tiny(AlgorithmId::minimum, Mode::baseline_reversal), 0);
  std::set<std::string> splits;
  for (const auto& row : r.rows) {
    splits.insert(row.split);
    EXPECT_EQ(row.run_id, "minimum-baseline_reversal-s0");
    if (row.micro_f1) {
      EXPECT_GE(*row.micro_f1, 0.0);
      EXPECT_LE(*row.micro_f1, 1.0);
    }
  }
  EXPECT_EQ(splits, (std::set<std::string>{"train", "val", "test"}));
}
