#include "hintrelic/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hintrelic/augment.hpp"
#include "hintrelic/rng.hpp"
#include "hintrelic/trace_io.hpp"

namespace hintrelic::harness {

using namespace ad;
using trace::Kind;
using trace::Location;

namespace {

constexpr std::array<Mode, 6> kModes{Mode::no_hints,    Mode::baseline, Mode::baseline_reversal,
                                     Mode::relic_no_kl, Mode::relic,    Mode::relic_no_reversal};
constexpr std::array<std::string_view, 6> kModeNames{"no_hints",    "baseline", "baseline_reversal",
                                                     "relic_no_kl", "relic",    "relic_no_reversal"};
constexpr std::array<std::string_view, 6> kTitles{"No Hints",
                                                  "Baseline",
                                                  "Baseline + reversal",
                                                  "Baseline + reversal + contr.",
                                                  "Baseline + reversal + contr. + KL",
                                                  "Hint-ReLIC (no reversal)"};

std::size_t g_hint_calls = 0;

}  // namespace

std::string_view to_string(Mode m) { return kModeNames[static_cast<std::size_t>(m)]; }

std::optional<Mode> parse_mode(std::string_view name) {
  for (std::size_t i = 0; i < kModes.size(); ++i) {
    if (kModeNames[i] == name) return kModes[i];
  }
  return std::nullopt;
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> v(kModes.begin(), kModes.end());
  return v;
}

std::string_view column_title(Mode m) { return kTitles[static_cast<std::size_t>(m)]; }

bool is_relic(Mode m) {
  return m == Mode::relic || m == Mode::relic_no_kl || m == Mode::relic_no_reversal;
}

void RunConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (train_steps < 0) throw std::invalid_argument("train_steps must be >= 0");
  if (train_min_n < 1 || train_max_n < train_min_n) throw std::invalid_argument("bad train size range");
  if (train_max_n > 16) throw std::invalid_argument("train sizes must be <= 16");
  if (eval_size <= train_max_n) throw std::invalid_argument("eval_size must exceed the largest train size");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (!(lr > 0.0) || !(clip > 0.0) || !(tau > 0.0) || alpha < 0.0) {
    throw std::invalid_argument("bad optimiser or objective hyperparameter");
  }
  if (hidden_dim < 1 || triplet_dim < 1) throw std::invalid_argument("model dimensions must be >= 1");
  if (val_count < 1 || test_count < 1) throw std::invalid_argument("evaluation sets must be non-empty");
  if (log_every < 1 || eval_every < 0) throw std::invalid_argument("bad logging interval");
}

RunConfig RunConfig::desk() { return RunConfig{}; }

RunConfig RunConfig::full_scale() {
  RunConfig c;
  c.train_steps = 10000;
  c.train_min_n = 4;
  c.train_max_n = 16;
  c.eval_size = 64;
  c.hidden_dim = 128;
  c.seeds = {0, 1, 2};
  return c;
}

model::ModelConfig model_config(const RunConfig& cfg, std::uint64_t seed) {
  model::ModelConfig m;
  m.hidden_dim = cfg.hidden_dim;
  m.triplet_dim = cfg.triplet_dim;
  m.seed = derive_seed(seed, "harness/model");
  switch (cfg.mode) {
    case Mode::no_hints: m.mode = model::HintMode::no_hints; break;
    case Mode::baseline: m.mode = model::HintMode::baseline; break;
    case Mode::baseline_reversal:
      m.mode = model::HintMode::baseline;
      m.use_reversal = true;
      break;
    case Mode::relic_no_kl:
    case Mode::relic:
      m.mode = model::HintMode::relic;
      m.use_reversal = true;
      break;
    case Mode::relic_no_reversal: m.mode = model::HintMode::relic; break;
  }
  return m;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::uint64_t split_seed(std::uint64_t seed, Split s) {
  return derive_seed(seed, std::string("harness/split/") + std::string(to_string(s)));
}

namespace {

int draw_size(std::uint64_t seed, long index, int min_n, int max_n) {
  Rng rng(derive_seed(seed, "size", static_cast<std::uint64_t>(index)));
  return static_cast<int>(rng.uniform_int(min_n, max_n));
}

std::uint64_t instance_seed(std::uint64_t seed, long index) {
  return derive_seed(seed, "instance", static_cast<std::uint64_t>(index));
}

}  // namespace

std::vector<Trajectory> make_split(AlgorithmId id, int min_n, int max_n, int count, std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    const int n = draw_size(seed, k, min_n, max_n);
    out.push_back(trace::execute(trace::sample_instance(id, n, instance_seed(seed, k))));
  }
  return out;
}

std::vector<std::string> build_dataset(AlgorithmId id, int min_n, int max_n, int test_n, int count,
                                       std::uint64_t seed, const std::string& dir) {
  if (min_n > max_n) throw std::invalid_argument("build_dataset: empty size range");
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (Split s : {Split::train, Split::val, Split::test}) {
    const int lo = s == Split::test ? test_n : min_n;
    const int hi = s == Split::test ? test_n : max_n;
    const auto data = make_split(id, lo, hi, count, split_seed(seed, s));
    const std::string path =
        (std::filesystem::path(dir) / fmt::format("{}_{}.jsonl", trace::to_string(id), to_string(s))).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    trace::write_jsonl(os, data);
    if (!os) throw std::runtime_error("write failed: " + path);
    paths.push_back(path);
  }
  return paths;
}

// ---- losses -------------------------------------------------------------

Tensor hint_supervision_loss(const model::Model& m, const std::map<std::string, Tensor>& logits,
                             const trace::SnapshotFrame& frame, int n) {
  if (m.config().mode != model::HintMode::baseline) {
    throw std::invalid_argument("hint_supervision_loss: model is not in baseline mode");
  }
  ++g_hint_calls;
  Tensor total;
  for (const auto& spec : m.hint_specs()) {
    auto it = logits.find(spec.name);
    if (it == logits.end()) continue;
    Tensor l = model::feature_loss(spec, it->second, frame.hints.at(spec.name), n);
    total = total ? add(total, l) : l;
  }
  return total ? total : Tensor::scalar(0.0);
}

std::size_t hint_supervision_calls() { return g_hint_calls; }

Forward run_model(const model::Model& m, const Trajectory& traj, bool supervise) {
  if (traj.algorithm != m.algorithm()) throw std::invalid_argument("run_model: algorithm mismatch");
  const int n = traj.instance.n;
  const bool feedback = m.config().mode == model::HintMode::baseline;
  Forward f;
  const model::Encoded enc = m.encode(traj.instance);
  model::ProcessorState s = m.initial_state(n);
  std::map<std::string, Tensor> soft;
  model::Encoded step_enc = enc;
  for (int t = 1; t <= traj.steps(); ++t) {
    step_enc = soft.empty() ? enc : m.with_hints(enc, soft);
    s = m.process_step(s, step_enc);
    if (!feedback) continue;
    const model::StepView v = m.view(s, step_enc);
    std::map<std::string, Tensor> logits;
    for (const auto& spec : m.hint_specs()) {
      Tensor l = m.decode_hint(spec, v, false).logits;
      soft[spec.name] = model::soft_prediction(spec, l, n);
      logits.emplace(spec.name, std::move(l));
    }
    if (supervise) {
      Tensor h = hint_supervision_loss(m, logits, traj.frames[t - 1], n);
      f.hint_loss = f.hint_loss ? add(f.hint_loss, h) : h;
    }
  }
  const model::StepView v = m.view(s, step_enc);
  for (const auto& spec : trace::features(m.algorithm(), trace::Stage::output)) {
    Tensor l = m.decode_output(spec, v).logits;
    if (supervise) {
      Tensor o = model::feature_loss(spec, l, traj.outputs.at(spec.name), n);
      f.output_loss = f.output_loss ? add(f.output_loss, o) : o;
    }
    f.outputs.emplace(spec.name, std::move(l));
  }
  return f;
}

// ---- metrics ------------------------------------------------------------

void MicroF1::add(const trace::FeatureSpec& spec, const trace::Values& predicted, const trace::Values& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("MicroF1: size mismatch");
  switch (spec.kind) {
    case Kind::pointer:
    case Kind::categorical:
      for (std::size_t k = 0; k < truth.size(); ++k) {
        match_correct_ += predicted[k] == truth[k] ? 1 : 0;
        ++match_total_;
      }
      break;
    case Kind::mask_one:
      match_correct_ += predicted == truth ? 1 : 0;
      ++match_total_;
      break;
    case Kind::mask: {
      auto& c = masks_[spec.name];
      for (std::size_t k = 0; k < truth.size(); ++k) {
        const bool p = predicted[k] > 0.5;
        const bool y = truth[k] > 0.5;
        c.tp += p && y;
        c.fp += p && !y;
        c.fn += !p && y;
        ++c.count;
      }
      break;
    }
    case Kind::scalar:
      throw std::invalid_argument("MicroF1: scalar outputs have no F1");
  }
}

double MicroF1::value() const {
  double num = static_cast<double>(match_correct_);
  double den = static_cast<double>(match_total_);
  for (const auto& [name, c] : masks_) {
    const long d = 2 * c.tp + c.fp + c.fn;
    const double f1 = d == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(d);
    num += f1 * static_cast<double>(c.count);
    den += static_cast<double>(c.count);
  }
  if (den == 0.0) throw std::invalid_argument("MicroF1: no elements");
  return num / den;
}

long MicroF1::elements() const {
  long e = match_total_;
  for (const auto& [name, c] : masks_) e += c.count;
  return e;
}

double evaluate(const model::Model& m, const std::vector<Trajectory>& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  MicroF1 f1;
  const auto outputs = trace::features(m.algorithm(), trace::Stage::output);
  for (const auto& traj : data) {
    const Forward f = run_model(m, traj, false);
    for (const auto& spec : outputs) {
      f1.add(spec, model::predict(spec, f.outputs.at(spec.name), traj.instance.n),
             traj.outputs.at(spec.name));
    }
  }
  return f1.value();
}

// ---- training -----------------------------------------------------------

std::string metrics_csv_header() {
  return "run_id,algorithm,mode,seed,step,split,micro_f1,loss_total,loss_output,loss_hint,"
         "loss_contrastive,loss_kl";
}

std::string metrics_csv_row(const MetricsRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? trace::format_double(*v) : std::string(); };
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", r.run_id, r.algorithm, r.mode, r.seed, r.step,
                     r.split, opt(r.micro_f1), opt(r.loss_total), opt(r.loss_output), opt(r.loss_hint),
                     opt(r.loss_contrastive), opt(r.loss_kl));
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::vector<MetricsRow> rows;
  std::string line;
  bool header = true;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line == metrics_csv_header()) continue;
    }
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 12) throw std::runtime_error(fmt::format("metrics line {}: expected 12 fields", lineno));
    auto opt = [&](const std::string& v) -> std::optional<double> {
      if (v.empty()) return std::nullopt;
      return std::stod(v);
    };
    MetricsRow r;
    r.run_id = f[0];
    r.algorithm = f[1];
    r.mode = f[2];
    r.seed = std::stoull(f[3]);
    r.step = std::stol(f[4]);
    r.split = f[5];
    r.micro_f1 = opt(f[6]);
    r.loss_total = opt(f[7]);
    r.loss_output = opt(f[8]);
    r.loss_hint = opt(f[9]);
    r.loss_contrastive = opt(f[10]);
    r.loss_kl = opt(f[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

MetricsTable table_from_rows(const std::vector<MetricsRow>& rows) {
  std::map<std::string, const MetricsRow*> last;
  for (const auto& r : rows) {
    if (r.split != "test" || !r.micro_f1) continue;
    auto& slot = last[r.run_id];
    if (!slot || r.step >= slot->step) slot = &r;
  }
  std::map<AlgorithmId, std::map<Mode, std::vector<double>>> values;
  for (const auto& [id, r] : last) {
    const auto alg = trace::parse_algorithm(r->algorithm);
    const auto mode = parse_mode(r->mode);
    if (!alg || !mode) throw std::runtime_error("unknown algorithm or mode in run " + id);
    values[*alg][*mode].push_back(*r->micro_f1);
  }
  MetricsTable t;
  for (const auto& [alg, modes] : values)
    for (const auto& [mode, v] : modes) t[alg][mode] = aggregate(v);
  return t;
}

std::string run_id(const RunConfig& cfg, std::uint64_t seed) {
  return fmt::format("{}-{}-s{}", trace::to_string(cfg.algorithm), to_string(cfg.mode), seed);
}

namespace {

struct BatchLoss {
  double total = 0.0, output = 0.0, hint = 0.0, contrastive = 0.0, kl = 0.0;
};

bool finite(const BatchLoss& b) {
  return std::isfinite(b.total) && std::isfinite(b.output) && std::isfinite(b.hint) &&
         std::isfinite(b.contrastive) && std::isfinite(b.kl);
}

nlohmann::json sidecar(const RunConfig& cfg, std::uint64_t seed) {
  return {{"algorithm", trace::to_string(cfg.algorithm)},
          {"mode", to_string(cfg.mode)},
          {"seed", seed},
          {"hidden_dim", cfg.hidden_dim},
          {"triplet_dim", cfg.triplet_dim},
          {"tau", cfg.tau},
          {"train_min_n", cfg.train_min_n},
          {"train_max_n", cfg.train_max_n},
          {"eval_size", cfg.eval_size},
          {"val_count", cfg.val_count},
          {"test_count", cfg.test_count}};
}

}  // namespace

TrainResult train(const RunConfig& cfg, std::uint64_t seed, const std::string& out_dir, std::ostream* progress) {
  cfg.validate();
  const std::string id = run_id(cfg, seed);
  const bool relic_mode = is_relic(cfg.mode);
  TrainResult res{id, model::Model(cfg.algorithm, model_config(cfg, seed)), std::nullopt, {}, 0, 0, 0, false, {}};
  const model::Model& m = res.model;
  std::vector<Tensor> params = m.parameters();
  if (relic_mode) {
    res.head.emplace(cfg.hidden_dim, cfg.tau, derive_seed(seed, "harness/head"));
    for (const auto& p : res.head->parameters()) params.push_back(p);
  }
  relic::RelicConfig rc;
  rc.alpha = cfg.mode == Mode::relic_no_kl ? 0.0 : cfg.alpha;
  rc.include_positive = cfg.include_positive;
  rc.use_reversal = cfg.mode != Mode::relic_no_reversal;

  const auto val = make_split(cfg.algorithm, cfg.train_min_n, cfg.train_max_n, cfg.val_count,
                              split_seed(seed, Split::val));
  const auto test =
      make_split(cfg.algorithm, cfg.eval_size, cfg.eval_size, cfg.test_count, split_seed(seed, Split::test));
  res.untrained_test_f1 = evaluate(m, test);

  auto row = [&](long step, Split split) {
    MetricsRow r;
    r.run_id = id;
    r.algorithm = std::string(trace::to_string(cfg.algorithm));
    r.mode = std::string(to_string(cfg.mode));
    r.seed = seed;
    r.step = step;
    r.split = std::string(to_string(split));
    return r;
  };

  const std::uint64_t train_seed = split_seed(seed, Split::train);
  AdamConfig adam;
  adam.lr = cfg.lr;
  AdamState state;
  std::vector<std::vector<double>> last_good(params.size());
  const double inv_b = 1.0 / cfg.batch_size;

  for (long step = 1; step <= cfg.train_steps; ++step) {
    for (auto& p : params) p.zero_grad();
    for (std::size_t k = 0; k < params.size(); ++k) last_good[k] = params[k].value();
    BatchLoss bl;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const long index = (step - 1) * cfg.batch_size + b;
      const int n = draw_size(train_seed, index, cfg.train_min_n, cfg.train_max_n);
      Tape tape;
      Tensor total;
      {
        TapeScope scope(tape);
        if (relic_mode) {
          const auto pair = aug::generate_pair(cfg.algorithm, n, instance_seed(train_seed, index), cfg.train_max_n);
          const auto terms = relic::relic_loss(m, *res.head, pair, rc);
          total = terms.total;
          bl.output += terms.output_loss * inv_b;
          bl.contrastive += terms.contrastive * inv_b;
          bl.kl += terms.kl * inv_b;
        } else {
          Trajectory traj =
              trace::execute(trace::sample_instance(cfg.algorithm, n, instance_seed(train_seed, index)));
          if (m.config().use_reversal) traj = trace::reverse_pointers(traj).trajectory;
          const Forward f = run_model(m, traj, true);
          total = f.hint_loss ? add(f.output_loss, f.hint_loss) : f.output_loss;
          bl.output += f.output_loss.item() * inv_b;
          if (f.hint_loss) bl.hint += f.hint_loss.item() * inv_b;
        }
        total = scale(total, inv_b);
      }
      bl.total += total.item();
      backward(tape, total);
    }
    if (!finite(bl)) {
      for (std::size_t k = 0; k < params.size(); ++k) params[k].value() = last_good[k];
      res.aborted = true;
      if (progress) *progress << id << ": non-finite loss at step " << step << ", stopping\n";
      break;
    }
    clip_grad_norm(params, cfg.clip);
    adam_step(params, state, adam);
    if (step % cfg.log_every == 0 || step == cfg.train_steps) {
      MetricsRow r = row(step, Split::train);
      r.loss_total = bl.total;
      r.loss_output = bl.output;
      if (!relic_mode && cfg.mode != Mode::no_hints) r.loss_hint = bl.hint;
      if (relic_mode) {
        r.loss_contrastive = bl.contrastive;
        r.loss_kl = bl.kl;
      }
      res.rows.push_back(r);
      if (progress) {
        *progress << fmt::format("{} step {} loss {:.6g} (output {:.6g})\n", id, step, bl.total, bl.output);
      }
    }
    if (cfg.eval_every > 0 && step % cfg.eval_every == 0 && step != cfg.train_steps) {
      MetricsRow r = row(step, Split::val);
      r.micro_f1 = evaluate(m, val);
      res.rows.push_back(r);
    }
  }

  const long last = res.rows.empty() ? 0 : res.rows.back().step;
  res.val_f1 = evaluate(m, val);
  res.test_f1 = evaluate(m, test);
  MetricsRow rv = row(last, Split::val);
  rv.micro_f1 = res.val_f1;
  res.rows.push_back(rv);
  MetricsRow rt = row(last, Split::test);
  rt.micro_f1 = res.test_f1;
  res.rows.push_back(rt);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto base = std::filesystem::path(out_dir) / id;
    NamedTensors all = m.named_parameters();
    if (res.head) {
      for (const auto& [name, t] : res.head->named_parameters()) all.emplace(name, t);
    }
    res.checkpoint = base.string() + ".ckpt";
    save_checkpoint(res.checkpoint, all);
    std::ofstream js(base.string() + ".json");
    js << sidecar(cfg, seed).dump(2) << '\n';
  }
  return res;
}

Loaded load_run(const std::string& checkpoint) {
  std::string side = checkpoint;
  if (side.size() > 5 && side.ends_with(".ckpt")) side.resize(side.size() - 5);
  side += ".json";
  std::ifstream is(side);
  if (!is) throw std::runtime_error("missing run sidecar " + side);
  const auto j = nlohmann::json::parse(is);
  RunConfig cfg;
  const auto alg = trace::parse_algorithm(j.at("algorithm").get<std::string>());
  const auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!alg || !mode) throw std::runtime_error("bad run sidecar " + side);
  cfg.algorithm = *alg;
  cfg.mode = *mode;
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.triplet_dim = j.at("triplet_dim").get<int>();
  cfg.tau = j.at("tau").get<double>();
  cfg.train_min_n = j.at("train_min_n").get<int>();
  cfg.train_max_n = j.at("train_max_n").get<int>();
  cfg.eval_size = j.at("eval_size").get<int>();
  cfg.val_count = j.value("val_count", cfg.val_count);
  cfg.test_count = j.value("test_count", cfg.test_count);
  const auto seed = j.at("seed").get<std::uint64_t>();
  cfg.seeds = {seed};
  model::Model m(cfg.algorithm, model_config(cfg, seed));
  NamedTensors all = m.named_parameters();
  std::optional<relic::SimilarityHead> head;
  if (is_relic(cfg.mode)) {
    head.emplace(cfg.hidden_dim, cfg.tau, derive_seed(seed, "harness/head"));
    for (const auto& [name, t] : head->named_parameters()) all.emplace(name, t);
  }
  load_checkpoint(checkpoint, all);
  return {std::move(m), cfg, seed};
}

// ---- reporting ----------------------------------------------------------

Cell aggregate(const std::vector<double>& values) {
  Cell c;
  c.seeds = static_cast<int>(values.size());
  if (values.empty()) return c;
  double s = 0.0;
  for (double v : values) s += v;
  c.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - c.mean) * (v - c.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    c.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return c;
}

std::string display_name(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::articulation_points: return "Articulation points";
    case AlgorithmId::bridges: return "Bridges";
    case AlgorithmId::dfs: return "DFS";
    case AlgorithmId::scc: return "SCC";
    case AlgorithmId::topological_sort: return "Topological sort";
    case AlgorithmId::bellman_ford: return "Bellman-Ford";
    case AlgorithmId::bfs: return "BFS";
    case AlgorithmId::dag_shortest_paths: return "DAG Shortest Paths";
    case AlgorithmId::dijkstra: return "Dijkstra";
    case AlgorithmId::floyd_warshall: return "Floyd-Warshall";
    case AlgorithmId::mst_kruskal: return "MST-Kruskal";
    case AlgorithmId::mst_prim: return "MST-Prim";
    case AlgorithmId::insertion_sort: return "Insertion sort";
    case AlgorithmId::bubble_sort: return "Bubble sort";
    case AlgorithmId::quicksort: return "Quicksort";
    case AlgorithmId::heapsort: return "Heapsort";
    case AlgorithmId::binary_search: return "Binary Search";
    case AlgorithmId::minimum: return "Minimum";
  }
  return std::string(trace::to_string(id));
}

bool ablation_runs(AlgorithmId id, Mode mode) {
  return !(id == AlgorithmId::dfs && is_relic(mode));
}

namespace {

std::vector<Mode> ordered(const std::vector<Mode>& modes) {
  std::vector<Mode> r;
  for (Mode m : all_modes()) {
    for (Mode x : modes) {
      if (x == m) {
        r.push_back(m);
        break;
      }
    }
  }
  return r;
}

std::optional<Cell> cell_of(const MetricsTable& t, AlgorithmId id, Mode m) {
  auto it = t.find(id);
  if (it == t.end()) return std::nullopt;
  auto jt = it->second.find(m);
  if (jt == it->second.end() || jt->second.seeds == 0) return std::nullopt;
  return jt->second;
}

}  // namespace

std::string ablation_report(const MetricsTable& table, const std::vector<Mode>& modes) {
  const auto cols = ordered(modes);
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Alg."};
  for (Mode m : cols) header.emplace_back(column_title(m));
  grid.push_back(header);
  std::vector<bool> group_start{false};
  std::optional<trace::Family> last_family;
  for (AlgorithmId id : trace::all_algorithms()) {
    if (!table.count(id)) continue;
    std::vector<std::string> line{display_name(id)};
    for (Mode m : cols) {
      const auto c = cell_of(table, id, m);
      line.push_back(c ? fmt::format("{:.2f}% ± {:.2f}", 100.0 * c->mean, 100.0 * c->se) : "-");
    }
    group_start.push_back(last_family && *last_family != trace::family_of(id));
    last_family = trace::family_of(id);
    grid.push_back(std::move(line));
  }
  // Column widths in code points so the "±" sign does not skew alignment.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> w(grid[0].size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) w[c] = std::max(w[c], width(line[c]));
  }
  std::size_t total = 0;
  for (auto x : w) total += x + 3;
  std::ostringstream os;
  auto rule = [&] { os << std::string(total > 3 ? total - 3 : 0, '-') << '\n'; };
  for (std::size_t r = 0; r < grid.size(); ++r) {
    if (group_start[r]) rule();
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      const std::string& s = grid[r][c];
      const std::size_t pad = w[c] - width(s);
      if (c == 0) {
        os << s << std::string(pad, ' ');
      } else {
        os << " | " << std::string(pad, ' ') << s;
      }
    }
    os << '\n';
    if (r == 0) rule();
  }
  return os.str();
}

std::string ablation_csv(const MetricsTable& table, const std::vector<Mode>& modes) {
  const auto cols = ordered(modes);
  std::ostringstream os;
  os << "algorithm,mode,mean,stderr,seeds\n";
  for (AlgorithmId id : trace::all_algorithms()) {
    if (!table.count(id)) continue;
    for (Mode m : cols) {
      const auto c = cell_of(table, id, m);
      if (c) {
        os << trace::to_string(id) << ',' << to_string(m) << ',' << trace::format_double(c->mean) << ','
           << trace::format_double(c->se) << ',' << c->seeds << '\n';
      } else {
        os << trace::to_string(id) << ',' << to_string(m) << ",-,-,0\n";
      }
    }
  }
  return os.str();
}

}  // namespace hintrelic::harness
