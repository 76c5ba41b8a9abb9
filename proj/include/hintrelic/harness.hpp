#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hintrelic/model.hpp"
#include "hintrelic/relic.hpp"
#include "hintrelic/trace.hpp"

namespace hintrelic::harness {

using trace::AlgorithmId;
using trace::Trajectory;

enum class Mode { no_hints, baseline, baseline_reversal, relic_no_kl, relic, relic_no_reversal };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);
// Report column order.
const std::vector<Mode>& all_modes();
std::string_view column_title(Mode m);
bool is_relic(Mode m);

struct RunConfig {
  AlgorithmId algorithm = AlgorithmId::minimum;
  Mode mode = Mode::relic;
  int batch_size = 16;
  int train_steps = 2000;
  int train_min_n = 4;
  int train_max_n = 8;
  int eval_size = 16;
  int val_count = 64;
  int test_count = 64;
  std::vector<std::uint64_t> seeds{0};
  double lr = 1e-3;
  double clip = 1.0;
  double alpha = 1.0;
  double tau = 0.1;
  bool include_positive = false;
  int hidden_dim = 32;
  int triplet_dim = 8;
  int log_every = 50;
  int eval_every = 0;  // 0: evaluate only at the end

  // Throws std::invalid_argument when an invariant fails.
  void validate() const;
  static RunConfig desk();
  static RunConfig full_scale();
};

model::ModelConfig model_config(const RunConfig& cfg, std::uint64_t seed);

// Per-split instance seeds: train, val and test draw from disjoint tags.
enum class Split { train, val, test };
std::string_view to_string(Split s);
std::uint64_t split_seed(std::uint64_t seed, Split s);

// `count` trajectories with n uniform on [min_n, max_n]; deterministic.
std::vector<Trajectory> make_split(AlgorithmId id, int min_n, int max_n, int count, std::uint64_t seed);

// Writes train/val/test JSONL files (<dir>/<algorithm>_<split>.jsonl);
// train and val use the size range, test uses test_n. Returns the paths.
std::vector<std::string> build_dataset(AlgorithmId id, int min_n, int max_n, int test_n, int count,
                                       std::uint64_t seed, const std::string& dir);

// ---- losses ---------------------------------------------------------------
// Sum over hints present in `logits` of the per-type loss against `frame`.
// Only valid for baseline-mode models.
ad::Tensor hint_supervision_loss(const model::Model& m, const std::map<std::string, ad::Tensor>& logits,
                                 const trace::SnapshotFrame& frame, int n);
// Number of hint_supervision_loss calls so far in this process.
std::size_t hint_supervision_calls();

struct Forward {
  ad::Tensor output_loss;
  ad::Tensor hint_loss;  // undefined outside baseline modes
  std::map<std::string, ad::Tensor> outputs;  // logits after T steps
};
// Runs T = traj.steps() processor steps. Baseline models decode every hint
// per step and feed the soft prediction into the next step; with
// `supervise` the hint loss is accumulated against traj (which must carry
// rev_ hints when the model uses reversal).
Forward run_model(const model::Model& m, const Trajectory& traj, bool supervise);

// ---- metrics --------------------------------------------------------------
// Pointer and categorical outputs count one element per pointer / row,
// mask_one outputs one element per instance; mask outputs contribute the F1
// of their positive class weighted by their element count.
class MicroF1 {
 public:
  void add(const trace::FeatureSpec& spec, const trace::Values& predicted, const trace::Values& truth);
  double value() const;
  long elements() const;

 private:
  struct MaskCounts {
    long tp = 0, fp = 0, fn = 0, count = 0;
  };
  long match_correct_ = 0;
  long match_total_ = 0;
  std::map<std::string, MaskCounts> masks_;
};

double evaluate(const model::Model& m, const std::vector<Trajectory>& data);

// ---- training -------------------------------------------------------------
struct MetricsRow {
  std::string run_id;
  std::string algorithm;
  std::string mode;
  std::uint64_t seed = 0;
  long step = 0;
  std::string split;
  std::optional<double> micro_f1;
  std::optional<double> loss_total, loss_output, loss_hint, loss_contrastive, loss_kl;
};
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& r);
// Inverse of the writer; skips the header line. Throws on malformed rows.
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

struct TrainResult {
  std::string run_id;
  model::Model model;
  std::optional<relic::SimilarityHead> head;
  std::vector<MetricsRow> rows;
  double val_f1 = 0.0;
  double test_f1 = 0.0;
  double untrained_test_f1 = 0.0;
  bool aborted = false;
  std::string checkpoint;  // empty when no output directory was given
};

std::string run_id(const RunConfig& cfg, std::uint64_t seed);

// One seed of one mode. With a non-empty out_dir writes <run_id>.ckpt,
// <run_id>.json and appends nothing else; metrics rows are returned.
TrainResult train(const RunConfig& cfg, std::uint64_t seed, const std::string& out_dir = "",
                  std::ostream* progress = nullptr);

// Rebuilds a model from a checkpoint and its sidecar.
struct Loaded {
  model::Model model;
  RunConfig config;
  std::uint64_t seed = 0;
};
Loaded load_run(const std::string& checkpoint);

// ---- reporting ------------------------------------------------------------
struct Cell {
  double mean = 0.0;
  double se = 0.0;  // standard error
  int seeds = 0;
};
// Mean and standard error (sample sd / sqrt(k), 0 for a single value).
Cell aggregate(const std::vector<double>& values);

using MetricsTable = std::map<AlgorithmId, std::map<Mode, Cell>>;

// Final test micro-F1 of each run (largest step per run_id), aggregated over
// seeds per (algorithm, mode).
MetricsTable table_from_rows(const std::vector<MetricsRow>& rows);

// Aligned plain-text table; algorithms in canonical order, modes in report
// column order restricted to `modes`; missing cells print "-".
std::string ablation_report(const MetricsTable& table, const std::vector<Mode>& modes);
std::string ablation_csv(const MetricsTable& table, const std::vector<Mode>& modes);
std::string display_name(AlgorithmId id);

// Whether the ablation matrix trains `mode` for `id` (DFS skips the
// contrastive columns).
bool ablation_runs(AlgorithmId id, Mode mode);

// ---- gradient checks ------------------------------------------------------
struct GradcheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};
// Every differentiable primitive on random inputs, then the full relic loss
// for a few algorithms at n = 3 with parameters jittered off the relu kinks.
std::vector<GradcheckEntry> gradcheck_suite(std::uint64_t seed, bool include_model = true);

}  // namespace hintrelic::harness
