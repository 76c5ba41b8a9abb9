#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hintrelic/tensor.hpp"
#include "hintrelic/trace.hpp"

namespace hintrelic::model {

using ad::Tensor;
using trace::AlgorithmId;
using trace::FeatureSpec;
using trace::GraphInstance;
using trace::Values;

// How hints take part in training.
//   no_hints: hints are ignored entirely.
//   baseline: hints are decoded, supervised and fed back (soft, detached).
//   relic:    hints only provide representations for the contrastive loss.
enum class HintMode { no_hints, baseline, relic };

struct ModelConfig {
  int hidden_dim = 128;
  int triplet_dim = 8;
  bool use_reversal = false;
  HintMode mode = HintMode::relic;
  std::uint64_t seed = 0;
};

struct Linear {
  Tensor W;  // [in, out]
  Tensor b;  // [out], undefined for bias-free layers
  Tensor operator()(const Tensor& x) const;  // x: [rows, in]
};

// Encoder output for one step, summed per location.
struct Encoded {
  int n = 0;
  Tensor node;   // [n, H]
  Tensor edge;   // [n*n, H]
  Tensor graph;  // [1, H]
};

struct ProcessorState {
  Tensor h;  // [n, H]
  Tensor e;  // [n*n, H]
  int step = 0;
};

// Decoder inputs after a processor step.
struct StepView {
  int n = 0;
  Tensor u;  // [n, 2H]: encoded node inputs next to the latent state
  Tensor e;  // [n*n, H]: encoded edge inputs plus latent edges
};

// Logits for one feature plus, for hint heads, the representation tensor
// f(X_t, .) the contrastive objective reads from:
//   node pointer  -> logits [n, n],    repr [n, n, H]     (source, target)
//   edge pointer  -> logits [n, n, n], repr [n, n, n, H]  (i, j, candidate)
//   node class-like (mask, mask_one, categorical) -> repr [n, k, H]
//   edge mask     -> logits [n, n],    repr [n, n, 2, H]  (i, j, class)
struct HeadOut {
  Tensor logits;
  Tensor repr;
};

// Number of classes a hint's class-conditioned representation uses.
int repr_classes(const FeatureSpec& spec);

class Model {
 public:
  Model(AlgorithmId algorithm, ModelConfig config);

  const ModelConfig& config() const { return config_; }
  AlgorithmId algorithm() const { return algorithm_; }
  // Hint specs the model decodes: every schema hint in baseline mode, the
  // contrasted ones in relic mode, plus rev_ hints when reversal is on.
  const std::vector<FeatureSpec>& hint_specs() const { return hint_specs_; }

  // Input features only; every step re-adds this encoding.
  Encoded encode(const GraphInstance& instance) const;
  // Adds encodings of (soft) hint values, keyed by hint name.
  Encoded with_hints(const Encoded& base, const std::map<std::string, Tensor>& soft) const;

  ProcessorState initial_state(int n) const;
  ProcessorState process_step(const ProcessorState& s, const Encoded& enc) const;
  StepView view(const ProcessorState& s, const Encoded& enc) const;

  HeadOut decode_output(const FeatureSpec& spec, const StepView& v) const;
  HeadOut decode_hint(const FeatureSpec& spec, const StepView& v, bool want_repr) const;

  // f(X_t, I_t) for a single index: `index` is a node (node hints), node pair
  // (node pointers, via `target`), pair plus candidate (edge pointers) or
  // pair plus class (edge masks, class in `candidate`).
  Tensor hint_repr(const FeatureSpec& spec, const StepView& v, int index,
                   std::optional<int> target_or_class = std::nullopt, int candidate = -1) const;

  std::vector<Tensor> parameters() const;
  ad::NamedTensors named_parameters() const;
  // Zeroes every parameter (weights and biases).
  void zero_parameters();

 private:
  struct Head;
  Linear linear(const std::string& name, int in, int out, bool bias = true);
  std::shared_ptr<Head> make_head(const std::string& prefix, const FeatureSpec& spec, bool repr);
  HeadOut run_head(const Head& head, const FeatureSpec& spec, const StepView& v,
                   bool want_repr) const;
  Tensor encode_feature(const std::string& key, const FeatureSpec& spec, const Tensor& value,
                        int n) const;

  AlgorithmId algorithm_;
  ModelConfig config_;
  std::vector<FeatureSpec> hint_specs_;
  std::map<std::string, Tensor> params_;
  std::map<std::string, std::vector<Linear>> encoders_;
  std::map<std::string, std::shared_ptr<Head>> out_heads_;
  std::map<std::string, std::shared_ptr<Head>> hint_heads_;
  std::uint64_t init_counter_ = 0;

  // Processor.
  Linear m_s_, m_r_, m_e_, m_g_, m_2_;
  Linear o_1_, o_2_, g_1_, g_2_;
  Linear t_1_, t_2_, t_3_, t_e1_, t_e2_, t_e3_, t_g_, t_o_;
};

// Feature value as a constant tensor in model layout:
//   pointer (node) -> one-hot [n, n]; pointer (edge) -> one-hot [n, n, n];
//   categorical -> one-hot [rows, k]; everything else -> [rows].
Tensor target_tensor(const FeatureSpec& spec, const Values& v, int n);

// Per-feature loss, averaged over elements: cross-entropy for pointer,
// mask_one and categorical, binary cross-entropy for mask, squared error
// for scalar.
Tensor feature_loss(const FeatureSpec& spec, const Tensor& logits, const Values& target, int n);

// Hard prediction in trace layout (pointer indices, 0/1 masks, classes, reals).
Values predict(const FeatureSpec& spec, const Tensor& logits, int n);

// Soft, detached prediction used as the next step's hint input.
Tensor soft_prediction(const FeatureSpec& spec, const Tensor& logits, int n);
// Ground-truth value in the same layout as soft_prediction.
Tensor hard_encoding(const FeatureSpec& spec, const Values& v, int n);

}  // namespace hintrelic::model
