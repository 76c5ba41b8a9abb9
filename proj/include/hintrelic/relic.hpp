#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hintrelic/augment.hpp"
#include "hintrelic/model.hpp"

namespace hintrelic::relic {

using ad::Tensor;

// h(x) = W2 relu(W1 x + b1) + b2 with every width equal to the
// representation width; phi(a, b) = <h(a), h(b)> / tau. With `normalize`
// the outputs of h are scaled to unit length, so phi is a cosine over tau.
class SimilarityHead {
 public:
  SimilarityHead(int width, double tau = 0.1, std::uint64_t seed = 0, bool normalize = true);
  // Test double: h is the identity map, no normalisation.
  static SimilarityHead identity(int width, double tau);

  int width() const { return width_; }
  double tau() const { return tau_; }
  bool is_identity() const { return identity_; }
  bool normalizes() const { return normalize_; }
  // Rows of x: [m, width] -> [m, width].
  Tensor operator()(const Tensor& x) const;
  std::vector<Tensor> parameters() const;
  ad::NamedTensors named_parameters() const;

 private:
  int width_;
  double tau_;
  bool identity_ = false;
  bool normalize_ = true;
  model::Linear l1_, l2_;
};

// <h(f1), h(f2)> / tau for two vectors of the head's width (any shape with
// that many elements). Throws std::invalid_argument on a width mismatch.
Tensor phi(const Tensor& f1, const Tensor& f2, const SimilarityHead& head);

// Similarities of anchors against candidates, both already mapped through h:
// anchors [I, H], candidates [I, c, H] -> [I, c] scaled by 1/tau.
Tensor similarity_rows(const Tensor& anchors, const Tensor& candidates, double tau);

// One direction of the contrastive term from a similarity matrix [I, c]:
//   sum_i -phi[i, pos_i] + log sum_{j != pos_i} exp(phi[i, j]),
// or with the positive kept in the denominator when include_positive is set.
// Returns an undefined tensor when no row has a negative.
Tensor contrastive_from_scores(const Tensor& scores, const std::vector<int>& positive,
                               bool include_positive = false);

// Symmetric contrastive loss for anchors and candidates given as raw
// representations: anchors_a[i] is contrasted against candidates_b[i][*]
// (positive positive_b[i]) and anchors_b[i] against candidates_a[i][*].
struct ContrastViews {
  Tensor anchors_a;     // [I, H]
  Tensor candidates_a;  // [I, ca, H]
  std::vector<int> positive_a;
  Tensor anchors_b;     // [I, H]
  Tensor candidates_b;  // [I, cb, H]
  std::vector<int> positive_b;
};
Tensor contrastive_step_loss(const ContrastViews& v, const SimilarityHead& head,
                             bool include_positive = false);

// KL(p || q) summed over rows, p and q given as logits [I, c] over a shared
// candidate set. A single-candidate set contributes 0.
Tensor kl_from_logits(const Tensor& p_logits, const Tensor& q_logits);

// p(j) ~ exp(phi(f_orig(i), f_aug(j))), q(j) ~ exp(phi(f_aug(i), f_orig(j)))
// over the shared candidates; returns KL(p || q) summed over rows.
// orig_anchor, aug_anchor: [I, H]; orig_cands, aug_cands: [I, c, H].
Tensor kl_penalty(const Tensor& orig_anchor, const Tensor& aug_cands, const Tensor& aug_anchor,
                  const Tensor& orig_cands, const SimilarityHead& head);

struct RelicConfig {
  double alpha = 1.0;
  bool include_positive = false;
  // Also contrast the rev_ hints of contrasted node pointers.
  bool use_reversal = true;
};

struct StepTerms {
  int step = 0;
  bool masked_in = false;
  double contrastive = 0.0;
  double kl = 0.0;
  int terms = 0;             // contrasted (hint, index) rows this step
  bool skipped = false;      // no negatives anywhere this step
};

struct LossTerms {
  Tensor total;              // differentiable
  Tensor contrastive_total;  // differentiable, sum over masked steps
  Tensor kl_total;           // differentiable, sum over masked steps
  double output_loss = 0.0;
  double contrastive = 0.0;
  double kl = 0.0;
  double alpha = 1.0;
  std::vector<StepTerms> steps;
  int term_count() const;
};

// Output loss of the base trajectory after T processor steps, summed over
// output features.
Tensor output_loss(const model::Model& m, const model::Encoded& enc,
                   const model::ProcessorState& final_state, const trace::Trajectory& traj);

// Runs base and augmented inputs in lockstep for T_base steps and
// accumulates contrastive + alpha * KL on contrast-masked steps, plus the
// base output loss.
LossTerms relic_loss(const model::Model& m, const SimilarityHead& head, const aug::AugmentedPair& pair,
                     const RelicConfig& cfg);

// Mean cosine similarity of (anchor, positive) and of (anchor, negative)
// raw representations over a pair's masked steps and contrasted pointer /
// class hints.
struct SimilarityStats {
  double positive = 0.0;
  double negative = 0.0;
  double kl = 0.0;
  long positive_count = 0;
  long negative_count = 0;
};
void accumulate_similarity(const model::Model& m, const SimilarityHead& head,
                           const aug::AugmentedPair& pair, SimilarityStats& stats);

std::string step_csv_header();
std::string step_csv_rows(const std::string& run_id, long train_step, const LossTerms& terms);

}  // namespace hintrelic::relic
