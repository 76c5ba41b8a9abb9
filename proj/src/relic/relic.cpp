#include "hintrelic/relic.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "hintrelic/rng.hpp"
#include "hintrelic/trace_io.hpp"

namespace hintrelic::relic {

using namespace ad;
using trace::Kind;
using trace::Location;

SimilarityHead::SimilarityHead(int width, double tau, std::uint64_t seed, bool normalize)
    : width_(width), tau_(tau), normalize_(normalize) {
  if (width < 1) throw std::invalid_argument("similarity head width must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be > 0");
  auto init = [&](const char* tag) {
    Rng rng(derive_seed(seed, tag));
    std::vector<double> w(static_cast<std::size_t>(width) * width);
    const double sd = 1.0 / std::sqrt(static_cast<double>(width));
    for (double& x : w) x = sd * rng.normal();
    return model::Linear{Tensor::from({width, width}, std::move(w), true),
                         Tensor::zeros({width}, true)};
  };
  l1_ = init("relic/head/1");
  l2_ = init("relic/head/2");
}

SimilarityHead SimilarityHead::identity(int width, double tau) {
  SimilarityHead h(width, tau, 0, false);
  h.identity_ = true;
  return h;
}

Tensor SimilarityHead::operator()(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != width_) {
    throw std::invalid_argument("similarity head expects [m, " + std::to_string(width_) + "], got " +
                                shape_str(x.shape()));
  }
  if (identity_) return x;
  Tensor y = l2_(relu(l1_(x)));
  if (!normalize_) return y;
  // y / sqrt(|y|^2 + eps), row by row.
  Tensor inv = exp(scale(log(add_scalar(sum(mul(y, y), 1, true), 1e-12)), -0.5));
  return mul(y, inv);
}

std::vector<Tensor> SimilarityHead::parameters() const {
  if (identity_) return {};
  return {l1_.W, l1_.b, l2_.W, l2_.b};
}

ad::NamedTensors SimilarityHead::named_parameters() const {
  if (identity_) return {};
  return {{"sim.1.W", l1_.W}, {"sim.1.b", l1_.b}, {"sim.2.W", l2_.W}, {"sim.2.b", l2_.b}};
}

Tensor phi(const Tensor& f1, const Tensor& f2, const SimilarityHead& head) {
  const auto w = static_cast<std::size_t>(head.width());
  if (f1.size() != w || f2.size() != w) {
    throw std::invalid_argument(fmt::format("phi: widths {} and {} do not match head width {}",
                                            f1.size(), f2.size(), w));
  }
  Tensor a = head(reshape(f1, {1, head.width()}));
  Tensor b = head(reshape(f2, {1, head.width()}));
  return scale(sum_all(mul(a, b)), 1.0 / head.tau());
}

Tensor similarity_rows(const Tensor& anchors, const Tensor& candidates, double tau) {
  const int I = anchors.dim(0);
  const int H = anchors.dim(1);
  return scale(sum(mul(reshape(anchors, {I, 1, H}), candidates), 2), 1.0 / tau);
}

Tensor contrastive_from_scores(const Tensor& scores, const std::vector<int>& positive,
                               bool include_positive) {
  const int I = scores.dim(0);
  const int c = scores.dim(1);
  if (c < 2 || I == 0) return {};
  std::vector<double> onehot(static_cast<std::size_t>(I) * c, 0.0);
  std::vector<double> exclude(static_cast<std::size_t>(I) * c, 0.0);
  for (int i = 0; i < I; ++i) {
    if (positive[i] < 0 || positive[i] >= c) throw std::out_of_range("positive index out of range");
    onehot[static_cast<std::size_t>(i) * c + positive[i]] = 1.0;
    exclude[static_cast<std::size_t>(i) * c + positive[i]] = -std::numeric_limits<double>::infinity();
  }
  Tensor pos = sum_all(mul(scores, Tensor::from({I, c}, std::move(onehot))));
  Tensor denom = include_positive ? scores : add(scores, Tensor::from({I, c}, std::move(exclude)));
  return sub(sum_all(logsumexp(denom, 1)), pos);
}

namespace {

Tensor anchors_of(const Tensor& cands, const std::vector<int>& positive) {
  const int I = cands.dim(0);
  const int c = cands.dim(1);
  const int H = cands.dim(2);
  std::vector<int> rows(I);
  for (int i = 0; i < I; ++i) rows[i] = i * c + positive[i];
  return gather(reshape(cands, {I * c, H}), rows);
}

Tensor map_rows(const SimilarityHead& head, const Tensor& x) {
  const int H = x.shape().back();
  const int I = x.dim(0);
  Tensor y = head(reshape(x, {static_cast<int>(x.size()) / H, H}));
  if (x.rank() == 3) return reshape(y, {I, x.dim(1), H});
  return y;
}

// Columns `cols` of scores [I, c] -> [I, cols.size()].
Tensor columns(const Tensor& scores, const std::vector<int>& cols) {
  return transpose(gather(transpose(scores), cols));
}

Tensor sum_defined(const Tensor& a, const Tensor& b) {
  if (!a) return b;
  if (!b) return a;
  return add(a, b);
}

}  // namespace

Tensor contrastive_step_loss(const ContrastViews& v, const SimilarityHead& head, bool include_positive) {
  if (v.anchors_a.dim(0) != v.anchors_b.dim(0)) {
    throw std::invalid_argument("contrastive_step_loss: anchor counts differ");
  }
  Tensor aa = map_rows(head, v.anchors_a);
  Tensor ab = map_rows(head, v.anchors_b);
  Tensor ca = map_rows(head, v.candidates_a);
  Tensor cb = map_rows(head, v.candidates_b);
  Tensor l1 = contrastive_from_scores(similarity_rows(aa, cb, head.tau()), v.positive_b, include_positive);
  Tensor l2 = contrastive_from_scores(similarity_rows(ab, ca, head.tau()), v.positive_a, include_positive);
  Tensor r = sum_defined(l1, l2);
  if (!r) throw std::invalid_argument("contrastive_step_loss: no negative candidates");
  return r;
}

Tensor kl_from_logits(const Tensor& p_logits, const Tensor& q_logits) {
  if (p_logits.shape() != q_logits.shape()) throw std::invalid_argument("kl: shape mismatch");
  if (p_logits.dim(1) < 2) return Tensor::scalar(0.0);
  Tensor lp = log_softmax(p_logits, 1);
  Tensor lq = log_softmax(q_logits, 1);
  return sum_all(mul(exp(lp), sub(lp, lq)));
}

Tensor kl_penalty(const Tensor& orig_anchor, const Tensor& aug_cands, const Tensor& aug_anchor,
                  const Tensor& orig_cands, const SimilarityHead& head) {
  if (aug_cands.dim(1) != orig_cands.dim(1)) {
    throw std::invalid_argument("kl_penalty: candidate sets differ in size");
  }
  Tensor p = similarity_rows(map_rows(head, orig_anchor), map_rows(head, aug_cands), head.tau());
  Tensor q = similarity_rows(map_rows(head, aug_anchor), map_rows(head, orig_cands), head.tau());
  return kl_from_logits(p, q);
}

int LossTerms::term_count() const {
  int c = 0;
  for (const auto& s : steps) c += s.masked_in ? s.terms : 0;
  return c;
}

Tensor output_loss(const model::Model& m, const model::Encoded& enc,
                   const model::ProcessorState& final_state, const trace::Trajectory& traj) {
  const model::StepView v = m.view(final_state, enc);
  Tensor total;
  for (const auto& spec : trace::features(m.algorithm(), trace::Stage::output)) {
    Tensor l = model::feature_loss(spec, m.decode_output(spec, v).logits, traj.outputs.at(spec.name),
                                   traj.instance.n);
    total = sum_defined(total, l);
  }
  return total ? total : Tensor::scalar(0.0);
}

namespace {

// Candidate sets of one contrasted hint at one step, in both views, already
// mapped through the similarity head.
struct Block {
  Tensor cand_base;  // [I, cb, H]
  Tensor cand_aug;   // [I, ca, H]
  std::vector<int> pos_base, pos_aug;
  std::vector<int> shared_aug;  // aug column of each base candidate
};

std::vector<int> iota_map(int k) {
  std::vector<int> r(k);
  for (int i = 0; i < k; ++i) r[i] = i;
  return r;
}

// Values of a contrasted hint at a frame; rev_ hints derive from their pointer.
trace::Values hint_value(const trace::SnapshotFrame& f, const std::string& name, int n) {
  if (name.rfind("rev_", 0) == 0) {
    const auto& p = f.hints.at(name.substr(4));
    trace::Values rev(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a) rev[static_cast<std::size_t>(p[a]) * n + a] = 1.0;
    return rev;
  }
  return f.hints.at(name);
}

// Builds the block from raw representations; `mapper` turns [rows, H] into
// the space the scores live in (the similarity head, or identity).
template <class Mapper>
Block make_block(const model::FeatureSpec& spec, const Tensor& rb, const Tensor& ra,
                 const trace::Values& value, const std::vector<int>& map, int n, int na, int H,
                 const Mapper& mapper) {
  Block b;
  auto flat = [&](const Tensor& r) { return mapper(reshape(r, {static_cast<int>(r.size()) / H, H})); };
  const Tensor fb = flat(rb);
  const Tensor fa = flat(ra);
  if (spec.kind == Kind::pointer && spec.location == Location::node) {
    b.cand_base = reshape(fb, {n, n, H});
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
      for (int u = 0; u < na; ++u) rows.push_back(map[i] * na + u);
    }
    b.cand_aug = reshape(gather(fa, rows), {n, na, H});
    for (int i = 0; i < n; ++i) {
      b.pos_base.push_back(static_cast<int>(value[i]));
      b.pos_aug.push_back(map[static_cast<int>(value[i])]);
    }
    b.shared_aug = map;
  } else if (spec.kind == Kind::pointer) {
    b.cand_base = reshape(fb, {n * n, n, H});
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < na; ++k) rows.push_back((map[i] * na + map[j]) * na + k);
        const int t = static_cast<int>(value[static_cast<std::size_t>(i) * n + j]);
        b.pos_base.push_back(t);
        b.pos_aug.push_back(map[t]);
      }
    }
    b.cand_aug = reshape(gather(fa, rows), {n * n, na, H});
    b.shared_aug = map;
  } else if (spec.location == Location::edge) {
    b.cand_base = reshape(fb, {n * n, 2, H});
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int c = 0; c < 2; ++c) rows.push_back((map[i] * na + map[j]) * 2 + c);
        const int c = static_cast<int>(value[static_cast<std::size_t>(i) * n + j]);
        b.pos_base.push_back(c);
        b.pos_aug.push_back(c);
      }
    }
    b.cand_aug = reshape(gather(fa, rows), {n * n, 2, H});
    b.shared_aug = iota_map(2);
  } else {
    const int k = model::repr_classes(spec);
    b.cand_base = reshape(fb, {n, k, H});
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) rows.push_back(map[i] * k + c);
      b.pos_base.push_back(static_cast<int>(value[i]));
      b.pos_aug.push_back(static_cast<int>(value[i]));
    }
    b.cand_aug = reshape(gather(fa, rows), {n, k, H});
    b.shared_aug = iota_map(k);
  }
  return b;
}

struct Lockstep {
  const model::Model& m;
  const aug::AugmentedPair& pair;
  model::Encoded enc_b, enc_a;
  model::ProcessorState s_b, s_a;

  Lockstep(const model::Model& model, const aug::AugmentedPair& p)
      : m(model),
        pair(p),
        enc_b(model.encode(p.base->instance)),
        enc_a(model.encode(p.aug_instance)),
        s_b(model.initial_state(p.base->instance.n)),
        s_a(model.initial_state(p.aug_instance.n)) {}

  void step() {
    s_b = m.process_step(s_b, enc_b);
    s_a = m.process_step(s_a, enc_a);
  }
};

void check_pair(const model::Model& m, const aug::AugmentedPair& pair) {
  if (!pair.base || pair.base->algorithm != m.algorithm() || pair.aug_instance.algorithm != m.algorithm()) {
    throw std::invalid_argument("relic_loss: model and instance algorithms differ");
  }
  if (static_cast<int>(pair.contrast_mask.size()) != pair.base->steps()) {
    throw std::invalid_argument("relic_loss: contrast mask length differs from trajectory");
  }
  if (static_cast<int>(pair.node_map.size()) != pair.base->instance.n) {
    throw std::invalid_argument("relic_loss: node map size differs from base n");
  }
}

}  // namespace

LossTerms relic_loss(const model::Model& m, const SimilarityHead& head, const aug::AugmentedPair& pair,
                     const RelicConfig& cfg) {
  check_pair(m, pair);
  if (m.config().mode != model::HintMode::relic) {
    throw std::invalid_argument("relic_loss: model is not in relic mode");
  }
  const int H = m.config().hidden_dim;
  if (head.width() != H) throw std::invalid_argument("relic_loss: head width differs from hidden_dim");
  const auto& traj = *pair.base;
  const int n = traj.instance.n;
  const int na = pair.aug_instance.n;
  const int T = traj.steps();
  const auto mapper = [&head](const Tensor& x) { return head(x); };

  std::vector<model::FeatureSpec> specs;
  for (const auto& spec : m.hint_specs()) {
    if (!cfg.use_reversal && spec.name.rfind("rev_", 0) == 0) continue;
    specs.push_back(spec);
  }

  LossTerms out;
  out.alpha = cfg.alpha;
  Lockstep run(m, pair);
  Tensor contr_total, kl_total;
  for (int t = 1; t <= T; ++t) {
    run.step();
    StepTerms st;
    st.step = t;
    st.masked_in = pair.contrast_mask[t - 1];
    if (st.masked_in) {
      const model::StepView vb = m.view(run.s_b, run.enc_b);
      const model::StepView va = m.view(run.s_a, run.enc_a);
      Tensor c_step, k_step;
      for (const auto& spec : specs) {
        const Tensor rb = m.decode_hint(spec, vb, true).repr;
        const Tensor ra = m.decode_hint(spec, va, true).repr;
        const auto value = hint_value(traj.frames[t - 1], spec.name, n);
        Block b = make_block(spec, rb, ra, value, pair.node_map, n, na, H, mapper);
        Tensor anchor_b = anchors_of(b.cand_base, b.pos_base);
        Tensor anchor_a = anchors_of(b.cand_aug, b.pos_aug);
        Tensor s_ba = similarity_rows(anchor_b, b.cand_aug, head.tau());  // [I, ca]
        Tensor s_ab = similarity_rows(anchor_a, b.cand_base, head.tau());  // [I, cb]
        Tensor c1 = contrastive_from_scores(s_ba, b.pos_aug, cfg.include_positive);
        Tensor c2 = contrastive_from_scores(s_ab, b.pos_base, cfg.include_positive);
        Tensor c = sum_defined(c1, c2);
        if (!c) continue;
        st.terms += anchor_b.dim(0);
        c_step = sum_defined(c_step, c);
        k_step = sum_defined(k_step, kl_from_logits(columns(s_ba, b.shared_aug), s_ab));
      }
      if (c_step) {
        st.contrastive = c_step.item();
        st.kl = k_step.item();
        contr_total = sum_defined(contr_total, c_step);
        kl_total = sum_defined(kl_total, k_step);
      } else {
        st.skipped = true;
      }
    }
    out.steps.push_back(st);
  }
  Tensor o = output_loss(m, run.enc_b, run.s_b, traj);
  out.contrastive_total = contr_total ? contr_total : Tensor::scalar(0.0);
  out.kl_total = kl_total ? kl_total : Tensor::scalar(0.0);
  out.total = add(add(o, out.contrastive_total), scale(out.kl_total, cfg.alpha));
  out.output_loss = o.item();
  out.contrastive = out.contrastive_total.item();
  out.kl = out.kl_total.item();
  return out;
}

namespace {

double cosine(const double* a, const double* b, int H) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int k = 0; k < H; ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  const double d = std::sqrt(aa) * std::sqrt(bb);
  return d > 0.0 ? ab / d : 0.0;
}

}  // namespace

void accumulate_similarity(const model::Model& m, const SimilarityHead& head,
                           const aug::AugmentedPair& pair, SimilarityStats& stats) {
  check_pair(m, pair);
  const int H = m.config().hidden_dim;
  const auto& traj = *pair.base;
  const int n = traj.instance.n;
  const int na = pair.aug_instance.n;
  const auto raw = [](const Tensor& x) { return x; };
  const auto mapped = [&head](const Tensor& x) { return head(x); };
  Lockstep run(m, pair);
  for (int t = 1; t <= traj.steps(); ++t) {
    run.step();
    if (!pair.contrast_mask[t - 1]) continue;
    const model::StepView vb = m.view(run.s_b, run.enc_b);
    const model::StepView va = m.view(run.s_a, run.enc_a);
    for (const auto& spec : m.hint_specs()) {
      const Tensor rb = m.decode_hint(spec, vb, true).repr;
      const Tensor ra = m.decode_hint(spec, va, true).repr;
      const auto value = hint_value(traj.frames[t - 1], spec.name, n);
      Block b = make_block(spec, rb, ra, value, pair.node_map, n, na, H, raw);
      const int I = b.cand_base.dim(0);
      const int cb = b.cand_base.dim(1);
      const int ca = b.cand_aug.dim(1);
      if (ca < 2) continue;
      const double* B = b.cand_base.data();
      const double* A = b.cand_aug.data();
      for (int i = 0; i < I; ++i) {
        const double* anchor = B + (static_cast<std::size_t>(i) * cb + b.pos_base[i]) * H;
        for (int u = 0; u < ca; ++u) {
          const double c = cosine(anchor, A + (static_cast<std::size_t>(i) * ca + u) * H, H);
          if (u == b.pos_aug[i]) {
            stats.positive += c;
            ++stats.positive_count;
          } else {
            stats.negative += c;
            ++stats.negative_count;
          }
        }
      }
      Block h = make_block(spec, rb, ra, value, pair.node_map, n, na, H, mapped);
      Tensor s_ba = similarity_rows(anchors_of(h.cand_base, h.pos_base), h.cand_aug, head.tau());
      Tensor s_ab = similarity_rows(anchors_of(h.cand_aug, h.pos_aug), h.cand_base, head.tau());
      stats.kl += kl_from_logits(columns(s_ba, h.shared_aug), s_ab).item();
    }
  }
}

std::string step_csv_header() { return "run_id,train_step,step,masked,contrastive,kl,terms"; }

std::string step_csv_rows(const std::string& run_id, long train_step, const LossTerms& terms) {
  std::ostringstream os;
  for (const auto& s : terms.steps) {
    os << run_id << ',' << train_step << ',' << s.step << ',' << (s.masked_in ? 1 : 0) << ','
       << trace::format_double(s.contrastive) << ',' << trace::format_double(s.kl) << ',' << s.terms
       << '\n';
  }
  return os.str();
}

}  // namespace hintrelic::relic
