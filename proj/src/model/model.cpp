#include "hintrelic/model.hpp"

#include <cmath>
#include <stdexcept>

#include "hintrelic/augment.hpp"
#include "hintrelic/rng.hpp"

namespace hintrelic::model {

using namespace ad;
using trace::Kind;
using trace::Location;

namespace {

Tensor rows_of(const Tensor& t, int rows) { return reshape(t, {rows, static_cast<int>(t.size()) / rows}); }

int feature_rows(Location loc, int n) {
  return loc == Location::node ? n : loc == Location::edge ? n * n : 1;
}

bool class_like(const FeatureSpec& spec) {
  if (spec.location == Location::edge) return spec.kind == Kind::mask;
  return spec.location == Location::node &&
         (spec.kind == Kind::mask || spec.kind == Kind::mask_one || spec.kind == Kind::categorical);
}

}  // namespace

int repr_classes(const FeatureSpec& spec) {
  return spec.kind == Kind::categorical ? spec.num_classes : 2;
}

Tensor Linear::operator()(const Tensor& x) const { return b ? add(matmul(x, W), b) : matmul(x, W); }

struct Model::Head {
  Linear a, b, c, out;  // pair-scored heads
  Linear lin;           // per-node or pooled heads
  Linear repr_w;        // class-conditioned representation
  Tensor class_emb;     // [k, H]
};

Linear Model::linear(const std::string& name, int in, int out, bool bias) {
  Rng rng(derive_seed(config_.seed, "model/init/" + name, init_counter_++));
  std::vector<double> w(static_cast<std::size_t>(in) * out);
  const double sd = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : w) x = sd * rng.normal();
  Linear l{Tensor::from({in, out}, std::move(w), true), bias ? Tensor::zeros({out}, true) : Tensor()};
  params_[name + ".W"] = l.W;
  if (bias) params_[name + ".b"] = l.b;
  return l;
}

std::shared_ptr<Model::Head> Model::make_head(const std::string& prefix, const FeatureSpec& spec,
                                              bool repr) {
  const int H = config_.hidden_dim;
  auto head = std::make_shared<Head>();
  const bool pair_scored = spec.kind == Kind::pointer || spec.location == Location::edge;
  if (pair_scored) {
    const bool triple = spec.kind == Kind::pointer && spec.location == Location::edge;
    const int src = triple ? H : 2 * H;
    head->a = linear(prefix + ".a", src, H);
    // Terms summed with a's output carry no bias of their own.
    head->b = linear(prefix + ".b", src, H, false);
    head->c = linear(prefix + ".c", H, H, triple);
    head->out = linear(prefix + ".out", H, 1);
  } else {
    const int k = spec.kind == Kind::categorical ? spec.num_classes : 1;
    head->lin = linear(prefix + ".lin", 2 * H, k);
  }
  if (repr && class_like(spec)) {
    head->repr_w = linear(prefix + ".repr", spec.location == Location::edge ? H : 2 * H, H);
    Rng rng(derive_seed(config_.seed, "model/init/" + prefix + ".class_emb"));
    std::vector<double> e(static_cast<std::size_t>(repr_classes(spec)) * H);
    for (double& x : e) x = rng.normal();
    head->class_emb = Tensor::from({repr_classes(spec), H}, std::move(e), true);
    params_[prefix + ".class_emb"] = head->class_emb;
  }
  return head;
}

Model::Model(AlgorithmId algorithm, ModelConfig config)
    : algorithm_(algorithm), config_(config) {
  if (config_.hidden_dim < 1 || config_.triplet_dim < 1) {
    throw std::invalid_argument("model dimensions must be >= 1");
  }
  const int H = config_.hidden_dim;
  const int Tt = config_.triplet_dim;
  const int Z = 2 * H;

  for (const auto& spec : trace::features(algorithm, trace::Stage::input)) {
    const int k = spec.kind == Kind::categorical ? spec.num_classes : 1;
    encoders_["in:" + spec.name] = {linear("enc.in." + spec.name, k, H)};
  }
  if (config_.mode != HintMode::no_hints) {
    std::vector<FeatureSpec> pool;
    if (config_.mode == HintMode::relic) {
      for (const auto& name : aug::hint_targets(algorithm)) pool.push_back(trace::find_feature(algorithm, name));
    } else {
      pool = trace::features(algorithm, trace::Stage::hint);
    }
    hint_specs_ = pool;
    if (config_.use_reversal) {
      for (const auto& spec : pool) {
        if (spec.kind == Kind::pointer && spec.location == Location::node) {
          hint_specs_.push_back({"rev_" + spec.name, trace::Stage::hint, Location::edge, Kind::mask, 0});
        }
      }
    }
    for (const auto& spec : hint_specs_) {
      hint_heads_[spec.name] = make_head("dec.hint." + spec.name, spec, config_.mode == HintMode::relic);
      if (config_.mode == HintMode::baseline) {
        std::vector<Linear> enc;
        if (spec.kind == Kind::pointer && spec.location == Location::edge) {
          enc = {linear("enc.hint." + spec.name + ".row", 1, H),
                 linear("enc.hint." + spec.name + ".col", 1, H)};
        } else {
          const int k = spec.kind == Kind::categorical ? spec.num_classes : 1;
          enc = {linear("enc.hint." + spec.name, k, H)};
        }
        encoders_["hint:" + spec.name] = std::move(enc);
      }
    }
  }
  for (const auto& spec : trace::features(algorithm, trace::Stage::output)) {
    out_heads_[spec.name] = make_head("dec.out." + spec.name, spec, false);
  }

  m_s_ = linear("proc.msg.sender", Z, H);
  m_r_ = linear("proc.msg.receiver", Z, H, false);
  m_e_ = linear("proc.msg.edge", H, H, false);
  m_g_ = linear("proc.msg.graph", H, H);
  m_2_ = linear("proc.msg.out", H, H);
  o_1_ = linear("proc.cand.self", Z, H);
  o_2_ = linear("proc.cand.agg", H, H, false);
  g_1_ = linear("proc.gate.self", Z, H);
  g_2_ = linear("proc.gate.agg", H, H, false);
  t_1_ = linear("proc.tri.i", Z, Tt);
  t_2_ = linear("proc.tri.j", Z, Tt, false);
  t_3_ = linear("proc.tri.k", Z, Tt, false);
  t_e1_ = linear("proc.tri.ij", H, Tt, false);
  t_e2_ = linear("proc.tri.ik", H, Tt, false);
  t_e3_ = linear("proc.tri.kj", H, Tt, false);
  t_g_ = linear("proc.tri.g", H, Tt);
  t_o_ = linear("proc.tri.out", Tt, H);
}

Tensor Model::encode_feature(const std::string& key, const FeatureSpec& spec, const Tensor& value,
                             int n) const {
  const auto& enc = encoders_.at(key);
  if (spec.kind == Kind::pointer && spec.location == Location::node) {
    return enc[0](reshape(value, {n * n, 1}));
  }
  if (spec.kind == Kind::pointer) {
    // value [i, j, k]: encode the two marginals over j and over i.
    Tensor row = scale(sum(value, 1), 1.0 / n);                  // [i, k]
    Tensor col = transpose(scale(sum(value, 0), 1.0 / n));       // [k, j]
    return add(enc[0](reshape(row, {n * n, 1})), enc[1](reshape(col, {n * n, 1})));
  }
  const int rows = feature_rows(spec.location, n);
  return enc[0](rows_of(value, rows));
}

Encoded Model::encode(const GraphInstance& g) const {
  const int n = g.n;
  const int H = config_.hidden_dim;
  Encoded e{n, Tensor::zeros({n, H}), Tensor::zeros({n * n, H}), Tensor::zeros({1, H})};
  for (const auto& spec : trace::features(algorithm_, trace::Stage::input)) {
    Tensor v = hard_encoding(spec, g.input(spec.name), n);
    Tensor x = encode_feature("in:" + spec.name, spec, v, n);
    switch (spec.location) {
      case Location::node: e.node = add(e.node, x); break;
      case Location::edge: e.edge = add(e.edge, x); break;
      case Location::graph: e.graph = add(e.graph, x); break;
    }
  }
  return e;
}

Encoded Model::with_hints(const Encoded& base, const std::map<std::string, Tensor>& soft) const {
  Encoded e = base;
  for (const auto& spec : hint_specs_) {
    auto it = soft.find(spec.name);
    if (it == soft.end()) continue;
    Tensor x = encode_feature("hint:" + spec.name, spec, it->second, e.n);
    if (spec.kind == Kind::pointer) {
      e.edge = add(e.edge, x);
      continue;
    }
    switch (spec.location) {
      case Location::node: e.node = add(e.node, x); break;
      case Location::edge: e.edge = add(e.edge, x); break;
      case Location::graph: e.graph = add(e.graph, x); break;
    }
  }
  return e;
}

ProcessorState Model::initial_state(int n) const {
  const int H = config_.hidden_dim;
  return {Tensor::zeros({n, H}), Tensor::zeros({n * n, H}), 0};
}

ProcessorState Model::process_step(const ProcessorState& s, const Encoded& enc) const {
  const int n = enc.n;
  const int H = config_.hidden_dim;
  const int Tt = config_.triplet_dim;
  const Tensor z = concat({enc.node, s.h}, 1);  // [n, 2H]
  const Tensor e = add(enc.edge, s.e);          // [n*n, H]

  // Messages m_ij from sender j to receiver i, max-aggregated over j.
  Tensor pre = add(add(reshape(m_s_(z), {n, 1, H}), reshape(matmul(z, m_r_.W), {1, n, H})),
                   add(reshape(matmul(e, m_e_.W), {n, n, H}), reshape(m_g_(enc.graph), {1, 1, H})));
  Tensor msg = m_2_(reshape(relu(pre), {n * n, H}));
  Tensor agg = max(reshape(msg, {n, n, H}), 1);  // [n, H]

  Tensor cand = relu(add(o_1_(z), matmul(agg, o_2_.W)));
  Tensor gate = sigmoid(add(g_1_(z), matmul(agg, g_2_.W)));
  Tensor h = add(s.h, mul(gate, sub(cand, s.h)));

  // Triplets t_ijk, max over k, read out into the new edge state.
  Tensor a = add(add(reshape(t_1_(z), {n, 1, 1, Tt}), reshape(matmul(z, t_2_.W), {1, n, 1, Tt})),
                 add(reshape(matmul(e, t_e1_.W), {n, n, 1, Tt}),
                     reshape(t_g_(enc.graph), {1, 1, 1, Tt})));
  Tensor kj = permute(reshape(matmul(e, t_e3_.W), {n, n, Tt}), {1, 0, 2});  // [j, k]
  Tensor b = add(reshape(matmul(z, t_3_.W), {1, 1, n, Tt}), reshape(kj, {1, n, n, Tt}));
  Tensor t = add(add(a, reshape(matmul(e, t_e2_.W), {n, 1, n, Tt})), b);
  Tensor tmax = max(t, 2);  // [n, n, Tt]
  Tensor e_new = relu(t_o_(reshape(tmax, {n * n, Tt})));
  return {h, e_new, s.step + 1};
}

StepView Model::view(const ProcessorState& s, const Encoded& enc) const {
  return {enc.n, concat({enc.node, s.h}, 1), add(enc.edge, s.e)};
}

HeadOut Model::run_head(const Head& head, const FeatureSpec& spec, const StepView& v,
                        bool want_repr) const {
  const int n = v.n;
  const int H = config_.hidden_dim;
  HeadOut r;
  if (spec.kind == Kind::pointer && spec.location == Location::edge) {
    Tensor ik = reshape(matmul(v.e, head.a.W), {n, 1, n, H});
    Tensor kj = permute(reshape(matmul(v.e, head.b.W), {n, n, H}), {1, 0, 2});
    Tensor ij = reshape(head.c(v.e), {n, n, 1, H});
    Tensor zt = relu(add(add(ik, reshape(kj, {1, n, n, H})), ij));
    r.logits = reshape(head.out(reshape(zt, {n * n * n, H})), {n, n, n});
    r.repr = zt;
    return r;
  }
  if (spec.kind == Kind::pointer || spec.location == Location::edge) {
    const Tensor& src = v.u;
    Tensor zp = relu(add(add(reshape(head.a(src), {n, 1, H}), reshape(matmul(src, head.b.W), {1, n, H})),
                         reshape(matmul(v.e, head.c.W), {n, n, H})));
    r.logits = reshape(head.out(reshape(zp, {n * n, H})), {n, n});
    if (spec.kind == Kind::pointer) {
      r.repr = zp;
    } else if (want_repr && head.class_emb) {
      Tensor base = reshape(head.repr_w(reshape(zp, {n * n, H})), {n, n, 1, H});
      r.repr = relu(add(base, reshape(head.class_emb, {1, 1, 2, H})));
    }
    return r;
  }
  const int k = spec.kind == Kind::categorical ? spec.num_classes : 1;
  if (spec.location == Location::graph) {
    Tensor pooled = max(v.u, 0, true);  // [1, 2H]
    Tensor y = head.lin(pooled);
    r.logits = k == 1 ? reshape(y, {1}) : y;
  } else {
    Tensor y = head.lin(v.u);
    r.logits = k == 1 ? reshape(y, {n}) : y;
  }
  if (want_repr && head.class_emb) {
    const int c = repr_classes(spec);
    r.repr = relu(add(reshape(head.repr_w(v.u), {n, 1, H}), reshape(head.class_emb, {1, c, H})));
  }
  return r;
}

HeadOut Model::decode_output(const FeatureSpec& spec, const StepView& v) const {
  return run_head(*out_heads_.at(spec.name), spec, v, false);
}

HeadOut Model::decode_hint(const FeatureSpec& spec, const StepView& v, bool want_repr) const {
  auto it = hint_heads_.find(spec.name);
  if (it == hint_heads_.end()) throw std::invalid_argument("no hint head for " + spec.name);
  return run_head(*it->second, spec, v, want_repr);
}

Tensor Model::hint_repr(const FeatureSpec& spec, const StepView& v, int index,
                        std::optional<int> target_or_class, int candidate) const {
  const int n = v.n;
  const int H = config_.hidden_dim;
  if (index < 0 || index >= n) throw std::out_of_range("hint_repr: node index out of range");
  HeadOut o = decode_hint(spec, v, true);
  if (!o.repr) throw std::invalid_argument("hint_repr: " + spec.name + " has no representation");
  if (spec.kind == Kind::pointer && spec.location == Location::node) {
    const int j = target_or_class.value_or(-1);
    if (j < 0 || j >= n) throw std::out_of_range("hint_repr: target out of range");
    return slice(reshape(o.repr, {n * n, H}), 0, index * n + j, 1);
  }
  if (spec.kind == Kind::pointer) {
    const int j = target_or_class.value_or(-1);
    if (j < 0 || j >= n || candidate < 0 || candidate >= n) {
      throw std::out_of_range("hint_repr: pair or candidate out of range");
    }
    return slice(reshape(o.repr, {n * n * n, H}), 0, (index * n + j) * n + candidate, 1);
  }
  if (spec.location == Location::edge) {
    const int j = target_or_class.value_or(-1);
    if (j < 0 || j >= n || candidate < 0 || candidate > 1) {
      throw std::out_of_range("hint_repr: pair or class out of range");
    }
    return slice(reshape(o.repr, {n * n * 2, H}), 0, (index * n + j) * 2 + candidate, 1);
  }
  const int c = target_or_class.value_or(-1);
  if (c < 0 || c >= repr_classes(spec)) throw std::out_of_range("hint_repr: class out of range");
  return slice(reshape(o.repr, {n * repr_classes(spec), H}), 0, index * repr_classes(spec) + c, 1);
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> r;
  for (const auto& [name, t] : params_) r.push_back(t);
  return r;
}

ad::NamedTensors Model::named_parameters() const { return params_; }

void Model::zero_parameters() {
  for (auto& [name, t] : params_) std::fill(t.value().begin(), t.value().end(), 0.0);
}

Tensor hard_encoding(const FeatureSpec& spec, const Values& v, int n) {
  if (spec.kind == Kind::pointer || spec.kind == Kind::categorical) return target_tensor(spec, v, n);
  return Tensor::from({feature_rows(spec.location, n), 1}, v);
}

Tensor target_tensor(const FeatureSpec& spec, const Values& v, int n) {
  if (spec.kind == Kind::pointer) {
    const int rows = feature_rows(spec.location, n);
    std::vector<double> oh(static_cast<std::size_t>(rows) * n, 0.0);
    for (int i = 0; i < rows; ++i) oh[static_cast<std::size_t>(i) * n + static_cast<int>(v[i])] = 1.0;
    return spec.location == Location::node ? Tensor::from({n, n}, std::move(oh))
                                           : Tensor::from({n, n, n}, std::move(oh));
  }
  if (spec.kind == Kind::categorical) {
    const int rows = feature_rows(spec.location, n);
    const int k = spec.num_classes;
    std::vector<double> oh(static_cast<std::size_t>(rows) * k, 0.0);
    for (int i = 0; i < rows; ++i) oh[static_cast<std::size_t>(i) * k + static_cast<int>(v[i])] = 1.0;
    return Tensor::from({rows, k}, std::move(oh));
  }
  return Tensor::from({static_cast<int>(v.size())}, v);
}

Tensor feature_loss(const FeatureSpec& spec, const Tensor& logits, const Values& target, int n) {
  const Tensor y = target_tensor(spec, target, n);
  switch (spec.kind) {
    case Kind::pointer: {
      const int axis = logits.rank() - 1;
      const double rows = static_cast<double>(logits.size() / n);
      return scale(sum_all(mul(log_softmax(logits, axis), y)), -1.0 / rows);
    }
    case Kind::categorical: {
      const double rows = static_cast<double>(logits.dim(0));
      return scale(sum_all(mul(log_softmax(logits, 1), y)), -1.0 / rows);
    }
    case Kind::mask_one: {
      Tensor flat = reshape(logits, {static_cast<int>(logits.size())});
      return scale(sum_all(mul(log_softmax(flat, 0), y)), -1.0);
    }
    case Kind::mask: {
      const int m = static_cast<int>(logits.size());
      Tensor x = reshape(logits, {m, 1});
      Tensor softplus = logsumexp(concat({Tensor::zeros({m, 1}), x}, 1), 1);  // [m]
      Tensor bce = sub(softplus, mul(reshape(x, {m}), y));
      return scale(sum_all(bce), 1.0 / m);
    }
    case Kind::scalar: {
      Tensor d = sub(reshape(logits, {static_cast<int>(logits.size())}), y);
      return scale(sum_all(mul(d, d)), 1.0 / static_cast<double>(d.size()));
    }
  }
  throw std::invalid_argument("feature_loss: unknown kind");
}

Values predict(const FeatureSpec& spec, const Tensor& logits, int n) {
  switch (spec.kind) {
    case Kind::pointer:
    case Kind::categorical: {
      auto idx = argmax(logits, logits.rank() - 1);
      return Values(idx.begin(), idx.end());
    }
    case Kind::mask_one: {
      Tensor flat = reshape(detach(logits), {static_cast<int>(logits.size())});
      Values out(logits.size(), 0.0);
      out[static_cast<std::size_t>(argmax(flat, 0)[0])] = 1.0;
      return out;
    }
    case Kind::mask: {
      Values out(logits.size());
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = logits.at(k) > 0.0 ? 1.0 : 0.0;
      return out;
    }
    case Kind::scalar:
      return logits.value();
  }
  (void)n;
  return {};
}

Tensor soft_prediction(const FeatureSpec& spec, const Tensor& logits, int n) {
  const Tensor x = detach(logits);
  const int rows = feature_rows(spec.location, n);
  switch (spec.kind) {
    case Kind::pointer:
      return softmax(x, x.rank() - 1);
    case Kind::categorical:
      return softmax(x, 1);
    case Kind::mask_one:
      return reshape(softmax(reshape(x, {rows}), 0), {rows, 1});
    case Kind::mask:
      return reshape(sigmoid(x), {rows, 1});
    case Kind::scalar:
      return reshape(x, {rows, 1});
  }
  return x;
}

}  // namespace hintrelic::model
