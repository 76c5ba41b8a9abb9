#include <functional>

#include "hintrelic/harness.hpp"
#include "hintrelic/rng.hpp"

namespace hintrelic::harness {

namespace {

using ad::Shape;
using ad::Tensor;

Tensor random_leaf(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(ad::numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v), true);
}

// sum(w * f) with fixed random w, so every output coordinate matters.
GradcheckEntry check(const std::string& name, Rng& rng, std::vector<Tensor> leaves,
                     const std::function<Tensor()>& f) {
  Tensor probe = f();
  std::vector<double> w(probe.size());
  for (double& x : w) x = rng.uniform(-1.0, 1.0);
  const Tensor weights = Tensor::from(probe.shape(), w);
  auto loss = [&] { return ad::sum_all(ad::mul(f(), weights)); };
  const auto r = ad::gradcheck(loss, std::move(leaves), 1e-5, 0, 1e-3, rng.next_u64());
  return {name, r.max_rel_error, r.checked, r.worst};
}

}  // namespace

std::vector<GradcheckEntry> gradcheck_suite(std::uint64_t seed, bool include_model) {
  Rng rng(derive_seed(seed, "gradcheck/primitives"));
  std::vector<GradcheckEntry> out;
  const Tensor a = random_leaf(rng, {3, 4});
  const Tensor b = random_leaf(rng, {3, 4});
  const Tensor row = random_leaf(rng, {1, 4});
  const Tensor m = random_leaf(rng, {4, 2});
  const Tensor pos = random_leaf(rng, {3, 4}, 0.5, 2.0);
  const Tensor cube = random_leaf(rng, {2, 3, 4});
  const Tensor vec = random_leaf(rng, {3});

  out.push_back(check("add", rng, {a, row}, [&] { return ad::add(a, row); }));
  out.push_back(check("sub", rng, {a, b}, [&] { return ad::sub(a, b); }));
  out.push_back(check("mul", rng, {a, row}, [&] { return ad::mul(a, row); }));
  out.push_back(check("scale", rng, {a}, [&] { return ad::scale(a, -2.5); }));
  out.push_back(check("add_scalar", rng, {a}, [&] { return ad::add_scalar(a, 0.7); }));
  out.push_back(check("matmul", rng, {a, m}, [&] { return ad::matmul(a, m); }));
  out.push_back(check("relu", rng, {a}, [&] { return ad::relu(a); }));
  out.push_back(check("sigmoid", rng, {a}, [&] { return ad::sigmoid(a); }));
  out.push_back(check("tanh", rng, {a}, [&] { return ad::tanh(a); }));
  out.push_back(check("exp", rng, {a}, [&] { return ad::exp(a); }));
  out.push_back(check("log", rng, {pos}, [&] { return ad::log(pos); }));
  out.push_back(check("concat", rng, {a, b}, [&] { return ad::concat({a, b}, 1); }));
  out.push_back(check("slice", rng, {cube}, [&] { return ad::slice(cube, 2, 1, 2); }));
  out.push_back(check("broadcast_to", rng, {row}, [&] { return ad::broadcast_to(row, {3, 4}); }));
  out.push_back(check("reshape", rng, {cube}, [&] { return ad::reshape(cube, {6, 4}); }));
  out.push_back(check("permute", rng, {cube}, [&] { return ad::permute(cube, {2, 0, 1}); }));
  out.push_back(check("transpose", rng, {a}, [&] { return ad::transpose(a); }));
  out.push_back(check("sum", rng, {cube}, [&] { return ad::sum(cube, 1); }));
  out.push_back(check("mean", rng, {cube}, [&] { return ad::mean(cube, 2, true); }));
  out.push_back(check("sum_all", rng, {a}, [&] { return ad::sum_all(a); }));
  out.push_back(check("max", rng, {cube}, [&] { return ad::max(cube, 1); }));
  out.push_back(check("logsumexp", rng, {a}, [&] { return ad::logsumexp(a, 1); }));
  out.push_back(check("softmax", rng, {a}, [&] { return ad::softmax(a, 1); }));
  out.push_back(check("log_softmax", rng, {a}, [&] { return ad::log_softmax(a, 0); }));
  out.push_back(check("gather", rng, {a}, [&] { return ad::gather(a, {2, 0, 2, 1}); }));
  out.push_back(check("scatter_add", rng, {a}, [&] { return ad::scatter_add(a, {1, 1, 0}, 2); }));
  out.push_back(check("mul_vec", rng, {vec}, [&] { return ad::mul(vec, vec); }));

  if (!include_model) return out;

  for (auto id : {AlgorithmId::bubble_sort, AlgorithmId::minimum, AlgorithmId::bfs, AlgorithmId::dfs}) {
    model::ModelConfig mc;
    mc.hidden_dim = 8;
    mc.triplet_dim = 4;
    mc.use_reversal = true;
    mc.mode = model::HintMode::relic;
    mc.seed = derive_seed(seed, "gradcheck/model");
    model::Model net(id, mc);
    relic::SimilarityHead head(mc.hidden_dim, 0.1, derive_seed(seed, "gradcheck/head"));
    const auto pair = aug::generate_pair(id, 3, derive_seed(seed, "gradcheck/pair"), 4);
    std::vector<Tensor> leaves = net.parameters();
    for (auto& p : head.parameters()) leaves.push_back(p);
    // Zero biases put many pre-activations exactly on the relu kink.
    Rng jitter(derive_seed(seed, "gradcheck/jitter"));
    for (auto& p : leaves)
      for (double& x : p.value()) x += 0.05 * jitter.normal();
    relic::RelicConfig rc;
    const auto r = ad::gradcheck([&] { return relic::relic_loss(net, head, pair, rc).total; }, leaves, 1e-5, 6,
                                 1e-3, derive_seed(seed, "gradcheck/coords"));
    out.push_back({"relic_loss/" + std::string(trace::to_string(id)), r.max_rel_error, r.checked, r.worst});
  }
  return out;
}

}  // namespace hintrelic::harness
