#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hintrelic/rng.hpp"
#include "hintrelic/tensor.hpp"

namespace hintrelic::ad {

void adam_step(std::vector<Tensor>& params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t p = 0; p < params.size(); ++p) {
      state.m[p].assign(params[p].size(), 0.0);
      state.v[p].assign(params[p].size(), 0.0);
    }
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = params[p];
    if (state.m[p].size() != t.size()) throw std::invalid_argument("adam_step: shape changed");
    if (!t.has_grad()) continue;
    const auto& g = t.grad();
    auto& m = state.m[p];
    auto& v = state.v[p];
    auto& x = t.value();
    for (std::size_t k = 0; k < x.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      x[k] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
}

double clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double c = max_norm / norm;
    for (auto& p : params) {
      if (!p.has_grad()) continue;
      for (double& g : p.grad()) g *= c;
    }
  }
  return norm;
}

namespace {
constexpr char kMagic[8] = {'H', 'R', 'C', 'K', 'P', 'T', '0', '1'};
}

void save_checkpoint(std::ostream& os, const NamedTensors& tensors) {
  nlohmann::json header;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    header["tensors"].push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size() * sizeof(double);
  }
  const std::string h = header.dump();
  const std::uint64_t len = h.size();
  os.write(kMagic, sizeof kMagic);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, t] : tensors) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed");
}

void save_checkpoint(const std::string& path, const NamedTensors& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  save_checkpoint(os, tensors);
}

void load_checkpoint(std::istream& is, NamedTensors& tensors) {
  char magic[8];
  std::uint64_t len = 0;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error("load_checkpoint: not a checkpoint");
  }
  std::string h(len, '\0');
  is.read(h.data(), static_cast<std::streamsize>(len));
  const auto header = nlohmann::json::parse(h);
  std::uint64_t total = 0;
  for (const auto& e : header.at("tensors")) {
    total = std::max<std::uint64_t>(
        total, e.at("offset").get<std::uint64_t>() +
                   numel(e.at("shape").get<Shape>()) * sizeof(double));
  }
  std::vector<char> blob(total);
  is.read(blob.data(), static_cast<std::streamsize>(total));
  if (!is) throw std::runtime_error("load_checkpoint: truncated data");
  std::size_t matched = 0;
  for (const auto& e : header.at("tensors")) {
    auto it = tensors.find(e.at("name").get<std::string>());
    if (it == tensors.end()) continue;
    const Shape shape = e.at("shape").get<Shape>();
    if (shape != it->second.shape()) {
      throw std::runtime_error("load_checkpoint: shape mismatch for " + it->first);
    }
    std::memcpy(it->second.data(), blob.data() + e.at("offset").get<std::uint64_t>(),
                it->second.size() * sizeof(double));
    ++matched;
  }
  if (matched != tensors.size()) throw std::runtime_error("load_checkpoint: missing tensors");
}

void load_checkpoint(const std::string& path, NamedTensors& tensors) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  load_checkpoint(is, tensors);
}

GradcheckResult gradcheck(const std::function<Tensor()>& loss_fn, std::vector<Tensor> leaves,
                          double h, std::size_t max_coords, double floor, std::uint64_t seed) {
  for (auto& l : leaves) {
    l.set_requires_grad(true);
    l.zero_grad();
  }
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = loss_fn();
  }
  backward(tape, loss);
  GradcheckResult res;
  Rng rng(derive_seed(seed, "ad/gradcheck"));
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor& leaf = leaves[li];
    const std::vector<double> analytic = leaf.grad();
    std::vector<std::size_t> coords;
    if (max_coords == 0 || max_coords >= leaf.size()) {
      for (std::size_t k = 0; k < leaf.size(); ++k) coords.push_back(k);
    } else {
      for (std::size_t k = 0; k < max_coords; ++k) {
        coords.push_back(static_cast<std::size_t>(rng.uniform_int(0, leaf.size() - 1)));
      }
    }
    for (std::size_t k : coords) {
      const double x0 = leaf.value()[k];
      leaf.value()[k] = x0 + h;
      tape.replay();
      const double lp = loss.item();
      leaf.value()[k] = x0 - h;
      tape.replay();
      const double lm = loss.item();
      leaf.value()[k] = x0;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[k];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++res.checked;
      if (err >= res.max_rel_error) {
        res.max_rel_error = err;
        res.worst = "leaf " + std::to_string(li) + " coord " + std::to_string(k) + ": analytic " +
                    std::to_string(a) + " numeric " + std::to_string(numeric);
      }
    }
  }
  tape.replay();
  return res;
}

}  // namespace hintrelic::ad
