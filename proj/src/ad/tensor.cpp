#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hintrelic/kernels.hpp"
#include "hintrelic/tensor.hpp"

namespace hintrelic::ad {
namespace {

thread_local Tape* g_active = nullptr;

using Data = std::shared_ptr<TensorData>;

std::vector<double>& grad_of(const Data& d) {
  if (d->grad.empty()) d->grad.assign(d->value.size(), 0.0);
  return d->grad;
}

const kernels::KernelTable& K() { return kernels::active(); }

// Output node; it tracks gradients when a tape is recording and any input does.
Data result(Shape shape, std::initializer_list<const Tensor*> inputs) {
  auto d = std::make_shared<TensorData>();
  d->value.assign(numel(shape), 0.0);
  d->shape = std::move(shape);
  if (g_active) {
    for (const Tensor* t : inputs) d->requires_grad |= t->requires_grad();
  }
  return d;
}

// Runs fwd now and records it (with bwd) when the output tracks gradients.
template <class F, class B>
Tensor finish(const Data& out, F fwd, B bwd) {
  fwd();
  if (out->requires_grad) g_active->record(out, std::move(fwd), std::move(bwd));
  return Tensor(out);
}

int norm_axis(int axis, int rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) throw std::invalid_argument("axis out of range");
  return axis;
}

struct Split {
  std::size_t outer = 1, len = 1, inner = 1;
};

Split split(const Shape& s, int axis) {
  Split r;
  for (int d = 0; d < axis; ++d) r.outer *= s[d];
  r.len = s[axis];
  for (std::size_t d = axis + 1; d < s.size(); ++d) r.inner *= s[d];
  return r;
}

Shape reduced(const Shape& s, int axis, bool keepdim) {
  Shape r = s;
  if (keepdim) {
    r[axis] = 1;
  } else {
    r.erase(r.begin() + axis);
  }
  return r;
}

// Broadcast layout: for every output dim, the stride into each input.
struct Bcast {
  Shape out;
  std::vector<std::size_t> sa, sb;
};

std::vector<std::size_t> strides_for(const Shape& in, const Shape& out) {
  const int r = static_cast<int>(out.size());
  const int off = r - static_cast<int>(in.size());
  std::vector<std::size_t> s(static_cast<std::size_t>(r), 0);
  std::size_t acc = 1;
  for (int d = r - 1; d >= off; --d) {
    const int id = in[d - off];
    s[d] = id == 1 ? 0 : acc;
    acc *= static_cast<std::size_t>(id);
  }
  return s;
}

Bcast plan(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t k = 0; k < r; ++k) {
    const int da = k + a.size() >= r ? a[k + a.size() - r] : 1;
    const int db = k + b.size() >= r ? b[k + b.size() - r] : 1;
    if (da != db && da != 1 && db != 1) {
      throw std::invalid_argument("shape mismatch: " + shape_str(a) + " vs " + shape_str(b));
    }
    out[k] = da == 1 ? db : da;
  }
  return {out, strides_for(a, out), strides_for(b, out)};
}

// Calls f(out_offset, a_offset, b_offset, inner_len, a_inner_stride,
// b_inner_stride) once per innermost row.
template <class F>
void rows(const Bcast& p, F f) {
  const int r = static_cast<int>(p.out.size());
  if (r == 0) {
    f(0, 0, 0, 1, 0, 0);
    return;
  }
  const std::size_t inner = p.out[r - 1];
  const std::size_t total = numel(p.out);
  if (inner == 0 || total == 0) return;
  const std::size_t outer = total / inner;
  std::vector<int> idx(static_cast<std::size_t>(r - 1), 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    f(o * inner, oa, ob, inner, p.sa[r - 1], p.sb[r - 1]);
    for (int d = r - 2; d >= 0; --d) {
      ++idx[d];
      oa += p.sa[d];
      ob += p.sb[d];
      if (idx[d] < p.out[d]) break;
      oa -= p.sa[d] * p.out[d];
      ob -= p.sb[d] * p.out[d];
      idx[d] = 0;
    }
  }
}

// g_in[.] += g_out[.] reduced over the broadcast dims of one input.
void reduce_into(double* gin, const double* g, std::size_t o, std::size_t in, std::size_t len,
                 std::size_t stride) {
  if (stride == 1) {
    K().axpy(len, 1.0, g + o, gin + in);
  } else {
    double s = gin[in];
    for (std::size_t k = 0; k < len; ++k) s += g[o + k];
    gin[in] = s;
  }
}

template <class Fn>
Tensor unary(const Tensor& a, Fn fn, std::function<double(double x, double y)> dfn) {
  auto A = a.ptr();
  auto O = result(a.shape(), {&a});
  return finish(
      O,
      [A, O, fn] {
        for (std::size_t k = 0; k < A->value.size(); ++k) O->value[k] = fn(A->value[k]);
      },
      [A, O, dfn] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t k = 0; k < A->value.size(); ++k) {
          ga[k] += O->grad[k] * dfn(A->value[k], O->value[k]);
        }
      });
}

}  // namespace

std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d < 0) throw std::invalid_argument("negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::string r = "[";
  for (std::size_t k = 0; k < s.size(); ++k) r += (k ? "," : "") + std::to_string(s[k]);
  return r + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  auto d = std::make_shared<TensorData>();
  d->value.assign(numel(shape), v);
  d->shape = std::move(shape);
  d->requires_grad = requires_grad;
  return Tensor(d);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != numel(shape)) {
    throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                " values for shape " + shape_str(shape));
  }
  auto d = std::make_shared<TensorData>();
  d->shape = std::move(shape);
  d->value = std::move(values);
  d->requires_grad = requires_grad;
  return Tensor(d);
}

int Tensor::dim(int axis) const { return d_->shape[norm_axis(axis, rank())]; }

std::vector<double>& Tensor::grad() { return grad_of(d_); }

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("item() on tensor of shape " + shape_str(shape()));
  return d_->value[0];
}

void Tape::record(std::shared_ptr<TensorData> out, std::function<void()> forward,
                  std::function<void()> backward) {
  entries_.push_back({std::move(out), std::move(forward), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  for (auto& e : entries_) e.out->grad.clear();
  grad_of(loss.ptr())[0] += 1.0;
  // Entries nothing downstream sent a gradient to are skipped.
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->out->grad.empty()) it->backward();
  }
}

void Tape::replay() {
  for (auto& e : entries_) e.forward();
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active) { g_active = &tape; }
TapeScope::~TapeScope() { g_active = previous_; }

Tape* active_tape() { return g_active; }

void backward(Tape& tape, const Tensor& loss) {
  if (!loss || loss.size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
  tape.backward(loss);
}

Tensor add(const Tensor& a, const Tensor& b) {
  auto A = a.ptr(), B = b.ptr();
  const Bcast p = plan(a.shape(), b.shape());
  auto O = result(p.out, {&a, &b});
  return finish(
      O,
      [A, B, O, p] {
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                    std::size_t sb) {
          if (sa == 1 && sb == 1) {
            K().add(n, A->value.data() + ia, B->value.data() + ib, O->value.data() + o);
          } else {
            for (std::size_t k = 0; k < n; ++k) {
              O->value[o + k] = A->value[ia + k * sa] + B->value[ib + k * sb];
            }
          }
        });
      },
      [A, B, O, p] {
        const double* g = O->grad.data();
        double* ga = A->requires_grad ? grad_of(A).data() : nullptr;
        double* gb = B->requires_grad ? grad_of(B).data() : nullptr;
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                    std::size_t sb) {
          if (ga) reduce_into(ga, g, o, ia, n, sa);
          if (gb) reduce_into(gb, g, o, ib, n, sb);
        });
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  auto A = a.ptr(), B = b.ptr();
  const Bcast p = plan(a.shape(), b.shape());
  auto O = result(p.out, {&a, &b});
  return finish(
      O,
      [A, B, O, p] {
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                    std::size_t sb) {
          for (std::size_t k = 0; k < n; ++k) {
            O->value[o + k] = A->value[ia + k * sa] - B->value[ib + k * sb];
          }
        });
      },
      [A, B, O, p] {
        const double* g = O->grad.data();
        double* ga = A->requires_grad ? grad_of(A).data() : nullptr;
        double* gb = B->requires_grad ? grad_of(B).data() : nullptr;
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                    std::size_t sb) {
          if (ga) reduce_into(ga, g, o, ia, n, sa);
          if (gb) {
            for (std::size_t k = 0; k < n; ++k) gb[ib + k * sb] -= g[o + k];
          }
        });
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  auto A = a.ptr(), B = b.ptr();
  const Bcast p = plan(a.shape(), b.shape());
  auto O = result(p.out, {&a, &b});
  return finish(
      O,
      [A, B, O, p] {
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                    std::size_t sb) {
          if (sa == 1 && sb == 1) {
            K().mul(n, A->value.data() + ia, B->value.data() + ib, O->value.data() + o);
          } else {
            for (std::size_t k = 0; k < n; ++k) {
              O->value[o + k] = A->value[ia + k * sa] * B->value[ib + k * sb];
            }
          }
        });
      },
      [A, B, O, p] {
        const double* g = O->grad.data();
        double* ga = A->requires_grad ? grad_of(A).data() : nullptr;
        double* gb = B->requires_grad ? grad_of(B).data() : nullptr;
        const double* av = A->value.data();
        const double* bv = B->value.data();
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                    std::size_t sb) {
          for (std::size_t k = 0; k < n; ++k) {
            if (ga) ga[ia + k * sa] += g[o + k] * bv[ib + k * sb];
            if (gb) gb[ib + k * sb] += g[o + k] * av[ia + k * sa];
          }
        });
      });
}

Tensor scale(const Tensor& a, double c) {
  auto A = a.ptr();
  auto O = result(a.shape(), {&a});
  return finish(
      O, [A, O, c] { K().scale(A->value.size(), c, A->value.data(), O->value.data()); },
      [A, O, c] {
        if (A->requires_grad) K().axpy(A->value.size(), c, O->grad.data(), grad_of(A).data());
      });
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: shapes " + shape_str(a.shape()) + " and " +
                                shape_str(b.shape()));
  }
  const std::size_t M = a.dim(0), Kd = a.dim(1), N = b.dim(1);
  auto A = a.ptr(), B = b.ptr();
  auto O = result({static_cast<int>(M), static_cast<int>(N)}, {&a, &b});
  return finish(
      O,
      [A, B, O, M, Kd, N] {
        std::fill(O->value.begin(), O->value.end(), 0.0);
        K().gemm(M, Kd, N, A->value.data(), B->value.data(), O->value.data());
      },
      [A, B, O, M, Kd, N] {
        if (A->requires_grad) {
          std::vector<double> bt(N * Kd);
          for (std::size_t k = 0; k < Kd; ++k)
            for (std::size_t j = 0; j < N; ++j) bt[j * Kd + k] = B->value[k * N + j];
          K().gemm(M, N, Kd, O->grad.data(), bt.data(), grad_of(A).data());
        }
        if (B->requires_grad) {
          std::vector<double> at(Kd * M);
          for (std::size_t i = 0; i < M; ++i)
            for (std::size_t k = 0; k < Kd; ++k) at[k * M + i] = A->value[i * Kd + k];
          K().gemm(Kd, M, N, at.data(), O->grad.data(), grad_of(B).data());
        }
      });
}

Tensor relu(const Tensor& a) {
  auto A = a.ptr();
  auto O = result(a.shape(), {&a});
  return finish(
      O, [A, O] { K().relu(A->value.size(), A->value.data(), O->value.data()); },
      [A, O] {
        if (A->requires_grad) {
          K().relu_backward(A->value.size(), A->value.data(), O->grad.data(), grad_of(A).data());
        }
      });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const int r = parts[0].rank();
  axis = norm_axis(axis, r);
  Shape out = parts[0].shape();
  out[axis] = 0;
  for (const auto& t : parts) {
    if (t.rank() != r) throw std::invalid_argument("concat: rank mismatch");
    for (int d = 0; d < r; ++d) {
      if (d != axis && t.dim(d) != out[d]) throw std::invalid_argument("concat: shape mismatch");
    }
    out[axis] += t.dim(axis);
  }
  std::vector<Data> in;
  bool rg = false;
  for (const auto& t : parts) {
    in.push_back(t.ptr());
    rg |= t.requires_grad();
  }
  auto O = result(out, {});
  O->requires_grad = g_active && rg;
  const Split so = split(out, axis);
  return finish(
      O,
      [in, O, so, axis] {
        std::size_t at = 0;
        for (const auto& P : in) {
          const std::size_t w = P->shape[axis] * so.inner;
          for (std::size_t o = 0; o < so.outer; ++o) {
            std::copy_n(P->value.data() + o * w, w, O->value.data() + o * so.len * so.inner + at);
          }
          at += w;
        }
      },
      [in, O, so, axis] {
        std::size_t at = 0;
        for (const auto& P : in) {
          const std::size_t w = P->shape[axis] * so.inner;
          if (P->requires_grad) {
            auto& gp = grad_of(P);
            for (std::size_t o = 0; o < so.outer; ++o) {
              K().axpy(w, 1.0, O->grad.data() + o * so.len * so.inner + at, gp.data() + o * w);
            }
          }
          at += w;
        }
      });
}

Tensor slice(const Tensor& a, int axis, int start, int length) {
  axis = norm_axis(axis, a.rank());
  if (start < 0 || length < 0 || start + length > a.dim(axis)) {
    throw std::out_of_range("slice: range outside dimension");
  }
  Shape out = a.shape();
  out[axis] = length;
  const Split s = split(a.shape(), axis);
  auto A = a.ptr();
  auto O = result(out, {&a});
  const std::size_t w = static_cast<std::size_t>(length) * s.inner;
  const std::size_t off = static_cast<std::size_t>(start) * s.inner;
  return finish(
      O,
      [A, O, s, w, off] {
        for (std::size_t o = 0; o < s.outer; ++o) {
          std::copy_n(A->value.data() + o * s.len * s.inner + off, w, O->value.data() + o * w);
        }
      },
      [A, O, s, w, off] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t o = 0; o < s.outer; ++o) {
          K().axpy(w, 1.0, O->grad.data() + o * w, ga.data() + o * s.len * s.inner + off);
        }
      });
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  const Bcast p = plan(a.shape(), shape);
  if (p.out != shape) throw std::invalid_argument("broadcast_to: incompatible target shape");
  auto A = a.ptr();
  auto O = result(shape, {&a});
  return finish(
      O,
      [A, O, p] {
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t, std::size_t n, std::size_t sa,
                    std::size_t) {
          for (std::size_t k = 0; k < n; ++k) O->value[o + k] = A->value[ia + k * sa];
        });
      },
      [A, O, p] {
        if (!A->requires_grad) return;
        double* ga = grad_of(A).data();
        rows(p, [&](std::size_t o, std::size_t ia, std::size_t, std::size_t n, std::size_t sa,
                    std::size_t) { reduce_into(ga, O->grad.data(), o, ia, n, sa); });
      });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (numel(shape) != a.size()) {
    throw std::invalid_argument("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  auto A = a.ptr();
  auto O = result(shape, {&a});
  return finish(
      O, [A, O] { O->value = A->value; },
      [A, O] {
        if (A->requires_grad) K().axpy(O->grad.size(), 1.0, O->grad.data(), grad_of(A).data());
      });
}

Tensor permute(const Tensor& a, const std::vector<int>& order) {
  const int r = a.rank();
  if (static_cast<int>(order.size()) != r) throw std::invalid_argument("permute: bad order");
  std::vector<bool> used(static_cast<std::size_t>(r), false);
  Shape out(static_cast<std::size_t>(r));
  for (int d = 0; d < r; ++d) {
    if (order[d] < 0 || order[d] >= r || used[order[d]]) {
      throw std::invalid_argument("permute: bad order");
    }
    used[order[d]] = true;
    out[d] = a.dim(order[d]);
  }
  // Source offset for every output element, computed once.
  std::vector<std::size_t> in_stride(static_cast<std::size_t>(r), 1);
  for (int d = r - 2; d >= 0; --d) in_stride[d] = in_stride[d + 1] * a.dim(d + 1);
  auto map = std::make_shared<std::vector<std::size_t>>(a.size());
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    std::size_t src = 0;
    for (int d = 0; d < r; ++d) src += idx[d] * in_stride[order[d]];
    (*map)[k] = src;
    for (int d = r - 1; d >= 0; --d) {
      if (++idx[d] < out[d]) break;
      idx[d] = 0;
    }
  }
  auto A = a.ptr();
  auto O = result(out, {&a});
  return finish(
      O,
      [A, O, map] {
        for (std::size_t k = 0; k < map->size(); ++k) O->value[k] = A->value[(*map)[k]];
      },
      [A, O, map] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t k = 0; k < map->size(); ++k) ga[(*map)[k]] += O->grad[k];
      });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw std::invalid_argument("transpose: expects a matrix");
  return permute(a, {1, 0});
}

Tensor sum(const Tensor& a, int axis, bool keepdim) {
  axis = norm_axis(axis, a.rank());
  const Split s = split(a.shape(), axis);
  auto A = a.ptr();
  auto O = result(reduced(a.shape(), axis, keepdim), {&a});
  return finish(
      O,
      [A, O, s] {
        std::fill(O->value.begin(), O->value.end(), 0.0);
        for (std::size_t o = 0; o < s.outer; ++o) {
          double* dst = O->value.data() + o * s.inner;
          for (std::size_t r = 0; r < s.len; ++r) {
            K().add(s.inner, dst, A->value.data() + (o * s.len + r) * s.inner, dst);
          }
        }
      },
      [A, O, s] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t r = 0; r < s.len; ++r) {
            K().axpy(s.inner, 1.0, O->grad.data() + o * s.inner,
                     ga.data() + (o * s.len + r) * s.inner);
          }
        }
      });
}

Tensor mean(const Tensor& a, int axis, bool keepdim) {
  const int ax = norm_axis(axis, a.rank());
  const int len = a.dim(ax);
  if (len == 0) throw std::invalid_argument("mean over an empty axis");
  return scale(sum(a, ax, keepdim), 1.0 / len);
}

Tensor sum_all(const Tensor& a) {
  auto A = a.ptr();
  auto O = result({}, {&a});
  return finish(
      O,
      [A, O] {
        double s = 0.0;
        for (double x : A->value) s += x;
        O->value[0] = s;
      },
      [A, O] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        const double g = O->grad[0];
        for (double& x : ga) x += g;
      });
}

Tensor max(const Tensor& a, int axis, bool keepdim) {
  axis = norm_axis(axis, a.rank());
  const Split s = split(a.shape(), axis);
  if (s.len == 0) throw std::invalid_argument("max over an empty axis");
  auto A = a.ptr();
  auto O = result(reduced(a.shape(), axis, keepdim), {&a});
  auto arg = std::make_shared<std::vector<long>>(s.outer * s.inner, 0);
  return finish(
      O,
      [A, O, s, arg] {
        std::fill(arg->begin(), arg->end(), 0L);
        for (std::size_t o = 0; o < s.outer; ++o) {
          double* best = O->value.data() + o * s.inner;
          long* ai = arg->data() + o * s.inner;
          std::copy_n(A->value.data() + o * s.len * s.inner, s.inner, best);
          for (std::size_t r = 1; r < s.len; ++r) {
            K().max_update(s.inner, A->value.data() + (o * s.len + r) * s.inner, best, ai,
                           static_cast<long>(r));
          }
        }
      },
      [A, O, s, arg] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t at = o * s.inner + i;
            ga[(o * s.len + (*arg)[at]) * s.inner + i] += O->grad[at];
          }
        }
      });
}

std::vector<long> argmax(const Tensor& a, int axis) {
  axis = norm_axis(axis, a.rank());
  const Split s = split(a.shape(), axis);
  std::vector<long> out(s.outer * s.inner, 0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      double best = a.at(o * s.len * s.inner + i);
      for (std::size_t r = 1; r < s.len; ++r) {
        const double x = a.at((o * s.len + r) * s.inner + i);
        if (x > best) {
          best = x;
          out[o * s.inner + i] = static_cast<long>(r);
        }
      }
    }
  }
  return out;
}

namespace {

// Row-wise max, treating an all -inf row as having shift 0.
void row_max(const TensorData& A, const Split& s, std::vector<double>& m) {
  m.assign(s.outer * s.inner, -INFINITY);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t r = 0; r < s.len; ++r) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        m[o * s.inner + i] = std::max(m[o * s.inner + i], A.value[(o * s.len + r) * s.inner + i]);
      }
    }
  }
  for (double& x : m) {
    if (std::isinf(x) && x < 0) x = 0.0;
  }
}

// out[o,i] = log sum_r exp(a[o,r,i]).
void lse_rows(const TensorData& A, const Split& s, std::vector<double>& out) {
  std::vector<double> m;
  row_max(A, s, m);
  out.assign(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t r = 0; r < s.len; ++r) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        out[o * s.inner + i] += std::exp(A.value[(o * s.len + r) * s.inner + i] - m[o * s.inner + i]);
      }
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = m[k] + std::log(out[k]);
}

}  // namespace

Tensor logsumexp(const Tensor& a, int axis, bool keepdim) {
  axis = norm_axis(axis, a.rank());
  const Split s = split(a.shape(), axis);
  auto A = a.ptr();
  auto O = result(reduced(a.shape(), axis, keepdim), {&a});
  return finish(
      O, [A, O, s] { lse_rows(*A, s, O->value); },
      [A, O, s] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t r = 0; r < s.len; ++r) {
            for (std::size_t i = 0; i < s.inner; ++i) {
              const double l = O->value[o * s.inner + i];
              if (std::isinf(l)) continue;
              const std::size_t k = (o * s.len + r) * s.inner + i;
              ga[k] += O->grad[o * s.inner + i] * std::exp(A->value[k] - l);
            }
          }
        }
      });
}

Tensor softmax(const Tensor& a, int axis) {
  axis = norm_axis(axis, a.rank());
  const Split s = split(a.shape(), axis);
  auto A = a.ptr();
  auto O = result(a.shape(), {&a});
  return finish(
      O,
      [A, O, s] {
        std::vector<double> l;
        lse_rows(*A, s, l);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t r = 0; r < s.len; ++r) {
            for (std::size_t i = 0; i < s.inner; ++i) {
              const std::size_t k = (o * s.len + r) * s.inner + i;
              const double x = A->value[k];
              O->value[k] = std::isinf(x) && x < 0 ? 0.0 : std::exp(x - l[o * s.inner + i]);
            }
          }
        }
      },
      [A, O, s] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            double dot = 0.0;
            for (std::size_t r = 0; r < s.len; ++r) {
              const std::size_t k = (o * s.len + r) * s.inner + i;
              dot += O->grad[k] * O->value[k];
            }
            for (std::size_t r = 0; r < s.len; ++r) {
              const std::size_t k = (o * s.len + r) * s.inner + i;
              ga[k] += O->value[k] * (O->grad[k] - dot);
            }
          }
        }
      });
}

Tensor log_softmax(const Tensor& a, int axis) {
  axis = norm_axis(axis, a.rank());
  const Split s = split(a.shape(), axis);
  auto A = a.ptr();
  auto O = result(a.shape(), {&a});
  return finish(
      O,
      [A, O, s] {
        std::vector<double> l;
        lse_rows(*A, s, l);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t r = 0; r < s.len; ++r) {
            for (std::size_t i = 0; i < s.inner; ++i) {
              const std::size_t k = (o * s.len + r) * s.inner + i;
              O->value[k] = A->value[k] - l[o * s.inner + i];
            }
          }
        }
      },
      [A, O, s] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            double gs = 0.0;
            for (std::size_t r = 0; r < s.len; ++r) gs += O->grad[(o * s.len + r) * s.inner + i];
            for (std::size_t r = 0; r < s.len; ++r) {
              const std::size_t k = (o * s.len + r) * s.inner + i;
              const double x = O->value[k];
              const double p = std::isinf(x) && x < 0 ? 0.0 : std::exp(x);
              ga[k] += O->grad[k] - p * gs;
            }
          }
        }
      });
}

Tensor gather(const Tensor& a, const std::vector<int>& index) {
  if (a.rank() < 1) throw std::invalid_argument("gather: scalar input");
  const int rows_in = a.dim(0);
  for (int i : index) {
    if (i < 0 || i >= rows_in) throw std::out_of_range("gather: index out of range");
  }
  Shape out = a.shape();
  out[0] = static_cast<int>(index.size());
  const std::size_t w = rows_in ? a.size() / rows_in : 0;
  auto A = a.ptr();
  auto O = result(out, {&a});
  return finish(
      O,
      [A, O, index, w] {
        for (std::size_t k = 0; k < index.size(); ++k) {
          std::copy_n(A->value.data() + index[k] * w, w, O->value.data() + k * w);
        }
      },
      [A, O, index, w] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t k = 0; k < index.size(); ++k) {
          K().axpy(w, 1.0, O->grad.data() + k * w, ga.data() + index[k] * w);
        }
      });
}

Tensor scatter_add(const Tensor& a, const std::vector<int>& index, int rows_out) {
  if (a.rank() < 1 || static_cast<int>(index.size()) != a.dim(0)) {
    throw std::invalid_argument("scatter_add: index length must match rows");
  }
  for (int i : index) {
    if (i < 0 || i >= rows_out) throw std::out_of_range("scatter_add: index out of range");
  }
  Shape out = a.shape();
  out[0] = rows_out;
  const std::size_t w = a.dim(0) ? a.size() / a.dim(0) : 0;
  auto A = a.ptr();
  auto O = result(out, {&a});
  return finish(
      O,
      [A, O, index, w] {
        std::fill(O->value.begin(), O->value.end(), 0.0);
        for (std::size_t k = 0; k < index.size(); ++k) {
          K().axpy(w, 1.0, A->value.data() + k * w, O->value.data() + index[k] * w);
        }
      },
      [A, O, index, w] {
        if (!A->requires_grad) return;
        auto& ga = grad_of(A);
        for (std::size_t k = 0; k < index.size(); ++k) {
          K().axpy(w, 1.0, O->grad.data() + index[k] * w, ga.data() + k * w);
        }
      });
}

Tensor detach(const Tensor& a) { return Tensor::from(a.shape(), a.value()); }

}  // namespace hintrelic::ad
