#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hintrelic::ad {

using Shape = std::vector<int>;

std::size_t numel(const Shape& s);
std::string shape_str(const Shape& s);

struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first touched
  bool requires_grad = false;
};

// Shared handle to a dense row-major float64 array.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v) { return from({}, {v}); }

  explicit operator bool() const { return static_cast<bool>(d_); }
  const Shape& shape() const { return d_->shape; }
  int rank() const { return static_cast<int>(d_->shape.size()); }
  int dim(int axis) const;
  std::size_t size() const { return d_->value.size(); }
  double* data() { return d_->value.data(); }
  const double* data() const { return d_->value.data(); }
  std::vector<double>& value() { return d_->value; }
  const std::vector<double>& value() const { return d_->value; }
  // Gradient buffer, zero-filled on first access.
  std::vector<double>& grad();
  bool has_grad() const { return !d_->grad.empty(); }
  void zero_grad() { d_->grad.clear(); }
  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool on) { d_->requires_grad = on; }
  double item() const;
  double at(std::size_t k) const { return d_->value[k]; }
  TensorData* node() const { return d_.get(); }
  const std::shared_ptr<TensorData>& ptr() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

// Ordered record of differentiable applications. Each entry keeps a forward
// closure (recomputes its output from its inputs in place) and a backward
// closure (accumulates input gradients from the output gradient).
class Tape {
 public:
  void record(std::shared_ptr<TensorData> out, std::function<void()> forward,
              std::function<void()> backward);
  // Seeds d(loss)=1 and runs the backward closures in reverse order.
  // Gradients of leaves accumulate; intermediate gradients are reset first.
  void backward(const Tensor& loss);
  // Recomputes every recorded value in order, e.g. after perturbing a leaf.
  void replay();
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  struct Entry {
    std::shared_ptr<TensorData> out;
    std::function<void()> forward;
    std::function<void()> backward;
  };
  std::vector<Entry> entries_;
};

// Makes `tape` the active recording target for this thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// Throws if `loss` is not a single element.
void backward(Tape& tape, const Tensor& loss);

// ---- primitives --------------------------------------------------------
// Binary ops broadcast numpy-style (right-aligned, size-1 dims stretch).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
// [M,K] x [K,N] -> [M,N]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, int start, int length);
Tensor broadcast_to(const Tensor& a, const Shape& shape);
Tensor reshape(const Tensor& a, const Shape& shape);
Tensor permute(const Tensor& a, const std::vector<int>& order);
Tensor transpose(const Tensor& a);  // 2-D
Tensor sum(const Tensor& a, int axis, bool keepdim = false);
Tensor mean(const Tensor& a, int axis, bool keepdim = false);
Tensor sum_all(const Tensor& a);
// Max along an axis; the gradient flows to the first maximal entry.
Tensor max(const Tensor& a, int axis, bool keepdim = false);
std::vector<long> argmax(const Tensor& a, int axis);
Tensor logsumexp(const Tensor& a, int axis, bool keepdim = false);
Tensor softmax(const Tensor& a, int axis);
Tensor log_softmax(const Tensor& a, int axis);
// Rows along axis 0: out[k] = a[index[k]].
Tensor gather(const Tensor& a, const std::vector<int>& index);
// Rows along axis 0: out[index[k]] += a[k], out has `rows` rows.
Tensor scatter_add(const Tensor& a, const std::vector<int>& index, int rows);
// Same values, cut from the tape.
Tensor detach(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// ---- optimisation -------------------------------------------------------
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;
};

// Updates every parameter in place from its gradient buffer.
void adam_step(std::vector<Tensor>& params, AdamState& state, const AdamConfig& cfg);

// Rescales gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

// ---- checkpoints --------------------------------------------------------
// "HRCKPT01", u64 header length, JSON header {"tensors": [{name, shape,
// offset}]}, then raw little-endian float64 data.
using NamedTensors = std::map<std::string, Tensor>;
void save_checkpoint(std::ostream& os, const NamedTensors& tensors);
void save_checkpoint(const std::string& path, const NamedTensors& tensors);
// Fills matching tensors in place; throws on missing names or shape mismatch.
void load_checkpoint(std::istream& is, NamedTensors& tensors);
void load_checkpoint(const std::string& path, NamedTensors& tensors);

// ---- gradient checking --------------------------------------------------
struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // description of the worst coordinate
};

// Builds the loss once under a tape, then compares analytic gradients with
// central differences for up to `max_coords` coordinates of each leaf
// (all coordinates when max_coords == 0). Relative error is
// |a - n| / max(|a|, |n|, floor).
GradcheckResult gradcheck(const std::function<Tensor()>& loss_fn, std::vector<Tensor> leaves,
                          double h = 1e-5, std::size_t max_coords = 0, double floor = 1e-3,
                          std::uint64_t seed = 0);

}  // namespace hintrelic::ad
