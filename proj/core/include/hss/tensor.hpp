#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hss/errors.hpp"

namespace hss {

// Dimension sizes, row-major storage. Rank 1 and 2 are supported; a tensor of
// total size 1 acts as a scalar in broadcasting ops.
using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
int shape_size(const Shape& s);

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first needed; length == values.size() once allocated
  bool requires_grad = false;
};
}  // namespace detail

// Shared-ownership handle to a dense 64-bit tensor. Copies alias the same
// storage; ops on a Tape produce fresh tensors.
class Tensor {
public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int size() const { return static_cast<int>(impl_->values.size()); }
  int rows() const;
  int cols() const;
  bool is_scalar() const { return size() == 1; }

  std::vector<double>& values() { return impl_->values; }
  const std::vector<double>& values() const { return impl_->values; }
  double item() const;
  double at(int i) const { return impl_->values.at(i); }
  double at(int i, int j) const { return impl_->values.at(static_cast<size_t>(i) * cols() + j); }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool v);

  bool has_grad() const { return !impl_->grad.empty(); }
  // Allocates (zero-filled) on first access.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  detail::TensorImpl* impl() const { return impl_.get(); }

private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl> impl_;
  friend class Tape;
};

enum class EwOp { kAdd, kSub, kMul, kTanh, kSigmoid, kRelu };

// Reverse-mode tape. Ops append a backward closure per recorded node;
// backward() replays them once in reverse. Single-threaded by design;
// one tape per model instance.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }
  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // --- primitive ops -------------------------------------------------------
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);

  Tensor add(const Tensor& a, const Tensor& b) { return binary(EwOp::kAdd, a, b); }
  Tensor sub(const Tensor& a, const Tensor& b) { return binary(EwOp::kSub, a, b); }
  Tensor mul(const Tensor& a, const Tensor& b) { return binary(EwOp::kMul, a, b); }
  Tensor scale(const Tensor& a, double c) { return mul(a, Tensor::scalar(c)); }

  Tensor tanh(const Tensor& a) { return unary(EwOp::kTanh, a); }
  Tensor sigmoid(const Tensor& a) { return unary(EwOp::kSigmoid, a); }
  Tensor relu(const Tensor& a) { return unary(EwOp::kRelu, a); }

  Tensor softmax(const Tensor& x);
  Tensor log_softmax(const Tensor& x);

  Tensor concat(const std::vector<Tensor>& parts);
  Tensor embedding_lookup(const Tensor& table, int index);
  Tensor gather_rows(const Tensor& table, std::span<const int> indices);
  Tensor gather(const Tensor& v, int index);
  Tensor dot(const Tensor& a, const Tensor& b);
  Tensor sum(const Tensor& a);
  Tensor mean(const Tensor& a);

  // Inverted dropout: scales survivors by 1/(1-rate) at training time,
  // identity in evaluation mode.
  Tensor dropout(const Tensor& x, double rate, bool training, std::mt19937& rng);

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Leaf grads
  // accumulate until explicitly zeroed.
  void backward(const Tensor& loss);

private:
  struct Node {
    std::function<void()> backward_fn;
  };

  Tensor binary(EwOp op, const Tensor& a, const Tensor& b);
  Tensor unary(EwOp op, const Tensor& a);
  Tensor make_output(Shape shape, bool requires_grad);
  void record(std::function<void()> fn) { nodes_.push_back({std::move(fn)}); }
  bool track(const Tensor& t) const { return recording_ && t.requires_grad(); }

  std::vector<Node> nodes_;
  bool recording_ = true;
};

enum class InitScheme { kNormal, kOrthogonal };

// normal: i.i.d. N(0, stddev^2). orthogonal: 2-D only, Q^T Q = I on the
// smaller dimension (from Gram-Schmidt over a Gaussian matrix).
Tensor init_tensor(const Shape& shape, InitScheme scheme, std::mt19937& rng,
                   double stddev = 0.05);

// Scales grads in `params` jointly so their global L2 norm is at most
// `max_norm`. Returns the pre-clip norm.
double clip_grad_norm(std::span<const Tensor> params, double max_norm);

}  // namespace hss
