#include "hss/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hss {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

int shape_size(const Shape& s) {
  int n = 1;
  for (int d : s) {
    if (d <= 0) throw DimensionError("non-positive dimension in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

Tensor Tensor::zeros(Shape shape) {
  auto impl = std::make_shared<detail::TensorImpl>();
  int n = shape_size(shape);
  impl->shape = std::move(shape);
  impl->values.assign(n, 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t = zeros(std::move(shape));
  std::fill(t.values().begin(), t.values().end(), value);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  int n = shape_size(shape);
  if (n != static_cast<int>(values.size()))
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not fill shape " + shape_str(shape));
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

int Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on tensor of shape " + shape_str(shape()));
  return shape()[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on tensor of shape " + shape_str(shape()));
  return shape()[1];
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return impl_->values[0];
}

Tensor& Tensor::set_requires_grad(bool v) {
  impl_->requires_grad = v;
  return *this;
}

std::vector<double>& Tensor::grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (impl_->grad.empty()) throw ContractError("gradient read before any backward pass");
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

// --- tape ------------------------------------------------------------------

namespace {
std::vector<double>& grad_of(const Tensor& t) {
  auto* im = t.impl();
  if (im->grad.empty()) im->grad.assign(im->values.size(), 0.0);
  return im->grad;
}
}  // namespace

Tensor Tape::make_output(Shape shape, bool requires_grad) {
  Tensor t = Tensor::zeros(std::move(shape));
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  const bool a2 = a.rank() == 2, b2 = b.rank() == 2;
  const bool a1 = a.rank() == 1, b1 = b.rank() == 1;
  if (!((a2 && b2) || (a2 && b1) || (a1 && b2)))
    throw DimensionError("matmul on shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  const int inner_a = a2 ? a.cols() : a.shape()[0];
  const int inner_b = b2 ? b.rows() : b.shape()[0];
  if (inner_a != inner_b)
    throw DimensionError("matmul inner dimensions disagree: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));

  const int m = a2 ? a.rows() : 1;
  const int k = inner_a;
  const int n = b2 ? b.cols() : 1;
  Shape out_shape = (a2 && b2) ? Shape{m, n} : (a2 ? Shape{m} : Shape{n});
  Tensor out = make_output(std::move(out_shape), track(a) || track(b));

  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      for (int j = 0; j < n; ++j) ov[i * n + j] += aip * bv[p * n + j];
    }

  if (out.requires_grad()) {
    record([a, b, out, m, k, n]() {
      const auto& g = grad_of(out);
      const auto& av = a.values();
      const auto& bv = b.values();
      if (a.requires_grad()) {
        auto& ga = grad_of(a);
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
            ga[i * k + p] += acc;
          }
      }
      if (b.requires_grad()) {
        auto& gb = grad_of(b);
        for (int p = 0; p < k; ++p)
          for (int i = 0; i < m; ++i) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
          }
      }
    });
  }
  return out;
}

Tensor Tape::transpose(const Tensor& a) {
  if (a.rank() != 2)
    throw DimensionError("transpose on tensor of shape " + shape_str(a.shape()));
  const int m = a.rows(), n = a.cols();
  Tensor out = make_output({n, m}, track(a));
  const auto& av = a.values();
  auto& ov = out.values();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ov[j * m + i] = av[i * n + j];
  if (out.requires_grad()) {
    record([a, out, m, n]() {
      auto& ga = grad_of(a);
      const auto& g = grad_of(out);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
    });
  }
  return out;
}

Tensor Tape::binary(EwOp op, const Tensor& a, const Tensor& b) {
  const bool a_scalar = a.is_scalar(), b_scalar = b.is_scalar();
  if (!(a.shape() == b.shape() || a_scalar || b_scalar))
    throw DimensionError("elementwise op on shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  const Tensor& big = (a_scalar && !b_scalar) ? b : a;
  const int n = big.size();
  Tensor out = make_output(big.shape(), track(a) || track(b));

  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  const bool broadcast_a = a_scalar && !b_scalar;
  const bool broadcast_b = b_scalar && !a_scalar;
  for (int i = 0; i < n; ++i) {
    const double x = av[broadcast_a ? 0 : i];
    const double y = bv[broadcast_b ? 0 : i];
    switch (op) {
      case EwOp::kAdd: ov[i] = x + y; break;
      case EwOp::kSub: ov[i] = x - y; break;
      case EwOp::kMul: ov[i] = x * y; break;
      default: throw ContractError("non-binary op in binary()");
    }
  }

  if (out.requires_grad()) {
    record([op, a, b, out, n, broadcast_a, broadcast_b]() {
      const auto& g = grad_of(out);
      const auto& av = a.values();
      const auto& bv = b.values();
      if (a.requires_grad()) {
        auto& ga = grad_of(a);
        for (int i = 0; i < n; ++i) {
          double d;
          switch (op) {
            case EwOp::kAdd:
            case EwOp::kSub: d = g[i]; break;
            case EwOp::kMul: d = g[i] * bv[broadcast_b ? 0 : i]; break;
            default: d = 0.0;
          }
          ga[broadcast_a ? 0 : i] += d;
        }
      }
      if (b.requires_grad()) {
        auto& gb = grad_of(b);
        for (int i = 0; i < n; ++i) {
          double d;
          switch (op) {
            case EwOp::kAdd: d = g[i]; break;
            case EwOp::kSub: d = -g[i]; break;
            case EwOp::kMul: d = g[i] * av[broadcast_a ? 0 : i]; break;
            default: d = 0.0;
          }
          gb[broadcast_b ? 0 : i] += d;
        }
      }
    });
  }
  return out;
}

Tensor Tape::unary(EwOp op, const Tensor& a) {
  const int n = a.size();
  Tensor out = make_output(a.shape(), track(a));
  const auto& av = a.values();
  auto& ov = out.values();
  for (int i = 0; i < n; ++i) {
    switch (op) {
      case EwOp::kTanh: ov[i] = std::tanh(av[i]); break;
      case EwOp::kSigmoid: ov[i] = 1.0 / (1.0 + std::exp(-av[i])); break;
      case EwOp::kRelu: ov[i] = av[i] > 0.0 ? av[i] : 0.0; break;
      default: throw ContractError("non-unary op in unary()");
    }
  }
  if (out.requires_grad()) {
    record([op, a, out, n]() {
      auto& ga = grad_of(a);
      const auto& g = grad_of(out);
      const auto& av = a.values();
      const auto& ov = out.values();
      for (int i = 0; i < n; ++i) {
        switch (op) {
          case EwOp::kTanh: ga[i] += g[i] * (1.0 - ov[i] * ov[i]); break;
          case EwOp::kSigmoid: ga[i] += g[i] * ov[i] * (1.0 - ov[i]); break;
          case EwOp::kRelu: ga[i] += av[i] > 0.0 ? g[i] : 0.0; break;
          default: break;
        }
      }
    });
  }
  return out;
}

Tensor Tape::softmax(const Tensor& x) {
  if (x.rank() != 1)
    throw DimensionError("softmax on tensor of shape " + shape_str(x.shape()));
  const int n = x.size();
  const auto& xv = x.values();
  for (double v : xv)
    if (!std::isfinite(v)) throw NumericError("non-finite input to softmax");
  Tensor out = make_output(x.shape(), track(x));
  auto& ov = out.values();
  const double mx = *std::max_element(xv.begin(), xv.end());
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += (ov[i] = std::exp(xv[i] - mx));
  for (int i = 0; i < n; ++i) ov[i] /= z;
  if (out.requires_grad()) {
    record([x, out, n]() {
      auto& gx = grad_of(x);
      const auto& g = grad_of(out);
      const auto& y = out.values();
      double gy = 0.0;
      for (int i = 0; i < n; ++i) gy += g[i] * y[i];
      for (int i = 0; i < n; ++i) gx[i] += y[i] * (g[i] - gy);
    });
  }
  return out;
}

Tensor Tape::log_softmax(const Tensor& x) {
  if (x.rank() != 1)
    throw DimensionError("log_softmax on tensor of shape " + shape_str(x.shape()));
  const int n = x.size();
  const auto& xv = x.values();
  for (double v : xv)
    if (!std::isfinite(v)) throw NumericError("non-finite input to log_softmax");
  Tensor out = make_output(x.shape(), track(x));
  auto& ov = out.values();
  const double mx = *std::max_element(xv.begin(), xv.end());
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(xv[i] - mx);
  const double lse = mx + std::log(z);
  for (int i = 0; i < n; ++i) ov[i] = xv[i] - lse;
  if (out.requires_grad()) {
    record([x, out, n]() {
      auto& gx = grad_of(x);
      const auto& g = grad_of(out);
      const auto& y = out.values();
      double gs = 0.0;
      for (int i = 0; i < n; ++i) gs += g[i];
      for (int i = 0; i < n; ++i) gx[i] += g[i] - std::exp(y[i]) * gs;
    });
  }
  return out;
}

Tensor Tape::concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const int rank = parts[0].rank();
  if (rank != 1 && rank != 2)
    throw DimensionError("concat on tensor of shape " + shape_str(parts[0].shape()));
  bool needs_grad = false;
  int total = 0;
  const int cols = rank == 2 ? parts[0].cols() : 0;
  for (const auto& p : parts) {
    if (p.rank() != rank || (rank == 2 && p.cols() != cols))
      throw DimensionError("concat parts disagree: " + shape_str(parts[0].shape()) +
                           " vs " + shape_str(p.shape()));
    total += rank == 1 ? p.size() : p.rows();
    needs_grad = needs_grad || track(p);
  }
  Shape out_shape = rank == 1 ? Shape{total} : Shape{total, cols};
  Tensor out = make_output(std::move(out_shape), needs_grad);
  auto& ov = out.values();
  size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.values().begin(), p.values().end(), ov.begin() + off);
    off += p.values().size();
  }
  if (out.requires_grad()) {
    record([parts, out]() {
      const auto& g = grad_of(out);
      size_t off = 0;
      for (const auto& p : parts) {
        const size_t n = p.values().size();
        if (p.requires_grad()) {
          auto& gp = grad_of(p);
          for (size_t i = 0; i < n; ++i) gp[i] += g[off + i];
        }
        off += n;
      }
    });
  }
  return out;
}

Tensor Tape::embedding_lookup(const Tensor& table, int index) {
  if (table.rank() != 2)
    throw DimensionError("embedding_lookup on table of shape " + shape_str(table.shape()));
  if (index < 0 || index >= table.rows())
    throw IndexError("embedding index " + std::to_string(index) + " outside table of " +
                     std::to_string(table.rows()) + " rows");
  const int d = table.cols();
  Tensor out = make_output({d}, track(table));
  std::copy_n(table.values().begin() + static_cast<size_t>(index) * d, d, out.values().begin());
  if (out.requires_grad()) {
    record([table, out, index, d]() {
      auto& gt = grad_of(table);
      const auto& g = grad_of(out);
      for (int i = 0; i < d; ++i) gt[static_cast<size_t>(index) * d + i] += g[i];
    });
  }
  return out;
}

Tensor Tape::gather_rows(const Tensor& table, std::span<const int> indices) {
  if (table.rank() != 2)
    throw DimensionError("gather_rows on table of shape " + shape_str(table.shape()));
  if (indices.empty()) throw ContractError("gather_rows with no indices");
  const int d = table.cols();
  for (int idx : indices)
    if (idx < 0 || idx >= table.rows())
      throw IndexError("row index " + std::to_string(idx) + " outside table of " +
                       std::to_string(table.rows()) + " rows");
  Tensor out = make_output({static_cast<int>(indices.size()), d}, track(table));
  auto& ov = out.values();
  for (size_t r = 0; r < indices.size(); ++r)
    std::copy_n(table.values().begin() + static_cast<size_t>(indices[r]) * d, d,
                ov.begin() + r * d);
  if (out.requires_grad()) {
    std::vector<int> idx(indices.begin(), indices.end());
    record([table, out, idx = std::move(idx), d]() {
      auto& gt = grad_of(table);
      const auto& g = grad_of(out);
      for (size_t r = 0; r < idx.size(); ++r)
        for (int i = 0; i < d; ++i) gt[static_cast<size_t>(idx[r]) * d + i] += g[r * d + i];
    });
  }
  return out;
}

Tensor Tape::gather(const Tensor& v, int index) {
  if (v.rank() != 1) throw DimensionError("gather on tensor of shape " + shape_str(v.shape()));
  if (index < 0 || index >= v.size())
    throw IndexError("gather index " + std::to_string(index) + " outside vector of length " +
                     std::to_string(v.size()));
  Tensor out = make_output({1}, track(v));
  out.values()[0] = v.values()[index];
  if (out.requires_grad()) {
    record([v, out, index]() {
      grad_of(v)[index] += grad_of(out)[0];
    });
  }
  return out;
}

Tensor Tape::dot(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size())
    throw DimensionError("dot on shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  Tensor out = make_output({1}, track(a) || track(b));
  out.values()[0] =
      std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
  if (out.requires_grad()) {
    record([a, b, out]() {
      const double g = grad_of(out)[0];
      const int n = a.size();
      if (a.requires_grad()) {
        auto& ga = grad_of(a);
        for (int i = 0; i < n; ++i) ga[i] += g * b.values()[i];
      }
      if (b.requires_grad()) {
        auto& gb = grad_of(b);
        for (int i = 0; i < n; ++i) gb[i] += g * a.values()[i];
      }
    });
  }
  return out;
}

Tensor Tape::sum(const Tensor& a) {
  Tensor out = make_output({1}, track(a));
  out.values()[0] = std::accumulate(a.values().begin(), a.values().end(), 0.0);
  if (out.requires_grad()) {
    record([a, out]() {
      auto& ga = grad_of(a);
      const double g = grad_of(out)[0];
      for (auto& v : ga) v += g;
    });
  }
  return out;
}

Tensor Tape::mean(const Tensor& a) {
  const int n = a.size();
  Tensor out = make_output({1}, track(a));
  out.values()[0] = std::accumulate(a.values().begin(), a.values().end(), 0.0) / n;
  if (out.requires_grad()) {
    record([a, out, n]() {
      auto& ga = grad_of(a);
      const double g = grad_of(out)[0] / n;
      for (auto& v : ga) v += g;
    });
  }
  return out;
}

Tensor Tape::dropout(const Tensor& x, double rate, bool training, std::mt19937& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ContractError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
  if (!training || rate == 0.0) return x;
  const int n = x.size();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) mask[i] = unit(rng) < rate ? 0.0 : keep_scale;
  Tensor out = make_output(x.shape(), track(x));
  auto& ov = out.values();
  for (int i = 0; i < n; ++i) ov[i] = x.values()[i] * mask[i];
  if (out.requires_grad()) {
    record([x, out, mask = std::move(mask)]() {
      auto& gx = grad_of(x);
      const auto& g = grad_of(out);
      for (size_t i = 0; i < mask.size(); ++i) gx[i] += g[i] * mask[i];
    });
  }
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ContractError("backward root must be a scalar");
  if (!loss.requires_grad())
    throw ContractError("backward root is not connected to any tracked tensor");
  loss.impl()->grad.assign(1, 1.0);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward_fn();
}

// --- initialization --------------------------------------------------------

namespace {

Tensor normal_init(const Shape& shape, double stddev, std::mt19937& rng) {
  Tensor t = Tensor::zeros(shape);
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

// Gram-Schmidt with a second orthogonalization sweep over a Gaussian draw.
Tensor orthogonal_init(const Shape& shape, std::mt19937& rng) {
  if (shape.size() != 2)
    throw ContractError("orthogonal init needs a 2-D shape, got " + shape_str(shape));
  const int rows = shape[0], cols = shape[1];
  const bool tall = rows >= cols;
  const int m = tall ? rows : cols;  // vector length
  const int k = tall ? cols : rows;  // number of orthonormal vectors

  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> q(k, std::vector<double>(m));
  for (auto& col : q)
    for (auto& v : col) v = dist(rng);

  auto proj_out = [&](std::vector<double>& v, const std::vector<double>& u) {
    const double d = std::inner_product(v.begin(), v.end(), u.begin(), 0.0);
    for (int i = 0; i < m; ++i) v[i] -= d * u[i];
  };
  for (int j = 0; j < k; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) proj_out(q[j], q[i]);
    const double norm =
        std::sqrt(std::inner_product(q[j].begin(), q[j].end(), q[j].begin(), 0.0));
    if (norm < 1e-10) throw NumericError("degenerate draw during orthogonal init");
    for (auto& v : q[j]) v /= norm;
  }

  Tensor t = Tensor::zeros(shape);
  auto& tv = t.values();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) tv[i * cols + j] = tall ? q[j][i] : q[i][j];
  return t;
}

}  // namespace

Tensor init_tensor(const Shape& shape, InitScheme scheme, std::mt19937& rng, double stddev) {
  switch (scheme) {
    case InitScheme::kNormal: return normal_init(shape, stddev, rng);
    case InitScheme::kOrthogonal: return orthogonal_init(shape, rng);
  }
  throw ContractError("unknown init scheme");
}

double clip_grad_norm(std::span<const Tensor> params, double max_norm) {
  if (max_norm <= 0.0) throw ContractError("clip norm must be positive");
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.has_grad()) continue;
    for (double g : p.impl()->grad) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& p : params) {
      if (!p.has_grad()) continue;
      for (double& g : p.impl()->grad) g *= s;
    }
  }
  return norm;
}

}  // namespace hss
