#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hss/tensor.hpp"

namespace hss {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// SGD with classical momentum:
//   v <- momentum * v + (grad + 2 * weight_decay * param)
//   p <- p - learning_rate * v
// Parameters live in groups; weight decay and gradient clipping are per
// group, clipping the group's joint grad norm before the update.
class SgdOptimizer {
public:
  SgdOptimizer(double learning_rate, double momentum);

  void add_group(const std::vector<NamedTensor>& params, double weight_decay,
                 std::optional<double> clip_norm = std::nullopt);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  double momentum() const { return momentum_; }

  // Clips, applies the update, zeroes grads. Every parameter must have an
  // allocated gradient buffer.
  void step();

  // Velocity buffers as "opt.v.<param name>" tensors, in group order.
  std::vector<NamedTensor> state() const;
  void load_state(const std::vector<NamedTensor>& state);

  // Rounds velocities through 32-bit floats (parameters are the caller's).
  void quantize_state_f32();

private:
  struct Group {
    std::vector<NamedTensor> params;
    std::vector<std::vector<double>> velocity;
    double weight_decay = 0.0;
    std::optional<double> clip_norm;
  };

  double lr_;
  double momentum_;
  std::vector<Group> groups_;
};

// Round-trips v through IEEE binary32.
double to_f32(double v);

}  // namespace hss
