#include "hss/optimizer.hpp"

#include <cmath>
#include <unordered_map>

namespace hss {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

SgdOptimizer::SgdOptimizer(double learning_rate, double momentum)
    : lr_(learning_rate), momentum_(momentum) {
  if (learning_rate <= 0.0) throw ContractError("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ContractError("momentum " + std::to_string(momentum) + " outside [0, 1)");
}

void SgdOptimizer::add_group(const std::vector<NamedTensor>& params, double weight_decay,
                             std::optional<double> clip_norm) {
  Group g;
  g.params = params;
  g.weight_decay = weight_decay;
  g.clip_norm = clip_norm;
  for (const auto& p : params) {
    if (!p.tensor.defined()) throw ContractError("undefined parameter " + p.name);
    g.velocity.emplace_back(p.tensor.size(), 0.0);
  }
  groups_.push_back(std::move(g));
}

void SgdOptimizer::step() {
  for (auto& g : groups_) {
    for (const auto& p : g.params)
      if (!p.tensor.has_grad())
        throw ContractError("parameter " + p.name + " has no gradient before step");
    if (g.clip_norm) {
      std::vector<Tensor> ts;
      ts.reserve(g.params.size());
      for (const auto& p : g.params) ts.push_back(p.tensor);
      clip_grad_norm(ts, *g.clip_norm);
    }
    for (size_t i = 0; i < g.params.size(); ++i) {
      Tensor t = g.params[i].tensor;
      auto& v = g.velocity[i];
      auto& vals = t.values();
      auto& grads = t.grad();
      for (size_t j = 0; j < vals.size(); ++j) {
        v[j] = momentum_ * v[j] + (grads[j] + 2.0 * g.weight_decay * vals[j]);
        vals[j] -= lr_ * v[j];
      }
      t.zero_grad();
    }
  }
}

std::vector<NamedTensor> SgdOptimizer::state() const {
  std::vector<NamedTensor> out;
  for (const auto& g : groups_)
    for (size_t i = 0; i < g.params.size(); ++i)
      out.push_back({"opt.v." + g.params[i].name,
                     Tensor::from(g.params[i].tensor.shape(), g.velocity[i])});
  return out;
}

void SgdOptimizer::load_state(const std::vector<NamedTensor>& state) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& s : state) by_name[s.name] = &s.tensor;
  for (auto& g : groups_)
    for (size_t i = 0; i < g.params.size(); ++i) {
      const std::string key = "opt.v." + g.params[i].name;
      auto it = by_name.find(key);
      if (it == by_name.end()) throw CompatibilityError("missing optimizer state " + key);
      if (it->second->size() != static_cast<int>(g.velocity[i].size()))
        throw CompatibilityError("optimizer state " + key + " has wrong size");
      g.velocity[i] = it->second->values();
    }
}

void SgdOptimizer::quantize_state_f32() {
  for (auto& g : groups_)
    for (auto& v : g.velocity)
      for (auto& x : v) x = to_f32(x);
}

}  // namespace hss
