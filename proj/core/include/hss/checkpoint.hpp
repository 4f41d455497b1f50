#pragma once

#include <string>
#include <vector>

#include "hss/model.hpp"
#include "hss/vocab.hpp"

namespace hss {

inline constexpr uint32_t kCheckpointFormatVersion = 1;

// On-disk model state: dimensions, vocabulary, and every named tensor
// (parameters plus optimizer velocities) as little-endian 32-bit floats.
// Values are quantized through f32 before saving, so save -> load is
// bit-exact on the in-memory doubles.
struct Checkpoint {
  ModelConfig model;
  Vocabulary vocab;
  int epoch = 0;              // completed epochs
  unsigned int seed = 0;
  double best_val_rmse = 0.0;
  bool has_best = false;
  std::vector<NamedTensor> tensors;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Rounds every tensor value through f32 in place.
void quantize_f32(std::vector<NamedTensor>& tensors);

// Copies checkpoint tensors into params by name; every parameter must be
// present with a matching shape.
void restore_params(const Checkpoint& ckpt, ModelParams& params);

// Builds params sized by the checkpoint's config and fills them in.
ModelParams params_from_checkpoint(const Checkpoint& ckpt);

}  // namespace hss
