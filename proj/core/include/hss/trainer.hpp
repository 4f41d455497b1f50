#pragma once

#include <vector>

#include "hss/checkpoint.hpp"
#include "hss/config.hpp"
#include "hss/corpus.hpp"
#include "hss/model.hpp"
#include "hss/optimizer.hpp"

namespace hss {

struct EpochStats {
  int epoch = 0;
  double joint_loss = 0.0;
  double rating_loss = 0.0;
  double gen_loss = 0.0;
  double val_rmse = 0.0;
  double seconds = 0.0;
};

// Minibatch SGD over the joint objective with per-epoch reseeding, epoch-end
// f32 quantization of parameters and velocities (so an interrupted run
// resumes bit-exactly), per-epoch checkpointing, and best-by-validation-RMSE
// selection. When the validation split is empty the train split stands in
// for the RMSE column.
class Trainer {
public:
  Trainer(const RunConfig& cfg, const Dataset& ds);

  // Runs epochs start_epoch+1 .. cfg.epochs, appending a CSV row per epoch
  // when cfg.log is set and collecting stats when `log` is given.
  void train(std::vector<EpochStats>* log = nullptr);

  const ModelParams& params() const { return params_; }
  int start_epoch() const { return start_epoch_; }
  double best_val_rmse() const { return best_val_rmse_; }
  bool has_best() const { return has_best_; }

  double split_rmse(const std::vector<Interaction>& split) const;

private:
  EpochStats run_epoch(int epoch);
  void save_checkpoints(int epoch, bool is_best);

  RunConfig cfg_;
  const Dataset* ds_;
  ModelParams params_;
  SgdOptimizer opt_;
  std::vector<int> feature_ids_;
  int start_epoch_ = 0;
  double best_val_rmse_ = 0.0;
  bool has_best_ = false;
};

}  // namespace hss
