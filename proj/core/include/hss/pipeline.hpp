#pragma once

#include <string>
#include <vector>

#include "hss/config.hpp"
#include "hss/metrics.hpp"
#include "hss/trainer.hpp"

namespace hss {

struct PreprocessStats {
  int n_users = 0;
  int n_items = 0;
  int n_reviews = 0;
  int n_features = 0;
  int vocab_words = 0;  // retained word types, specials excluded
};

PreprocessStats run_preprocess(const RunConfig& cfg);

struct TrainSummary {
  int epochs_completed = 0;
  double best_val_rmse = 0.0;
  bool has_best = false;
};

TrainSummary run_train(const RunConfig& cfg, std::vector<EpochStats>* log = nullptr);

// RMSE over the chosen split plus text metrics of beam-generated explanations
// against the split's reviews (truncated to n_sentences). Writes the report
// and, when configured, the generation file.
MetricReport run_evaluate(const RunConfig& cfg);

// Generated sentences for one external user/item id pair.
std::vector<std::string> run_generate(const RunConfig& cfg, const std::string& user_id,
                                      const std::string& item_id);

}  // namespace hss
