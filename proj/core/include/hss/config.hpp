#pragma once

#include <string>

#include "hss/errors.hpp"

namespace hss {

// Run-wide settings. Defaults are the reference hyperparameters; file values
// and command-line flags override them in that order.
struct RunConfig {
  int d = 300;
  int rating_layers = 4;
  int gen_layers = 3;
  int batch_size = 100;
  double lr = 0.002;
  double momentum = 0.9;
  double lambda = 0.001;
  double dropout = 0.1;
  double clip_norm = 1.0;
  int beam_size = 4;
  int max_tokens = 100;
  int keep_sentences = 2;
  int n_sentences = 0;  // 0 = use every sentence
  int min_user_records = 10;
  int min_word_freq = 10;
  double split_train = 0.8;
  double split_valid = 0.1;
  double split_test = 0.1;
  unsigned int seed = 42;
  int epochs = 10;
  bool allow_unk = true;
  bool resume = false;
  std::string eval_split = "test";

  std::string corpus;
  std::string lexicon;
  std::string dataset;
  std::string checkpoint;
  std::string log;
  std::string report;
  std::string generations;

  void validate() const;
  // n_sentences with 0 mapped to "unlimited" for batching/truncation.
  int sentence_budget() const;
};

// Applies one snake_case (or kebab-case) key. Unknown key or unparsable
// value raises a configuration error.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat key=value file; '#' starts a comment, blank lines ignored.
void load_config_file(RunConfig& cfg, const std::string& path);

}  // namespace hss
