#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hss/model.hpp"
#include "hss/vocab.hpp"

namespace hss {

struct Hypothesis {
  std::vector<int> token_ids;
  double log_likelihood = 0.0;  // sum of token log-probs
  Tensor state;                 // decoder state after the last emitted token
  bool finished = false;        // last token is EOS or the budget is spent
};

struct GenerationConfig {
  int beam_size = 4;
  int max_tokens = 100;  // global budget across all sentences
  int keep_sentences = 2;
  int n_sentences = 2;  // sentence slots to decode before truncation
  bool allow_unk = true;

  void validate() const;
};

struct StepResult {
  std::vector<double> log_probs;  // over the vocabulary
  Tensor state;
};

// Advances one hypothesis by one input token. The empty hypothesis is fed
// BOS; afterwards each hypothesis is fed its own last token.
using StepFn = std::function<StepResult(const Tensor& state, int input_token)>;

// One expansion round: every unfinished beam is extended with all unbanned
// continuations, finished beams carry forward unchanged, and the top
// beam_size survive by total log-likelihood (ties to the lexicographically
// smaller token sequence). All-finished input is returned unchanged.
std::vector<Hypothesis> beam_step(const std::vector<Hypothesis>& beams, const StepFn& step,
                                  int vocab_size, const GenerationConfig& cfg,
                                  std::span<const int> banned, int token_budget);

// Runs beam_step to completion from a single empty hypothesis and returns
// the best finished one. No length normalization.
Hypothesis beam_search(const Tensor& init_state, const StepFn& step, int vocab_size,
                       const GenerationConfig& cfg, std::span<const int> banned,
                       int token_budget);

// Argmax decoding under the same step interface; equals beam_size=1 search.
Hypothesis greedy_search(const Tensor& init_state, const StepFn& step, int vocab_size,
                         const GenerationConfig& cfg, std::span<const int> banned,
                         int token_budget);

struct GenerationResult {
  std::vector<std::vector<int>> sentences;  // EOS stripped
  std::vector<std::string> texts;
  std::vector<int> flat_tokens() const;
  std::string joined_text() const;  // sentences separated by a single space
};

// Full per-pair generation: beam-decodes up to cfg.n_sentences sentences,
// chaining the sentence context through each winner's final state, then
// keeps the first cfg.keep_sentences sentences within cfg.max_tokens.
GenerationResult generate(const ModelParams& p, int u_idx, int i_idx,
                          std::span<const int> feature_ids, const Vocabulary& vocab,
                          const GenerationConfig& cfg);

struct GenerationRow {
  std::string user_id;
  std::string item_id;
  std::string text;
};

// One line per pair: user_id <TAB> item_id <TAB> text.
void write_generation_file(const std::string& path, const std::vector<GenerationRow>& rows);

}  // namespace hss
