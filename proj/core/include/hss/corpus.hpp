#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hss/vocab.hpp"

namespace hss {

struct RawRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::string review_text;
  std::optional<long long> timestamp;
};

struct SentenceRecord {
  std::vector<int> token_ids;  // terminated by EOS
  double beta = 0.0;
  int n_feature_words = 0;
  int n_words = 0;  // tokens before EOS, punctuation included
};

struct Interaction {
  int user_index = -1;
  int item_index = -1;
  double rating = 0.0;
  std::vector<SentenceRecord> sentences;
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
};

struct Dataset {
  Vocabulary vocab;
  std::vector<std::string> user_ids;  // embedding index → external id
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> item_index;
  DatasetSplit splits;

  int n_users() const { return static_cast<int>(user_ids.size()); }
  int n_items() const { return static_cast<int>(item_ids.size()); }
  const std::vector<Interaction>& split(const std::string& name) const;
};

// --- preprocessing steps, in pipeline order ---------------------------------

// One JSON object per line: user_id, item_id, rating, review_text,
// optional timestamp.
std::vector<RawRecord> load_raw_corpus(const std::string& path);

// Keeps exactly the records of users with at least min_records records.
std::vector<RawRecord> filter_users(const std::vector<RawRecord>& records, int min_records);

double compute_beta(std::span<const int> token_ids_before_eos,
                    const std::set<int>& feature_indices);

// After this, every item in validation or test also appears in train;
// offending records are moved into train.
void cold_start_shield(DatasetSplit& splits);

struct PreprocessOptions {
  int min_user_records = 10;
  int min_token_freq = 10;
  SplitFractions fractions;
  unsigned int seed = 42;
};

// filter -> tokenize (dropping review-less records) -> index users/items ->
// seeded split -> cold-start shield -> vocabulary from the train split ->
// id encoding with per-sentence beta.
Dataset preprocess_corpus(const std::vector<RawRecord>& records,
                          const std::vector<std::string>& feature_words,
                          const PreprocessOptions& opts);

// --- batching ----------------------------------------------------------------

struct BatchSentence {
  std::vector<int> input_ids;   // BOS, y_1 .. y_{T-1}, then PAD
  std::vector<int> target_ids;  // y_1 .. y_T (= EOS), then PAD
  double beta = 0.0;
  int length = 0;  // real target count including EOS
};

struct BatchItem {
  int user_index = -1;
  int item_index = -1;
  double rating = 0.0;
  std::vector<BatchSentence> sentences;
};

struct Batch {
  std::vector<BatchItem> items;
};

// Shuffles interaction order with the supplied rng, keeps the first
// n_sentences sentences of each review, pads every sentence in a batch to the
// batch-wide max length. Positions at or past `length` are PAD and carry no
// loss.
class BatchIterator {
public:
  BatchIterator(const std::vector<Interaction>& interactions, int batch_size, int n_sentences,
                std::mt19937* rng);

  bool next(Batch& out);
  void reset(std::mt19937* rng);

private:
  const std::vector<Interaction>* interactions_;
  std::vector<int> order_;
  size_t cursor_ = 0;
  int batch_size_;
  int n_sentences_;
};

}  // namespace hss
