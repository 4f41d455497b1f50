#include "hss/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "hss/text.hpp"

namespace hss {

const std::vector<Interaction>& Dataset::split(const std::string& name) const {
  if (name == "train") return splits.train;
  if (name == "valid" || name == "validation") return splits.validation;
  if (name == "test") return splits.test;
  throw LookupError("unknown split '" + name + "' (expected train, valid or test)");
}

std::vector<RawRecord> load_raw_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path);
  std::vector<RawRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    RawRecord r;
    try {
      r.user_id = j.at("user_id").get<std::string>();
      r.item_id = j.at("item_id").get<std::string>();
      r.rating = j.at("rating").get<double>();
      r.review_text = j.at("review_text").get<std::string>();
      if (j.contains("timestamp")) r.timestamp = j.at("timestamp").get<long long>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!std::isfinite(r.rating))
      throw IoError(path + ":" + std::to_string(line_no) + ": non-finite rating");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RawRecord> filter_users(const std::vector<RawRecord>& records, int min_records) {
  if (min_records < 1) throw ContractError("min_records must be at least 1");
  std::unordered_map<std::string, int> counts;
  for (const auto& r : records) ++counts[r.user_id];
  std::vector<RawRecord> kept;
  for (const auto& r : records)
    if (counts[r.user_id] >= min_records) kept.push_back(r);
  return kept;
}

double compute_beta(std::span<const int> token_ids_before_eos,
                    const std::set<int>& feature_indices) {
  if (token_ids_before_eos.empty()) throw ContractError("beta of an empty sentence");
  int hits = 0;
  for (int id : token_ids_before_eos) hits += feature_indices.count(id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(token_ids_before_eos.size());
}

namespace {

struct InterimRecord {
  int user_index;
  int item_index;
  double rating;
  std::vector<std::vector<std::string>> sentences;
};

struct SplitIndices {
  std::vector<int> train, validation, test;
};

SplitIndices split_indices(int n, const SplitFractions& f, unsigned int seed) {
  const double total = f.train + f.validation + f.test;
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("split fractions sum to " + std::to_string(total) + ", expected 1");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::mt19937 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_val = static_cast<int>(std::lround(n * f.validation));
  const int n_test = static_cast<int>(std::lround(n * f.test));
  const int n_train = n - n_val - n_test;
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

// Moves validation/test records whose item is unseen in train into train,
// checking against the live train-item set so one move can rescue later
// records of the same item.
template <class Rec, class ItemOf>
void shield_splits(std::vector<Rec>& train, std::vector<Rec>& validation,
                   std::vector<Rec>& test, ItemOf item_of) {
  std::unordered_set<int> seen;
  for (const auto& r : train) seen.insert(item_of(r));
  auto sweep = [&](std::vector<Rec>& part) {
    std::vector<Rec> stay;
    stay.reserve(part.size());
    for (auto& r : part) {
      if (seen.count(item_of(r))) {
        stay.push_back(std::move(r));
      } else {
        seen.insert(item_of(r));
        train.push_back(std::move(r));
      }
    }
    part = std::move(stay);
  };
  sweep(validation);
  sweep(test);
}

}  // namespace

void cold_start_shield(DatasetSplit& splits) {
  shield_splits(splits.train, splits.validation, splits.test,
                [](const Interaction& r) { return r.item_index; });
}

Dataset preprocess_corpus(const std::vector<RawRecord>& records,
                          const std::vector<std::string>& feature_words,
                          const PreprocessOptions& opts) {
  const auto filtered = filter_users(records, opts.min_user_records);

  Dataset ds;
  std::vector<InterimRecord> interim;
  interim.reserve(filtered.size());
  for (const auto& r : filtered) {
    auto sentences = sentence_split_and_tokenize(r.review_text);
    if (sentences.empty()) continue;
    InterimRecord rec;
    auto [uit, unew] = ds.user_index.try_emplace(r.user_id, ds.n_users());
    if (unew) ds.user_ids.push_back(r.user_id);
    auto [iit, inew] = ds.item_index.try_emplace(r.item_id, ds.n_items());
    if (inew) ds.item_ids.push_back(r.item_id);
    rec.user_index = uit->second;
    rec.item_index = iit->second;
    rec.rating = r.rating;
    rec.sentences = std::move(sentences);
    interim.push_back(std::move(rec));
  }

  const auto idx = split_indices(static_cast<int>(interim.size()), opts.fractions, opts.seed);
  auto take = [&](const std::vector<int>& which) {
    std::vector<InterimRecord> part;
    part.reserve(which.size());
    for (int i : which) part.push_back(interim[i]);
    return part;
  };
  auto train = take(idx.train);
  auto validation = take(idx.validation);
  auto test = take(idx.test);
  shield_splits(train, validation, test, [](const InterimRecord& r) { return r.item_index; });

  std::unordered_map<std::string, long> freqs;
  for (const auto& rec : train)
    for (const auto& s : rec.sentences)
      for (const auto& tok : s) ++freqs[tok];
  ds.vocab = build_vocab(freqs, feature_words, opts.min_token_freq);

  auto encode = [&](const std::vector<InterimRecord>& part) {
    std::vector<Interaction> out;
    out.reserve(part.size());
    for (const auto& rec : part) {
      Interaction inter;
      inter.user_index = rec.user_index;
      inter.item_index = rec.item_index;
      inter.rating = rec.rating;
      for (const auto& s : rec.sentences) {
        SentenceRecord sr;
        sr.n_words = static_cast<int>(s.size());
        for (const auto& tok : s) sr.token_ids.push_back(ds.vocab.lookup(tok));
        for (int id : sr.token_ids) sr.n_feature_words += ds.vocab.is_feature(id) ? 1 : 0;
        sr.beta = compute_beta(sr.token_ids, ds.vocab.feature_indices);
        sr.token_ids.push_back(Vocabulary::kEos);
        inter.sentences.push_back(std::move(sr));
      }
      out.push_back(std::move(inter));
    }
    return out;
  };
  ds.splits.train = encode(train);
  ds.splits.validation = encode(validation);
  ds.splits.test = encode(test);
  return ds;
}

BatchIterator::BatchIterator(const std::vector<Interaction>& interactions, int batch_size,
                             int n_sentences, std::mt19937* rng)
    : interactions_(&interactions), batch_size_(batch_size), n_sentences_(n_sentences) {
  if (batch_size < 1) throw ContractError("batch size must be at least 1");
  if (n_sentences < 1) throw ContractError("sentence budget must be at least 1");
  order_.resize(interactions.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (rng) std::shuffle(order_.begin(), order_.end(), *rng);
}

void BatchIterator::reset(std::mt19937* rng) {
  cursor_ = 0;
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (rng) std::shuffle(order_.begin(), order_.end(), *rng);
}

bool BatchIterator::next(Batch& out) {
  out.items.clear();
  if (cursor_ >= order_.size()) return false;
  const size_t end = std::min(order_.size(), cursor_ + static_cast<size_t>(batch_size_));

  int max_len = 0;
  for (size_t i = cursor_; i < end; ++i) {
    const auto& inter = (*interactions_)[order_[i]];
    const int n = std::min<int>(n_sentences_, static_cast<int>(inter.sentences.size()));
    for (int s = 0; s < n; ++s)
      max_len = std::max(max_len, static_cast<int>(inter.sentences[s].token_ids.size()));
  }

  for (size_t i = cursor_; i < end; ++i) {
    const auto& inter = (*interactions_)[order_[i]];
    BatchItem item;
    item.user_index = inter.user_index;
    item.item_index = inter.item_index;
    item.rating = inter.rating;
    const int n = std::min<int>(n_sentences_, static_cast<int>(inter.sentences.size()));
    for (int s = 0; s < n; ++s) {
      const auto& sr = inter.sentences[s];
      BatchSentence bs;
      bs.beta = sr.beta;
      bs.length = static_cast<int>(sr.token_ids.size());
      bs.input_ids.assign(max_len, Vocabulary::kPad);
      bs.target_ids.assign(max_len, Vocabulary::kPad);
      bs.input_ids[0] = Vocabulary::kBos;
      for (int t = 1; t < bs.length; ++t) bs.input_ids[t] = sr.token_ids[t - 1];
      for (int t = 0; t < bs.length; ++t) bs.target_ids[t] = sr.token_ids[t];
      item.sentences.push_back(std::move(bs));
    }
    out.items.push_back(std::move(item));
  }
  cursor_ = end;
  return true;
}

}  // namespace hss
