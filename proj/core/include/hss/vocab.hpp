#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hss/errors.hpp"

namespace hss {

// Token table with four reserved entries at fixed indices. Non-special
// entries are ordered by descending training-split frequency, ties broken
// alphabetically, so a rebuild from the same corpus is bit-identical.
struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecials = 4;

  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;
  std::set<int> feature_indices;

  int size() const { return static_cast<int>(tokens.size()); }
  int lookup(const std::string& token) const;  // UNK when absent
  const std::string& token_at(int id) const;
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
  bool is_feature(int id) const { return feature_indices.count(id) > 0; }

  static Vocabulary with_specials();
};

// Frequencies must come from the training split only. Tokens below min_freq
// map to UNK; feature words keep their status only if they survive the cut.
Vocabulary build_vocab(const std::unordered_map<std::string, long>& train_frequencies,
                       const std::vector<std::string>& feature_words, int min_freq);

// One lowercase feature word per line; blank lines skipped.
std::vector<std::string> load_feature_lexicon(const std::string& path);

}  // namespace hss
