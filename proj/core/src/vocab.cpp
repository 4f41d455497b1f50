#include "hss/vocab.hpp"

#include <algorithm>
#include <fstream>

namespace hss {

int Vocabulary::lookup(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_at(int id) const {
  if (id < 0 || id >= size())
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(size()));
  return tokens[id];
}

Vocabulary Vocabulary::with_specials() {
  Vocabulary v;
  v.tokens = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (int i = 0; i < kNumSpecials; ++i) v.index[v.tokens[i]] = i;
  return v;
}

Vocabulary build_vocab(const std::unordered_map<std::string, long>& train_frequencies,
                       const std::vector<std::string>& feature_words, int min_freq) {
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, freq] : train_frequencies)
    if (freq >= min_freq) kept.emplace_back(tok, freq);
  if (kept.empty())
    throw ConfigError("no token reaches frequency " + std::to_string(min_freq) +
                      "; vocabulary would be empty");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v = Vocabulary::with_specials();
  for (const auto& [tok, freq] : kept) {
    v.index[tok] = v.size();
    v.tokens.push_back(tok);
  }
  for (const auto& w : feature_words) {
    auto it = v.index.find(w);
    if (it != v.index.end() && !v.is_special(it->second)) v.feature_indices.insert(it->second);
  }
  return v;
}

std::vector<std::string> load_feature_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature lexicon " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

}  // namespace hss
