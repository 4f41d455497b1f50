#include "hss/text.hpp"

#include <cctype>

namespace hss {

std::vector<std::vector<std::string>> sentence_split_and_tokenize(const std::string& text) {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> sentence;
  std::string token;

  auto flush_token = [&]() {
    if (!token.empty()) {
      sentence.push_back(token);
      token.clear();
    }
  };
  auto flush_sentence = [&]() {
    flush_token();
    if (!sentence.empty()) {
      sentences.push_back(sentence);
      sentence.clear();
    }
  };

  for (char raw : text) {
    const auto uc = static_cast<unsigned char>(raw);
    const char c = static_cast<char>(std::tolower(uc));
    if (std::isspace(uc)) {
      flush_token();
    } else if (std::ispunct(uc)) {
      flush_token();
      sentence.emplace_back(1, c);
      if (c == '.' || c == '!' || c == '?') flush_sentence();
    } else {
      token.push_back(c);
    }
  }
  flush_sentence();
  return sentences;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace hss
