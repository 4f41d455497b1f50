#pragma once

#include <string>
#include <vector>

namespace hss {

// Lowercases ASCII, detaches punctuation characters into single-character
// tokens, splits on whitespace, and closes a sentence at each '.', '!' or '?'
// (the terminator stays as the sentence's final token). Trailing text without
// a terminator still forms a sentence. Empty input gives an empty list.
std::vector<std::vector<std::string>> sentence_split_and_tokenize(const std::string& text);

// Space-joins tokens; re-tokenizing the result reproduces the tokens.
std::string detokenize(const std::vector<std::string>& tokens);

}  // namespace hss
