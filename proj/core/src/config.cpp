#include "hss/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>

namespace hss {

void RunConfig::validate() const {
  if (d < 1) throw ConfigError("d must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (lr <= 0.0) throw ConfigError("lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (clip_norm <= 0.0) throw ConfigError("clip_norm must be positive");
  if (beam_size < 1) throw ConfigError("beam_size must be positive");
  if (max_tokens < 1) throw ConfigError("max_tokens must be positive");
  if (keep_sentences < 1) throw ConfigError("keep_sentences must be positive");
  if (n_sentences < 0) throw ConfigError("n_sentences must be 0 (all) or positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (std::abs(split_train + split_valid + split_test - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
  if (eval_split != "train" && eval_split != "valid" && eval_split != "validation" &&
      eval_split != "test")
    throw ConfigError("eval_split must be train, valid or test");
}

int RunConfig::sentence_budget() const {
  return n_sentences == 0 ? std::numeric_limits<int>::max() : n_sentences;
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("value '" + value + "' for " + key + " is not an integer");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("value '" + value + "' for " + key + " is not a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("value '" + value + "' for " + key + " is not a boolean");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_value(RunConfig& cfg, const std::string& raw_key, const std::string& value) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '-', '_');

  using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"d", [](RunConfig& c, const std::string& k, const std::string& v) { c.d = parse_int(k, v); }},
      {"rating_layers", [](RunConfig& c, const std::string& k, const std::string& v) { c.rating_layers = parse_int(k, v); }},
      {"gen_layers", [](RunConfig& c, const std::string& k, const std::string& v) { c.gen_layers = parse_int(k, v); }},
      {"batch_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_int(k, v); }},
      {"lr", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr = parse_double(k, v); }},
      {"momentum", [](RunConfig& c, const std::string& k, const std::string& v) { c.momentum = parse_double(k, v); }},
      {"lambda", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda = parse_double(k, v); }},
      {"dropout", [](RunConfig& c, const std::string& k, const std::string& v) { c.dropout = parse_double(k, v); }},
      {"clip_norm", [](RunConfig& c, const std::string& k, const std::string& v) { c.clip_norm = parse_double(k, v); }},
      {"beam_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.beam_size = parse_int(k, v); }},
      {"max_tokens", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_tokens = parse_int(k, v); }},
      {"keep_sentences", [](RunConfig& c, const std::string& k, const std::string& v) { c.keep_sentences = parse_int(k, v); }},
      {"n_sentences", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_sentences = parse_int(k, v); }},
      {"min_user_records", [](RunConfig& c, const std::string& k, const std::string& v) { c.min_user_records = parse_int(k, v); }},
      {"min_word_freq", [](RunConfig& c, const std::string& k, const std::string& v) { c.min_word_freq = parse_int(k, v); }},
      {"split_train", [](RunConfig& c, const std::string& k, const std::string& v) { c.split_train = parse_double(k, v); }},
      {"split_valid", [](RunConfig& c, const std::string& k, const std::string& v) { c.split_valid = parse_double(k, v); }},
      {"split_test", [](RunConfig& c, const std::string& k, const std::string& v) { c.split_test = parse_double(k, v); }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<unsigned int>(parse_int(k, v)); }},
      {"epochs", [](RunConfig& c, const std::string& k, const std::string& v) { c.epochs = parse_int(k, v); }},
      {"allow_unk", [](RunConfig& c, const std::string& k, const std::string& v) { c.allow_unk = parse_bool(k, v); }},
      {"resume", [](RunConfig& c, const std::string& k, const std::string& v) { c.resume = parse_bool(k, v); }},
      {"eval_split", [](RunConfig& c, const std::string&, const std::string& v) { c.eval_split = v; }},
      {"corpus", [](RunConfig& c, const std::string&, const std::string& v) { c.corpus = v; }},
      {"lexicon", [](RunConfig& c, const std::string&, const std::string& v) { c.lexicon = v; }},
      {"dataset", [](RunConfig& c, const std::string&, const std::string& v) { c.dataset = v; }},
      {"checkpoint", [](RunConfig& c, const std::string&, const std::string& v) { c.checkpoint = v; }},
      {"log", [](RunConfig& c, const std::string&, const std::string& v) { c.log = v; }},
      {"report", [](RunConfig& c, const std::string&, const std::string& v) { c.report = v; }},
      {"generations", [](RunConfig& c, const std::string&, const std::string& v) { c.generations = v; }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown configuration key '" + raw_key + "'");
  it->second(cfg, key, value);
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    apply_config_value(cfg, key, value);
  }
}

}  // namespace hss
