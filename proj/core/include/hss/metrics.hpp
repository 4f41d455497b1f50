#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hss/errors.hpp"

namespace hss {

struct EvalPair {
  std::vector<std::string> candidate;
  std::vector<std::vector<std::string>> references;  // non-empty for scored pairs
};

double rmse(const std::vector<std::pair<double, double>>& pairs);

struct BleuStats {
  std::vector<double> precisions;  // p_1 .. p_max_n
  double brevity_penalty = 0.0;
  double score = 0.0;
};

// Corpus-level modified n-gram precision with per-reference clipping,
// geometric mean over n, brevity penalty from closest reference lengths
// (ties to the shorter). Unsmoothed: any zero p_n zeroes the score.
BleuStats bleu_stats(const std::vector<EvalPair>& pairs, int max_n);
double bleu(const std::vector<EvalPair>& pairs, int max_n);

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

RougeScore rouge_n(const EvalPair& pair, int n);
// LCS against each reference, F-measure with beta = 1.2, best reference kept.
RougeScore rouge_l(const EvalPair& pair);
// Units are unigrams plus in-order token pairs with at most 4 intervening
// tokens.
RougeScore rouge_su4(const EvalPair& pair);

enum class RougeKind { kN1, kN2, kL, kSU4 };
RougeScore rouge_pair(const EvalPair& pair, RougeKind kind);
// Mean of per-pair recall/precision/F1.
RougeScore rouge_corpus(const std::vector<EvalPair>& pairs, RougeKind kind);

// Per pair: |distinct reference feature words covered by the candidate| /
// |distinct reference feature words|; pairs whose references mention no
// feature word are skipped. Empty when every pair is skipped.
std::optional<double> feature_coverage(const std::vector<EvalPair>& pairs,
                                       const std::set<std::string>& feature_words);

struct MetricReport {
  double rmse = 0.0;
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  RougeScore rouge1, rouge2, rougeL, rougeSU4;
  std::optional<double> feature_coverage;
};

// Scores as percentages with two decimals; rmse in rating units with four.
std::string report_to_json(const MetricReport& r);
void write_report(const MetricReport& r, const std::string& path);

struct TextRow {
  std::string user_id;
  std::string item_id;
  std::string text;
};

// Tab-separated user_id, item_id, text; one row per line.
std::vector<TextRow> read_text_rows(const std::string& path);

}  // namespace hss
