#include "hss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace hss {

namespace {

using Counts = std::map<std::vector<std::string>, long>;

Counts ngram_counts(const std::vector<std::string>& tokens, int n) {
  Counts c;
  if (static_cast<int>(tokens.size()) >= n)
    for (size_t i = 0; i + n <= tokens.size(); ++i)
      ++c[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return c;
}

long total(const Counts& c) {
  long t = 0;
  for (const auto& [k, v] : c) t += v;
  return t;
}

// Unigrams plus in-order pairs with at most `max_gap` intervening tokens.
Counts skip_unit_counts(const std::vector<std::string>& tokens, int max_gap) {
  Counts c;
  for (const auto& t : tokens) ++c[{t}];
  for (size_t i = 0; i < tokens.size(); ++i)
    for (size_t j = i + 1; j < tokens.size() && j - i - 1 <= static_cast<size_t>(max_gap); ++j)
      ++c[{tokens[i], tokens[j]}];
  return c;
}

double f_measure(double recall, double precision, double beta) {
  const double denom = recall + beta * beta * precision;
  if (denom == 0.0) return 0.0;
  return (1.0 + beta * beta) * recall * precision / denom;
}

RougeScore matched_units(const Counts& cand, const std::vector<Counts>& refs) {
  long num = 0, den_r = 0, den_p = 0;
  const long cand_total = total(cand);
  for (const auto& ref : refs) {
    den_r += total(ref);
    den_p += cand_total;
    for (const auto& [gram, ref_count] : ref) {
      auto it = cand.find(gram);
      if (it != cand.end()) num += std::min(it->second, ref_count);
    }
  }
  RougeScore s;
  s.recall = den_r > 0 ? static_cast<double>(num) / den_r : 0.0;
  s.precision = den_p > 0 ? static_cast<double>(num) / den_p : 0.0;
  s.f1 = f_measure(s.recall, s.precision, 1.0);
  return s;
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void require_references(const EvalPair& pair) {
  if (pair.references.empty()) throw ContractError("scored pair without references");
}

}  // namespace

double rmse(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw ContractError("rmse over an empty set");
  double sq = 0.0;
  for (const auto& [pred, truth] : pairs) sq += (pred - truth) * (pred - truth);
  return std::sqrt(sq / static_cast<double>(pairs.size()));
}

BleuStats bleu_stats(const std::vector<EvalPair>& pairs, int max_n) {
  if (pairs.empty()) throw ContractError("bleu over an empty candidate set");
  if (max_n < 1) throw ContractError("bleu needs max_n >= 1");

  std::vector<long> num(max_n, 0), den(max_n, 0);
  long cand_len_total = 0, ref_len_total = 0;
  for (const auto& pair : pairs) {
    require_references(pair);
    const long clen = static_cast<long>(pair.candidate.size());
    cand_len_total += clen;

    long best_ref = static_cast<long>(pair.references[0].size());
    for (const auto& ref : pair.references) {
      const long rlen = static_cast<long>(ref.size());
      const long d_new = std::abs(rlen - clen), d_old = std::abs(best_ref - clen);
      if (d_new < d_old || (d_new == d_old && rlen < best_ref)) best_ref = rlen;
    }
    ref_len_total += best_ref;

    for (int n = 1; n <= max_n; ++n) {
      const Counts cand = ngram_counts(pair.candidate, n);
      Counts clip;
      for (const auto& ref : pair.references)
        for (const auto& [gram, count] : ngram_counts(ref, n)) {
          auto& c = clip[gram];
          c = std::max(c, count);
        }
      for (const auto& [gram, count] : cand) {
        auto it = clip.find(gram);
        if (it != clip.end()) num[n - 1] += std::min(count, it->second);
      }
      den[n - 1] += std::max<long>(0, clen - n + 1);
    }
  }

  BleuStats out;
  out.precisions.resize(max_n);
  bool all_positive = true;
  double log_sum = 0.0;
  for (int n = 0; n < max_n; ++n) {
    out.precisions[n] = den[n] > 0 ? static_cast<double>(num[n]) / den[n] : 0.0;
    if (out.precisions[n] <= 0.0)
      all_positive = false;
    else
      log_sum += std::log(out.precisions[n]);
  }
  out.brevity_penalty =
      cand_len_total > 0
          ? std::min(1.0, std::exp(1.0 - static_cast<double>(ref_len_total) / cand_len_total))
          : 0.0;
  out.score = all_positive ? out.brevity_penalty * std::exp(log_sum / max_n) : 0.0;
  return out;
}

double bleu(const std::vector<EvalPair>& pairs, int max_n) {
  return bleu_stats(pairs, max_n).score;
}

RougeScore rouge_n(const EvalPair& pair, int n) {
  if (n < 1) throw ContractError("rouge-n needs n >= 1");
  require_references(pair);
  std::vector<Counts> refs;
  refs.reserve(pair.references.size());
  for (const auto& ref : pair.references) refs.push_back(ngram_counts(ref, n));
  return matched_units(ngram_counts(pair.candidate, n), refs);
}

RougeScore rouge_l(const EvalPair& pair) {
  require_references(pair);
  RougeScore best;
  bool first = true;
  for (const auto& ref : pair.references) {
    const size_t l = lcs_length(pair.candidate, ref);
    RougeScore s;
    s.recall = ref.empty() ? 0.0 : static_cast<double>(l) / ref.size();
    s.precision = pair.candidate.empty() ? 0.0 : static_cast<double>(l) / pair.candidate.size();
    s.f1 = f_measure(s.recall, s.precision, 1.2);
    if (first || s.f1 > best.f1) best = s;
    first = false;
  }
  return best;
}

RougeScore rouge_su4(const EvalPair& pair) {
  require_references(pair);
  std::vector<Counts> refs;
  refs.reserve(pair.references.size());
  for (const auto& ref : pair.references) refs.push_back(skip_unit_counts(ref, 4));
  return matched_units(skip_unit_counts(pair.candidate, 4), refs);
}

RougeScore rouge_pair(const EvalPair& pair, RougeKind kind) {
  switch (kind) {
    case RougeKind::kN1: return rouge_n(pair, 1);
    case RougeKind::kN2: return rouge_n(pair, 2);
    case RougeKind::kL: return rouge_l(pair);
    case RougeKind::kSU4: return rouge_su4(pair);
  }
  throw ContractError("unknown rouge kind");
}

RougeScore rouge_corpus(const std::vector<EvalPair>& pairs, RougeKind kind) {
  if (pairs.empty()) throw ContractError("rouge over an empty pair set");
  RougeScore mean;
  for (const auto& pair : pairs) {
    const RougeScore s = rouge_pair(pair, kind);
    mean.recall += s.recall;
    mean.precision += s.precision;
    mean.f1 += s.f1;
  }
  const double n = static_cast<double>(pairs.size());
  mean.recall /= n;
  mean.precision /= n;
  mean.f1 /= n;
  return mean;
}

std::optional<double> feature_coverage(const std::vector<EvalPair>& pairs,
                                       const std::set<std::string>& feature_words) {
  double sum = 0.0;
  long scored = 0;
  for (const auto& pair : pairs) {
    std::set<std::string> in_refs;
    for (const auto& ref : pair.references)
      for (const auto& tok : ref)
        if (feature_words.count(tok)) in_refs.insert(tok);
    if (in_refs.empty()) continue;
    long covered = 0;
    std::set<std::string> cand(pair.candidate.begin(), pair.candidate.end());
    for (const auto& f : in_refs) covered += cand.count(f) ? 1 : 0;
    sum += static_cast<double>(covered) / static_cast<double>(in_refs.size());
    ++scored;
  }
  if (scored == 0) return std::nullopt;
  return sum / static_cast<double>(scored);
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
  return buf;
}

std::string rouge_json(const RougeScore& s) {
  return "{\"recall\": " + pct(s.recall) + ", \"precision\": " + pct(s.precision) +
         ", \"f1\": " + pct(s.f1) + "}";
}

}  // namespace

std::string report_to_json(const MetricReport& r) {
  char rmse_buf[32];
  std::snprintf(rmse_buf, sizeof(rmse_buf), "%.4f", r.rmse);
  std::string out = "{\n";
  out += "  \"rmse\": " + std::string(rmse_buf) + ",\n";
  out += "  \"bleu1\": " + pct(r.bleu1) + ",\n";
  out += "  \"bleu4\": " + pct(r.bleu4) + ",\n";
  out += "  \"rouge1\": " + rouge_json(r.rouge1) + ",\n";
  out += "  \"rouge2\": " + rouge_json(r.rouge2) + ",\n";
  out += "  \"rougeL\": " + rouge_json(r.rougeL) + ",\n";
  out += "  \"rougeSU4\": " + rouge_json(r.rougeSU4) + ",\n";
  out += "  \"feature_coverage\": " +
         (r.feature_coverage ? pct(*r.feature_coverage) : std::string("null")) + "\n";
  out += "}\n";
  return out;
}

void write_report(const MetricReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << report_to_json(r);
  if (!out) throw IoError("write failed for " + path);
}

std::vector<TextRow> read_text_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TextRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected two tab separators");
    rows.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
  }
  return rows;
}

}  // namespace hss
