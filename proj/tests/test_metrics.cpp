#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hss/metrics.hpp"

using hss::EvalPair;
using hss::RougeScore;

namespace {

using Tokens = std::vector<std::string>;

// --- brute-force oracles, written against the metric definitions ------------

std::unordered_map<std::string, long> gram_bag(const Tokens& t, int n) {
  std::unordered_map<std::string, long> bag;
  for (int i = 0; i + n <= static_cast<int>(t.size()); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) key += t[i + k] + "\x01";
    ++bag[key];
  }
  return bag;
}

struct BleuCounts {
  std::vector<long> num, den;
  long cand_len = 0, ref_len = 0;
};

BleuCounts brute_bleu_counts(const std::vector<EvalPair>& pairs, int max_n) {
  BleuCounts out;
  out.num.assign(max_n, 0);
  out.den.assign(max_n, 0);
  for (const auto& pair : pairs) {
    const long clen = static_cast<long>(pair.candidate.size());
    out.cand_len += clen;
    long best = static_cast<long>(pair.references.front().size());
    for (const auto& ref : pair.references) {
      const long rlen = static_cast<long>(ref.size());
      if (std::abs(rlen - clen) < std::abs(best - clen) ||
          (std::abs(rlen - clen) == std::abs(best - clen) && rlen < best))
        best = rlen;
    }
    out.ref_len += best;
    for (int n = 1; n <= max_n; ++n) {
      auto cand = gram_bag(pair.candidate, n);
      std::unordered_map<std::string, long> clip;
      for (const auto& ref : pair.references)
        for (const auto& [g, c] : gram_bag(ref, n))
          clip[g] = std::max(clip[g], c);
      for (const auto& [g, c] : cand) {
        auto it = clip.find(g);
        if (it != clip.end()) out.num[n - 1] += std::min(c, it->second);
      }
      out.den[n - 1] += std::max<long>(0, clen - n + 1);
    }
  }
  return out;
}

std::unordered_map<std::string, long> su4_bag(const Tokens& t) {
  std::unordered_map<std::string, long> bag;
  for (const auto& w : t) ++bag[w + "\x01"];
  for (int i = 0; i < static_cast<int>(t.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(t.size()) && j - i - 1 <= 4; ++j)
      ++bag[t[i] + "\x01" + t[j] + "\x01"];
  return bag;
}

// shared recall/precision counting for rouge-n and rouge-su4 style units
RougeScore brute_unit_score(const std::unordered_map<std::string, long>& cand,
                            const std::vector<std::unordered_map<std::string, long>>& refs) {
  long num = 0, den_r = 0, den_p = 0, cand_total = 0;
  for (const auto& [g, c] : cand) cand_total += c;
  for (const auto& ref : refs) {
    for (const auto& [g, c] : ref) den_r += c;
    den_p += cand_total;
    for (const auto& [g, c] : ref) {
      auto it = cand.find(g);
      if (it != cand.end()) num += std::min(c, it->second);
    }
  }
  RougeScore s;
  s.recall = den_r > 0 ? static_cast<double>(num) / den_r : 0.0;
  s.precision = den_p > 0 ? static_cast<double>(num) / den_p : 0.0;
  const double b2 = 1.0;
  const double denom = s.recall + b2 * s.precision;
  s.f1 = denom == 0.0 ? 0.0 : (1.0 + b2) * s.recall * s.precision / denom;
  return s;
}

// full-table LCS, a different shape from the rolling-row implementation
long brute_lcs(const Tokens& a, const Tokens& b) {
  std::vector<std::vector<long>> dp(a.size() + 1, std::vector<long>(b.size() + 1, 0));
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                      : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

RougeScore brute_rouge_l(const EvalPair& pair) {
  RougeScore best;
  bool first = true;
  for (const auto& ref : pair.references) {
    const long l = brute_lcs(pair.candidate, ref);
    RougeScore s;
    s.recall = ref.empty() ? 0.0 : static_cast<double>(l) / ref.size();
    s.precision =
        pair.candidate.empty() ? 0.0 : static_cast<double>(l) / pair.candidate.size();
    const double b2 = 1.2 * 1.2;
    const double denom = s.recall + b2 * s.precision;
    s.f1 = denom == 0.0 ? 0.0 : (1.0 + b2) * s.recall * s.precision / denom;
    if (first || s.f1 > best.f1) best = s;
    first = false;
  }
  return best;
}

Tokens random_tokens(std::mt19937& rng, int min_len, int max_len) {
  static const std::vector<std::string> alphabet{"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  Tokens out(len(rng));
  for (auto& t : out) t = alphabet[pick(rng)];
  return out;
}

}  // namespace

TEST_CASE("bleu worked examples") {
  SUBCASE("clipped unigram precision 2/7") {
    EvalPair p;
    p.candidate = Tokens(7, "the");
    p.references = {{"the", "cat", "sat", "on", "the", "mat"}};
    auto stats = hss::bleu_stats({p}, 1);
    CHECK(stats.precisions[0] == doctest::Approx(2.0 / 7));
    CHECK(stats.brevity_penalty == 1.0);  // candidate longer than reference
    CHECK(stats.score == doctest::Approx(2.0 / 7));
  }

  SUBCASE("identical text scores 1 at every order") {
    EvalPair p;
    p.candidate = {"the", "battery", "lasts", "all", "day", "."};
    p.references = {p.candidate};
    CHECK(hss::bleu({p}, 1) == doctest::Approx(1.0));
    CHECK(hss::bleu({p}, 4) == doctest::Approx(1.0));
  }

  SUBCASE("disjoint text scores 0 without smoothing") {
    EvalPair p;
    p.candidate = {"x", "y", "z", "w"};
    p.references = {{"the", "cat", "sat", "here"}};
    CHECK(hss::bleu({p}, 1) == 0.0);
    CHECK(hss::bleu({p}, 4) == 0.0);
  }

  SUBCASE("short candidates pay the brevity penalty") {
    EvalPair p;
    p.candidate = {"the", "cat", "sat"};
    p.references = {{"the", "cat", "sat", "on", "a", "mat"}};
    auto stats = hss::bleu_stats({p}, 1);
    CHECK(stats.precisions[0] == doctest::Approx(1.0));
    CHECK(stats.brevity_penalty == doctest::Approx(std::exp(1.0 - 6.0 / 3.0)));
  }

  SUBCASE("length tie between references picks the shorter") {
    EvalPair p;
    p.candidate = {"a", "a", "a", "a"};  // length 4: refs of 3 and 5 tie
    p.references = {{"a", "a", "a", "a", "a"}, {"a", "a", "a"}};
    auto stats = hss::bleu_stats({p}, 1);
    CHECK(stats.brevity_penalty == 1.0);  // r=3 < c=4
  }

  SUBCASE("empty input is a contract error") {
    CHECK_THROWS_AS((void)hss::bleu({}, 4), hss::ContractError);
    EvalPair p;
    p.candidate = {"a"};
    CHECK_THROWS_AS((void)hss::bleu({p}, 4), hss::ContractError);  // no references
  }
}

TEST_CASE("rouge worked examples") {
  EvalPair p;
  p.candidate = {"the", "cat", "sat"};
  p.references = {{"the", "cat", "ate"}};

  SUBCASE("rouge-1 matches two of three unigrams") {
    auto s = hss::rouge_n(p, 1);
    CHECK(s.recall == doctest::Approx(2.0 / 3));
    CHECK(s.precision == doctest::Approx(2.0 / 3));
    CHECK(s.f1 == doctest::Approx(2.0 / 3));
  }

  SUBCASE("rouge-2 matches one of two bigrams") {
    auto s = hss::rouge_n(p, 2);
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.precision == doctest::Approx(0.5));
  }

  SUBCASE("rouge-l finds the length-2 common subsequence") {
    auto s = hss::rouge_l(p);
    CHECK(s.recall == doctest::Approx(2.0 / 3));
    CHECK(s.precision == doctest::Approx(2.0 / 3));
    CHECK(s.f1 == doctest::Approx(2.0 / 3));  // beta cancels when r == p
  }

  SUBCASE("rouge-su4 counts unigrams and gapped pairs") {
    EvalPair q;
    q.candidate = {"a", "b", "c"};
    q.references = {{"a", "c"}};
    auto s = hss::rouge_su4(q);
    // reference units {a, c, (a,c)} all appear among the candidate's
    CHECK(s.recall == doctest::Approx(1.0));
    // candidate holds 3 unigrams + 3 pairs
    CHECK(s.precision == doctest::Approx(3.0 / 6));
  }

  SUBCASE("su4 gap cap excludes distant pairs") {
    EvalPair q;
    q.candidate = {"a", "x", "x", "x", "x", "x", "b"};  // gap of 5 between a and b
    q.references = {{"a", "b"}};
    auto s = hss::rouge_su4(q);
    // (a,b) never forms a candidate unit; only unigrams a and b match
    CHECK(s.recall == doctest::Approx(2.0 / 3));
  }

  SUBCASE("empty candidate scores zero cleanly") {
    EvalPair q;
    q.references = {{"a", "b"}};
    for (auto kind : {hss::RougeKind::kN1, hss::RougeKind::kN2, hss::RougeKind::kL,
                      hss::RougeKind::kSU4}) {
      auto s = hss::rouge_pair(q, kind);
      CHECK(s.recall == 0.0);
      CHECK(s.precision == 0.0);
      CHECK(s.f1 == 0.0);
    }
  }
}

TEST_CASE("randomized pairs agree with the brute-force counters") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> n_refs(1, 3);

  std::vector<EvalPair> corpus;
  for (int trial = 0; trial < 200; ++trial) {
    EvalPair p;
    p.candidate = random_tokens(rng, 0, 8);
    const int refs = n_refs(rng);
    for (int r = 0; r < refs; ++r) p.references.push_back(random_tokens(rng, 1, 8));
    corpus.push_back(p);

    // ROUGE-1/2: counts and ratios exactly equal
    for (int n : {1, 2}) {
      auto got = hss::rouge_n(p, n);
      std::vector<std::unordered_map<std::string, long>> ref_bags;
      for (const auto& ref : p.references) ref_bags.push_back(gram_bag(ref, n));
      auto want = brute_unit_score(gram_bag(p.candidate, n), ref_bags);
      CHECK(got.recall == want.recall);
      CHECK(got.precision == want.precision);
      CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
    }

    // ROUGE-L: full-table LCS, identical selection among references
    auto got_l = hss::rouge_l(p);
    auto want_l = brute_rouge_l(p);
    CHECK(got_l.recall == want_l.recall);
    CHECK(got_l.precision == want_l.precision);
    CHECK(got_l.f1 == doctest::Approx(want_l.f1).epsilon(1e-12));

    // ROUGE-SU4
    auto got_su = hss::rouge_su4(p);
    std::vector<std::unordered_map<std::string, long>> ref_sus;
    for (const auto& ref : p.references) ref_sus.push_back(su4_bag(ref));
    auto want_su = brute_unit_score(su4_bag(p.candidate), ref_sus);
    CHECK(got_su.recall == want_su.recall);
    CHECK(got_su.precision == want_su.precision);
  }

  // corpus-level BLEU counters over all 200 pairs at once
  for (int max_n : {1, 2, 4}) {
    auto stats = hss::bleu_stats(corpus, max_n);
    auto want = brute_bleu_counts(corpus, max_n);
    for (int n = 0; n < max_n; ++n) {
      const double expect =
          want.den[n] > 0 ? static_cast<double>(want.num[n]) / want.den[n] : 0.0;
      CHECK(stats.precisions[n] == expect);
    }
    const double bp =
        want.cand_len > 0
            ? std::min(1.0, std::exp(1.0 - static_cast<double>(want.ref_len) / want.cand_len))
            : 0.0;
    CHECK(stats.brevity_penalty == doctest::Approx(bp).epsilon(1e-12));
  }

  // corpus rouge equals the mean of per-pair brute scores
  auto corpus_r1 = hss::rouge_corpus(corpus, hss::RougeKind::kN1);
  double mean_f = 0.0;
  for (const auto& p : corpus) {
    std::vector<std::unordered_map<std::string, long>> ref_bags;
    for (const auto& ref : p.references) ref_bags.push_back(gram_bag(ref, 1));
    mean_f += brute_unit_score(gram_bag(p.candidate, 1), ref_bags).f1;
  }
  CHECK(corpus_r1.f1 == doctest::Approx(mean_f / corpus.size()).epsilon(1e-12));
}

TEST_CASE("rmse") {
  std::vector<std::pair<double, double>> pairs{{1.0, 4.0}, {5.0, 1.0}};  // errors 3 and 4
  CHECK(hss::rmse(pairs) == doctest::Approx(std::sqrt(12.5)));
  CHECK(hss::rmse({{2.5, 2.5}}) == 0.0);
  CHECK_THROWS_AS((void)hss::rmse({}), hss::ContractError);
}

TEST_CASE("feature coverage") {
  std::set<std::string> lexicon{"battery", "screen", "camera"};

  EvalPair half;
  half.candidate = {"the", "battery", "rocks"};
  half.references = {{"battery", "and", "screen", "both", "good"}};

  EvalPair skipped;  // references mention no feature at all
  skipped.candidate = {"battery"};
  skipped.references = {{"arrived", "fast"}};

  auto fc = hss::feature_coverage({half, skipped}, lexicon);
  REQUIRE(fc.has_value());
  CHECK(*fc == doctest::Approx(0.5));  // one scored pair covering 1 of 2

  auto none = hss::feature_coverage({skipped}, lexicon);
  CHECK_FALSE(none.has_value());

  // distinct-word counting: repeats neither help nor hurt
  EvalPair rep;
  rep.candidate = {"battery", "battery", "battery"};
  rep.references = {{"battery", "battery", "screen"}};
  auto fr = hss::feature_coverage({rep}, lexicon);
  CHECK(*fr == doctest::Approx(0.5));
}

TEST_CASE("report serialization") {
  hss::MetricReport r;
  r.rmse = 1.23456;
  r.bleu1 = 0.12345;
  r.bleu4 = 0.015;
  r.rouge1 = {0.5, 0.25, 0.3333333};
  r.feature_coverage = 0.0674;

  std::string json = hss::report_to_json(r);
  CHECK(json.find("\"rmse\": 1.2346") != std::string::npos);
  CHECK(json.find("\"bleu1\": 12.35") != std::string::npos);  // percent, two decimals
  CHECK(json.find("\"bleu4\": 1.50") != std::string::npos);
  CHECK(json.find("\"recall\": 50.00") != std::string::npos);
  CHECK(json.find("\"feature_coverage\": 6.74") != std::string::npos);

  r.feature_coverage.reset();
  CHECK(hss::report_to_json(r).find("\"feature_coverage\": null") != std::string::npos);
}

TEST_CASE("text row files round-trip and reject malformed lines") {
  const std::string path = "/tmp/hss_test_rows.tsv";
  {
    std::ofstream out(path);
    out << "u1\ti1\tthe battery is great .\n";
    out << "u2\ti2\t\n";  // empty text is legal
  }
  auto rows = hss::read_text_rows(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].user_id == "u1");
  CHECK(rows[0].item_id == "i1");
  CHECK(rows[0].text == "the battery is great .");
  CHECK(rows[1].text.empty());

  {
    std::ofstream out(path);
    out << "only-one-field\n";
  }
  CHECK_THROWS_AS((void)hss::read_text_rows(path), hss::IoError);
  CHECK_THROWS_AS((void)hss::read_text_rows("/nonexistent/nowhere.tsv"), hss::IoError);
  std::remove(path.c_str());
}
