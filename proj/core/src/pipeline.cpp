#include "hss/pipeline.hpp"

#include <algorithm>

#include "hss/checkpoint.hpp"
#include "hss/dataset_io.hpp"
#include "hss/decoder.hpp"

namespace hss {

namespace {

void check_vocab_match(const Vocabulary& ckpt, const Vocabulary& ds) {
  if (ckpt.tokens != ds.tokens || ckpt.feature_indices != ds.feature_indices)
    throw CompatibilityError("checkpoint vocabulary does not match the dataset vocabulary");
}

GenerationConfig generation_config(const RunConfig& cfg) {
  GenerationConfig g;
  g.beam_size = cfg.beam_size;
  g.max_tokens = cfg.max_tokens;
  g.keep_sentences = cfg.keep_sentences;
  g.n_sentences = cfg.keep_sentences;
  g.allow_unk = cfg.allow_unk;
  return g;
}

std::vector<std::string> reference_tokens(const Interaction& inter, const Vocabulary& vocab,
                                          int sentence_budget) {
  std::vector<std::string> out;
  const int n = std::min<int>(sentence_budget, static_cast<int>(inter.sentences.size()));
  for (int s = 0; s < n; ++s)
    for (int id : inter.sentences[s].token_ids)
      if (id != Vocabulary::kEos) out.push_back(vocab.token_at(id));
  return out;
}

std::vector<std::string> candidate_tokens(const GenerationResult& gen, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (int id : gen.flat_tokens()) out.push_back(vocab.token_at(id));
  return out;
}

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest_ids(const std::string& wanted, const std::vector<std::string>& known) {
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& id : known) ranked.emplace_back(edit_distance(wanted, id), id);
  std::sort(ranked.begin(), ranked.end());
  std::string out;
  for (size_t i = 0; i < ranked.size() && i < 3; ++i) {
    if (!out.empty()) out += ", ";
    out += ranked[i].second;
  }
  return out;
}

int lookup_id(const std::unordered_map<std::string, int>& table,
              const std::vector<std::string>& known, const std::string& id,
              const std::string& what) {
  auto it = table.find(id);
  if (it == table.end())
    throw LookupError("unknown " + what + " id '" + id + "' (nearest: " + nearest_ids(id, known) +
                      ")");
  return it->second;
}

}  // namespace

PreprocessStats run_preprocess(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.corpus.empty()) throw ConfigError("no corpus path configured");
  if (cfg.lexicon.empty()) throw ConfigError("no lexicon path configured");
  if (cfg.dataset.empty()) throw ConfigError("no dataset path configured");

  const auto records = load_raw_corpus(cfg.corpus);
  const auto features = load_feature_lexicon(cfg.lexicon);

  PreprocessOptions opts;
  opts.min_user_records = cfg.min_user_records;
  opts.min_token_freq = cfg.min_word_freq;
  opts.fractions = {cfg.split_train, cfg.split_valid, cfg.split_test};
  opts.seed = cfg.seed;
  Dataset ds = preprocess_corpus(records, features, opts);
  save_dataset(ds, cfg.dataset);

  PreprocessStats stats;
  stats.n_users = ds.n_users();
  stats.n_items = ds.n_items();
  stats.n_reviews = static_cast<int>(ds.splits.train.size() + ds.splits.validation.size() +
                                     ds.splits.test.size());
  stats.n_features = static_cast<int>(ds.vocab.feature_indices.size());
  stats.vocab_words = ds.vocab.size() - Vocabulary::kNumSpecials;
  return stats;
}

TrainSummary run_train(const RunConfig& cfg, std::vector<EpochStats>* log) {
  cfg.validate();
  if (cfg.dataset.empty()) throw ConfigError("no dataset path configured");
  const Dataset ds = load_dataset(cfg.dataset);
  Trainer trainer(cfg, ds);
  trainer.train(log);
  TrainSummary s;
  s.epochs_completed = cfg.epochs;
  s.best_val_rmse = trainer.best_val_rmse();
  s.has_best = trainer.has_best();
  return s;
}

MetricReport run_evaluate(const RunConfig& cfg) {
  cfg.validate();
  const Dataset ds = load_dataset(cfg.dataset);
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
  check_vocab_match(ckpt.vocab, ds.vocab);
  const ModelParams params = params_from_checkpoint(ckpt);

  const auto& split = ds.split(cfg.eval_split);
  if (split.empty()) throw ConfigError("evaluation split '" + cfg.eval_split + "' is empty");

  Tape tape;
  tape.set_recording(false);
  std::vector<std::pair<double, double>> rating_pairs;
  rating_pairs.reserve(split.size());
  for (const auto& inter : split)
    rating_pairs.emplace_back(
        rating_forward(tape, params, inter.user_index, inter.item_index).item(), inter.rating);

  const auto feature_ids = feature_id_list(ds.vocab);
  const GenerationConfig gen_cfg = generation_config(cfg);
  std::vector<EvalPair> pairs;
  std::vector<GenerationRow> rows;
  pairs.reserve(split.size());
  for (const auto& inter : split) {
    GenerationResult gen =
        generate(params, inter.user_index, inter.item_index, feature_ids, ds.vocab, gen_cfg);
    EvalPair pair;
    pair.candidate = candidate_tokens(gen, ds.vocab);
    pair.references.push_back(reference_tokens(inter, ds.vocab, cfg.sentence_budget()));
    pairs.push_back(std::move(pair));
    if (!cfg.generations.empty())
      rows.push_back({ds.user_ids[inter.user_index], ds.item_ids[inter.item_index],
                      gen.joined_text()});
  }

  std::set<std::string> feature_words;
  for (int id : ds.vocab.feature_indices) feature_words.insert(ds.vocab.token_at(id));

  MetricReport report;
  report.rmse = rmse(rating_pairs);
  report.bleu1 = bleu(pairs, 1);
  report.bleu4 = bleu(pairs, 4);
  report.rouge1 = rouge_corpus(pairs, RougeKind::kN1);
  report.rouge2 = rouge_corpus(pairs, RougeKind::kN2);
  report.rougeL = rouge_corpus(pairs, RougeKind::kL);
  report.rougeSU4 = rouge_corpus(pairs, RougeKind::kSU4);
  report.feature_coverage = feature_coverage(pairs, feature_words);

  if (!cfg.report.empty()) write_report(report, cfg.report);
  if (!cfg.generations.empty()) write_generation_file(cfg.generations, rows);
  return report;
}

std::vector<std::string> run_generate(const RunConfig& cfg, const std::string& user_id,
                                      const std::string& item_id) {
  cfg.validate();
  const Dataset ds = load_dataset(cfg.dataset);
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
  check_vocab_match(ckpt.vocab, ds.vocab);
  const ModelParams params = params_from_checkpoint(ckpt);

  const int u = lookup_id(ds.user_index, ds.user_ids, user_id, "user");
  const int i = lookup_id(ds.item_index, ds.item_ids, item_id, "item");
  GenerationResult gen =
      generate(params, u, i, feature_id_list(ds.vocab), ds.vocab, generation_config(cfg));
  return gen.texts;
}

}  // namespace hss
