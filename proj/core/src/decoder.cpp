#include "hss/decoder.hpp"

#include <algorithm>
#include <fstream>

#include "hss/text.hpp"

namespace hss {

void GenerationConfig::validate() const {
  if (beam_size < 1) throw ConfigError("beam size must be at least 1");
  if (max_tokens < 1) throw ConfigError("token budget must be at least 1");
  if (keep_sentences < 1) throw ConfigError("keep_sentences must be at least 1");
  if (n_sentences < 1) throw ConfigError("sentence count must be at least 1");
}

namespace {

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_likelihood != b.log_likelihood) return a.log_likelihood > b.log_likelihood;
  return a.token_ids < b.token_ids;
}

int last_input(const Hypothesis& h) {
  return h.token_ids.empty() ? Vocabulary::kBos : h.token_ids.back();
}

}  // namespace

std::vector<Hypothesis> beam_step(const std::vector<Hypothesis>& beams, const StepFn& step,
                                  int vocab_size, const GenerationConfig& cfg,
                                  std::span<const int> banned, int token_budget) {
  if (std::all_of(beams.begin(), beams.end(), [](const auto& b) { return b.finished; }))
    return beams;

  std::vector<Hypothesis> candidates;
  for (const auto& beam : beams) {
    if (beam.finished) {
      candidates.push_back(beam);
      continue;
    }
    StepResult r = step(beam.state, last_input(beam));
    if (static_cast<int>(r.log_probs.size()) != vocab_size)
      throw ContractError("decoder step produced " + std::to_string(r.log_probs.size()) +
                          " log-probs for a vocabulary of " + std::to_string(vocab_size));
    for (int tok = 0; tok < vocab_size; ++tok) {
      if (std::find(banned.begin(), banned.end(), tok) != banned.end()) continue;
      Hypothesis h;
      h.token_ids = beam.token_ids;
      h.token_ids.push_back(tok);
      h.log_likelihood = beam.log_likelihood + r.log_probs[tok];
      h.state = r.state;
      h.finished = tok == Vocabulary::kEos ||
                   static_cast<int>(h.token_ids.size()) >= token_budget;
      candidates.push_back(std::move(h));
    }
  }
  std::sort(candidates.begin(), candidates.end(), better);
  if (static_cast<int>(candidates.size()) > cfg.beam_size) candidates.resize(cfg.beam_size);
  return candidates;
}

Hypothesis beam_search(const Tensor& init_state, const StepFn& step, int vocab_size,
                       const GenerationConfig& cfg, std::span<const int> banned,
                       int token_budget) {
  if (token_budget < 1) throw ContractError("beam search needs a positive token budget");
  std::vector<Hypothesis> beams(1);
  beams[0].state = init_state;
  while (std::any_of(beams.begin(), beams.end(), [](const auto& b) { return !b.finished; }))
    beams = beam_step(beams, step, vocab_size, cfg, banned, token_budget);
  return *std::min_element(beams.begin(), beams.end(),
                           [](const auto& a, const auto& b) { return better(a, b); });
}

Hypothesis greedy_search(const Tensor& init_state, const StepFn& step, int vocab_size,
                         const GenerationConfig& cfg, std::span<const int> banned,
                         int token_budget) {
  (void)cfg;
  if (token_budget < 1) throw ContractError("greedy search needs a positive token budget");
  Hypothesis h;
  h.state = init_state;
  while (!h.finished) {
    StepResult r = step(h.state, last_input(h));
    int best = -1;
    for (int tok = 0; tok < vocab_size; ++tok) {
      if (std::find(banned.begin(), banned.end(), tok) != banned.end()) continue;
      if (best < 0 || r.log_probs[tok] > r.log_probs[best]) best = tok;
    }
    if (best < 0) throw ContractError("every token is banned");
    h.token_ids.push_back(best);
    h.log_likelihood += r.log_probs[best];
    h.state = r.state;
    h.finished =
        best == Vocabulary::kEos || static_cast<int>(h.token_ids.size()) >= token_budget;
  }
  return h;
}

std::vector<int> GenerationResult::flat_tokens() const {
  std::vector<int> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::string GenerationResult::joined_text() const {
  std::string out;
  for (const auto& t : texts) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

GenerationResult generate(const ModelParams& p, int u_idx, int i_idx,
                          std::span<const int> feature_ids, const Vocabulary& vocab,
                          const GenerationConfig& cfg) {
  cfg.validate();
  if (!p.U.defined() || !p.E.defined()) throw ContractError("model parameters are not loaded");

  Tape tape;
  tape.set_recording(false);
  const Tensor u = user_embedding(tape, p, u_idx);
  const Tensor v = item_embedding(tape, p, i_idx);

  StepFn step = [&](const Tensor& state, int input_token) {
    Tensor w = word_input(tape, p, input_token, u, v);
    Tensor h = word_step(tape, p, state, w);
    StepResult r;
    r.log_probs = output_log_distribution(tape, p, h).values();
    r.state = h;
    return r;
  };

  std::vector<int> banned = {Vocabulary::kPad, Vocabulary::kBos};
  if (!cfg.allow_unk) banned.push_back(Vocabulary::kUnk);

  std::vector<std::vector<int>> raw;  // per decoded slot, EOS kept
  Tensor C = context_init(tape, p, u, v);
  int spent = 0;
  for (int n = 0; n < cfg.n_sentences && spent < cfg.max_tokens; ++n) {
    AttentionOut att = feature_attention(tape, p, C, feature_ids);
    Tensor h0 = sentence_init(tape, p, C, u, v, att.o);
    Hypothesis best = beam_search(h0, step, vocab.size(), cfg, banned, cfg.max_tokens - spent);
    spent += static_cast<int>(best.token_ids.size());
    raw.push_back(best.token_ids);
    C = context_step(tape, p, C, best.state);
  }

  GenerationResult out;
  for (const auto& tokens : raw) {
    if (static_cast<int>(out.sentences.size()) >= cfg.keep_sentences) break;
    std::vector<int> sent;
    for (int id : tokens)
      if (id != Vocabulary::kEos) sent.push_back(id);
    std::vector<std::string> words;
    words.reserve(sent.size());
    for (int id : sent) words.push_back(vocab.token_at(id));
    out.sentences.push_back(std::move(sent));
    out.texts.push_back(detokenize(words));
  }
  return out;
}

void write_generation_file(const std::string& path, const std::vector<GenerationRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& r : rows) out << r.user_id << '\t' << r.item_id << '\t' << r.text << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace hss
