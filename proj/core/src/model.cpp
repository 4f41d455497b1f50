#include "hss/model.hpp"

#include <cmath>

namespace hss {

void ModelConfig::validate() const {
  if (d < 1) throw ConfigError("latent dimension must be positive");
  if (n_users < 1 || n_items < 1) throw ConfigError("model needs at least one user and item");
  if (vocab_size < Vocabulary::kNumSpecials) throw ConfigError("vocabulary too small");
  if (rating_layers < 1) throw ConfigError("rating head needs at least one hidden layer");
  if (gen_layers < 2) throw ConfigError("fusion stack needs at least two layers");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
}

namespace {

Tensor normal(const Shape& s, std::mt19937& rng) {
  return init_tensor(s, InitScheme::kNormal, rng);
}

GruParams init_gru(int d, std::mt19937& rng) {
  GruParams g;
  g.Wxr = init_tensor({d, d}, InitScheme::kOrthogonal, rng);
  g.Whr = init_tensor({d, d}, InitScheme::kOrthogonal, rng);
  g.br = Tensor::zeros({d});
  g.Wxz = init_tensor({d, d}, InitScheme::kOrthogonal, rng);
  g.Whz = init_tensor({d, d}, InitScheme::kOrthogonal, rng);
  g.bz = Tensor::zeros({d});
  g.Wxg = init_tensor({d, d}, InitScheme::kOrthogonal, rng);
  g.Whg = init_tensor({d, d}, InitScheme::kOrthogonal, rng);
  g.bg = Tensor::zeros({d});
  return g;
}

void append_gru(std::vector<NamedTensor>& out, const std::string& prefix, const GruParams& g) {
  out.push_back({prefix + ".Wxr", g.Wxr});
  out.push_back({prefix + ".Whr", g.Whr});
  out.push_back({prefix + ".br", g.br});
  out.push_back({prefix + ".Wxz", g.Wxz});
  out.push_back({prefix + ".Whz", g.Whz});
  out.push_back({prefix + ".bz", g.bz});
  out.push_back({prefix + ".Wxg", g.Wxg});
  out.push_back({prefix + ".Whg", g.Whg});
  out.push_back({prefix + ".bg", g.bg});
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::mt19937& rng) {
  cfg.validate();
  const int d = cfg.d;
  ModelParams p;
  p.cfg = cfg;

  p.U = normal({cfg.n_users, d}, rng);
  p.V = normal({cfg.n_items, d}, rng);
  p.E = normal({cfg.vocab_size, d}, rng);

  p.rating_Wu = normal({d, d}, rng);
  p.rating_Wv = normal({d, d}, rng);
  p.rating_b0 = Tensor::zeros({d});
  for (int l = 1; l < cfg.rating_layers; ++l) {
    p.rating_W.push_back(normal({d, d}, rng));
    p.rating_b.push_back(Tensor::zeros({d}));
  }
  p.rating_Wout = normal({1, d}, rng);
  p.rating_bout = Tensor::zeros({1});

  p.attn_W1 = normal({d, 2 * d}, rng);
  p.attn_b1 = Tensor::zeros({d});
  p.attn_w2 = normal({d}, rng);
  p.attn_b2 = Tensor::zeros({1});

  p.ctx0_Wu = normal({d, d}, rng);
  p.ctx0_Wv = normal({d, d}, rng);
  p.ctx0_b = Tensor::zeros({d});

  p.ctx = init_gru(d, rng);
  p.wrd = init_gru(d, rng);

  for (int l = 0; l < cfg.gen_layers - 1; ++l) {
    p.fusion_W.push_back(normal({d, l == 0 ? 3 * d : d}, rng));
    p.fusion_b.push_back(Tensor::zeros({d}));
  }
  p.fusion_Wout = normal({d, d}, rng);
  p.fusion_bout = Tensor::zeros({d});

  p.init_W1 = normal({d, 4 * d}, rng);
  p.init_b1 = Tensor::zeros({d});
  p.init_W2 = normal({d, d}, rng);
  p.init_b2 = Tensor::zeros({d});

  p.out_W = normal({cfg.vocab_size, d}, rng);
  p.out_b = Tensor::zeros({cfg.vocab_size});

  p.set_requires_grad(true);
  return p;
}

std::vector<NamedTensor> ModelParams::group_embedding() const { return {{"E", E}}; }

std::vector<NamedTensor> ModelParams::group_main() const {
  std::vector<NamedTensor> out;
  out.push_back({"U", U});
  out.push_back({"V", V});
  out.push_back({"rating.Wu", rating_Wu});
  out.push_back({"rating.Wv", rating_Wv});
  out.push_back({"rating.b0", rating_b0});
  for (size_t l = 0; l < rating_W.size(); ++l) {
    out.push_back({"rating.W" + std::to_string(l + 1), rating_W[l]});
    out.push_back({"rating.b" + std::to_string(l + 1), rating_b[l]});
  }
  out.push_back({"rating.Wout", rating_Wout});
  out.push_back({"rating.bout", rating_bout});
  out.push_back({"attn.W1", attn_W1});
  out.push_back({"attn.b1", attn_b1});
  out.push_back({"attn.w2", attn_w2});
  out.push_back({"attn.b2", attn_b2});
  out.push_back({"ctx0.Wu", ctx0_Wu});
  out.push_back({"ctx0.Wv", ctx0_Wv});
  out.push_back({"ctx0.b", ctx0_b});
  for (size_t l = 0; l < fusion_W.size(); ++l) {
    out.push_back({"fusion.W" + std::to_string(l), fusion_W[l]});
    out.push_back({"fusion.b" + std::to_string(l), fusion_b[l]});
  }
  out.push_back({"fusion.Wout", fusion_Wout});
  out.push_back({"fusion.bout", fusion_bout});
  out.push_back({"init.W1", init_W1});
  out.push_back({"init.b1", init_b1});
  out.push_back({"init.W2", init_W2});
  out.push_back({"init.b2", init_b2});
  out.push_back({"out.W", out_W});
  out.push_back({"out.b", out_b});
  return out;
}

std::vector<NamedTensor> ModelParams::group_ctx() const {
  std::vector<NamedTensor> out;
  append_gru(out, "ctx", ctx);
  return out;
}

std::vector<NamedTensor> ModelParams::group_wrd() const {
  std::vector<NamedTensor> out;
  append_gru(out, "wrd", wrd);
  return out;
}

std::vector<NamedTensor> ModelParams::named() const {
  std::vector<NamedTensor> out = group_embedding();
  auto main = group_main();
  out.insert(out.end(), main.begin(), main.end());
  auto c = group_ctx();
  out.insert(out.end(), c.begin(), c.end());
  auto w = group_wrd();
  out.insert(out.end(), w.begin(), w.end());
  return out;
}

void ModelParams::set_requires_grad(bool v) {
  for (auto& nt : named()) nt.tensor.set_requires_grad(v);
}

void ModelParams::zero_grad() {
  for (auto& nt : named()) nt.tensor.zero_grad();
}

std::vector<int> feature_id_list(const Vocabulary& vocab) {
  return {vocab.feature_indices.begin(), vocab.feature_indices.end()};
}

// --- forward ops -------------------------------------------------------------

Tensor user_embedding(Tape& tape, const ModelParams& p, int u_idx) {
  return tape.embedding_lookup(p.U, u_idx);
}

Tensor item_embedding(Tape& tape, const ModelParams& p, int i_idx) {
  return tape.embedding_lookup(p.V, i_idx);
}

namespace {

Tensor maybe_dropout(Tape& tape, const Tensor& x, const ModelParams& p, bool training,
                     std::mt19937* rng) {
  if (!training || p.cfg.dropout == 0.0) return x;
  if (!rng) throw ContractError("training-mode forward needs an rng for dropout");
  return tape.dropout(x, p.cfg.dropout, true, *rng);
}

Tensor affine(Tape& tape, const Tensor& W, const Tensor& x, const Tensor& b) {
  return tape.add(tape.matmul(W, x), b);
}

}  // namespace

Tensor rating_forward(Tape& tape, const ModelParams& p, int u_idx, int i_idx, bool training,
                      std::mt19937* rng) {
  const Tensor u = user_embedding(tape, p, u_idx);
  const Tensor v = item_embedding(tape, p, i_idx);
  Tensor h = tape.tanh(
      tape.add(tape.add(tape.matmul(p.rating_Wu, u), tape.matmul(p.rating_Wv, v)), p.rating_b0));
  h = maybe_dropout(tape, h, p, training, rng);
  for (size_t l = 0; l < p.rating_W.size(); ++l) {
    h = tape.tanh(affine(tape, p.rating_W[l], h, p.rating_b[l]));
    h = maybe_dropout(tape, h, p, training, rng);
  }
  return affine(tape, p.rating_Wout, h, p.rating_bout);
}

Tensor rating_loss(Tape& tape, const std::vector<std::pair<Tensor, double>>& pairs) {
  if (pairs.empty()) throw ContractError("rating loss over an empty batch");
  Tensor total;
  for (const auto& [pred, truth] : pairs) {
    Tensor diff = tape.sub(pred, Tensor::scalar(truth));
    Tensor sq = tape.mul(diff, diff);
    total = total.defined() ? tape.add(total, sq) : sq;
  }
  return tape.scale(total, 1.0 / static_cast<double>(pairs.size()));
}

AttentionOut feature_attention(Tape& tape, const ModelParams& p, const Tensor& h,
                               std::span<const int> feature_ids) {
  if (feature_ids.empty()) throw ConfigError("attention needs a non-empty feature lexicon");
  std::vector<Tensor> ks, scores;
  ks.reserve(feature_ids.size());
  for (int id : feature_ids) {
    Tensor k = tape.embedding_lookup(p.E, id);
    Tensor x = tape.concat({h, k});
    Tensor hidden = tape.relu(affine(tape, p.attn_W1, x, p.attn_b1));
    scores.push_back(tape.add(tape.dot(p.attn_w2, hidden), p.attn_b2));
    ks.push_back(std::move(k));
  }
  AttentionOut out;
  out.alpha = tape.softmax(tape.concat(scores));
  for (size_t i = 0; i < ks.size(); ++i) {
    Tensor term = tape.mul(tape.gather(out.alpha, static_cast<int>(i)), ks[i]);
    out.o = out.o.defined() ? tape.add(out.o, term) : term;
  }
  return out;
}

Tensor context_init(Tape& tape, const ModelParams& p, const Tensor& u, const Tensor& v) {
  return tape.relu(
      tape.add(tape.add(tape.matmul(p.ctx0_Wu, u), tape.matmul(p.ctx0_Wv, v)), p.ctx0_b));
}

namespace {

Tensor gru_step(Tape& tape, const GruParams& g, const Tensor& x, const Tensor& h) {
  Tensor r = tape.sigmoid(tape.add(tape.add(tape.matmul(g.Wxr, x), tape.matmul(g.Whr, h)), g.br));
  Tensor z = tape.sigmoid(tape.add(tape.add(tape.matmul(g.Wxz, x), tape.matmul(g.Whz, h)), g.bz));
  Tensor gate = tape.tanh(tape.add(
      tape.add(tape.matmul(g.Wxg, x), tape.matmul(g.Whg, tape.mul(r, h))), g.bg));
  Tensor keep = tape.mul(z, h);
  Tensor fresh = tape.mul(tape.sub(Tensor::scalar(1.0), z), gate);
  return tape.add(keep, fresh);
}

}  // namespace

Tensor context_step(Tape& tape, const ModelParams& p, const Tensor& C_prev,
                    const Tensor& h_last) {
  return gru_step(tape, p.ctx, h_last, C_prev);
}

Tensor word_input(Tape& tape, const ModelParams& p, int word_idx, const Tensor& u,
                  const Tensor& v, bool training, std::mt19937* rng) {
  Tensor e = tape.embedding_lookup(p.E, word_idx);
  Tensor h = tape.concat({e, u, v});
  for (size_t l = 0; l < p.fusion_W.size(); ++l)
    h = tape.relu(affine(tape, p.fusion_W[l], h, p.fusion_b[l]));
  // dropout sits on the fused word input itself, not the hidden layers
  return maybe_dropout(tape, affine(tape, p.fusion_Wout, h, p.fusion_bout), p, training, rng);
}

Tensor sentence_init(Tape& tape, const ModelParams& p, const Tensor& C, const Tensor& u,
                     const Tensor& v, const Tensor& o) {
  Tensor x = tape.concat({C, u, v, o});
  Tensor hidden = tape.relu(affine(tape, p.init_W1, x, p.init_b1));
  return tape.add(tape.matmul(tape.transpose(p.init_W2), hidden), p.init_b2);
}

Tensor word_step(Tape& tape, const ModelParams& p, const Tensor& h_prev, const Tensor& w_t) {
  return gru_step(tape, p.wrd, w_t, h_prev);
}

Tensor output_distribution(Tape& tape, const ModelParams& p, const Tensor& h) {
  return tape.softmax(affine(tape, p.out_W, h, p.out_b));
}

Tensor output_log_distribution(Tape& tape, const ModelParams& p, const Tensor& h) {
  return tape.log_softmax(affine(tape, p.out_W, h, p.out_b));
}

Tensor sentence_nll(Tape& tape, const std::vector<Tensor>& step_log_probs,
                    std::span<const int> targets) {
  size_t real = 0;
  while (real < targets.size() && targets[real] != Vocabulary::kPad) ++real;
  if (real == 0) throw ContractError("sentence with no real target tokens");
  if (step_log_probs.size() != real && step_log_probs.size() != targets.size())
    throw ContractError("log-prob count " + std::to_string(step_log_probs.size()) +
                        " does not match " + std::to_string(real) + " target tokens");
  Tensor total;
  for (size_t t = 0; t < real; ++t) {
    Tensor lp = tape.gather(step_log_probs[t], targets[t]);
    total = total.defined() ? tape.add(total, lp) : lp;
  }
  return tape.scale(total, -1.0);
}

InteractionForward forward_interaction(Tape& tape, const ModelParams& p, const BatchItem& item,
                                       std::span<const int> feature_ids, bool training,
                                       std::mt19937* rng) {
  InteractionForward out;
  out.rating_pred = rating_forward(tape, p, item.user_index, item.item_index, training, rng);

  const Tensor u = user_embedding(tape, p, item.user_index);
  const Tensor v = item_embedding(tape, p, item.item_index);
  Tensor C = context_init(tape, p, u, v);
  Tensor prev_last;

  for (const auto& sent : item.sentences) {
    if (sent.beta <= 0.0) continue;
    if (prev_last.defined()) C = context_step(tape, p, C, prev_last);

    AttentionOut att = feature_attention(tape, p, C, feature_ids);
    Tensor h = sentence_init(tape, p, C, u, v, att.o);

    std::vector<Tensor> log_probs;
    log_probs.reserve(sent.length);
    for (int t = 0; t < sent.length; ++t) {
      Tensor w = word_input(tape, p, sent.input_ids[t], u, v, training, rng);
      h = word_step(tape, p, h, w);
      log_probs.push_back(output_log_distribution(tape, p, h));
    }

    SentenceForward sf;
    sf.nll = sentence_nll(tape, log_probs, sent.target_ids);
    sf.alpha = att.alpha;
    sf.last_hidden = h;
    sf.beta = sent.beta;
    out.sentences.push_back(std::move(sf));
    prev_last = h;
  }
  return out;
}

JointLossParts joint_loss_parts(Tape& tape, const ModelParams& p, const Batch& batch,
                                std::span<const int> feature_ids, bool training,
                                std::mt19937* rng) {
  if (batch.items.empty()) throw ContractError("joint loss over an empty batch");
  std::vector<std::pair<Tensor, double>> rating_pairs;
  Tensor gen_total;
  for (const auto& item : batch.items) {
    InteractionForward fwd = forward_interaction(tape, p, item, feature_ids, training, rng);
    rating_pairs.emplace_back(fwd.rating_pred, item.rating);
    for (const auto& sf : fwd.sentences) {
      Tensor weighted = tape.scale(sf.nll, sf.beta);
      gen_total = gen_total.defined() ? tape.add(gen_total, weighted) : weighted;
    }
  }
  JointLossParts parts;
  parts.rating = rating_loss(tape, rating_pairs);
  parts.total = parts.rating;
  if (gen_total.defined()) {
    parts.generation =
        tape.scale(gen_total, 1.0 / static_cast<double>(batch.items.size()));
    parts.total = tape.add(parts.total, parts.generation);
  }
  return parts;
}

Tensor joint_loss(Tape& tape, const ModelParams& p, const Batch& batch,
                  std::span<const int> feature_ids, bool training, std::mt19937* rng) {
  return joint_loss_parts(tape, p, batch, feature_ids, training, rng).total;
}

}  // namespace hss
