#pragma once

#include <random>
#include <span>
#include <vector>

#include "hss/corpus.hpp"
#include "hss/optimizer.hpp"
#include "hss/tensor.hpp"

namespace hss {

struct ModelConfig {
  int d = 300;
  int n_users = 0;
  int n_items = 0;
  int vocab_size = 0;
  int rating_layers = 4;  // tanh hidden layers before the linear rating output
  int gen_layers = 3;     // fusion-stack depth: gen_layers-1 relu layers + linear output
  double dropout = 0.1;

  void validate() const;
};

struct GruParams {
  Tensor Wxr, Whr, br;
  Tensor Wxz, Whz, bz;
  Tensor Wxg, Whg, bg;
};

// All trainable state. Word embeddings E are shared between the decoder
// input path and the attention feature vectors.
struct ModelParams {
  ModelConfig cfg;

  Tensor U, V, E;

  Tensor rating_Wu, rating_Wv, rating_b0;
  std::vector<Tensor> rating_W, rating_b;  // hidden layers beyond the first
  Tensor rating_Wout, rating_bout;

  Tensor attn_W1, attn_b1, attn_w2, attn_b2;

  Tensor ctx0_Wu, ctx0_Wv, ctx0_b;
  GruParams ctx, wrd;

  std::vector<Tensor> fusion_W, fusion_b;  // first maps 3d->d, later ones d->d
  Tensor fusion_Wout, fusion_bout;

  Tensor init_W1, init_b1, init_W2, init_b2;

  Tensor out_W, out_b;

  // Gaussian(0, 0.05) everywhere except GRU gate matrices (orthogonal) and
  // biases (zero).
  static ModelParams init(const ModelConfig& cfg, std::mt19937& rng);

  // Deterministic name -> tensor listing covering every trainable tensor.
  std::vector<NamedTensor> named() const;

  // Optimizer groups: embeddings (E, excluded from weight decay), the main
  // block, and the two GRU cells (clipped).
  std::vector<NamedTensor> group_embedding() const;
  std::vector<NamedTensor> group_main() const;
  std::vector<NamedTensor> group_ctx() const;
  std::vector<NamedTensor> group_wrd() const;

  void set_requires_grad(bool v);
  void zero_grad();
};

std::vector<int> feature_id_list(const Vocabulary& vocab);

// --- forward ops -------------------------------------------------------------

Tensor user_embedding(Tape& tape, const ModelParams& p, int u_idx);
Tensor item_embedding(Tape& tape, const ModelParams& p, int i_idx);

// MLP head on the concatenated projections; scalar, unclamped.
Tensor rating_forward(Tape& tape, const ModelParams& p, int u_idx, int i_idx,
                      bool training = false, std::mt19937* rng = nullptr);

// Mean squared error over (prediction, truth) pairs.
Tensor rating_loss(Tape& tape, const std::vector<std::pair<Tensor, double>>& pairs);

struct AttentionOut {
  Tensor o;      // weighted feature vector [d]
  Tensor alpha;  // weights over the feature list
};
AttentionOut feature_attention(Tape& tape, const ModelParams& p, const Tensor& h,
                               std::span<const int> feature_ids);

Tensor context_init(Tape& tape, const ModelParams& p, const Tensor& u, const Tensor& v);
Tensor context_step(Tape& tape, const ModelParams& p, const Tensor& C_prev,
                    const Tensor& h_last);

Tensor word_input(Tape& tape, const ModelParams& p, int word_idx, const Tensor& u,
                  const Tensor& v, bool training = false, std::mt19937* rng = nullptr);

Tensor sentence_init(Tape& tape, const ModelParams& p, const Tensor& C, const Tensor& u,
                     const Tensor& v, const Tensor& o);

Tensor word_step(Tape& tape, const ModelParams& p, const Tensor& h_prev, const Tensor& w_t);

Tensor output_distribution(Tape& tape, const ModelParams& p, const Tensor& h);
Tensor output_log_distribution(Tape& tape, const ModelParams& p, const Tensor& h);

// Sum of negative log-probabilities at the target ids over real positions
// (targets may carry PAD padding; log_probs must cover exactly the real
// positions or the whole padded length).
Tensor sentence_nll(Tape& tape, const std::vector<Tensor>& step_log_probs,
                    std::span<const int> targets);

struct SentenceForward {
  Tensor nll;
  Tensor alpha;
  Tensor last_hidden;
  double beta = 0.0;
};

struct InteractionForward {
  Tensor rating_pred;
  std::vector<SentenceForward> sentences;  // only sentences with beta > 0
};

// Teacher-forced pass over one interaction. Sentences with beta = 0 are
// skipped outright: they contribute no loss and do not advance the sentence
// context, so training behaves as if they were absent from the review.
InteractionForward forward_interaction(Tape& tape, const ModelParams& p, const BatchItem& item,
                                       std::span<const int> feature_ids, bool training,
                                       std::mt19937* rng);

struct JointLossParts {
  Tensor total;
  Tensor rating;
  Tensor generation;  // undefined when no sentence carries loss
};

JointLossParts joint_loss_parts(Tape& tape, const ModelParams& p, const Batch& batch,
                                std::span<const int> feature_ids, bool training,
                                std::mt19937* rng);

// J = mean (r_hat - r)^2 + mean_i sum_s beta_s * NLL_s. The L2 penalty rides
// in the optimizer as weight decay rather than in this value.
Tensor joint_loss(Tape& tape, const ModelParams& p, const Batch& batch,
                  std::span<const int> feature_ids, bool training, std::mt19937* rng);

}  // namespace hss
