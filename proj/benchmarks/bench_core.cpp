// Microbenchmarks for the hot paths: tape ops, the recurrent cells, a full
// training step, beam expansion, and corpus scoring.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hss/decoder.hpp"
#include "hss/metrics.hpp"
#include "hss/model.hpp"
#include "hss/tensor.hpp"

using namespace hss;

namespace {

ModelParams bench_params(int d, int vocab) {
  ModelConfig mc;
  mc.d = d;
  mc.n_users = 64;
  mc.n_items = 64;
  mc.vocab_size = vocab;
  mc.dropout = 0.0;
  std::mt19937 rng(1);
  return ModelParams::init(mc, rng);
}

Tensor random_vec(int n, std::mt19937& rng) {
  return init_tensor({n}, InitScheme::kNormal, rng, 1.0);
}

}  // namespace

static void BM_MatVec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(1);
  Tensor A = init_tensor({n, n}, InitScheme::kNormal, rng, 1.0);
  Tensor x = random_vec(n, rng);
  Tape tape;
  tape.set_recording(false);
  for (auto _ : state) benchmark::DoNotOptimize(tape.matmul(A, x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * n);
}
BENCHMARK(BM_MatVec)->Arg(64)->Arg(300);

static void BM_WordGruStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  ModelParams p = bench_params(d, 1000);
  std::mt19937 rng(2);
  Tensor h = random_vec(d, rng);
  Tensor w = random_vec(d, rng);
  Tape tape;
  tape.set_recording(false);
  for (auto _ : state) benchmark::DoNotOptimize(word_step(tape, p, h, w));
}
BENCHMARK(BM_WordGruStep)->Arg(64)->Arg(300);

static void BM_FeatureAttention(benchmark::State& state) {
  const int n_features = static_cast<int>(state.range(0));
  ModelParams p = bench_params(300, 4 + n_features + 16);
  std::vector<int> feature_ids(n_features);
  for (int i = 0; i < n_features; ++i) feature_ids[i] = 4 + i;
  std::mt19937 rng(3);
  Tensor h = random_vec(300, rng);
  Tape tape;
  tape.set_recording(false);
  for (auto _ : state) benchmark::DoNotOptimize(feature_attention(tape, p, h, feature_ids));
}
BENCHMARK(BM_FeatureAttention)->Arg(32)->Arg(256);

// forward + backward over one small teacher-forced batch; dominates training
static void BM_JointLossStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  ModelParams p = bench_params(d, 1000);
  const std::vector<int> feature_ids = {4, 5, 6, 7, 8, 9, 10, 11};

  Batch batch;
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> tok(12, 999);
  for (int it = 0; it < 4; ++it) {
    BatchItem item;
    item.user_index = it;
    item.item_index = it;
    item.rating = 4.0;
    for (int s = 0; s < 2; ++s) {
      BatchSentence sent;
      sent.input_ids.push_back(Vocabulary::kBos);
      for (int t = 0; t < 7; ++t) {
        sent.target_ids.push_back(tok(rng));
        if (t + 1 < 7) sent.input_ids.push_back(sent.target_ids.back());
      }
      sent.target_ids.push_back(Vocabulary::kEos);
      sent.input_ids.push_back(sent.target_ids[sent.target_ids.size() - 2]);
      sent.beta = 0.5;
      sent.length = static_cast<int>(sent.target_ids.size());
      item.sentences.push_back(std::move(sent));
    }
    batch.items.push_back(std::move(item));
  }

  for (auto _ : state) {
    p.zero_grad();
    Tape tape;
    Tensor loss = joint_loss(tape, p, batch, feature_ids, false, nullptr);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_JointLossStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// decoder bookkeeping: expand 4 live beams over a 5k vocabulary and keep the top 4
static void BM_BeamStep(benchmark::State& state) {
  const int vocab = 5000;
  std::vector<double> log_probs(vocab);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> lp(-10.0, 0.0);
  for (double& v : log_probs) v = lp(rng);
  StepFn step = [&log_probs](const Tensor& s, int) {
    return StepResult{log_probs, s};
  };

  GenerationConfig cfg;
  cfg.beam_size = 4;
  std::vector<Hypothesis> beams(4);
  for (int b = 0; b < 4; ++b) {
    beams[b].token_ids = {100 + b};
    beams[b].log_likelihood = -0.5 * b;
    beams[b].state = Tensor::scalar(0.0);
  }
  const std::vector<int> banned = {Vocabulary::kPad, Vocabulary::kBos};

  for (auto _ : state)
    benchmark::DoNotOptimize(beam_step(beams, step, vocab, cfg, banned, 100));
}
BENCHMARK(BM_BeamStep);

static void BM_CorpusScoring(benchmark::State& state) {
  std::mt19937 rng(6);
  std::uniform_int_distribution<int> len(8, 20), letter(0, 25);
  auto random_tokens = [&] {
    std::vector<std::string> toks(len(rng));
    for (auto& t : toks) t = std::string(1, static_cast<char>('a' + letter(rng)));
    return toks;
  };
  std::vector<EvalPair> pairs(200);
  for (auto& pair : pairs) {
    pair.candidate = random_tokens();
    pair.references = {random_tokens()};
  }

  for (auto _ : state) {
    benchmark::DoNotOptimize(bleu(pairs, 4));
    benchmark::DoNotOptimize(rouge_corpus(pairs, RougeKind::kSU4));
  }
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_CorpusScoring)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
