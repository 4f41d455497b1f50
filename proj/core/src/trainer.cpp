#include "hss/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace hss {

namespace {

ModelConfig model_config_from(const RunConfig& cfg, const Dataset& ds) {
  ModelConfig mc;
  mc.d = cfg.d;
  mc.n_users = ds.n_users();
  mc.n_items = ds.n_items();
  mc.vocab_size = ds.vocab.size();
  mc.rating_layers = cfg.rating_layers;
  mc.gen_layers = cfg.gen_layers;
  mc.dropout = cfg.dropout;
  return mc;
}

ModelParams build_params(const RunConfig& cfg, const Dataset& ds) {
  ModelConfig mc = model_config_from(cfg, ds);
  std::mt19937 rng(cfg.seed);
  return ModelParams::init(mc, rng);
}

void check_vocab_match(const Vocabulary& a, const Vocabulary& b) {
  if (a.tokens != b.tokens || a.feature_indices != b.feature_indices)
    throw CompatibilityError("checkpoint vocabulary does not match the dataset vocabulary");
}

}  // namespace

Trainer::Trainer(const RunConfig& cfg, const Dataset& ds)
    : cfg_(cfg),
      ds_(&ds),
      params_(build_params(cfg, ds)),
      opt_(cfg.lr, cfg.momentum),
      feature_ids_(feature_id_list(ds.vocab)) {
  cfg_.validate();
  if (ds.splits.train.empty()) throw ConfigError("training split is empty");

  opt_.add_group(params_.group_embedding(), 0.0);
  opt_.add_group(params_.group_main(), cfg_.lambda);
  opt_.add_group(params_.group_ctx(), cfg_.lambda, cfg_.clip_norm);
  opt_.add_group(params_.group_wrd(), cfg_.lambda, cfg_.clip_norm);

  if (cfg_.resume) {
    Checkpoint ckpt = load_checkpoint(cfg_.checkpoint);
    check_vocab_match(ckpt.vocab, ds.vocab);
    const ModelConfig want = model_config_from(cfg_, ds);
    if (ckpt.model.d != want.d || ckpt.model.rating_layers != want.rating_layers ||
        ckpt.model.gen_layers != want.gen_layers || ckpt.model.n_users != want.n_users ||
        ckpt.model.n_items != want.n_items || ckpt.model.vocab_size != want.vocab_size)
      throw CompatibilityError("checkpoint dimensions do not match the requested model");
    restore_params(ckpt, params_);
    opt_.load_state(ckpt.tensors);
    start_epoch_ = ckpt.epoch;
    best_val_rmse_ = ckpt.best_val_rmse;
    has_best_ = ckpt.has_best;
  }
}

double Trainer::split_rmse(const std::vector<Interaction>& split) const {
  if (split.empty()) throw ContractError("rmse over an empty split");
  Tape tape;
  tape.set_recording(false);
  double sq = 0.0;
  for (const auto& inter : split) {
    const double pred =
        rating_forward(tape, params_, inter.user_index, inter.item_index).item();
    sq += (pred - inter.rating) * (pred - inter.rating);
  }
  return std::sqrt(sq / static_cast<double>(split.size()));
}

EpochStats Trainer::run_epoch(int epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  std::seed_seq seq{static_cast<unsigned int>(cfg_.seed), static_cast<unsigned int>(epoch)};
  std::mt19937 rng(seq);

  BatchIterator batches(ds_->splits.train, cfg_.batch_size, cfg_.sentence_budget(), &rng);
  Batch batch;
  double joint_sum = 0.0, rating_sum = 0.0, gen_sum = 0.0;
  long n_items = 0;
  while (batches.next(batch)) {
    Tape tape;
    JointLossParts parts = joint_loss_parts(tape, params_, batch, feature_ids_, true, &rng);
    tape.backward(parts.total);
    opt_.step();

    const double b = static_cast<double>(batch.items.size());
    joint_sum += parts.total.item() * b;
    rating_sum += parts.rating.item() * b;
    gen_sum += (parts.generation.defined() ? parts.generation.item() : 0.0) * b;
    n_items += batch.items.size();
  }

  for (auto& nt : params_.named())
    for (auto& v : nt.tensor.values()) v = to_f32(v);
  opt_.quantize_state_f32();

  EpochStats s;
  s.epoch = epoch;
  s.joint_loss = joint_sum / static_cast<double>(n_items);
  s.rating_loss = rating_sum / static_cast<double>(n_items);
  s.gen_loss = gen_sum / static_cast<double>(n_items);
  s.val_rmse = split_rmse(ds_->splits.validation.empty() ? ds_->splits.train
                                                         : ds_->splits.validation);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

void Trainer::save_checkpoints(int epoch, bool is_best) {
  if (cfg_.checkpoint.empty()) return;
  Checkpoint ckpt;
  ckpt.model = params_.cfg;
  ckpt.vocab = ds_->vocab;
  ckpt.epoch = epoch;
  ckpt.seed = cfg_.seed;
  ckpt.best_val_rmse = best_val_rmse_;
  ckpt.has_best = has_best_;
  ckpt.tensors = params_.named();
  auto opt_state = opt_.state();
  ckpt.tensors.insert(ckpt.tensors.end(), opt_state.begin(), opt_state.end());
  save_checkpoint(ckpt, cfg_.checkpoint);
  if (is_best) save_checkpoint(ckpt, cfg_.checkpoint + ".best");
}

void Trainer::train(std::vector<EpochStats>* log) {
  std::ofstream csv;
  if (!cfg_.log.empty()) {
    const bool fresh = start_epoch_ == 0;
    csv.open(cfg_.log, fresh ? std::ios::trunc : std::ios::app);
    if (!csv) throw IoError("cannot open " + cfg_.log + " for writing");
    if (fresh) csv << "epoch,joint_loss,rating_loss,gen_loss,val_rmse,seconds\n";
  }

  for (int epoch = start_epoch_ + 1; epoch <= cfg_.epochs; ++epoch) {
    EpochStats s = run_epoch(epoch);
    const bool is_best = !has_best_ || s.val_rmse < best_val_rmse_;
    if (is_best) {
      best_val_rmse_ = s.val_rmse;
      has_best_ = true;
    }
    save_checkpoints(epoch, is_best);
    if (csv.is_open()) {
      char row[256];
      std::snprintf(row, sizeof(row), "%d,%.6f,%.6f,%.6f,%.6f,%.3f\n", s.epoch, s.joint_loss,
                    s.rating_loss, s.gen_loss, s.val_rmse, s.seconds);
      csv << row;
      csv.flush();
    }
    if (log) log->push_back(s);
  }
}

}  // namespace hss
