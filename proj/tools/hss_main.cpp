#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hss/pipeline.hpp"

namespace {

// Every flag lands here as raw text and is applied onto the config after the
// file (if any), so precedence is defaults < file < flags.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::string> given;
};

const std::vector<std::pair<std::string, std::string>> kOptions = {
    {"d", "embedding/hidden dimension"},
    {"rating-layers", "hidden layers in the rating head"},
    {"gen-layers", "layers in the word-input fusion stack"},
    {"batch-size", "training batch size"},
    {"lr", "learning rate"},
    {"momentum", "SGD momentum"},
    {"lambda", "L2 weight-decay strength"},
    {"dropout", "dropout rate on MLP hidden layers"},
    {"clip-norm", "per-GRU gradient norm cap"},
    {"beam-size", "beam width for generation"},
    {"max-tokens", "total generated-token budget"},
    {"keep-sentences", "sentences kept from a generation"},
    {"n-sentences", "review sentences used (0 = all)"},
    {"min-user-records", "drop users with fewer records"},
    {"min-word-freq", "vocabulary frequency threshold"},
    {"split-train", "training split fraction"},
    {"split-valid", "validation split fraction"},
    {"split-test", "test split fraction"},
    {"seed", "random seed"},
    {"epochs", "training epochs"},
    {"allow-unk", "permit <unk> in generated text (true/false)"},
    {"eval-split", "split to evaluate: train, valid or test"},
    {"corpus", "JSON-lines review corpus path"},
    {"lexicon", "feature-word list path"},
    {"dataset", "preprocessed dataset path"},
    {"checkpoint", "checkpoint path"},
    {"log", "training-log CSV path"},
    {"report", "metric-report JSON path"},
    {"generations", "generated-text output path"},
};

void add_config_options(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "key=value configuration file");
  for (const auto& [key, help] : kOptions) {
    cmd->add_option_function<std::string>(
        "--" + key,
        [&ov, key = key](const std::string& v) {
          ov.values[key] = v;
          ov.given.push_back(key);
        },
        help);
  }
}

hss::RunConfig resolve_config(const Overrides& ov, bool resume) {
  hss::RunConfig cfg;
  if (!ov.config_path.empty()) hss::load_config_file(cfg, ov.config_path);
  for (const auto& key : ov.given) hss::apply_config_value(cfg, key, ov.values.at(key));
  if (resume) cfg.resume = true;
  return cfg;
}

int exit_code_for(const hss::Error& e) {
  const std::string cat = e.category();
  if (cat == "config") return 2;
  if (cat == "io") return 3;
  if (cat == "compatibility") return 4;
  if (cat == "lookup") return 5;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"explainable recommendation: rating prediction plus review-style explanations"};
  app.require_subcommand(1);

  Overrides ov;
  bool resume = false;
  std::string user_id, item_id;

  CLI::App* preprocess =
      app.add_subcommand("preprocess", "build the binary dataset from a raw corpus");
  add_config_options(preprocess, ov);

  CLI::App* train = app.add_subcommand("train", "fit the model and write checkpoints");
  add_config_options(train, ov);
  train->add_flag("--resume", resume, "continue from the checkpoint on disk");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a dataset split");
  add_config_options(evaluate, ov);

  CLI::App* generate = app.add_subcommand("generate", "print an explanation for one pair");
  add_config_options(generate, ov);
  generate->add_option("--user", user_id, "external user id")->required();
  generate->add_option("--item", item_id, "external item id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (preprocess->parsed()) {
      const hss::PreprocessStats s = hss::run_preprocess(resolve_config(ov, false));
      std::printf("users: %d\nitems: %d\nreviews: %d\nfeatures: %d\nvocab: %d\n", s.n_users,
                  s.n_items, s.n_reviews, s.n_features, s.vocab_words);
    } else if (train->parsed()) {
      std::vector<hss::EpochStats> log;
      const hss::TrainSummary s = hss::run_train(resolve_config(ov, resume), &log);
      for (const auto& row : log)
        std::printf("epoch %d  joint %.6f  rating %.6f  gen %.6f  val_rmse %.6f  %.1fs\n",
                    row.epoch, row.joint_loss, row.rating_loss, row.gen_loss, row.val_rmse,
                    row.seconds);
      if (s.has_best) std::printf("best validation rmse: %.6f\n", s.best_val_rmse);
    } else if (evaluate->parsed()) {
      const hss::MetricReport report = hss::run_evaluate(resolve_config(ov, false));
      std::fputs(hss::report_to_json(report).c_str(), stdout);
    } else if (generate->parsed()) {
      const auto sentences = hss::run_generate(resolve_config(ov, false), user_id, item_id);
      for (const auto& s : sentences) std::printf("%s\n", s.c_str());
    }
  } catch (const hss::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", e.category().c_str(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
