#include <doctest.h>

#include <climits>
#include <cstdio>
#include <fstream>

#include "hss/config.hpp"

using hss::RunConfig;

TEST_CASE("defaults carry the reference hyperparameters") {
  RunConfig cfg;
  CHECK(cfg.d == 300);
  CHECK(cfg.lr == 0.002);
  CHECK(cfg.momentum == 0.9);
  CHECK(cfg.lambda == 0.001);
  CHECK(cfg.dropout == 0.1);
  CHECK(cfg.clip_norm == 1.0);
  CHECK(cfg.batch_size == 100);
  CHECK(cfg.beam_size == 4);
  CHECK(cfg.keep_sentences == 2);
  CHECK(cfg.min_user_records == 10);
  CHECK(cfg.min_word_freq == 10);
  CHECK(cfg.split_train == 0.8);
  CHECK(cfg.split_valid == 0.1);
  CHECK(cfg.split_test == 0.1);
  CHECK(cfg.rating_layers == 4);
  CHECK(cfg.gen_layers == 3);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("apply_config_value accepts snake and kebab case") {
  RunConfig cfg;
  hss::apply_config_value(cfg, "batch-size", "32");
  CHECK(cfg.batch_size == 32);
  hss::apply_config_value(cfg, "batch_size", "64");
  CHECK(cfg.batch_size == 64);
  hss::apply_config_value(cfg, "lr", "0.05");
  CHECK(cfg.lr == 0.05);
  hss::apply_config_value(cfg, "allow-unk", "false");
  CHECK_FALSE(cfg.allow_unk);
  hss::apply_config_value(cfg, "allow-unk", "1");
  CHECK(cfg.allow_unk);
  hss::apply_config_value(cfg, "eval-split", "train");
  CHECK(cfg.eval_split == "train");
  hss::apply_config_value(cfg, "corpus", "/data/reviews.jsonl");
  CHECK(cfg.corpus == "/data/reviews.jsonl");

  CHECK_THROWS_AS(hss::apply_config_value(cfg, "warp-speed", "9"), hss::ConfigError);
  CHECK_THROWS_AS(hss::apply_config_value(cfg, "batch-size", "many"), hss::ConfigError);
  CHECK_THROWS_AS(hss::apply_config_value(cfg, "batch-size", "12x"), hss::ConfigError);
  CHECK_THROWS_AS(hss::apply_config_value(cfg, "lr", ""), hss::ConfigError);
  CHECK_THROWS_AS(hss::apply_config_value(cfg, "allow-unk", "maybe"), hss::ConfigError);
}

TEST_CASE("config files layer under explicit values") {
  const std::string path = "/tmp/hss_test_config.cfg";
  {
    std::ofstream out(path);
    out << "# training setup\n";
    out << "d = 64\n";
    out << "lr=0.01   # inline comment\n";
    out << "\n";
    out << "eval-split = valid\n";
  }
  RunConfig cfg;
  hss::load_config_file(cfg, path);
  CHECK(cfg.d == 64);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.eval_split == "valid");
  CHECK(cfg.batch_size == 100);  // untouched default

  {
    std::ofstream out(path);
    out << "this line has no equals sign\n";
  }
  CHECK_THROWS_AS(hss::load_config_file(cfg, path), hss::ConfigError);
  CHECK_THROWS_AS(hss::load_config_file(cfg, "/nonexistent/run.cfg"), hss::IoError);
  std::remove(path.c_str());
}

TEST_CASE("validation rejects out-of-range settings") {
  auto broken = [](auto&& mutate) {
    RunConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.lr = 0.0; }).validate(), hss::ConfigError);
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.momentum = 1.0; }).validate(), hss::ConfigError);
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.dropout = -0.1; }).validate(), hss::ConfigError);
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.batch_size = 0; }).validate(), hss::ConfigError);
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.split_train = 0.5; }).validate(),
                  hss::ConfigError);  // fractions no longer sum to 1
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.eval_split = "nope"; }).validate(),
                  hss::ConfigError);
  CHECK_THROWS_AS(broken([](RunConfig& c) { c.n_sentences = -1; }).validate(),
                  hss::ConfigError);
  CHECK_NOTHROW(broken([](RunConfig& c) { c.n_sentences = 3; }).validate());
}

TEST_CASE("sentence budget maps zero to unlimited") {
  RunConfig cfg;
  cfg.n_sentences = 0;
  CHECK(cfg.sentence_budget() == INT_MAX);
  cfg.n_sentences = 2;
  CHECK(cfg.sentence_budget() == 2);
}
