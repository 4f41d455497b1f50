#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "hss/checkpoint.hpp"
#include "hss/dataset_io.hpp"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

hss::Dataset tiny_dataset() {
  std::vector<hss::RawRecord> records;
  for (int u = 0; u < 6; ++u)
    for (int i = 0; i < 4; ++i)
      records.push_back({"user" + std::to_string(u), "item" + std::to_string(i),
                         1.0 + (u + i) % 5, "The battery is great. Sound is weak.",
                         std::nullopt});
  hss::PreprocessOptions opts;
  opts.min_user_records = 1;
  opts.min_token_freq = 1;
  opts.seed = 3;
  return hss::preprocess_corpus(records, {"battery", "sound"}, opts);
}

hss::Checkpoint tiny_checkpoint() {
  hss::Dataset ds = tiny_dataset();
  hss::ModelConfig mc;
  mc.d = 5;
  mc.n_users = ds.n_users();
  mc.n_items = ds.n_items();
  mc.vocab_size = ds.vocab.size();
  mc.rating_layers = 2;
  mc.gen_layers = 2;
  mc.dropout = 0.25;
  std::mt19937 rng(11);
  hss::ModelParams p = hss::ModelParams::init(mc, rng);

  hss::Checkpoint ckpt;
  ckpt.model = mc;
  ckpt.vocab = ds.vocab;
  ckpt.epoch = 7;
  ckpt.seed = 42;
  ckpt.best_val_rmse = 1.25;
  ckpt.has_best = true;
  ckpt.tensors = p.named();
  hss::quantize_f32(ckpt.tensors);
  return ckpt;
}

}  // namespace

TEST_CASE("dataset file round-trips every field") {
  hss::Dataset ds = tiny_dataset();
  const std::string path = temp_path("hss_ds_roundtrip.bin");
  hss::save_dataset(ds, path);
  hss::Dataset back = hss::load_dataset(path);

  CHECK(back.vocab.tokens == ds.vocab.tokens);
  CHECK(back.vocab.feature_indices == ds.vocab.feature_indices);
  CHECK(back.user_ids == ds.user_ids);
  CHECK(back.item_ids == ds.item_ids);
  CHECK(back.user_index.at("user3") == ds.user_index.at("user3"));

  auto check_split = [](const std::vector<hss::Interaction>& a,
                        const std::vector<hss::Interaction>& b) {
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].user_index == b[k].user_index);
      CHECK(a[k].item_index == b[k].item_index);
      CHECK(a[k].rating == b[k].rating);
      REQUIRE(a[k].sentences.size() == b[k].sentences.size());
      for (size_t s = 0; s < a[k].sentences.size(); ++s) {
        CHECK(a[k].sentences[s].token_ids == b[k].sentences[s].token_ids);
        CHECK(a[k].sentences[s].beta == b[k].sentences[s].beta);
        CHECK(a[k].sentences[s].n_words == b[k].sentences[s].n_words);
        CHECK(a[k].sentences[s].n_feature_words == b[k].sentences[s].n_feature_words);
      }
    }
  };
  check_split(back.splits.train, ds.splits.train);
  check_split(back.splits.validation, ds.splits.validation);
  check_split(back.splits.test, ds.splits.test);

  // byte-identical on rewrite
  const std::string again = temp_path("hss_ds_roundtrip2.bin");
  hss::save_dataset(back, again);
  std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("dataset loader rejects wrong magic and truncation") {
  const std::string path = temp_path("hss_ds_bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTADATASET";
  }
  CHECK_THROWS_AS((void)hss::load_dataset(path), hss::CompatibilityError);

  hss::Dataset ds = tiny_dataset();
  hss::save_dataset(ds, path);
  // chop the file in half
  std::error_code ec;
  const auto full = std::filesystem::file_size(path, ec);
  std::filesystem::resize_file(path, full / 2, ec);
  CHECK_THROWS_AS((void)hss::load_dataset(path), hss::IoError);

  CHECK_THROWS_AS((void)hss::load_dataset("/nonexistent/ds.bin"), hss::IoError);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  hss::Checkpoint ckpt = tiny_checkpoint();
  const std::string path = temp_path("hss_ckpt_roundtrip.bin");
  hss::save_checkpoint(ckpt, path);
  hss::Checkpoint back = hss::load_checkpoint(path);

  CHECK(back.model.d == ckpt.model.d);
  CHECK(back.model.n_users == ckpt.model.n_users);
  CHECK(back.model.n_items == ckpt.model.n_items);
  CHECK(back.model.vocab_size == ckpt.model.vocab_size);
  CHECK(back.model.rating_layers == ckpt.model.rating_layers);
  CHECK(back.model.gen_layers == ckpt.model.gen_layers);
  CHECK(back.model.dropout == ckpt.model.dropout);
  CHECK(back.epoch == ckpt.epoch);
  CHECK(back.seed == ckpt.seed);
  CHECK(back.has_best == ckpt.has_best);
  CHECK(back.best_val_rmse == ckpt.best_val_rmse);
  CHECK(back.vocab.tokens == ckpt.vocab.tokens);
  CHECK(back.vocab.feature_indices == ckpt.vocab.feature_indices);

  REQUIRE(back.tensors.size() == ckpt.tensors.size());
  for (size_t i = 0; i < back.tensors.size(); ++i) {
    CHECK(back.tensors[i].name == ckpt.tensors[i].name);
    CHECK(back.tensors[i].tensor.shape() == ckpt.tensors[i].tensor.shape());
    CHECK(back.tensors[i].tensor.values() == ckpt.tensors[i].tensor.values());  // bit-exact
  }

  // a second save of the loaded state writes the same bytes
  const std::string again = temp_path("hss_ckpt_roundtrip2.bin");
  hss::save_checkpoint(back, again);
  std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("restore_params fills a model and catches mismatches") {
  hss::Checkpoint ckpt = tiny_checkpoint();
  hss::ModelParams p = hss::params_from_checkpoint(ckpt);
  for (const auto& [name, t] : ckpt.tensors) {
    if (name.rfind("opt.", 0) == 0) continue;
    bool found = false;
    for (const auto& [pname, pt] : p.named())
      if (pname == name) {
        CHECK(pt.values() == t.values());
        found = true;
      }
    CHECK(found);
  }

  // dangling shapes are rejected
  hss::Checkpoint wrong = tiny_checkpoint();
  wrong.tensors[0].tensor = hss::Tensor::zeros({2, 2});
  CHECK_THROWS_AS((void)hss::params_from_checkpoint(wrong), hss::CompatibilityError);

  hss::Checkpoint missing = tiny_checkpoint();
  missing.tensors.pop_back();
  CHECK_THROWS_AS((void)hss::params_from_checkpoint(missing), hss::CompatibilityError);
}

TEST_CASE("f32 quantization is idempotent") {
  std::vector<hss::NamedTensor> tensors{{"x", hss::Tensor::from({3}, {0.1, 1.0 / 3.0, -2.5})}};
  hss::quantize_f32(tensors);
  auto once = tensors[0].tensor.values();
  hss::quantize_f32(tensors);
  CHECK(tensors[0].tensor.values() == once);
  CHECK(once[0] == doctest::Approx(0.1));
  CHECK(once[0] != 0.1);  // narrowed: 0.1 is not representable in f32
  CHECK(once[2] == -2.5);  // exactly representable values survive untouched
}

TEST_CASE("checkpoint loader rejects foreign and corrupt files") {
  const std::string path = temp_path("hss_ckpt_bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "HSSDATAxxxxxxxxxxxxxxxx";  // dataset magic, not a checkpoint
  }
  CHECK_THROWS_AS((void)hss::load_checkpoint(path), hss::CompatibilityError);

  hss::Checkpoint ckpt = tiny_checkpoint();
  hss::save_checkpoint(ckpt, path);
  std::error_code ec;
  const auto full = std::filesystem::file_size(path, ec);
  std::filesystem::resize_file(path, full - 64, ec);
  CHECK_THROWS_AS((void)hss::load_checkpoint(path), hss::IoError);
  std::remove(path.c_str());
}
