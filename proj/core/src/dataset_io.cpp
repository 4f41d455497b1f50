#include "hss/dataset_io.hpp"

#include <fstream>

#include "hss/binary_io.hpp"

namespace hss {

namespace {

constexpr char kMagic[] = "HSSDATA";

void write_split(std::ostream& out, const std::vector<Interaction>& part) {
  bin::write_u32(out, static_cast<uint32_t>(part.size()));
  for (const auto& inter : part) {
    bin::write_u32(out, static_cast<uint32_t>(inter.user_index));
    bin::write_u32(out, static_cast<uint32_t>(inter.item_index));
    bin::write_f64(out, inter.rating);
    bin::write_u32(out, static_cast<uint32_t>(inter.sentences.size()));
    for (const auto& s : inter.sentences) {
      bin::write_u32(out, static_cast<uint32_t>(s.token_ids.size()));
      for (int id : s.token_ids) bin::write_u32(out, static_cast<uint32_t>(id));
      bin::write_u32(out, static_cast<uint32_t>(s.n_feature_words));
      bin::write_u32(out, static_cast<uint32_t>(s.n_words));
    }
  }
}

std::vector<Interaction> read_split(std::istream& in, int n_users, int n_items, int vocab_size) {
  const uint32_t n = bin::read_u32(in);
  std::vector<Interaction> part;
  part.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    Interaction inter;
    inter.user_index = static_cast<int>(bin::read_u32(in));
    inter.item_index = static_cast<int>(bin::read_u32(in));
    inter.rating = bin::read_f64(in);
    if (inter.user_index >= n_users || inter.item_index >= n_items)
      throw IoError("interaction references user or item outside the id tables");
    const uint32_t ns = bin::read_u32(in);
    for (uint32_t s = 0; s < ns; ++s) {
      SentenceRecord sr;
      const uint32_t len = bin::read_u32(in);
      sr.token_ids.resize(len);
      for (auto& id : sr.token_ids) {
        id = static_cast<int>(bin::read_u32(in));
        if (id < 0 || id >= vocab_size) throw IoError("token id outside vocabulary");
      }
      sr.n_feature_words = static_cast<int>(bin::read_u32(in));
      sr.n_words = static_cast<int>(bin::read_u32(in));
      if (sr.n_words <= 0) throw IoError("sentence with non-positive word count");
      sr.beta = static_cast<double>(sr.n_feature_words) / static_cast<double>(sr.n_words);
      inter.sentences.push_back(std::move(sr));
    }
    part.push_back(std::move(inter));
  }
  return part;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic) - 1);
  bin::write_u32(out, kDatasetFormatVersion);

  bin::write_u32(out, static_cast<uint32_t>(ds.vocab.size()));
  for (const auto& t : ds.vocab.tokens) bin::write_string(out, t);
  bin::write_u32(out, static_cast<uint32_t>(ds.vocab.feature_indices.size()));
  for (int id : ds.vocab.feature_indices) bin::write_u32(out, static_cast<uint32_t>(id));

  bin::write_u32(out, static_cast<uint32_t>(ds.user_ids.size()));
  for (const auto& u : ds.user_ids) bin::write_string(out, u);
  bin::write_u32(out, static_cast<uint32_t>(ds.item_ids.size()));
  for (const auto& i : ds.item_ids) bin::write_string(out, i);

  write_split(out, ds.splits.train);
  write_split(out, ds.splits.validation);
  write_split(out, ds.splits.test);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path);
  bin::expect_magic(in, kMagic, "dataset");
  const uint32_t version = bin::read_u32(in);
  if (version != kDatasetFormatVersion)
    throw CompatibilityError("dataset format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kDatasetFormatVersion) + ")");

  Dataset ds;
  const uint32_t n_tokens = bin::read_u32(in);
  if (n_tokens < Vocabulary::kNumSpecials) throw IoError("vocabulary too small to be valid");
  ds.vocab.tokens.resize(n_tokens);
  for (auto& t : ds.vocab.tokens) t = bin::read_string(in);
  for (uint32_t i = 0; i < n_tokens; ++i) ds.vocab.index[ds.vocab.tokens[i]] = static_cast<int>(i);
  const uint32_t n_feat = bin::read_u32(in);
  for (uint32_t i = 0; i < n_feat; ++i) {
    const int id = static_cast<int>(bin::read_u32(in));
    if (id < 0 || id >= static_cast<int>(n_tokens)) throw IoError("feature id outside vocabulary");
    ds.vocab.feature_indices.insert(id);
  }

  const uint32_t n_users = bin::read_u32(in);
  ds.user_ids.resize(n_users);
  for (uint32_t i = 0; i < n_users; ++i) {
    ds.user_ids[i] = bin::read_string(in);
    ds.user_index[ds.user_ids[i]] = static_cast<int>(i);
  }
  const uint32_t n_items = bin::read_u32(in);
  ds.item_ids.resize(n_items);
  for (uint32_t i = 0; i < n_items; ++i) {
    ds.item_ids[i] = bin::read_string(in);
    ds.item_index[ds.item_ids[i]] = static_cast<int>(i);
  }

  ds.splits.train = read_split(in, n_users, n_items, static_cast<int>(n_tokens));
  ds.splits.validation = read_split(in, n_users, n_items, static_cast<int>(n_tokens));
  ds.splits.test = read_split(in, n_users, n_items, static_cast<int>(n_tokens));
  return ds;
}

}  // namespace hss
