#include "hss/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "hss/binary_io.hpp"

namespace hss {

namespace {

constexpr char kMagic[] = "HSSCKPT";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_kv(std::ostream& out, const std::string& k, const std::string& v) {
  bin::write_string(out, k);
  bin::write_string(out, v);
}

}  // namespace

void quantize_f32(std::vector<NamedTensor>& tensors) {
  for (auto& nt : tensors)
    for (auto& v : nt.tensor.values()) v = to_f32(v);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic) - 1);
  bin::write_u32(out, kCheckpointFormatVersion);

  const std::vector<std::pair<std::string, std::string>> kv = {
      {"d", std::to_string(ckpt.model.d)},
      {"n_users", std::to_string(ckpt.model.n_users)},
      {"n_items", std::to_string(ckpt.model.n_items)},
      {"vocab_size", std::to_string(ckpt.model.vocab_size)},
      {"rating_layers", std::to_string(ckpt.model.rating_layers)},
      {"gen_layers", std::to_string(ckpt.model.gen_layers)},
      {"dropout", fmt_double(ckpt.model.dropout)},
      {"epoch", std::to_string(ckpt.epoch)},
      {"seed", std::to_string(ckpt.seed)},
      {"has_best", ckpt.has_best ? "1" : "0"},
      {"best_val_rmse", fmt_double(ckpt.best_val_rmse)},
  };
  bin::write_u32(out, static_cast<uint32_t>(kv.size()));
  for (const auto& [k, v] : kv) write_kv(out, k, v);

  bin::write_u32(out, static_cast<uint32_t>(ckpt.vocab.size()));
  for (const auto& t : ckpt.vocab.tokens) bin::write_string(out, t);
  bin::write_u32(out, static_cast<uint32_t>(ckpt.vocab.feature_indices.size()));
  for (int id : ckpt.vocab.feature_indices) bin::write_u32(out, static_cast<uint32_t>(id));

  bin::write_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& nt : ckpt.tensors) {
    bin::write_string(out, nt.name);
    const auto& shape = nt.tensor.shape();
    bin::write_u32(out, static_cast<uint32_t>(shape.size()));
    for (int dshape : shape) bin::write_u32(out, static_cast<uint32_t>(dshape));
    for (double v : nt.tensor.values()) bin::write_f32(out, static_cast<float>(v));
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  bin::expect_magic(in, kMagic, "checkpoint");
  const uint32_t version = bin::read_u32(in);
  if (version != kCheckpointFormatVersion)
    throw CompatibilityError("checkpoint format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kCheckpointFormatVersion) + ")");

  Checkpoint ckpt;
  std::unordered_map<std::string, std::string> kv;
  const uint32_t n_kv = bin::read_u32(in);
  for (uint32_t i = 0; i < n_kv; ++i) {
    std::string k = bin::read_string(in);
    kv[k] = bin::read_string(in);
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw CompatibilityError("checkpoint is missing the '" + k + "' field");
    return it->second;
  };
  try {
    ckpt.model.d = std::stoi(get("d"));
    ckpt.model.n_users = std::stoi(get("n_users"));
    ckpt.model.n_items = std::stoi(get("n_items"));
    ckpt.model.vocab_size = std::stoi(get("vocab_size"));
    ckpt.model.rating_layers = std::stoi(get("rating_layers"));
    ckpt.model.gen_layers = std::stoi(get("gen_layers"));
    ckpt.model.dropout = std::stod(get("dropout"));
    ckpt.epoch = std::stoi(get("epoch"));
    ckpt.seed = static_cast<unsigned int>(std::stoul(get("seed")));
    ckpt.has_best = get("has_best") == "1";
    ckpt.best_val_rmse = std::stod(get("best_val_rmse"));
  } catch (const std::logic_error&) {
    throw CompatibilityError("checkpoint header holds a non-numeric field value");
  }

  const uint32_t n_tokens = bin::read_u32(in);
  ckpt.vocab.tokens.resize(n_tokens);
  for (auto& t : ckpt.vocab.tokens) t = bin::read_string(in);
  for (uint32_t i = 0; i < n_tokens; ++i)
    ckpt.vocab.index[ckpt.vocab.tokens[i]] = static_cast<int>(i);
  const uint32_t n_feat = bin::read_u32(in);
  for (uint32_t i = 0; i < n_feat; ++i)
    ckpt.vocab.feature_indices.insert(static_cast<int>(bin::read_u32(in)));

  const uint32_t n_tensors = bin::read_u32(in);
  ckpt.tensors.reserve(n_tensors);
  for (uint32_t i = 0; i < n_tensors; ++i) {
    NamedTensor nt;
    nt.name = bin::read_string(in);
    const uint32_t rank = bin::read_u32(in);
    if (rank > 2) throw IoError("tensor " + nt.name + " has unsupported rank");
    Shape shape(rank);
    for (auto& dshape : shape) dshape = static_cast<int>(bin::read_u32(in));
    Tensor t = Tensor::zeros(shape);
    for (auto& v : t.values()) v = static_cast<double>(bin::read_f32(in));
    nt.tensor = t;
    ckpt.tensors.push_back(std::move(nt));
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, ModelParams& params) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& nt : ckpt.tensors) by_name[nt.name] = &nt.tensor;
  for (auto& nt : params.named()) {
    auto it = by_name.find(nt.name);
    if (it == by_name.end())
      throw CompatibilityError("checkpoint is missing parameter " + nt.name);
    if (it->second->shape() != nt.tensor.shape())
      throw CompatibilityError("checkpoint parameter " + nt.name + " has shape " +
                               shape_str(it->second->shape()) + ", model expects " +
                               shape_str(nt.tensor.shape()));
    nt.tensor.values() = it->second->values();
  }
}

ModelParams params_from_checkpoint(const Checkpoint& ckpt) {
  std::mt19937 rng(0);
  ModelParams params = ModelParams::init(ckpt.model, rng);
  restore_params(ckpt, params);
  return params;
}

}  // namespace hss
