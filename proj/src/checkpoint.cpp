#include "aston/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace aston {

static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

namespace {

constexpr char kMagic[6] = {'A', 'S', 'T', 'O', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json config_to_json(const AstonConfig& c) {
  return {{"embedding_dim", c.embedding_dim},
          {"hidden_dim", c.hidden_dim},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"dropout", c.dropout},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"grad_clip", c.grad_clip},
          {"min_prefix_len", c.min_prefix_len}};
}

AstonConfig config_from_json(const nlohmann::json& j) {
  AstonConfig c;
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.encoder_layers = j.at("encoder_layers").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.grad_clip = j.value("grad_clip", 0.0);
  c.min_prefix_len = j.value("min_prefix_len", 1);
  return c;
}

}  // namespace

void save_checkpoint(AstonModel& model, const std::string& path, const CheckpointMeta& meta) {
  auto named = model.named_params();

  nlohmann::json header;
  header["config"] = config_to_json(model.config());
  header["activity_vocab"] = model.activity_vocab().labels();
  header["resource_vocab"] = model.resource_vocab().labels();
  header["stats"] = {{"mean_log_since_prev", model.stats().mean_log_since_prev},
                     {"std_log_since_prev", model.stats().std_log_since_prev},
                     {"mean_log_since_start", model.stats().mean_log_since_start},
                     {"std_log_since_start", model.stats().std_log_since_start}};
  header["max_trace_len"] = model.max_trace_len();
  header["best_val_loss"] = meta.best_val_loss;
  header["best_epoch"] = meta.best_epoch;
  nlohmann::json tensors = nlohmann::json::array();
  for (auto& [name, p] : named) tensors.push_back({{"name", name}, {"shape", p->value.shape()}});
  header["tensors"] = std::move(tensors);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  const std::string header_text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  const std::uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (auto& [name, p] : named) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  if (!out) throw CheckpointError("short write to checkpoint '" + path + "'");
}

AstonModel load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");

  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("'" + path + "' is not a model checkpoint (bad magic)");
  std::uint32_t version = 0;
  if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)))
    throw CheckpointError("truncated checkpoint '" + path + "'");
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  std::uint64_t header_len = 0;
  if (!in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len)))
    throw CheckpointError("truncated checkpoint '" + path + "'");
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), static_cast<std::streamsize>(header_len)))
    throw CheckpointError("truncated checkpoint '" + path + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("corrupt checkpoint header: " + std::string(e.what()));
  }

  AstonModel model = [&] {
    try {
      return AstonModel(config_from_json(header.at("config")),
                        Vocabulary::from_labels(header.at("activity_vocab").get<std::vector<std::string>>()),
                        Vocabulary::from_labels(header.at("resource_vocab").get<std::vector<std::string>>()),
                        TimeStats{header.at("stats").at("mean_log_since_prev").get<double>(),
                                  header.at("stats").at("std_log_since_prev").get<double>(),
                                  header.at("stats").at("mean_log_since_start").get<double>(),
                                  header.at("stats").at("std_log_since_start").get<double>()},
                        header.at("max_trace_len").get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError("corrupt checkpoint header: " + std::string(e.what()));
    }
  }();
  if (meta != nullptr) {
    meta->best_val_loss = header.value("best_val_loss", 0.0);
    meta->best_epoch = header.value("best_epoch", 0);
  }

  auto named = model.named_params();
  const auto& manifest = header.at("tensors");
  if (manifest.size() != named.size())
    throw CheckpointError("checkpoint tensor manifest does not match the model layout");
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& entry = manifest[i];
    auto& [name, p] = named[i];
    if (entry.at("name").get<std::string>() != name)
      throw CheckpointError("checkpoint tensor '" + entry.at("name").get<std::string>() +
                            "' does not match expected '" + name + "'");
    if (entry.at("shape").get<std::vector<int>>() != p->value.shape())
      throw CheckpointError("checkpoint tensor '" + name + "' has an inconsistent shape");
    if (!in.read(reinterpret_cast<char*>(p->value.data()),
                 static_cast<std::streamsize>(p->value.size() * sizeof(float))))
      throw CheckpointError("truncated checkpoint '" + path + "' while reading '" + name + "'");
  }
  return model;
}

}  // namespace aston
