#include "tactex/neuro/checkpoint.hpp"

#include <fstream>

namespace tactex::neuro {
namespace {
constexpr const char* kFormat = "tactex-hardness-model";

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NeuroError("checkpoint not found: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw NeuroError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
}
}  // namespace

nlohmann::json checkpoint_json(const HardnessModel& model, const nlohmann::json& metadata) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["model_config"] = to_json(model.config());
  j["metadata"] = metadata;
  auto& params = j["parameters"] = nlohmann::json::array();
  for (const auto& p : model.parameters()) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.values()}});
  }
  return j;
}

HardnessModel model_from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw NeuroError("checkpoint: unknown format");
    if (j.at("version").get<int>() != kCheckpointVersion) throw NeuroError("checkpoint: unsupported version");
    HardnessModel model(model_config_from_json(j.at("model_config")), 0);
    const auto& params = j.at("parameters");
    if (params.size() != model.parameters().size()) throw NeuroError("checkpoint: parameter count mismatch");
    for (const auto& entry : params) {
      auto& p = model.parameter(entry.at("name").get<std::string>());
      if (entry.at("shape").get<Shape>() != p.value.shape()) {
        throw NeuroError("checkpoint: shape mismatch for " + p.name);
      }
      auto values = entry.at("values").get<std::vector<double>>();
      if (values.size() != p.value.size()) throw NeuroError("checkpoint: value count mismatch for " + p.name);
      p.value.values() = std::move(values);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw NeuroError(std::string("checkpoint: malformed container: ") + e.what());
  }
}

void save_checkpoint(const HardnessModel& model, const std::filesystem::path& path, const nlohmann::json& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw NeuroError("cannot write checkpoint " + path.string());
    out << checkpoint_json(model, metadata).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

HardnessModel load_checkpoint(const std::filesystem::path& path) { return model_from_checkpoint(read_json(path)); }

nlohmann::json load_checkpoint_metadata(const std::filesystem::path& path) {
  return read_json(path).value("metadata", nlohmann::json::object());
}

}  // namespace tactex::neuro
