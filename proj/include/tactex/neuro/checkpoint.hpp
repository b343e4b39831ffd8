#pragma once

#include <filesystem>

#include <json.hpp>

#include "tactex/neuro/model.hpp"

namespace tactex::neuro {

inline constexpr int kCheckpointVersion = 1;

/// {"format", "version", "model_config", "metadata", "parameters": [{name, shape, values}]}
/// with values row-major.
nlohmann::json checkpoint_json(const HardnessModel& model, const nlohmann::json& metadata = nlohmann::json::object());
HardnessModel model_from_checkpoint(const nlohmann::json& j);

void save_checkpoint(const HardnessModel& model, const std::filesystem::path& path,
                     const nlohmann::json& metadata = nlohmann::json::object());
HardnessModel load_checkpoint(const std::filesystem::path& path);
nlohmann::json load_checkpoint_metadata(const std::filesystem::path& path);

}  // namespace tactex::neuro
