#pragma once

#include <filesystem>

#include <json.hpp>

#include "tactex/lang/client.hpp"
#include "tactex/lang/config.hpp"
#include "tactex/neuro/train.hpp"
#include "tactex/vision/detector.hpp"

namespace tactex::service {

/// Settings shared by the command-line tools and the server. A config file
/// is a JSON object; every key is optional:
///
///   {"lang": {...}, "detector": "gsam-like" | {"base": "yolo-like", "miss_rate": 0.1, ...},
///    "train": {"pretrain_epochs": 80, ...}, "depth_noise_sigma": 2.0,
///    "localize_tolerance_mm": 5.0, "explainer": "template" | "external"}
///
/// The external explainer's API key is read from TACTEX_LLM_API_KEY, never
/// from the file.
struct AppConfig {
  lang::LangConfig lang = lang::default_lang_config();
  vision::DetectorProfile detector = vision::gsam_like_profile();
  neuro::TrainConfig train;
  double depth_noise_sigma = 2.0;
  double localize_tolerance_mm = 5.0;
  lang::Backend explainer = lang::Backend::template_engine;
};

/// Throws std::invalid_argument on unknown keys or bad values.
AppConfig app_config_from_json(const nlohmann::json& j);
AppConfig load_app_config(const std::filesystem::path& path);
nlohmann::json to_json(const vision::DetectorProfile& p);

}  // namespace tactex::service
