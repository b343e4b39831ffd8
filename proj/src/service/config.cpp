#include "tactex/service/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace tactex::service {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument("config: unknown key " + where + k);
}

vision::DetectorProfile detector_from_json(const nlohmann::json& j) {
  if (j.is_string()) return vision::profile_by_name(j.get<std::string>());
  if (!j.is_object()) throw std::invalid_argument("config: detector must be a name or an object");
  reject_unknown(j,
                 {"base", "name", "confidence_threshold", "mean_confidence", "confidence_spread", "boundary_noise",
                  "miss_rate", "promptable", "confusion_base", "confusion_per_prompt_label"},
                 "detector.");
  auto p = vision::profile_by_name(j.value("base", std::string("gsam-like")));
  p.name = j.value("name", p.name);
  p.confidence_threshold = j.value("confidence_threshold", p.confidence_threshold);
  p.mean_confidence = j.value("mean_confidence", p.mean_confidence);
  p.confidence_spread = j.value("confidence_spread", p.confidence_spread);
  p.boundary_noise = j.value("boundary_noise", p.boundary_noise);
  p.miss_rate = j.value("miss_rate", p.miss_rate);
  p.promptable = j.value("promptable", p.promptable);
  p.confusion_base = j.value("confusion_base", p.confusion_base);
  p.confusion_per_prompt_label = j.value("confusion_per_prompt_label", p.confusion_per_prompt_label);
  p.validate();
  return p;
}

neuro::TrainConfig train_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"pretrain_epochs", "finetune_epochs", "batch_size", "lr_early", "lr_late", "weight_decay",
                  "plateau_factor", "plateau_patience", "frames", "augment", "photometric_jitter", "val_fraction"},
                 "train.");
  neuro::TrainConfig c;
  c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
  c.finetune_epochs = j.value("finetune_epochs", c.finetune_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr_early = j.value("lr_early", c.lr_early);
  c.lr_late = j.value("lr_late", c.lr_late);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  c.frames = j.value("frames", c.frames);
  c.augment = j.value("augment", c.augment);
  c.photometric_jitter = j.value("photometric_jitter", c.photometric_jitter);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }
  return c;
}

}  // namespace

AppConfig app_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  reject_unknown(j, {"lang", "detector", "train", "depth_noise_sigma", "localize_tolerance_mm", "explainer"}, "");
  AppConfig c;
  try {
    if (j.contains("lang")) {
      c.lang = lang::lang_config_from_json(j.at("lang"));
      c.lang.validate();
    }
    if (j.contains("detector")) c.detector = detector_from_json(j.at("detector"));
    if (j.contains("train")) c.train = train_from_json(j.at("train"));
    c.depth_noise_sigma = j.value("depth_noise_sigma", c.depth_noise_sigma);
    c.localize_tolerance_mm = j.value("localize_tolerance_mm", c.localize_tolerance_mm);
    if (j.contains("explainer")) c.explainer = lang::backend_from_string(j.at("explainer").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (c.depth_noise_sigma < 0.0) throw std::invalid_argument("config: depth_noise_sigma must be >= 0");
  if (c.localize_tolerance_mm <= 0.0) throw std::invalid_argument("config: localize_tolerance_mm must be > 0");
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }
  return app_config_from_json(j);
}

nlohmann::json to_json(const vision::DetectorProfile& p) {
  return {{"name", p.name},
          {"confidence_threshold", p.confidence_threshold},
          {"mean_confidence", p.mean_confidence},
          {"confidence_spread", p.confidence_spread},
          {"boundary_noise", p.boundary_noise},
          {"miss_rate", p.miss_rate},
          {"promptable", p.promptable},
          {"confusion_base", p.confusion_base},
          {"confusion_per_prompt_label", p.confusion_per_prompt_label}};
}

}  // namespace tactex::service
