#include <gtest/gtest.h>

#include "tactex/service/config.hpp"

using tactex::service::app_config_from_json;

TEST(AppConfig, EmptyObjectKeepsDefaults) {
  const auto c = app_config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.detector.name, "gsam-like");
  EXPECT_EQ(c.train.pretrain_epochs, 80);
  EXPECT_DOUBLE_EQ(c.depth_noise_sigma, 2.0);
  EXPECT_EQ(c.explainer, tactex::lang::Backend::template_engine);
}

TEST(AppConfig, DetectorByNameOrOverride) {
  EXPECT_EQ(app_config_from_json({{"detector", "yolo-like"}}).detector.name, "yolo-like");
  const auto c = app_config_from_json({{"detector", {{"base", "perfect"}, {"miss_rate", 0.25}, {"name", "lossy"}}}});
  EXPECT_EQ(c.detector.name, "lossy");
  EXPECT_DOUBLE_EQ(c.detector.miss_rate, 0.25);
  EXPECT_DOUBLE_EQ(c.detector.boundary_noise, 0.0);
}

TEST(AppConfig, TrainAndLangOverrides) {
  const auto c = app_config_from_json(
      {{"train", {{"pretrain_epochs", 3}, {"augment", false}}}, {"lang", {{"fruit_classes", {"apple", "pear"}}}}});
  EXPECT_EQ(c.train.pretrain_epochs, 3);
  EXPECT_FALSE(c.train.augment);
  EXPECT_EQ(c.train.finetune_epochs, 15);
  EXPECT_EQ(c.lang.fruit_classes.size(), 2u);
}

TEST(AppConfig, RejectsBadInput) {
  EXPECT_THROW(app_config_from_json(nlohmann::json::array()), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"detectr", "perfect"}}), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"detector", "resnet"}}), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"detector", {{"miss_rate", 1.5}}}}), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"train", {{"batch_size", 1}}}}), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"train", {{"epochs", 1}}}}), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"depth_noise_sigma", "two"}}), std::invalid_argument);
  EXPECT_THROW(app_config_from_json({{"explainer", "gpt"}}), std::invalid_argument);
}
