#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/common/image.hpp"
#include "tactex/neuro/tensor.hpp"

namespace tactex::neuro {

/// T difference images, each input_size x input_size.
using Sequence = std::vector<GrayImage>;

struct ModelConfig {
  int input_size = 64;
  int frames = 2;
  std::vector<int> conv_channels{8, 16, 32, 64};
  int lstm_layers = 3;
  int hidden = 64;
  double lstm_dropout = 0.1;
  int head_hidden = 32;
  double head_dropout = 0.2;
  /// Difference intensities are multiplied by this before the encoder.
  double input_scale = 1.0 / 32.0;
  /// Head output h maps to hardness as h * output_scale + output_offset.
  double output_scale = 20.0;
  double output_offset = 57.5;

  void validate() const;
  /// 2 conv blocks, hidden 8, 16x16 input.
  static ModelConfig reduced();
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

enum class ParamGroup { early, late };

struct Parameter {
  std::string name;
  Tensor value;
  ParamGroup group;
  /// Weight decay applies to weights, not biases.
  bool decay;
};

/// Conv encoder -> stacked LSTM -> FC head, one hardness value per sequence.
class HardnessModel {
 public:
  HardnessModel(ModelConfig config, std::uint64_t seed);
  /// Copies own their parameter storage.
  HardnessModel(const HardnessModel& other);
  HardnessModel& operator=(const HardnessModel& other);
  HardnessModel(HardnessModel&&) = default;
  HardnessModel& operator=(HardnessModel&&) = default;

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  Parameter& parameter(const std::string& name);

  /// Output shape [N]. `rng` drives dropout and is only used when training.
  Tensor forward(const std::vector<Sequence>& batch, bool training, Rng& rng) const;
  std::vector<double> predict(const std::vector<Sequence>& batch) const;

 private:
  const Tensor& p(std::size_t i) const { return params_[i].value; }

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::size_t conv_begin_ = 0, lstm_begin_ = 0, head_begin_ = 0;
};

}  // namespace tactex::neuro
