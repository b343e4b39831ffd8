#include "tactex/neuro/model.hpp"

#include <cmath>

namespace tactex::neuro {

void ModelConfig::validate() const {
  if (input_size < 4 || frames < 1) throw NeuroError("model config: input_size >= 4 and frames >= 1 required");
  if (conv_channels.empty()) throw NeuroError("model config: at least one conv block");
  if ((input_size >> conv_channels.size()) < 1) throw NeuroError("model config: too many stride-2 blocks for input");
  if (lstm_layers < 1 || hidden < 1 || head_hidden < 1) throw NeuroError("model config: layer sizes must be positive");
  for (double d : {lstm_dropout, head_dropout})
    if (d < 0.0 || d >= 1.0) throw NeuroError("model config: dropout must be in [0, 1)");
}

ModelConfig ModelConfig::reduced() {
  ModelConfig c;
  c.input_size = 16;
  c.conv_channels = {8, 16};
  c.hidden = 8;
  c.head_hidden = 8;
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"input_size", c.input_size},     {"frames", c.frames},
          {"conv_channels", c.conv_channels}, {"lstm_layers", c.lstm_layers},
          {"hidden", c.hidden},             {"lstm_dropout", c.lstm_dropout},
          {"head_hidden", c.head_hidden},   {"head_dropout", c.head_dropout},
          {"input_scale", c.input_scale},   {"output_scale", c.output_scale},
          {"output_offset", c.output_offset}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_size = j.at("input_size").get<int>();
  c.frames = j.at("frames").get<int>();
  c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  c.lstm_layers = j.at("lstm_layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.lstm_dropout = j.at("lstm_dropout").get<double>();
  c.head_hidden = j.at("head_hidden").get<int>();
  c.head_dropout = j.at("head_dropout").get<double>();
  c.input_scale = j.at("input_scale").get<double>();
  c.output_scale = j.at("output_scale").get<double>();
  c.output_offset = j.at("output_offset").get<double>();
  c.validate();
  return c;
}

HardnessModel::HardnessModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  auto add = [&](std::string name, Shape shape, ParamGroup group, bool decay, auto init) {
    std::vector<double> v(numel(shape));
    for (double& x : v) x = init();
    params_.push_back({std::move(name), Tensor::from(shape, std::move(v), true), group, decay});
  };
  auto normal = [&](double sd) { return [&rng, sd] { return gaussian(rng, 0.0, sd); }; };
  auto uni = [&](double a) { return [&rng, a] { return uniform(rng, -a, a); }; };
  auto constant = [](double c) { return [c] { return c; }; };

  conv_begin_ = params_.size();
  int in_ch = 1;
  for (std::size_t i = 0; i < config_.conv_channels.size(); ++i) {
    const int out = config_.conv_channels[i];
    const std::string base = "encoder.conv" + std::to_string(i);
    add(base + ".weight", {out, in_ch, 3, 3}, ParamGroup::early, true, normal(std::sqrt(2.0 / (in_ch * 9.0))));
    add(base + ".bias", {out}, ParamGroup::early, false, constant(0.0));
    in_ch = out;
  }
  lstm_begin_ = params_.size();
  const int h = config_.hidden;
  const double k = 1.0 / std::sqrt(static_cast<double>(h));
  for (int l = 0; l < config_.lstm_layers; ++l) {
    const int in = l == 0 ? in_ch : h;
    const std::string base = "lstm.layer" + std::to_string(l);
    add(base + ".weight_ih", {4 * h, in}, ParamGroup::late, true, uni(k));
    add(base + ".weight_hh", {4 * h, h}, ParamGroup::late, true, uni(k));
    add(base + ".bias", {4 * h}, ParamGroup::late, false, uni(k));
    // forget-gate bias starts at 1
    auto& bias = params_.back().value.values();
    for (int j = h; j < 2 * h; ++j) bias[static_cast<std::size_t>(j)] = 1.0;
  }
  head_begin_ = params_.size();
  add("head.fc0.weight", {config_.head_hidden, h}, ParamGroup::late, true, uni(1.0 / std::sqrt(double(h))));
  add("head.fc0.bias", {config_.head_hidden}, ParamGroup::late, false, constant(0.0));
  // Zero output layer: predictions start constant, the variance penalty sits on its
  // flat capped branch, and the MSE term alone picks the sign of the hardness
  // direction. A random start can lock in an anti-correlated spread, since undoing
  // it means passing through zero variance.
  add("head.fc1.weight", {1, config_.head_hidden}, ParamGroup::late, true, constant(0.0));
  add("head.fc1.bias", {1}, ParamGroup::late, false, constant(0.0));
}

HardnessModel::HardnessModel(const HardnessModel& other)
    : config_(other.config_),
      conv_begin_(other.conv_begin_),
      lstm_begin_(other.lstm_begin_),
      head_begin_(other.head_begin_) {
  for (const auto& prm : other.params_) {
    params_.push_back({prm.name, Tensor::from(prm.value.shape(), prm.value.values(), true), prm.group, prm.decay});
  }
}

HardnessModel& HardnessModel::operator=(const HardnessModel& other) {
  if (this != &other) *this = HardnessModel(other);
  return *this;
}

std::size_t HardnessModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& prm : params_) n += prm.value.size();
  return n;
}

Parameter& HardnessModel::parameter(const std::string& name) {
  for (auto& prm : params_)
    if (prm.name == name) return prm;
  throw NeuroError("no parameter named " + name);
}

Tensor HardnessModel::forward(const std::vector<Sequence>& batch, bool training, Rng& rng) const {
  if (batch.empty()) throw NeuroError("forward: empty batch");
  const int n = static_cast<int>(batch.size());
  const int t_len = config_.frames;
  const int s = config_.input_size;
  const std::size_t frame_px = static_cast<std::size_t>(s) * s;

  std::vector<double> input(static_cast<std::size_t>(n) * t_len * frame_px);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(batch[i].size()) != t_len) {
      throw NeuroError("forward: sequence has " + std::to_string(batch[i].size()) + " frames, model expects " +
                       std::to_string(t_len));
    }
    for (int t = 0; t < t_len; ++t) {
      const auto& img = batch[i][t];
      if (img.width() != s || img.height() != s || img.channels() != 1) {
        throw NeuroError("forward: frame must be " + std::to_string(s) + "x" + std::to_string(s) + " single-channel");
      }
      double* dst = input.data() + (static_cast<std::size_t>(i) * t_len + t) * frame_px;
      for (std::size_t k = 0; k < frame_px; ++k) dst[k] = img.data()[k] * config_.input_scale;
    }
  }
  Tensor x = Tensor::from({n * t_len, 1, s, s}, std::move(input));
  for (std::size_t b = 0; b < config_.conv_channels.size(); ++b) {
    x = silu(conv2d(x, p(conv_begin_ + 2 * b), p(conv_begin_ + 2 * b + 1), 2, 1));
  }
  const Tensor features = global_avg_pool(x);  // rows ordered sample-major: i * T + t

  std::vector<Tensor> steps;
  for (int t = 0; t < t_len; ++t) {
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i * t_len + t;
    steps.push_back(select_rows(features, rows));
  }
  const int h = config_.hidden;
  for (int l = 0; l < config_.lstm_layers; ++l) {
    const Tensor& w_ih = p(lstm_begin_ + 3 * l);
    const Tensor& w_hh = p(lstm_begin_ + 3 * l + 1);
    const Tensor& bias = p(lstm_begin_ + 3 * l + 2);
    Tensor hs = Tensor::zeros({n, h});
    Tensor cs = Tensor::zeros({n, h});
    for (auto& x_t : steps) {
      const Tensor gates = add(linear(x_t, w_ih, bias), linear(hs, w_hh, Tensor()));
      const Tensor i_g = sigmoid(slice_cols(gates, 0, h));
      const Tensor f_g = sigmoid(slice_cols(gates, h, h));
      const Tensor g_g = tanh(slice_cols(gates, 2 * h, h));
      const Tensor o_g = sigmoid(slice_cols(gates, 3 * h, h));
      cs = add(mul(f_g, cs), mul(i_g, g_g));
      hs = mul(o_g, tanh(cs));
      x_t = hs;
    }
    if (l + 1 < config_.lstm_layers) {
      for (auto& x_t : steps) x_t = dropout(x_t, config_.lstm_dropout, training, rng);
    }
  }
  Tensor z = silu(linear(steps.back(), p(head_begin_), p(head_begin_ + 1)));
  z = dropout(z, config_.head_dropout, training, rng);
  z = linear(z, p(head_begin_ + 2), p(head_begin_ + 3));
  return reshape(add_scalar(mul_scalar(z, config_.output_scale), config_.output_offset), {n});
}

std::vector<double> HardnessModel::predict(const std::vector<Sequence>& batch) const {
  NoGradGuard guard;
  Rng unused(0);
  return forward(batch, false, unused).values();
}

}  // namespace tactex::neuro
