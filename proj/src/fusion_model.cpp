#include "sqi/fusion_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "json_io.hpp"
#include "sqi/csv.hpp"
#include "sqi/error.hpp"
#include "sqi/kernels.hpp"

namespace sqi {

namespace {

using json = nlohmann::json;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> transpose(const DenseLayer& layer) {
  std::vector<double> t(layer.weight.size());
  for (std::size_t o = 0; o < layer.out; ++o) {
    for (std::size_t i = 0; i < layer.in; ++i) t[i * layer.out + o] = layer.weight[o * layer.in + i];
  }
  return t;
}

// Pre-activations and activations of every layer; activations[0] is the
// input batch.
struct ForwardPass {
  std::vector<Matrix> pre;
  std::vector<Matrix> act;
};

void run_forward(const FusionModel& model, const Matrix& inputs, ForwardPass& pass) {
  if (model.layers.empty()) throw InvalidArgument("forward: model has no layers");
  if (inputs.cols != model.input_dim) {
    throw InvalidArgument("forward: expected " + std::to_string(model.input_dim) + " inputs, got " +
                          std::to_string(inputs.cols));
  }
  const std::size_t n = inputs.rows;
  const std::size_t depth = model.layers.size();
  pass.pre.assign(depth, Matrix());
  pass.act.assign(depth + 1, Matrix());
  pass.act[0] = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    const DenseLayer& layer = model.layers[l];
    Matrix z(n, layer.out);
    for (std::size_t r = 0; r < n; ++r) std::copy(layer.bias.begin(), layer.bias.end(), z.row(r).begin());
    const auto wt = transpose(layer);
    kernels::gemm_nn(n, layer.out, layer.in, pass.act[l].data.data(), wt.data(), z.data.data());
    Matrix a(n, layer.out);
    const bool last = l + 1 == depth;
    for (std::size_t i = 0; i < z.data.size(); ++i) a.data[i] = last ? sigmoid(z.data[i]) : gelu(z.data[i]);
    pass.pre[l] = std::move(z);
    pass.act[l + 1] = std::move(a);
  }
}

void check_targets(const FusionModel& model, const Matrix& inputs, const Matrix& targets,
                   std::span<const double> head_weights) {
  if (targets.rows != inputs.rows || targets.cols != model.output_dim()) {
    throw InvalidArgument("loss: targets must be rows x heads");
  }
  if (head_weights.size() != model.output_dim()) throw InvalidArgument("loss: one weight per head required");
  if (inputs.rows == 0) throw InvalidArgument("loss: empty batch");
}

double weighted_mse(const Matrix& out, const Matrix& targets, std::span<const double> head_weights) {
  const double inv_n = 1.0 / static_cast<double>(out.rows);
  double total = 0.0;
  for (std::size_t h = 0; h < out.cols; ++h) {
    double s = 0.0;
    for (std::size_t r = 0; r < out.rows; ++r) {
      const double d = out(r, h) - targets(r, h);
      s += d * d;
    }
    total += head_weights[h] * s * inv_n;
  }
  return total;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

struct AdamState {
  std::vector<std::vector<double>> mw, vw, mb, vb;
  std::size_t step = 0;

  explicit AdamState(const FusionModel& model) {
    for (const auto& layer : model.layers) {
      mw.emplace_back(layer.weight.size(), 0.0);
      vw.emplace_back(layer.weight.size(), 0.0);
      mb.emplace_back(layer.bias.size(), 0.0);
      vb.emplace_back(layer.bias.size(), 0.0);
    }
  }
};

void adam_update(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
                 std::vector<double>& v, double lr, double c1, double c2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
    param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void TrainConfig::validate(std::size_t heads) const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("train config: learning_rate must be positive");
  if (batch_size == 0) throw InvalidArgument("train config: batch_size must be positive");
  if (max_epochs == 0) throw InvalidArgument("train config: max_epochs must be positive");
  if (patience == 0) throw InvalidArgument("train config: patience must be positive");
  if (head_weights.size() != heads) {
    throw InvalidArgument("train config: expected " + std::to_string(heads) + " head weights");
  }
  double sum = 0.0;
  for (double w : head_weights) {
    if (!(w >= 0.0)) throw InvalidArgument("train config: head weights must be nonnegative");
    sum += w;
  }
  if (!(sum > 0.0)) throw InvalidArgument("train config: head weights must not all be zero");
}

std::vector<std::size_t> FusionModel::widths() const {
  std::vector<std::size_t> w;
  for (const auto& l : layers) w.push_back(l.out);
  return w;
}

std::size_t FusionModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

FusionModel init_model(std::uint64_t seed, std::size_t input_dim, const std::vector<std::size_t>& widths) {
  if (input_dim == 0) throw InvalidArgument("init_model: input_dim must be positive");
  if (widths.empty()) throw InvalidArgument("init_model: need at least one layer");
  FusionModel model;
  model.input_dim = input_dim;
  model.seed = seed;
  std::mt19937_64 rng(seed);
  std::size_t fan_in = input_dim;
  for (std::size_t w : widths) {
    if (w == 0) throw InvalidArgument("init_model: layer widths must be positive");
    DenseLayer layer{fan_in, w, std::vector<double>(fan_in * w), std::vector<double>(w, 0.0)};
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (double& v : layer.weight) v = dist(rng);
    model.layers.push_back(std::move(layer));
    fan_in = w;
  }
  return model;
}

FusionModel init_model(std::uint64_t seed, Variant variant) {
  auto widths = kDefaultHiddenWidths;
  widths.push_back(head_count(variant));
  FusionModel m = init_model(seed, input_dim(variant), widths);
  m.features.variant = variant;
  return m;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Matrix forward(const FusionModel& model, const Matrix& inputs) {
  ForwardPass pass;
  run_forward(model, inputs, pass);
  return std::move(pass.act.back());
}

double loss(const FusionModel& model, const Matrix& inputs, const Matrix& targets, std::span<const double> head_weights) {
  check_targets(model, inputs, targets, head_weights);
  const double value = weighted_mse(forward(model, inputs), targets, head_weights);
  if (!std::isfinite(value)) throw NumericError("loss: non-finite value in forward pass");
  return value;
}

LossAndGradient loss_and_gradient(const FusionModel& model, const Matrix& inputs, const Matrix& targets,
                                  std::span<const double> head_weights) {
  check_targets(model, inputs, targets, head_weights);
  ForwardPass pass;
  run_forward(model, inputs, pass);
  const Matrix& out = pass.act.back();
  const std::size_t n = inputs.rows;
  const double inv_n = 1.0 / static_cast<double>(n);

  LossAndGradient result;
  result.loss = weighted_mse(out, targets, head_weights);
  if (!std::isfinite(result.loss)) throw NumericError("loss_and_gradient: non-finite value in forward pass");

  // dZ of the output layer through the sigmoid.
  Matrix dz(n, out.cols);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t h = 0; h < out.cols; ++h) {
      const double a = out(r, h);
      dz(r, h) = 2.0 * head_weights[h] * (a - targets(r, h)) * inv_n * a * (1.0 - a);
    }
  }

  const std::size_t depth = model.layers.size();
  result.grad.weight.resize(depth);
  result.grad.bias.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = model.layers[l];
    auto& gw = result.grad.weight[l];
    auto& gb = result.grad.bias[l];
    gw.assign(layer.weight.size(), 0.0);
    gb.assign(layer.out, 0.0);
    kernels::gemm_tn(n, layer.in, layer.out, dz.data.data(), pass.act[l].data.data(), gw.data());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t o = 0; o < layer.out; ++o) gb[o] += dz(r, o);
    }
    if (l == 0) break;
    Matrix da(n, layer.in);
    kernels::gemm_nn(n, layer.in, layer.out, dz.data.data(), layer.weight.data(), da.data.data());
    const Matrix& zprev = pass.pre[l - 1];
    for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= gelu_derivative(zprev.data[i]);
    dz = std::move(da);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + "," + csv::format_double(e.train_loss) + "," + csv::format_double(e.val_loss) + "\n";
  }
  return out;
}

TrainResult train(FusionModel model, const Examples& train_set, const Examples& val_set, const TrainConfig& config) {
  config.validate(model.output_dim());
  if (train_set.inputs.rows == 0) throw DegenerateInput("train: empty training set");
  if (val_set.inputs.rows == 0) throw DegenerateInput("train: empty validation set");
  check_targets(model, train_set.inputs, train_set.targets, config.head_weights);
  check_targets(model, val_set.inputs, val_set.targets, config.head_weights);

  const std::size_t n = train_set.inputs.rows;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  AdamState adam(model);

  TrainResult result;
  std::vector<DenseLayer> best_layers = model.layers;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = gather_rows(train_set.inputs, idx);
      const Matrix yb = gather_rows(train_set.targets, idx);
      const auto lg = loss_and_gradient(model, xb, yb, config.head_weights);
      train_loss += lg.loss * static_cast<double>(idx.size());

      ++adam.step;
      const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
      const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        adam_update(model.layers[l].weight, lg.grad.weight[l], adam.mw[l], adam.vw[l], config.learning_rate, c1, c2);
        adam_update(model.layers[l].bias, lg.grad.bias[l], adam.mb[l], adam.vb[l], config.learning_rate, c1, c2);
      }
    }
    train_loss /= static_cast<double>(n);
    const double val_loss = loss(model, val_set.inputs, val_set.targets, config.head_weights);
    result.history.epochs.push_back({epoch, train_loss, val_loss});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_layers = model.layers;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.layers = std::move(best_layers);
  model.config = config;
  result.model = std::move(model);
  return result;
}

TrainResult train_fusion(const std::vector<UtteranceRecord>& train_records,
                         const std::vector<UtteranceRecord>& val_records, const TrainConfig& config, Variant variant,
                         ImputeMode impute) {
  if (train_records.empty()) throw DegenerateInput("train: empty training set");
  if (val_records.empty()) throw DegenerateInput("train: empty validation set");
  FusionModel model = init_model(config.seed, variant);
  model.features = fit_features(train_records, variant, impute);
  const Examples tr{model.features.inputs(train_records), targets(train_records, variant)};
  const Examples va{model.features.inputs(val_records), targets(val_records, variant)};
  return train(std::move(model), tr, va, config);
}

TrainResult train_augmented(const std::vector<UtteranceRecord>& train_records,
                            const std::vector<UtteranceRecord>& val_records, const TrainConfig& config,
                            ImputeMode impute) {
  TrainConfig c = config;
  if (c.head_weights.size() != 1) c.head_weights = {1.0};
  return train_fusion(train_records, val_records, c, Variant::augmented, impute);
}

std::vector<Prediction> predict(const FusionModel& model, const std::vector<UtteranceRecord>& records) {
  const Matrix out = forward(model, model.features.inputs(records));
  std::vector<Prediction> preds(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (model.features.variant == Variant::standard) {
      preds[r].quality = denormalize_quality(out(r, 0));
      preds[r].intelligibility = denormalize_intelligibility(out(r, 1));
    } else {
      preds[r].intelligibility = denormalize_intelligibility(out(r, 0));
    }
  }
  return preds;
}

// ---------------------------------------------------------------------------

std::string checkpoint_json(const FusionModel& model) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = "fusion";
  j["input_dim"] = model.input_dim;
  j["widths"] = model.widths();
  std::vector<std::string> activations(model.layers.size(), "gelu");
  if (!activations.empty()) activations.back() = "sigmoid";
  j["activations"] = activations;
  j["heads"] = model.features.variant == Variant::standard ? std::vector<std::string>{"quality", "intelligibility"}
                                                           : std::vector<std::string>{"intelligibility"};
  json layers = json::array();
  for (const auto& l : model.layers) {
    json rows = json::array();
    for (std::size_t o = 0; o < l.out; ++o) {
      rows.push_back(std::vector<double>(l.weight.begin() + static_cast<std::ptrdiff_t>(o * l.in),
                                         l.weight.begin() + static_cast<std::ptrdiff_t>((o + 1) * l.in)));
    }
    layers.push_back({{"weight", rows}, {"bias", l.bias}});
  }
  j["layers"] = layers;
  j["features"] = json_io::pipeline_to_json(model.features);
  j["seed"] = model.seed;
  j["config"] = json_io::config_to_json(model.config);
  return j.dump(1) + "\n";
}

FusionModel model_from_json(const std::string& text) {
  const json j = json_io::parse_document(text, "checkpoint");
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw FormatError("checkpoint: unsupported format_version");
    }
    if (j.at("kind").get<std::string>() != "fusion") throw FormatError("checkpoint: not a fusion model");
    FusionModel m;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    const auto widths = j.at("widths").get<std::vector<std::size_t>>();
    const auto activations = j.at("activations").get<std::vector<std::string>>();
    const auto& layers = j.at("layers");
    if (layers.size() != widths.size() || activations.size() != widths.size()) {
      throw FormatError("checkpoint: layer count mismatch");
    }
    std::size_t fan_in = m.input_dim;
    for (std::size_t l = 0; l < widths.size(); ++l) {
      const bool last = l + 1 == widths.size();
      if (activations[l] != (last ? "sigmoid" : "gelu")) throw FormatError("checkpoint: unexpected activation schedule");
      DenseLayer layer{fan_in, widths[l], {}, layers[l].at("bias").get<std::vector<double>>()};
      const auto rows = layers[l].at("weight").get<std::vector<std::vector<double>>>();
      if (rows.size() != layer.out || layer.bias.size() != layer.out) throw FormatError("checkpoint: bad layer shape");
      for (const auto& row : rows) {
        if (row.size() != fan_in) throw FormatError("checkpoint: bad layer shape");
        layer.weight.insert(layer.weight.end(), row.begin(), row.end());
      }
      m.layers.push_back(std::move(layer));
      fan_in = widths[l];
    }
    m.features = json_io::pipeline_from_json(j.at("features"));
    if (m.features.normalizer.size() != m.input_dim || m.output_dim() != head_count(m.features.variant)) {
      throw FormatError("checkpoint: dimensions do not match variant");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = json_io::config_from_json(j.at("config"));
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const FusionModel& model) {
  csv::write_text(path, checkpoint_json(model));
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace sqi
