#pragma once
// Multi-task fusion network: six dense layers, GELU after the first five,
// sigmoid on the output. Inputs are min-max normalized objective measures;
// outputs are normalized subjective quality and intelligibility.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqi/dataset.hpp"
#include "sqi/features.hpp"
#include "sqi/matrix.hpp"

namespace sqi {

// Hidden widths of the five GELU layers; the sixth layer has one unit
// per head.
inline const std::vector<std::size_t> kDefaultHiddenWidths{128, 64, 64, 32, 16};

inline constexpr int kCheckpointFormatVersion = 1;

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  // Loss weight per head in output order.
  std::vector<double> head_weights{0.5, 0.5};

  // Throws InvalidArgument on non-positive or inconsistent settings.
  void validate(std::size_t heads) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct FusionModel {
  std::size_t input_dim = 0;
  std::vector<DenseLayer> layers;
  FeaturePipeline features;
  std::uint64_t seed = 0;
  TrainConfig config;

  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  // Widths of every layer, ending with the head count.
  std::vector<std::size_t> widths() const;
  std::size_t parameter_count() const;

  friend bool operator==(const FusionModel&, const FusionModel&) = default;
};

// Weights drawn from N(0, 2 / fan_in), zero biases. `widths` lists every
// layer including the output layer.
FusionModel init_model(std::uint64_t seed, std::size_t input_dim, const std::vector<std::size_t>& widths);

// Standard (12 -> 2) or augmented (13 -> 1) model with the default widths.
FusionModel init_model(std::uint64_t seed, Variant variant);

double gelu(double x);
double gelu_derivative(double x);

// Normalized inputs [n x input_dim] to head outputs [n x heads] in (0, 1).
Matrix forward(const FusionModel& model, const Matrix& inputs);

struct Gradients {
  std::vector<std::vector<double>> weight;  // per layer, same layout as DenseLayer::weight
  std::vector<std::vector<double>> bias;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradients grad;
};

// loss = sum_h w_h * mean_rows (output_h - target_h)^2, with gradients by
// reverse-mode differentiation. Throws NumericError on a non-finite loss.
LossAndGradient loss_and_gradient(const FusionModel& model, const Matrix& inputs, const Matrix& targets,
                                  std::span<const double> head_weights);

// Loss only, same definition as loss_and_gradient.
double loss(const FusionModel& model, const Matrix& inputs, const Matrix& targets, std::span<const double> head_weights);

struct Examples {
  Matrix inputs;   // normalized
  Matrix targets;  // normalized
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;

  std::string to_csv() const;
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  FusionModel model;
  TrainHistory history;
};

// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8), reshuffling every
// epoch from the config seed. Stops after `patience` epochs without a new
// best validation loss and returns the best parameters.
TrainResult train(FusionModel model, const Examples& train_set, const Examples& val_set, const TrainConfig& config);

// Fits the feature pipeline on `train_records`, initializes from
// config.seed and trains.
TrainResult train_fusion(const std::vector<UtteranceRecord>& train_records,
                         const std::vector<UtteranceRecord>& val_records, const TrainConfig& config,
                         Variant variant = Variant::standard, ImputeMode impute = ImputeMode::none);

// Intelligibility-only model with subjective quality as a 13th input.
TrainResult train_augmented(const std::vector<UtteranceRecord>& train_records,
                            const std::vector<UtteranceRecord>& val_records, const TrainConfig& config,
                            ImputeMode impute = ImputeMode::none);

struct Prediction {
  std::optional<double> quality;  // [1, 5]; absent for the augmented variant
  double intelligibility = 0.0;   // [0, 10]
};

// Denormalized predictions for raw records.
std::vector<Prediction> predict(const FusionModel& model, const std::vector<UtteranceRecord>& records);

// Versioned JSON checkpoint.
std::string checkpoint_json(const FusionModel& model);
FusionModel model_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const FusionModel& model);
FusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sqi
