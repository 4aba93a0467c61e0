#pragma once
// Ordinary least-squares baseline: one independent linear model per head.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqi/dataset.hpp"
#include "sqi/features.hpp"
#include "sqi/fusion_model.hpp"
#include "sqi/matrix.hpp"

namespace sqi {

inline constexpr double kLinearRidge = 1e-8;

struct LinearHead {
  std::vector<double> weights;
  double bias = 0.0;

  double predict(std::span<const double> x) const;
  friend bool operator==(const LinearHead&, const LinearHead&) = default;
};

// Normal equations with kLinearRidge added to the Gram diagonal (bias
// column included). Throws DegenerateInput with fewer rows than
// features + 1.
LinearHead fit_linear(const Matrix& inputs, std::span<const double> target);

struct LinearBaseline {
  FeaturePipeline features;  // standard variant
  LinearHead quality;        // fitted on normalized quality
  LinearHead intelligibility;

  friend bool operator==(const LinearBaseline&, const LinearBaseline&) = default;
};

LinearBaseline fit_linear_baseline(const std::vector<UtteranceRecord>& train_records,
                                   ImputeMode impute = ImputeMode::none);

// Denormalized predictions (unclamped).
std::vector<Prediction> predict(const LinearBaseline& model, const std::vector<UtteranceRecord>& records);

std::string checkpoint_json(const LinearBaseline& model);
LinearBaseline linear_from_json(const std::string& text);

}  // namespace sqi
