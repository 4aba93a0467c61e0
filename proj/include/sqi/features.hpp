#pragma once
// Mapping from utterance records to normalized model inputs and targets.

#include <optional>
#include <string>
#include <vector>

#include "sqi/dataset.hpp"
#include "sqi/matrix.hpp"
#include "sqi/stats.hpp"

namespace sqi {

// standard: the twelve objective measures predict quality and
// intelligibility. augmented: subjective quality is appended as a
// thirteenth input and only intelligibility is predicted.
enum class Variant { standard, augmented };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

std::size_t input_dim(Variant v);
std::size_t head_count(Variant v);

enum class ImputeMode { none, train_mean };

std::string impute_name(ImputeMode m);
ImputeMode impute_from_name(const std::string& name);

// Fixed normalization of the subjective targets.
double normalize_quality(double q);
double denormalize_quality(double v);
double normalize_intelligibility(double i);
double denormalize_intelligibility(double v);

struct FeaturePipeline {
  Variant variant = Variant::standard;
  Normalizer normalizer;
  // Raw-scale training means of the twelve measures, present when
  // imputation is enabled.
  std::optional<std::vector<double>> impute_means;

  // Raw input vector for one record. Missing measures are imputed when
  // enabled, otherwise InvalidArgument.
  std::vector<double> raw(const UtteranceRecord& r) const;
  // Normalized inputs, one row per record.
  Matrix inputs(const std::vector<UtteranceRecord>& records) const;

  friend bool operator==(const FeaturePipeline&, const FeaturePipeline&) = default;
};

// Fits min-max ranges on the training records (measures only; subjective
// quality in the augmented variant uses the fixed [1, 5] range).
FeaturePipeline fit_features(const std::vector<UtteranceRecord>& train, Variant variant,
                             ImputeMode impute = ImputeMode::none);

// Normalized targets, one column per head (quality, intelligibility) or
// just intelligibility for the augmented variant.
Matrix targets(const std::vector<UtteranceRecord>& records, Variant variant);

// Records whose measure vector is complete.
std::vector<UtteranceRecord> complete_only(const std::vector<UtteranceRecord>& records);

}  // namespace sqi
