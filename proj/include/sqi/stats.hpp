#pragma once
// Evaluation metrics and min-max normalization.
//
// All reductions run left to right in a fixed order so results are
// bit-reproducible across runs.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqi/matrix.hpp"

namespace sqi {

// Sample Pearson correlation. Throws InvalidArgument on length mismatch or
// fewer than two points, DegenerateInput when either side has zero
// variance.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Mean squared difference. Throws on length mismatch or empty input.
double mse(std::span<const double> pred, std::span<const double> target);

// Per-feature min-max scaling to [0, 1].
class Normalizer {
 public:
  Normalizer() = default;
  // Throws InvalidArgument unless max > min for every feature.
  Normalizer(std::vector<std::string> names, std::vector<double> mins, std::vector<double> maxs);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }
  std::size_t size() const { return names_.size(); }

  // Adds a feature with a fixed (not fitted) range.
  void append(std::string name, double min, double max);

  struct Applied {
    std::vector<double> values;
    std::vector<bool> clamped;  // true where the input fell outside [min, max]
    bool any_clamped() const;
  };

  // (v - min) / (max - min), clamped to [0, 1].
  Applied apply(std::span<const double> raw) const;
  // min + v * (max - min), no clamping.
  std::vector<double> invert(std::span<const double> normalized) const;

  double apply_one(std::size_t feature, double raw) const;
  double invert_one(std::size_t feature, double normalized) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

// Fits per-column min and max on training rows. A constant column is a
// DegenerateInput error.
Normalizer fit_normalizer(const Matrix& features, const std::vector<std::string>& names);

struct HeadMetrics {
  double mse = 0.0;
  double pcc = 0.0;
  double srcc = 0.0;
};

HeadMetrics evaluate_head(std::span<const double> pred, std::span<const double> target);

struct EvalReport {
  std::optional<HeadMetrics> quality;
  std::optional<HeadMetrics> intelligibility;
  std::size_t n = 0;
};

// Symmetric Pearson correlation matrix over named columns.
struct CorrelationMatrix {
  std::vector<std::string> names;
  Matrix values;

  std::string to_csv() const;
};

// Columns of `data` are variables, rows observations. Needs >= 2 rows.
CorrelationMatrix correlation_matrix(const Matrix& data, std::vector<std::string> names);

}  // namespace sqi
