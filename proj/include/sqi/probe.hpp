#pragma once
// Functional-relationship probing: synthetic measure vectors drawn from a
// multivariate normal fitted to the training features are pushed through
// a trained model, and predictions are averaged in equal-count bins of one
// measure. Repeating the draw gives mean and standard-deviation curves.

#include <cstdint>
#include <string>
#include <vector>

#include "sqi/fusion_model.hpp"
#include "sqi/matrix.hpp"

namespace sqi {

struct GaussianSpec {
  std::vector<double> mean;  // normalized feature space
  Matrix covariance;         // ridge already added to the diagonal
  double ridge = 0.0;
  Matrix cholesky;           // lower-triangular factor of covariance

  std::size_t dim() const { return mean.size(); }
};

// Validates symmetry (1e-12), adds ridge to the diagonal and factors.
// Throws NumericError when the result is not positive definite.
GaussianSpec make_gaussian(std::vector<double> mean, Matrix covariance, double ridge);

// Sample mean and (n - 1) covariance of normalized training features.
// Needs at least dim + 1 rows.
GaussianSpec fit_gaussian(const Matrix& features, double ridge = 1e-6);

// Draws `count` samples, one per row.
Matrix sample_gaussian(const GaussianSpec& spec, std::size_t count, std::uint64_t seed);

struct ProbeSettings {
  std::size_t repetitions = 1000;
  std::size_t samples_per_rep = 10000;
  std::size_t bins = 200;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct ProbeCurve {
  std::string measure;
  std::vector<double> x;  // mean bin position on the raw measure scale
  // Per-bin mean and standard deviation over repetitions of the bin
  // averages. Quality curves are empty for intelligibility-only models.
  std::vector<double> q_mean, q_std, i_mean, i_std;
  std::size_t repetitions = 0;
  std::size_t samples_per_rep = 0;

  std::string to_csv() const;
};

// Repetition r uses the sub-seed mix_seed(settings.seed, r); repetitions
// may run in parallel and are aggregated in index order.
ProbeCurve probe_measure(const FusionModel& model, const GaussianSpec& spec, std::size_t measure_index,
                         const ProbeSettings& settings);

}  // namespace sqi
