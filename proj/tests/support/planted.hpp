#pragma once
// Hand-built fusion models with a known response to one input feature.

#include <algorithm>
#include <string>
#include <vector>

#include "sqi/fusion_model.hpp"
#include "sqi/measure_vector.hpp"
#include "sqi/probe.hpp"
#include "sqi/stats.hpp"

namespace sqi::test {

// Raw range of the planted feature; all other features use [0, 1].
inline constexpr double kPlantedMin = 2.0;
inline constexpr double kPlantedMax = 6.0;

// Standard-variant model whose heads see only feature `j`:
//   quality         = 1 + 4 * sigmoid(a (x_n - 0.5))
//   intelligibility = 10 * sigmoid(b (x_n - 0.5))
// where x_n is the normalized feature. Hidden layers carry x_n + 10 through
// one unit each, which GELU passes unchanged to double precision. Near
// x_n = 0.5 the heads are linear with raw-scale slopes a / 4 and
// 2.5 b / 4 (the planted range is 4 wide).
inline FusionModel planted_linear(std::size_t j, double a, double b) {
  FusionModel m = init_model(0, Variant::standard);
  for (auto& layer : m.layers) {
    std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  m.layers[0].weight[j] = 1.0;  // row 0, column j
  m.layers[0].bias[0] = 10.0;
  for (std::size_t l = 1; l + 1 < m.layers.size(); ++l) m.layers[l].weight[0] = 1.0;
  auto& out = m.layers.back();
  out.weight[0] = a;
  out.bias[0] = -10.5 * a;
  out.weight[out.in] = b;
  out.bias[1] = -10.5 * b;

  std::vector<double> mins(kNumMeasures, 0.0), maxs(kNumMeasures, 1.0);
  mins[j] = kPlantedMin;
  maxs[j] = kPlantedMax;
  m.features.variant = Variant::standard;
  m.features.normalizer = Normalizer(measure_names(), mins, maxs);
  return m;
}

// Independent N(0.5, sd^2) in every normalized feature.
inline GaussianSpec independent_gaussian(double sd = 0.1) {
  Matrix cov(kNumMeasures, kNumMeasures);
  for (std::size_t i = 0; i < kNumMeasures; ++i) cov(i, i) = sd * sd;
  return make_gaussian(std::vector<double>(kNumMeasures, 0.5), cov, 0.0);
}

// Least-squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline double range_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace sqi::test
