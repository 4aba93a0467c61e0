#include "sqi/probe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sqi/csv.hpp"
#include "sqi/dataset.hpp"
#include "sqi/error.hpp"
#include "sqi/parallel.hpp"

namespace sqi {

GaussianSpec make_gaussian(std::vector<double> mean, Matrix covariance, double ridge) {
  const std::size_t d = mean.size();
  if (d == 0) throw InvalidArgument("gaussian: empty mean");
  if (covariance.rows != d || covariance.cols != d) throw InvalidArgument("gaussian: covariance shape mismatch");
  if (!(ridge >= 0.0)) throw InvalidArgument("gaussian: ridge must be nonnegative");
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      if (std::abs(covariance(a, b) - covariance(b, a)) > 1e-12) throw InvalidArgument("gaussian: covariance not symmetric");
    }
  }
  for (std::size_t a = 0; a < d; ++a) covariance(a, a) += ridge;

  Eigen::MatrixXd c(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = covariance(a, b);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw NumericError("gaussian: covariance is not positive definite after ridge");
  const Eigen::MatrixXd l = llt.matrixL();

  GaussianSpec spec;
  spec.mean = std::move(mean);
  spec.covariance = std::move(covariance);
  spec.ridge = ridge;
  spec.cholesky = Matrix(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b <= a; ++b) spec.cholesky(a, b) = l(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return spec;
}

GaussianSpec fit_gaussian(const Matrix& features, double ridge) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (d == 0 || n < d + 1) throw DegenerateInput("fit_gaussian: need at least dim + 1 rows");
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += features(r, c);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < d; ++a) {
      const double da = features(r, a) - mean[a];
      for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (features(r, b) - mean[b]);
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }
  }
  return make_gaussian(std::move(mean), std::move(cov), ridge);
}

Matrix sample_gaussian(const GaussianSpec& spec, std::size_t count, std::uint64_t seed) {
  const std::size_t d = spec.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(count, d);
  std::vector<double> z(d);
  for (std::size_t s = 0; s < count; ++s) {
    for (double& v : z) v = normal(rng);
    auto row = out.row(s);
    for (std::size_t a = 0; a < d; ++a) {
      double acc = spec.mean[a];
      for (std::size_t b = 0; b <= a; ++b) acc += spec.cholesky(a, b) * z[b];
      row[a] = acc;
    }
  }
  return out;
}

namespace {

struct RepCurve {
  std::vector<double> x, q, i;
};

double mean_of(const std::vector<RepCurve>& reps, std::vector<double> RepCurve::*field, std::size_t b) {
  double s = 0.0;
  for (const auto& r : reps) s += (r.*field)[b];
  return s / static_cast<double>(reps.size());
}

double std_of(const std::vector<RepCurve>& reps, std::vector<double> RepCurve::*field, std::size_t b, double mean) {
  double s = 0.0;
  for (const auto& r : reps) {
    const double d = (r.*field)[b] - mean;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(reps.size() - 1));
}

}  // namespace

ProbeCurve probe_measure(const FusionModel& model, const GaussianSpec& spec, std::size_t measure_index,
                         const ProbeSettings& settings) {
  if (spec.dim() != model.input_dim) throw InvalidArgument("probe: Gaussian dimension does not match model");
  if (measure_index >= model.input_dim) throw InvalidArgument("probe: measure index out of range");
  if (settings.bins == 0 || settings.samples_per_rep % settings.bins != 0 || settings.samples_per_rep < settings.bins) {
    throw InvalidArgument("probe: samples_per_rep must be a positive multiple of bins");
  }
  if (settings.repetitions < 2) throw InvalidArgument("probe: need at least two repetitions");
  if (model.features.normalizer.size() != model.input_dim) throw InvalidArgument("probe: model has no normalizer");

  const bool two_heads = model.features.variant == Variant::standard;
  const std::size_t bins = settings.bins;
  const std::size_t per_bin = settings.samples_per_rep / bins;
  std::vector<RepCurve> reps(settings.repetitions);

  parallel_for(settings.repetitions, settings.jobs, [&](std::size_t rep) {
    const Matrix samples = sample_gaussian(spec, settings.samples_per_rep, mix_seed(settings.seed, rep));
    const Matrix out = forward(model, samples);
    std::vector<std::size_t> order(samples.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return samples(a, measure_index) < samples(b, measure_index);
    });
    RepCurve curve;
    curve.x.assign(bins, 0.0);
    curve.i.assign(bins, 0.0);
    if (two_heads) curve.q.assign(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
      double sx = 0.0, sq = 0.0, si = 0.0;
      for (std::size_t k = b * per_bin; k < (b + 1) * per_bin; ++k) {
        const std::size_t s = order[k];
        sx += model.features.normalizer.invert_one(measure_index, samples(s, measure_index));
        if (two_heads) {
          sq += denormalize_quality(out(s, 0));
          si += denormalize_intelligibility(out(s, 1));
        } else {
          si += denormalize_intelligibility(out(s, 0));
        }
      }
      const double inv = 1.0 / static_cast<double>(per_bin);
      curve.x[b] = sx * inv;
      curve.i[b] = si * inv;
      if (two_heads) curve.q[b] = sq * inv;
    }
    reps[rep] = std::move(curve);
  });

  ProbeCurve result;
  result.measure = model.features.normalizer.names()[measure_index];
  result.repetitions = settings.repetitions;
  result.samples_per_rep = settings.samples_per_rep;
  result.x.resize(bins);
  result.i_mean.resize(bins);
  result.i_std.resize(bins);
  if (two_heads) {
    result.q_mean.resize(bins);
    result.q_std.resize(bins);
  }
  for (std::size_t b = 0; b < bins; ++b) {
    result.x[b] = mean_of(reps, &RepCurve::x, b);
    result.i_mean[b] = mean_of(reps, &RepCurve::i, b);
    result.i_std[b] = std_of(reps, &RepCurve::i, b, result.i_mean[b]);
    if (two_heads) {
      result.q_mean[b] = mean_of(reps, &RepCurve::q, b);
      result.q_std[b] = std_of(reps, &RepCurve::q, b, result.q_mean[b]);
    }
  }
  return result;
}

std::string ProbeCurve::to_csv() const {
  std::string out = "measure,bin_index,x,q_mean,q_std,i_mean,i_std\n";
  const bool has_q = !q_mean.empty();
  for (std::size_t b = 0; b < x.size(); ++b) {
    out += csv::join_row({measure, std::to_string(b), csv::format_double(x[b]),
                          has_q ? csv::format_double(q_mean[b]) : "", has_q ? csv::format_double(q_std[b]) : "",
                          csv::format_double(i_mean[b]), csv::format_double(i_std[b])});
  }
  return out;
}

}  // namespace sqi
