#include <cmath>
#include <random>

#include "doctest.h"
#include "planted.hpp"
#include "sqi/error.hpp"
#include "sqi/probe.hpp"

using namespace sqi;

namespace {

ProbeSettings small(std::size_t reps, std::size_t samples, std::size_t bins, std::uint64_t seed = 3) {
  ProbeSettings s;
  s.repetitions = reps;
  s.samples_per_rep = samples;
  s.bins = bins;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("fit_gaussian recovers a correlated normal") {
  Matrix cov(3, 3);
  const double c[3][3] = {{0.04, 0.018, -0.01}, {0.018, 0.09, 0.0}, {-0.01, 0.0, 0.0225}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) cov(a, b) = c[a][b];
  const auto truth = make_gaussian({0.2, 0.5, 0.7}, cov, 0.0);
  const auto fitted = fit_gaussian(sample_gaussian(truth, 50000, 1), 0.0);
  for (int a = 0; a < 3; ++a) {
    CHECK(std::abs(fitted.mean[a] - truth.mean[a]) < 0.01);
    for (int b = 0; b < 3; ++b) CHECK(std::abs(fitted.covariance(a, b) - cov(a, b)) < 0.02 * 0.09);
  }
  // Cholesky reproduces the covariance
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += truth.cholesky(a, k) * truth.cholesky(b, k);
      CHECK(s == doctest::Approx(cov(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("degenerate features fall back on the ridge") {
  Matrix rows(20, 4, 0.3);
  const auto g = fit_gaussian(rows, 1e-6);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) CHECK(std::abs(g.covariance(a, b) - (a == b ? 1e-6 : 0.0)) < 1e-20);
  CHECK_THROWS_AS(fit_gaussian(rows, 0.0), NumericError);
  CHECK_THROWS_AS(fit_gaussian(Matrix(4, 4, 0.1)), DegenerateInput);
  Matrix asym(2, 2);
  asym(0, 0) = asym(1, 1) = 1.0;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(make_gaussian({0.0, 0.0}, asym, 0.0), InvalidArgument);
  asym(1, 0) = 0.5;
  CHECK_NOTHROW(make_gaussian({0.0, 0.0}, asym, 0.0));
  CHECK_THROWS_AS(make_gaussian({0.0}, asym, 0.0), InvalidArgument);
}

TEST_CASE("sampling is seeded") {
  const auto g = test::independent_gaussian();
  CHECK(sample_gaussian(g, 100, 5).data == sample_gaussian(g, 100, 5).data);
  CHECK(sample_gaussian(g, 100, 5).data != sample_gaussian(g, 100, 6).data);
}

TEST_CASE("planted linear feature: slope recovered, other features flat") {
  const std::size_t j = 2;
  const auto model = test::planted_linear(j, 1.0, -0.8);
  const auto spec = test::independent_gaussian();
  const auto curve = probe_measure(model, spec, j, small(20, 4000, 100));
  CHECK(curve.measure == "p835_bak");
  CHECK(curve.x.size() == 100);
  for (std::size_t b = 1; b < curve.x.size(); ++b) CHECK(curve.x[b] > curve.x[b - 1]);
  const double qs = test::ols_slope(curve.x, curve.q_mean);
  const double is = test::ols_slope(curve.x, curve.i_mean);
  MESSAGE("slopes " << qs << " " << is);
  CHECK(std::abs(qs - 0.25) < 0.02 * 0.25);
  CHECK(std::abs(is + 0.5) < 0.02 * 0.5);
  // x is reported on the raw scale of the probed measure
  CHECK(curve.x.front() < 4.0);
  CHECK(curve.x.back() > 4.0);

  const auto flat = probe_measure(model, spec, 7, small(20, 4000, 100));
  CHECK(test::range_of(flat.q_mean) < 3.0 * test::mean_of(flat.q_std));
  CHECK(test::range_of(flat.i_mean) < 3.0 * test::mean_of(flat.i_std));
}

TEST_CASE("per-bin spread shrinks as 1/sqrt(samples)") {
  const auto model = test::planted_linear(0, 1.0, 1.0);
  const auto spec = test::independent_gaussian();
  double ratio = 0.0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto a = probe_measure(model, spec, 0, small(20, 2000, 50, trial));
    const auto b = probe_measure(model, spec, 0, small(20, 4000, 50, 100 + trial));
    ratio += test::mean_of(b.q_std) / test::mean_of(a.q_std);
  }
  ratio /= 10.0;
  MESSAGE("std ratio " << ratio);
  CHECK(std::abs(ratio - 1.0 / std::sqrt(2.0)) < 0.2 / std::sqrt(2.0));
}

TEST_CASE("probe output is deterministic and independent of jobs") {
  const auto model = test::planted_linear(4, 1.0, 0.5);
  const auto spec = test::independent_gaussian();
  auto s = small(8, 1000, 20);
  const auto a = probe_measure(model, spec, 4, s).to_csv();
  s.jobs = 3;
  const auto b = probe_measure(model, spec, 4, s).to_csv();
  CHECK(a == b);
  CHECK(a.rfind("measure,bin_index,x,q_mean,q_std,i_mean,i_std\ndnsmos_sig,0,", 0) == 0);
  s.seed = 4;
  CHECK(probe_measure(model, spec, 4, s).to_csv() != a);
}

TEST_CASE("augmented models leave the quality columns empty") {
  auto model = init_model(1, Variant::augmented);
  std::vector<std::string> names = measure_names();
  names.push_back("subj_quality");
  std::vector<double> mins(13, 0.0), maxs(13, 1.0);
  model.features.variant = Variant::augmented;
  model.features.normalizer = Normalizer(names, mins, maxs);
  Matrix cov(13, 13);
  for (std::size_t i = 0; i < 13; ++i) cov(i, i) = 0.01;
  const auto spec = make_gaussian(std::vector<double>(13, 0.5), cov, 0.0);
  const auto curve = probe_measure(model, spec, 12, small(3, 100, 10));
  CHECK(curve.q_mean.empty());
  CHECK(curve.measure == "subj_quality");
  const auto csv = curve.to_csv();
  CHECK(csv.find("\nsubj_quality,0,") != std::string::npos);
  CHECK(csv.find(",,,") != std::string::npos);
}

TEST_CASE("probe argument checks") {
  const auto model = test::planted_linear(0, 1.0, 1.0);
  const auto spec = test::independent_gaussian();
  CHECK_THROWS_AS(probe_measure(model, spec, 0, small(2, 1001, 10)), InvalidArgument);
  CHECK_THROWS_AS(probe_measure(model, spec, 0, small(1, 1000, 10)), InvalidArgument);
  CHECK_THROWS_AS(probe_measure(model, spec, 0, small(2, 1000, 0)), InvalidArgument);
  CHECK_THROWS_AS(probe_measure(model, spec, 12, small(2, 1000, 10)), InvalidArgument);
  Matrix cov(3, 3);
  for (int i = 0; i < 3; ++i) cov(i, i) = 1.0;
  CHECK_THROWS_AS(probe_measure(model, make_gaussian({0, 0, 0}, cov, 0.0), 0, small(2, 1000, 10)), InvalidArgument);
}
