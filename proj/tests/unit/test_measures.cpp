#include <cmath>
#include <string>

#include "doctest.h"
#include "sqi/csv.hpp"
#include "sqi/error.hpp"
#include "sqi/measures.hpp"
#include "test_signals.hpp"

using namespace sqi;
using sqi::test::add_noise;
using sqi::test::buffer;
using sqi::test::speech_like;

namespace {

AudioBuffer clean_signal(std::uint64_t seed, int rate = 10000, double seconds = 3.0) {
  return buffer(speech_like(seed, rate, seconds), rate);
}

AudioBuffer noisy(const AudioBuffer& x, std::uint64_t seed, double snr_db) {
  const std::vector<double> v(x.samples().begin(), x.samples().end());
  return buffer(add_noise(v, seed, snr_db), x.sample_rate_hz());
}

AudioBuffer scaled(const AudioBuffer& x, double c) {
  std::vector<double> v(x.samples().begin(), x.samples().end());
  for (double& s : v) s *= c;
  return buffer(std::move(v), x.sample_rate_hz());
}

}  // namespace

TEST_CASE("identity gives one for every measure") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto x = clean_signal(seed);
    CHECK(stoi(x, x).value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(estoi(x, x).value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ncm(x, x).value == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sign flip leaves the magnitude-based measures at one") {
  const auto x = clean_signal(4);
  const auto neg = scaled(x, -1.0);
  CHECK(stoi(x, neg).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(estoi(x, neg).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scale invariance of the degraded signal") {
  const auto x = clean_signal(5);
  const auto y = noisy(x, 5, 5.0);
  for (double c : {0.01, 3.0, 250.0}) {
    const auto yc = scaled(y, c);
    CHECK(std::abs(stoi(x, yc).value - stoi(x, y).value) < 1e-9);
    CHECK(std::abs(estoi(x, yc).value - estoi(x, y).value) < 1e-9);
    CHECK(std::abs(ncm(x, yc).value - ncm(x, y).value) < 1e-9);
  }
}

TEST_CASE("scores fall as white noise rises") {
  const auto x = clean_signal(6);
  double prev_s = 2.0, prev_e = 2.0, prev_n = 2.0;
  for (double snr : {20.0, 10.0, 0.0, -10.0}) {
    const auto y = noisy(x, 6, snr);
    const double s = stoi(x, y).value, e = estoi(x, y).value, n = ncm(x, y).value;
    CHECK(s <= prev_s);
    CHECK(e <= prev_e);
    CHECK(n <= prev_n);
    prev_s = s;
    prev_e = e;
    prev_n = n;
  }
}

TEST_CASE("independent noise scores near zero") {
  const auto x = clean_signal(7);
  double estoi_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    sqi::test::SplitMix rng(seed + 100);
    std::vector<double> v(x.size());
    for (double& s : v) s = rng.gauss();
    const auto noise = buffer(std::move(v), x.sample_rate_hz());
    estoi_sum += estoi(x, noise).value;
    CHECK(std::abs(estoi(x, noise).value) < 0.1);
    CHECK(ncm(x, noise).value < 0.2);
  }
  CHECK(std::abs(estoi_sum / 5.0) < 0.05);
}

TEST_CASE("bit-identical reruns") {
  const auto x = clean_signal(8);
  const auto y = noisy(x, 8, 0.0);
  CHECK(stoi(x, y).value == stoi(x, y).value);
  CHECK(estoi(x, y).value == estoi(x, y).value);
  CHECK(ncm(x, y).value == ncm(x, y).value);
}

TEST_CASE("parity with the published reference implementation") {
  const auto table = csv::read_file(std::string(SQI_TEST_DATA_DIR) + "/stoi_reference.csv");
  REQUIRE(table.rows.size() == 20);
  double worst_stoi = 0.0, worst_estoi = 0.0;
  for (const auto& row : table.rows) {
    const auto seed = static_cast<std::uint64_t>(*csv::parse_double(row[0]));
    const int rate = static_cast<int>(*csv::parse_double(row[1]));
    const double snr = *csv::parse_double(row[2]);
    const auto x = clean_signal(seed, rate);
    const auto y = noisy(x, seed, snr);
    const double ds = std::abs(stoi(x, y).value - *csv::parse_double(row[3]));
    const double de = std::abs(estoi(x, y).value - *csv::parse_double(row[4]));
    MESSAGE("seed " << seed << " rate " << rate << " |dstoi| " << ds << " |destoi| " << de);
    worst_stoi = std::max(worst_stoi, ds);
    worst_estoi = std::max(worst_estoi, de);
  }
  CHECK(worst_stoi < 0.02);
  CHECK(worst_estoi < 0.02);
}

TEST_CASE("input validation") {
  const auto x = clean_signal(9);
  const auto short_x = clean_signal(9, 10000, 1.0);
  CHECK_THROWS_AS(stoi(x, short_x), InvalidArgument);
  const auto other_rate = clean_signal(9, 16000);
  CHECK_THROWS_AS(estoi(x, other_rate), InvalidArgument);
  // 0.3 s cannot hold 30 frames
  const auto tiny = clean_signal(9, 10000, 0.3);
  CHECK_THROWS_AS(stoi(tiny, tiny), DegenerateInput);
  CHECK_THROWS_AS(estoi(tiny, tiny), DegenerateInput);
}

TEST_CASE("ncm band layout") {
  const auto edges = ncm_band_edges();
  CHECK(edges.front()[0] < 150.0);
  CHECK(edges.back()[1] > 4000.0);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    CHECK(edges[b][1] == doctest::Approx(edges[b + 1][0]));
    CHECK(std::sqrt(edges[b][0] * edges[b][1]) < std::sqrt(edges[b + 1][0] * edges[b + 1][1]));
  }
}
