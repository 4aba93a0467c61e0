#include "sqi/measures.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "sqi/dsp.hpp"
#include "sqi/error.hpp"

namespace sqi {

namespace {

std::pair<AudioBuffer, AudioBuffer> to_operating_rate(const AudioBuffer& clean, const AudioBuffer& deg, int rate) {
  if (clean.sample_rate_hz() != deg.sample_rate_hz()) throw InvalidArgument("clean and degraded sample rates differ");
  if (clean.size() != deg.size()) throw InvalidArgument("clean and degraded lengths differ");
  return {resample(clean, rate), resample(deg, rate)};
}

// Band energies of both signals after silence removal, frames x bands.
std::pair<Matrix, Matrix> stoi_front_end(const AudioBuffer& clean, const AudioBuffer& deg) {
  using namespace stoi_config;
  auto [x10, y10] = to_operating_rate(clean, deg, kSampleRateHz);
  auto [x, y] = remove_silent_frames(x10, y10, kDynamicRangeDb, kFrameLen, kHop);
  if (x.size() < kFrameLen) throw DegenerateInput("too few frames after silence removal");
  auto xb = third_octave_bands(stft(x, kFrameLen, kHop, kFftLen), kNumBands, kMinCenterHz);
  auto yb = third_octave_bands(stft(y, kFrameLen, kHop, kFftLen), kNumBands, kMinCenterHz);
  if (xb.energies.rows < kSegmentFrames) {
    throw DegenerateInput("too few frames after silence removal (" + std::to_string(xb.energies.rows) + " < " +
                          std::to_string(kSegmentFrames) + ")");
  }
  return {std::move(xb.energies), std::move(yb.energies)};
}

// Subtracts the mean and scales to unit norm; a zero-variance vector
// becomes all zeros.
void center_and_normalize(std::span<double> v) {
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double& e : v) {
    e -= mean;
    ss += e * e;
  }
  if (ss == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double inv = 1.0 / std::sqrt(ss);
  for (double& e : v) e *= inv;
}

double centered_correlation(std::span<double> x, std::span<double> y) {
  center_and_normalize(x);
  center_and_normalize(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace

std::string_view native_measure_name(NativeMeasure m) {
  switch (m) {
    case NativeMeasure::stoi:
      return "stoi";
    case NativeMeasure::estoi:
      return "estoi";
    case NativeMeasure::ncm:
      return "ncm";
  }
  return "?";
}

MeasureScore stoi(const AudioBuffer& clean, const AudioBuffer& deg) {
  using namespace stoi_config;
  const auto [xe, ye] = stoi_front_end(clean, deg);
  const std::size_t frames = xe.rows;
  const std::size_t bands = xe.cols;
  const double clip = 1.0 + std::pow(10.0, -kBetaDb / 20.0);

  std::vector<double> xv(kSegmentFrames);
  std::vector<double> yv(kSegmentFrames);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t m = kSegmentFrames; m <= frames; ++m) {
    for (std::size_t j = 0; j < bands; ++j) {
      double xx = 0.0;
      double yy = 0.0;
      for (std::size_t t = 0; t < kSegmentFrames; ++t) {
        xv[t] = xe(m - kSegmentFrames + t, j);
        yv[t] = ye(m - kSegmentFrames + t, j);
        xx += xv[t] * xv[t];
        yy += yv[t] * yv[t];
      }
      double corr = 0.0;
      if (yy > 0.0) {
        const double alpha = std::sqrt(xx / yy);
        for (std::size_t t = 0; t < kSegmentFrames; ++t) yv[t] = std::min(alpha * yv[t], clip * xv[t]);
        corr = centered_correlation(xv, yv);
      }
      total += corr;
      ++count;
    }
  }
  return {NativeMeasure::stoi, total / static_cast<double>(count)};
}

MeasureScore estoi(const AudioBuffer& clean, const AudioBuffer& deg) {
  using namespace stoi_config;
  const auto [xe, ye] = stoi_front_end(clean, deg);
  const std::size_t frames = xe.rows;
  const std::size_t bands = xe.cols;

  // seg[j * N + t]: band j, frame t of the segment.
  std::vector<double> xs(bands * kSegmentFrames);
  std::vector<double> ys(bands * kSegmentFrames);
  std::vector<double> xcol(bands);
  std::vector<double> ycol(bands);
  double total = 0.0;
  std::size_t segments = 0;
  for (std::size_t m = kSegmentFrames; m <= frames; ++m) {
    for (std::size_t j = 0; j < bands; ++j) {
      for (std::size_t t = 0; t < kSegmentFrames; ++t) {
        xs[j * kSegmentFrames + t] = xe(m - kSegmentFrames + t, j);
        ys[j * kSegmentFrames + t] = ye(m - kSegmentFrames + t, j);
      }
      center_and_normalize({xs.data() + j * kSegmentFrames, kSegmentFrames});
      center_and_normalize({ys.data() + j * kSegmentFrames, kSegmentFrames});
    }
    double seg = 0.0;
    for (std::size_t t = 0; t < kSegmentFrames; ++t) {
      for (std::size_t j = 0; j < bands; ++j) {
        xcol[j] = xs[j * kSegmentFrames + t];
        ycol[j] = ys[j * kSegmentFrames + t];
      }
      seg += centered_correlation(xcol, ycol);
    }
    total += seg / static_cast<double>(kSegmentFrames);
    ++segments;
  }
  return {NativeMeasure::estoi, total / static_cast<double>(segments)};
}

std::array<std::array<double, 2>, ncm_config::kNumBands> ncm_band_edges() {
  using namespace ncm_config;
  const double ratio = std::pow(kHighestCenterHz / kLowestCenterHz, 1.0 / static_cast<double>(kNumBands - 1));
  const double half_step = std::sqrt(ratio);
  std::array<std::array<double, 2>, kNumBands> edges{};
  for (std::size_t i = 0; i < kNumBands; ++i) {
    const double center = kLowestCenterHz * std::pow(ratio, static_cast<double>(i));
    edges[i] = {center / half_step, center * half_step};
  }
  return edges;
}

MeasureScore ncm(const AudioBuffer& clean, const AudioBuffer& deg) {
  using namespace ncm_config;
  const auto [x, y] = to_operating_rate(clean, deg, kSampleRateHz);
  const auto edges = ncm_band_edges();
  double ti_sum = 0.0;
  for (const auto& [lo, hi] : edges) {
    auto ex = band_envelope(x, lo, hi, kEnvelopeRateHz);
    auto ey = band_envelope(y, lo, hi, kEnvelopeRateHz);
    if (ex.size() < 2) throw DegenerateInput("ncm: signal too short for envelope analysis");
    const double r = centered_correlation(ex, ey);
    const double r2 = r * r;
    double snr_db;
    if (r2 >= 1.0) {
      snr_db = kSnrClampDb;
    } else if (r2 == 0.0) {
      snr_db = -kSnrClampDb;
    } else {
      snr_db = std::clamp(10.0 * std::log10(r2 / (1.0 - r2)), -kSnrClampDb, kSnrClampDb);
    }
    ti_sum += (snr_db + kSnrClampDb) / (2.0 * kSnrClampDb);
  }
  return {NativeMeasure::ncm, ti_sum / static_cast<double>(edges.size())};
}

}  // namespace sqi
