#pragma once
// Native intrusive intelligibility measures: STOI, ESTOI and NCM.

#include <array>
#include <string_view>

#include "sqi/audio.hpp"

namespace sqi {

enum class NativeMeasure { stoi, estoi, ncm };

std::string_view native_measure_name(NativeMeasure m);

struct MeasureScore {
  NativeMeasure name;
  double value;
};

// Front-end constants of the STOI family (at the 10 kHz operating rate).
namespace stoi_config {
inline constexpr int kSampleRateHz = 10000;
inline constexpr std::size_t kFrameLen = 256;
inline constexpr std::size_t kHop = 128;
inline constexpr std::size_t kFftLen = 512;
inline constexpr std::size_t kNumBands = 15;
inline constexpr double kMinCenterHz = 150.0;
inline constexpr std::size_t kSegmentFrames = 30;
inline constexpr double kDynamicRangeDb = 40.0;
// Lower signal-to-distortion bound used by the STOI clipping stage.
inline constexpr double kBetaDb = -15.0;
}  // namespace stoi_config

namespace ncm_config {
inline constexpr int kSampleRateHz = 10000;
inline constexpr std::size_t kNumBands = 20;
inline constexpr double kLowestCenterHz = 150.0;
inline constexpr double kHighestCenterHz = 4000.0;
inline constexpr int kEnvelopeRateHz = 25;
inline constexpr double kSnrClampDb = 15.0;
}  // namespace ncm_config

// Band edges [lo, hi] of the NCM analysis: centers log-spaced between the
// lowest and highest center, edges at the geometric midpoints.
std::array<std::array<double, 2>, ncm_config::kNumBands> ncm_band_edges();

// Both signals must share length and sampling rate; they are resampled to
// 10 kHz when needed. Silent frames are removed using the clean signal.
// Throws DegenerateInput when fewer than 30 frames survive.
MeasureScore stoi(const AudioBuffer& clean, const AudioBuffer& deg);

// Extended STOI: row then column normalized 15x30 segments, no clipping.
MeasureScore estoi(const AudioBuffer& clean, const AudioBuffer& deg);

// Normalized covariance metric with uniform band weights.
MeasureScore ncm(const AudioBuffer& clean, const AudioBuffer& deg);

}  // namespace sqi
