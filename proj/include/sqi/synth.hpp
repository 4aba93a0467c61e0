#pragma once
// Synthetic utterance records with known ground truth, used to exercise
// the whole pipeline without the listening-test corpus.
//
// Measures come from a two-factor Gaussian: the eight quality measures load
// on a quality factor, NCM/STOI/ESTOI/WER (negatively) on an
// intelligibility factor, and the factors correlate at kFactorCorrelation.
// Values are clipped to the nominal measure ranges. With z the measures
// standardized by the generator's own means and deviations,
//
//   quality         = 1 + 4 * sigmoid(a_q . z + w * latent) + N(0, noise_std_q)
//   intelligibility = 10 * sigmoid(a_i . z + w * latent) + N(0, noise_std_i)
//
// where latent ~ N(0, 1) is independent of the measures and w is
// shared_latent_weight. Scores are clipped to [1, 5] and [0, 10].
// The defaults give PCC(quality, intelligibility) close to 0.7.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sqi/audio.hpp"
#include "sqi/dataset.hpp"
#include "sqi/measure_vector.hpp"

namespace sqi {

namespace synth_model {
inline constexpr std::array<double, kNumMeasures> kMeans{2.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 0.6, 0.75, 0.55, 0.3};
inline constexpr std::array<double, kNumMeasures> kStdDevs{0.7, 0.6, 0.6, 0.6, 0.5, 0.5, 0.5, 0.6, 0.15, 0.12, 0.15, 0.15};
inline constexpr std::array<double, kNumMeasures> kLoadings{0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, -0.9};
inline constexpr double kFactorCorrelation = 0.75;
inline constexpr std::array<double, kNumMeasures> kQualityWeights{0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0, 0, 0, 0};
inline constexpr std::array<double, kNumMeasures> kIntelligibilityWeights{0, 0, 0, 0, 0, 0, 0, 0, 0.3, 0.3, 0.3, -0.3};
inline constexpr std::size_t kSpeakers = 40;
}  // namespace synth_model

struct SynthConfig {
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  double noise_std_q = 0.15;
  double noise_std_i = 0.35;
  double shared_latent_weight = 0.15;
  std::string id_prefix = "syn";
  // When set, records carry clean/degraded paths under wav/ and
  // synth_audio() produces the matching signals.
  bool with_audio = false;
  double audio_duration_s = 2.0;
  int audio_rate_hz = 16000;

  // Throws InvalidArgument for n < 100, negative noise or weight, or bad
  // audio settings.
  void validate() const;
};

struct SynthResult {
  std::vector<UtteranceRecord> records;
  // Fraction of scores that hit a bound and were clipped.
  double clip_rate_quality = 0.0;
  double clip_rate_intelligibility = 0.0;
};

// Records are named <prefix>00000, <prefix>00001, ... with speakers
// spk00..spk39 assigned round robin.
SynthResult synth_generate(const SynthConfig& config);

// Clean tone complex with syllabic modulation and a degraded copy with
// white noise whose SNR rises with the record's STOI value.
std::pair<AudioBuffer, AudioBuffer> synth_audio(const UtteranceRecord& record, std::size_t index,
                                                const SynthConfig& config);

// Noise SNR in dB used for a given STOI value.
double synth_snr_db(double stoi);

}  // namespace sqi
