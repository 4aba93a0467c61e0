#include "sqi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sqi/error.hpp"

namespace sqi {

void SynthConfig::validate() const {
  if (n < 100) throw InvalidArgument("synth: n must be at least 100");
  if (!(noise_std_q >= 0.0) || !(noise_std_i >= 0.0)) throw InvalidArgument("synth: noise std must be nonnegative");
  if (!(shared_latent_weight >= 0.0) || !std::isfinite(shared_latent_weight)) {
    throw InvalidArgument("synth: shared_latent_weight must be nonnegative");
  }
  if (id_prefix.empty()) throw InvalidArgument("synth: id_prefix must not be empty");
  if (with_audio) {
    if (!(audio_duration_s >= 0.5) || audio_duration_s > 60.0) throw InvalidArgument("synth: audio duration must be in [0.5, 60] s");
    if (audio_rate_hz < 8000) throw InvalidArgument("synth: audio rate must be at least 8000 Hz");
  }
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

SynthResult synth_generate(const SynthConfig& config) {
  using namespace synth_model;
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = kFactorCorrelation;
  const double rho_c = std::sqrt(1.0 - rho * rho);

  SynthResult result;
  result.records.reserve(config.n);
  std::size_t clipped_q = 0;
  std::size_t clipped_i = 0;
  for (std::size_t r = 0; r < config.n; ++r) {
    const double f_quality = normal(rng);
    const double f_intel = rho * f_quality + rho_c * normal(rng);
    UtteranceRecord rec;
    rec.utt_id = numbered(config.id_prefix.c_str(), r, 5);
    rec.speaker_id = numbered("spk", r % kSpeakers, 2);
    double s_q = 0.0;
    double s_i = 0.0;
    for (std::size_t k = 0; k < kNumMeasures; ++k) {
      const auto id = all_measures()[k];
      const double factor = is_quality_measure(id) ? f_quality : f_intel;
      const double load = kLoadings[k];
      const double z = load * factor + std::sqrt(1.0 - load * load) * normal(rng);
      const auto range = nominal_range(id);
      const double value = std::clamp(kMeans[k] + kStdDevs[k] * z, range.lo, range.hi);
      rec.measures.set(id, value);
      const double zs = (value - kMeans[k]) / kStdDevs[k];
      s_q += kQualityWeights[k] * zs;
      s_i += kIntelligibilityWeights[k] * zs;
    }
    const double latent = normal(rng);
    const double q = kQualityMin + (kQualityMax - kQualityMin) * sigmoid(s_q + config.shared_latent_weight * latent) +
                     config.noise_std_q * normal(rng);
    const double i = kIntelligibilityMin +
                     (kIntelligibilityMax - kIntelligibilityMin) * sigmoid(s_i + config.shared_latent_weight * latent) +
                     config.noise_std_i * normal(rng);
    rec.subj_quality = std::clamp(q, kQualityMin, kQualityMax);
    rec.subj_intelligibility = std::clamp(i, kIntelligibilityMin, kIntelligibilityMax);
    clipped_q += rec.subj_quality != q;
    clipped_i += rec.subj_intelligibility != i;
    if (config.with_audio) {
      rec.clean_path = std::filesystem::path("wav") / (rec.utt_id + "_clean.wav");
      rec.degraded_path = std::filesystem::path("wav") / (rec.utt_id + "_degraded.wav");
    }
    result.records.push_back(std::move(rec));
  }
  result.clip_rate_quality = static_cast<double>(clipped_q) / static_cast<double>(config.n);
  result.clip_rate_intelligibility = static_cast<double>(clipped_i) / static_cast<double>(config.n);
  return result;
}

double synth_snr_db(double stoi) {
  // 0.3 -> -10 dB, 0.95 -> 20 dB, linear in between
  const double t = std::clamp((stoi - 0.3) / 0.65, 0.0, 1.0);
  return -10.0 + 30.0 * t;
}

std::pair<AudioBuffer, AudioBuffer> synth_audio(const UtteranceRecord& record, std::size_t index,
                                                const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(mix_seed(config.seed, 0x5a17'0000ULL + index));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double fs = config.audio_rate_hz;
  const auto len = static_cast<std::size_t>(std::llround(config.audio_duration_s * fs));
  const double f0 = 100.0 + 120.0 * uni(rng);
  const double syllable_hz = 3.0 + 2.0 * uni(rng);
  const int harmonics = std::max(1, static_cast<int>(std::min(4000.0, 0.45 * fs) / f0));
  std::vector<double> phase(static_cast<std::size_t>(harmonics));
  for (double& p : phase) p = 2.0 * std::numbers::pi * uni(rng);

  std::vector<double> clean(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    const double time = static_cast<double>(t) / fs;
    const double envelope = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * syllable_hz * time));
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      v += std::sin(2.0 * std::numbers::pi * f0 * h * time + phase[static_cast<std::size_t>(h - 1)]) / h;
    }
    clean[t] = envelope * v;
  }
  double peak = 0.0;
  for (double v : clean) peak = std::max(peak, std::abs(v));
  double power = 0.0;
  for (double& v : clean) {
    v *= 0.5 / peak;
    power += v * v;
  }
  power /= static_cast<double>(len);

  const double stoi = record.measures.get(MeasureId::stoi).value_or(0.75);
  const double noise_std = std::sqrt(power / std::pow(10.0, synth_snr_db(stoi) / 10.0));
  std::vector<double> degraded(clean);
  for (double& v : degraded) v += noise_std * normal(rng);
  return {AudioBuffer(std::move(clean), config.audio_rate_hz), AudioBuffer(std::move(degraded), config.audio_rate_hz)};
}

}  // namespace sqi
