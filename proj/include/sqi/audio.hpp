#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace sqi {

// Mono waveform with its sampling rate. Samples are nominally in [-1, 1].
class AudioBuffer {
 public:
  // Throws InvalidArgument unless samples is non-empty, every sample is
  // finite and the rate is positive.
  AudioBuffer(std::vector<double> samples, int sample_rate_hz);

  std::span<const double> samples() const { return samples_; }
  int sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t size() const { return samples_.size(); }
  double duration_s() const { return static_cast<double>(samples_.size()) / sample_rate_hz_; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_hz_;
};

enum class WavEncoding { pcm16, float32 };

// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit float samples.
// PCM16 is scaled by 1/32768. Anything else is rejected with FormatError.
AudioBuffer read_wav(const std::filesystem::path& path);

// Writes a mono RIFF/WAVE file. PCM16 samples are clipped to [-1, 1).
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::float32);

}  // namespace sqi
