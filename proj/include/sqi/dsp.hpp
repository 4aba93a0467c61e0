#pragma once
// Signal-processing front end shared by the native intelligibility
// measures: resampling, STFT, one-third-octave band analysis, silent
// frame removal and band envelopes.

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "sqi/audio.hpp"
#include "sqi/matrix.hpp"

namespace sqi {

// Symmetric Hann window without zero end points (the MATLAB `hanning`
// convention): w[n] = sin^2(pi (n + 1) / (len + 1)).
std::vector<double> hann_window(std::size_t len);

// ---------------------------------------------------------------------------
// Resampling

// Kaiser windowed-sinc polyphase design parameters.
inline constexpr double kResamplerKaiserBeta = 12.0;
inline constexpr std::size_t kResamplerTapsPerPhase = 64;

struct ResamplerDesign {
  std::size_t up = 1;    // L
  std::size_t down = 1;  // M
  std::size_t taps = 0;  // input samples contributing to one output sample
  double cutoff_hz = 0.0;
};

// Filter design used by resample() for a given rate pair. The kernel holds
// 64 taps per phase measured at the lower of the two rates, so decimation
// widens it in input samples by down/up. The -6 dB cutoff sits half a
// Kaiser transition band below the lower Nyquist frequency.
ResamplerDesign resampler_design(int from_hz, int to_hz);

// Rational-ratio polyphase resampler. Output length is
// ceil(len * to_hz / from_hz); identical rates return the input unchanged.
AudioBuffer resample(const AudioBuffer& x, int target_hz);

// ---------------------------------------------------------------------------
// STFT and bands

struct Spectrogram {
  Matrix magnitudes;  // frames x (fft_len / 2 + 1)
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  std::size_t fft_len = 0;
  int sample_rate_hz = 0;

  std::size_t frames() const { return magnitudes.rows; }
  std::size_t bins() const { return magnitudes.cols; }
};

// Hann-windowed frames zero-padded to fft_len. The frame count is
// floor((len - frame_len) / hop) + 1.
Spectrogram stft(const AudioBuffer& x, std::size_t frame_len, std::size_t hop, std::size_t fft_len);

struct BandEnergies {
  Matrix energies;  // frames x bands
  std::vector<double> centers_hz;
};

// Half-open FFT bin ranges [first, last) of each one-third-octave band.
// Edges center * 2^(+-1/6) snap to the nearest bin; edges above Nyquist
// are truncated at Nyquist.
std::vector<std::pair<std::size_t, std::size_t>> third_octave_bin_ranges(std::size_t num_bands, double cf_min_hz,
                                                                         std::size_t fft_len, int sample_rate_hz);

// energies[t][j] = sqrt(sum over bins k of band j of magnitudes[t][k]^2),
// band centers cf_min * 2^(j/3).
BandEnergies third_octave_bands(const Spectrogram& spec, std::size_t num_bands, double cf_min_hz);

// ---------------------------------------------------------------------------
// Silent frame removal

// Passing this as dyn_range_db keeps every frame.
inline constexpr double kKeepAllFrames = std::numeric_limits<double>::infinity();

struct FrameSelection {
  std::vector<bool> kept;  // one flag per analysis frame
  double max_energy_db = 0.0;
};

// Which Hann-windowed clean frames lie within dyn_range_db of the loudest.
FrameSelection select_active_frames(const AudioBuffer& clean, double dyn_range_db, std::size_t frame_len,
                                    std::size_t hop);

// Drops the frames of both signals whose clean-frame energy is more than
// dyn_range_db below the loudest clean frame, then overlap-adds the kept
// windowed frames, divided by the window's constant overlap-add gain.
std::pair<AudioBuffer, AudioBuffer> remove_silent_frames(const AudioBuffer& clean, const AudioBuffer& deg,
                                                         double dyn_range_db = 40.0, std::size_t frame_len = 256,
                                                         std::size_t hop = 128);

// ---------------------------------------------------------------------------
// Band envelopes

// Biquad b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Digital Butterworth band-pass (bilinear transform with prewarping),
// `order` poles in the low-pass prototype, returned as order second-order
// sections with unit gain at the band center. order must be even.
std::vector<Biquad> butterworth_bandpass(int order, double lo_hz, double hi_hz, int sample_rate_hz);

// Forward-backward filtering through a cascade (zero phase), with odd
// extension at both ends.
std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x);

// Magnitude of the analytic signal computed with the FFT Hilbert method
// on the input zero-padded to a power of two.
std::vector<double> analytic_magnitude(std::span<const double> x);

// 4th-order Butterworth band-pass (zero phase), Hilbert magnitude, then
// low-pass decimation to env_rate_hz through resample().
std::vector<double> band_envelope(const AudioBuffer& x, double band_lo_hz, double band_hi_hz, int env_rate_hz = 25);

}  // namespace sqi
