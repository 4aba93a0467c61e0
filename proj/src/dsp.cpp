#include "sqi/dsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "sqi/error.hpp"
#include "sqi/fft.hpp"
#include "sqi/kernels.hpp"

namespace sqi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

double kaiser(double x, double beta) {
  // x in [-1, 1]
  const double r = 1.0 - x * x;
  if (r <= 0.0) return std::cyl_bessel_i(0.0, 0.0) / std::cyl_bessel_i(0.0, beta);
  return std::cyl_bessel_i(0.0, beta * std::sqrt(r)) / std::cyl_bessel_i(0.0, beta);
}

}  // namespace

std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double s = std::sin(kPi * static_cast<double>(n + 1) / static_cast<double>(len + 1));
    w[n] = s * s;
  }
  return w;
}

// ---------------------------------------------------------------------------

ResamplerDesign resampler_design(int from_hz, int to_hz) {
  if (from_hz <= 0 || to_hz <= 0) throw InvalidArgument("resample: rates must be positive");
  const auto g = std::gcd(from_hz, to_hz);
  ResamplerDesign d;
  d.up = static_cast<std::size_t>(to_hz / g);
  d.down = static_cast<std::size_t>(from_hz / g);

  std::size_t taps = kResamplerTapsPerPhase;
  if (d.down > d.up) {
    taps = static_cast<std::size_t>(
        std::ceil(static_cast<double>(kResamplerTapsPerPhase) * static_cast<double>(d.down) / static_cast<double>(d.up)));
  }
  taps += taps % 2;
  d.taps = taps;

  // Kaiser's estimate of the transition width for this beta, as a fraction
  // of the lower sampling rate.
  const double attenuation_db = kResamplerKaiserBeta / 0.1102 + 8.7;
  const double transition =
      (attenuation_db - 8.0) / (2.285 * 2.0 * kPi * static_cast<double>(kResamplerTapsPerPhase - 1));
  const double low = static_cast<double>(std::min(from_hz, to_hz));
  d.cutoff_hz = low * (0.5 - 0.5 * transition);
  return d;
}

namespace {

// table[p][k] weights input sample i0 - half + 1 + k for an output whose
// position is i0 + p / up input samples. Tables are cached per rate pair
// because the Bessel evaluations dominate short conversions.
std::shared_ptr<const std::vector<double>> phase_table(int from_hz, int to_hz, const ResamplerDesign& d) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const std::vector<double>>> cache;
  const auto key = std::make_pair(from_hz, to_hz);
  {
    std::lock_guard lock(mutex);
    if (const auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const std::size_t up = d.up;
  const std::size_t taps = d.taps;
  const std::size_t half = taps / 2;
  const double fcn = d.cutoff_hz / static_cast<double>(from_hz);
  auto table = std::make_shared<std::vector<double>>(up * taps);
  for (std::size_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    double* row = table->data() + p * taps;
    double sum = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      const double tau = frac + static_cast<double>(half) - 1.0 - static_cast<double>(k);
      const double h = 2.0 * fcn * sinc(2.0 * fcn * tau) * kaiser(tau / static_cast<double>(half), kResamplerKaiserBeta);
      row[k] = h;
      sum += h;
    }
    for (std::size_t k = 0; k < taps; ++k) row[k] /= sum;
  }
  std::lock_guard lock(mutex);
  if (cache.size() >= 32) cache.clear();
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& x, int target_hz) {
  if (target_hz <= 0) throw InvalidArgument("resample: target rate must be positive");
  if (target_hz == x.sample_rate_hz()) return x;

  const ResamplerDesign d = resampler_design(x.sample_rate_hz(), target_hz);
  const std::size_t up = d.up;
  const std::size_t down = d.down;
  const std::size_t taps = d.taps;
  const std::size_t half = taps / 2;

  const auto table_ptr = phase_table(x.sample_rate_hz(), target_hz, d);
  const std::vector<double>& table = *table_ptr;

  const auto in = x.samples();
  std::vector<double> padded(in.size() + 2 * taps, 0.0);
  std::copy(in.begin(), in.end(), padded.begin() + static_cast<std::ptrdiff_t>(taps));

  const std::uint64_t n_out = (static_cast<std::uint64_t>(in.size()) * up + down - 1) / down;
  std::vector<double> out(n_out);
  for (std::uint64_t n = 0; n < n_out; ++n) {
    const std::uint64_t pos = n * down;
    const std::uint64_t i0 = pos / up;
    const std::size_t phase = static_cast<std::size_t>(pos % up);
    const std::size_t start = static_cast<std::size_t>(i0) + taps - half + 1;
    out[n] = kernels::dot({padded.data() + start, taps}, {table.data() + phase * taps, taps});
  }
  return AudioBuffer(std::move(out), target_hz);
}

// ---------------------------------------------------------------------------

Spectrogram stft(const AudioBuffer& x, std::size_t frame_len, std::size_t hop, std::size_t fft_len) {
  if (frame_len == 0 || hop == 0) throw InvalidArgument("stft: frame length and hop must be positive");
  if (frame_len > fft_len) throw InvalidArgument("stft: frame length exceeds FFT length");
  if (x.size() < frame_len) throw InvalidArgument("stft: signal shorter than one frame");

  const std::size_t frames = (x.size() - frame_len) / hop + 1;
  const std::size_t bins = fft_len / 2 + 1;
  const auto window = hann_window(frame_len);
  const FftPlan plan(fft_len);
  const auto samples = x.samples();

  Spectrogram spec;
  spec.magnitudes = Matrix(frames, bins);
  spec.frame_len = frame_len;
  spec.hop = hop;
  spec.fft_len = fft_len;
  spec.sample_rate_hz = x.sample_rate_hz();

  std::vector<std::complex<double>> buf(fft_len);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    for (std::size_t n = 0; n < frame_len; ++n) buf[n] = window[n] * samples[t * hop + n];
    plan.forward(buf);
    auto row = spec.magnitudes.row(t);
    for (std::size_t k = 0; k < bins; ++k) row[k] = std::abs(buf[k]);
  }
  return spec;
}

std::vector<std::pair<std::size_t, std::size_t>> third_octave_bin_ranges(std::size_t num_bands, double cf_min_hz,
                                                                         std::size_t fft_len, int sample_rate_hz) {
  const double nyquist = 0.5 * sample_rate_hz;
  if (num_bands == 0) throw InvalidArgument("third_octave_bands: need at least one band");
  if (!(cf_min_hz > 0.0) || cf_min_hz >= nyquist) throw InvalidArgument("third_octave_bands: cf_min must lie below Nyquist");

  const std::size_t bins = fft_len / 2 + 1;
  const double df = static_cast<double>(sample_rate_hz) / static_cast<double>(fft_len);
  auto nearest_bin = [&](double f) {
    // First bin minimizing |k df - f|.
    std::size_t best = 0;
    double best_dist = std::abs(f);
    for (std::size_t k = 1; k < bins; ++k) {
      const double dist = std::abs(static_cast<double>(k) * df - f);
      if (dist < best_dist) {
        best = k;
        best_dist = dist;
      }
    }
    return best;
  };

  std::vector<std::pair<std::size_t, std::size_t>> ranges(num_bands);
  for (std::size_t j = 0; j < num_bands; ++j) {
    const double lo = std::min(cf_min_hz * std::pow(2.0, (2.0 * static_cast<double>(j) - 1.0) / 6.0), nyquist);
    const double hi = std::min(cf_min_hz * std::pow(2.0, (2.0 * static_cast<double>(j) + 1.0) / 6.0), nyquist);
    ranges[j] = {nearest_bin(lo), nearest_bin(hi)};
  }
  return ranges;
}

BandEnergies third_octave_bands(const Spectrogram& spec, std::size_t num_bands, double cf_min_hz) {
  const auto ranges = third_octave_bin_ranges(num_bands, cf_min_hz, spec.fft_len, spec.sample_rate_hz);
  BandEnergies out;
  out.centers_hz.resize(num_bands);
  for (std::size_t j = 0; j < num_bands; ++j) {
    out.centers_hz[j] = cf_min_hz * std::pow(2.0, static_cast<double>(j) / 3.0);
  }
  out.energies = Matrix(spec.frames(), num_bands);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto mags = spec.magnitudes.row(t);
    for (std::size_t j = 0; j < num_bands; ++j) {
      const auto [first, last] = ranges[j];
      double acc = 0.0;
      for (std::size_t k = first; k < last; ++k) acc += mags[k] * mags[k];
      out.energies(t, j) = std::sqrt(acc);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

FrameSelection select_active_frames(const AudioBuffer& clean, double dyn_range_db, std::size_t frame_len,
                                    std::size_t hop) {
  if (frame_len == 0 || hop == 0) throw InvalidArgument("remove_silent_frames: frame length and hop must be positive");
  if (!(dyn_range_db > 0.0)) throw InvalidArgument("remove_silent_frames: dynamic range must be positive");
  if (clean.size() < frame_len) throw DegenerateInput("remove_silent_frames: signal shorter than one frame");

  const auto window = hann_window(frame_len);
  const auto x = clean.samples();
  const std::size_t frames = (x.size() - frame_len) / hop + 1;

  std::vector<double> norms(frames);
  std::vector<double> buf(frame_len);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < frame_len; ++n) buf[n] = window[n] * x[t * hop + n];
    norms[t] = std::sqrt(kernels::scalar::sum_squares(buf.data(), frame_len));
  }
  const double max_norm = *std::max_element(norms.begin(), norms.end());
  if (max_norm == 0.0) throw DegenerateInput("remove_silent_frames: clean signal is entirely silent");

  FrameSelection sel;
  sel.max_energy_db = 20.0 * std::log10(max_norm + kEps);
  sel.kept.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const double energy_db = 20.0 * std::log10(norms[t] + kEps);
    sel.kept[t] = (sel.max_energy_db - dyn_range_db - energy_db) < 0.0;
  }
  return sel;
}

std::pair<AudioBuffer, AudioBuffer> remove_silent_frames(const AudioBuffer& clean, const AudioBuffer& deg,
                                                         double dyn_range_db, std::size_t frame_len,
                                                         std::size_t hop) {
  if (clean.size() != deg.size()) throw InvalidArgument("remove_silent_frames: signal lengths differ");
  if (clean.sample_rate_hz() != deg.sample_rate_hz()) {
    throw InvalidArgument("remove_silent_frames: sample rates differ");
  }
  const FrameSelection sel = select_active_frames(clean, dyn_range_db, frame_len, hop);
  const std::size_t kept = static_cast<std::size_t>(std::count(sel.kept.begin(), sel.kept.end(), true));
  if (kept == 0) throw DegenerateInput("remove_silent_frames: no frame survives");

  const auto window = hann_window(frame_len);
  // Constant overlap-add gain of the window at this hop.
  double cola = 0.0;
  for (std::size_t n = 0; n < hop; ++n) {
    for (std::size_t m = n; m < frame_len; m += hop) cola += window[m];
  }
  cola /= static_cast<double>(hop);

  const std::size_t out_len = (kept - 1) * hop + frame_len;
  std::vector<double> xo(out_len, 0.0);
  std::vector<double> yo(out_len, 0.0);
  const auto xs = clean.samples();
  const auto ys = deg.samples();
  std::size_t slot = 0;
  for (std::size_t t = 0; t < sel.kept.size(); ++t) {
    if (!sel.kept[t]) continue;
    const std::size_t src = t * hop;
    const std::size_t dst = slot * hop;
    for (std::size_t n = 0; n < frame_len; ++n) {
      xo[dst + n] += window[n] * xs[src + n] / cola;
      yo[dst + n] += window[n] * ys[src + n] / cola;
    }
    ++slot;
  }
  return {AudioBuffer(std::move(xo), clean.sample_rate_hz()), AudioBuffer(std::move(yo), deg.sample_rate_hz())};
}

// ---------------------------------------------------------------------------

std::vector<Biquad> butterworth_bandpass(int order, double lo_hz, double hi_hz, int sample_rate_hz) {
  if (order <= 0 || order % 2 != 0) throw InvalidArgument("butterworth_bandpass: order must be positive and even");
  const double fs = sample_rate_hz;
  if (!(lo_hz > 0.0) || !(hi_hz > lo_hz) || hi_hz >= 0.5 * fs) {
    throw InvalidArgument("butterworth_bandpass: need 0 < lo < hi < Nyquist");
  }
  using cd = std::complex<double>;
  const double w1 = 2.0 * fs * std::tan(kPi * lo_hz / fs);
  const double w2 = 2.0 * fs * std::tan(kPi * hi_hz / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  std::vector<Biquad> sections;
  for (int k = 0; k < order; ++k) {
    const cd proto = std::polar(1.0, kPi * (2.0 * k + order + 1.0) / (2.0 * order));
    const cd pb = proto * bw;
    const cd disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    for (const cd s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
      if (s.imag() <= 0.0) continue;  // keep one member of each conjugate pair
      const cd z = (2.0 * fs + s) / (2.0 * fs - s);
      // Zeros at z = +1 and z = -1 per section.
      sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
    }
  }
  if (sections.size() != static_cast<std::size_t>(order)) {
    throw NumericError("butterworth_bandpass: unexpected pole layout");
  }

  // Normalize to unit magnitude at the digital image of the analog center.
  const double wc = 2.0 * std::atan(w0 / (2.0 * fs));
  const cd e1 = std::polar(1.0, -wc);
  const cd e2 = e1 * e1;
  double gain = 1.0;
  for (const auto& s : sections) {
    gain *= std::abs((s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2));
  }
  const double per_section = std::pow(gain, -1.0 / static_cast<double>(sections.size()));
  for (auto& s : sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  return sections;
}

namespace {

void cascade_inplace(std::span<const Biquad> sections, std::vector<double>& x) {
  for (const auto& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x) {
  if (x.empty()) return {};
  const std::size_t n = x.size();
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (4 * sections.size() + 1));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  cascade_inplace(sections, ext);
  std::reverse(ext.begin(), ext.end());
  cascade_inplace(sections, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> analytic_magnitude(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  // Zero-padded to a power of two: faster than an exact-length transform
  // and the padding stops the ends wrapping into each other.
  const std::size_t m = std::bit_ceil(n);
  const auto plan = cached_fft_plan(m);
  std::vector<std::complex<double>> buf(m, {0.0, 0.0});
  std::copy(x.begin(), x.end(), buf.begin());
  plan->forward(buf);
  // One-sided spectrum: keep DC and Nyquist, double the positive bins.
  for (std::size_t k = 1; k < m; ++k) {
    if (k < m / 2) {
      buf[k] *= 2.0;
    } else if (k > m / 2) {
      buf[k] = 0.0;
    }
  }
  plan->inverse(buf);
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(buf[i]);
  return mag;
}

std::vector<double> band_envelope(const AudioBuffer& x, double band_lo_hz, double band_hi_hz, int env_rate_hz) {
  const double nyquist = 0.5 * x.sample_rate_hz();
  if (!(band_lo_hz > 0.0) || !(band_hi_hz > band_lo_hz) || band_hi_hz > nyquist) {
    throw InvalidArgument("band_envelope: need 0 < lo < hi <= Nyquist");
  }
  if (env_rate_hz <= 0 || env_rate_hz > x.sample_rate_hz()) throw InvalidArgument("band_envelope: bad envelope rate");
  // The bilinear prewarp diverges at Nyquist itself.
  const double hi = std::min(band_hi_hz, 0.999 * nyquist);

  const auto sections = butterworth_bandpass(4, band_lo_hz, hi, x.sample_rate_hz());
  const auto filtered = filtfilt(sections, x.samples());
  auto env = analytic_magnitude(filtered);
  const AudioBuffer decimated = resample(AudioBuffer(std::move(env), x.sample_rate_hz()), env_rate_hz);
  std::vector<double> out(decimated.samples().begin(), decimated.samples().end());
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

}  // namespace sqi
