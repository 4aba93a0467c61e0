#include "sqi/fft.hpp"

#include <bit>
#include <cmath>
#include <deque>
#include <mutex>
#include <numbers>

#include "sqi/error.hpp"

namespace sqi {

struct FftPlan::Bluestein {
  std::unique_ptr<FftPlan> inner;               // power-of-two length m >= 2n - 1
  std::vector<std::complex<double>> chirp;      // exp(-i pi t^2 / n), t < n
  std::vector<std::complex<double>> kernel_fft;  // FFT of conj chirp, wrapped
};

namespace {

// Plain complex product; operator* goes through the Annex G NaN/Inf
// recovery path, which is several times slower.
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidArgument("FftPlan: length must be positive");
  if (std::has_single_bit(n)) {
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    bitrev_.resize(n);
    const int bits = std::countr_zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    return;
  }

  bluestein_ = std::make_unique<Bluestein>();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  bluestein_->inner = std::make_unique<FftPlan>(m);
  bluestein_->chirp.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    // t^2 mod 2n keeps the angle argument small and exact.
    const auto t2 = static_cast<double>((t * t) % (2 * n));
    const double angle = -std::numbers::pi * t2 / static_cast<double>(n);
    bluestein_->chirp[t] = {std::cos(angle), std::sin(angle)};
  }
  bluestein_->kernel_fft.assign(m, {0.0, 0.0});
  bluestein_->kernel_fft[0] = std::conj(bluestein_->chirp[0]);
  for (std::size_t t = 1; t < n; ++t) {
    bluestein_->kernel_fft[t] = std::conj(bluestein_->chirp[t]);
    bluestein_->kernel_fft[m - t] = std::conj(bluestein_->chirp[t]);
  }
  bluestein_->inner->forward(bluestein_->kernel_fft);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::radix2(std::span<std::complex<double>> data, bool inverse) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddles_[k * stride];
        if (inverse) w = std::conj(w);
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = mul(data[start + k + half], w);
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

void FftPlan::transform(std::span<std::complex<double>> data, bool inverse) const {
  if (data.size() != n_) throw InvalidArgument("FftPlan: buffer length does not match plan");
  if (!bluestein_) {
    radix2(data, inverse);
    return;
  }
  // Inverse via conjugation: ifft(x) * n = conj(fft(conj(x))).
  const auto& b = *bluestein_;
  const std::size_t m = b.inner->size();
  std::vector<std::complex<double>> work(m, {0.0, 0.0});
  for (std::size_t t = 0; t < n_; ++t) {
    const std::complex<double> x = inverse ? std::conj(data[t]) : data[t];
    work[t] = mul(x, b.chirp[t]);
  }
  b.inner->forward(work);
  for (std::size_t k = 0; k < m; ++k) work[k] = mul(work[k], b.kernel_fft[k]);
  b.inner->inverse(work);
  for (std::size_t k = 0; k < n_; ++k) {
    const std::complex<double> y = mul(work[k], b.chirp[k]);
    data[k] = inverse ? std::conj(y) : y;
  }
}

void FftPlan::forward(std::span<std::complex<double>> data) const { transform(data, false); }

void FftPlan::inverse(std::span<std::complex<double>> data) const {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

std::shared_ptr<const FftPlan> cached_fft_plan(std::size_t n) {
  constexpr std::size_t kMaxPlans = 16;
  static std::mutex mutex;
  static std::deque<std::shared_ptr<const FftPlan>> plans;
  {
    std::lock_guard lock(mutex);
    for (const auto& p : plans) {
      if (p->size() == n) return p;
    }
  }
  auto plan = std::make_shared<const FftPlan>(n);
  std::lock_guard lock(mutex);
  plans.push_front(plan);
  if (plans.size() > kMaxPlans) plans.pop_back();
  return plan;
}

}  // namespace sqi
