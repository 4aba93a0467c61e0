#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sqi {

// Complex DFT of a fixed length. Powers of two use an iterative radix-2
// transform; other lengths go through Bluestein's chirp-z algorithm on a
// padded power-of-two transform. Plans are immutable after construction
// and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  std::size_t size() const { return n_; }

  // X[k] = sum_t x[t] exp(-2 pi i k t / n), in place.
  void forward(std::span<std::complex<double>> data) const;
  // x[t] = (1/n) sum_k X[k] exp(+2 pi i k t / n), in place.
  void inverse(std::span<std::complex<double>> data) const;

 private:
  struct Bluestein;
  void radix2(std::span<std::complex<double>> data, bool inverse) const;
  void transform(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::complex<double>> twiddles_;  // radix-2 only
  std::vector<std::size_t> bitrev_;
  std::unique_ptr<Bluestein> bluestein_;
};

// Process-wide plan cache for repeated transforms of the same length.
// Holds a bounded number of recently used plans.
std::shared_ptr<const FftPlan> cached_fft_plan(std::size_t n);

}  // namespace sqi
