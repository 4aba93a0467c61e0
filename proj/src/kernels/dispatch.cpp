#include <atomic>
#include <cstdlib>
#include <cstring>

#include "sqi/error.hpp"
#include "sqi/kernels.hpp"

namespace sqi::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("SQI_KERNELS"); env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Isa::scalar;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

bool use_avx2() { return current().load(std::memory_order_relaxed) == Isa::avx2; }

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool avx2_ok = avx2::compiled() && cpu_has_avx2();
  return avx2_ok;
}

Isa active_isa() { return current().load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw InvalidArgument(std::string("kernel variant not supported: ") + isa_name(isa));
  current().store(isa);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  return use_avx2() ? avx2::dot(a.data(), b.data(), a.size()) : scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw InvalidArgument("axpy: length mismatch");
  if (use_avx2()) {
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(alpha, x.data(), y.data(), x.size());
  }
}

double sum_squares(std::span<const double> x) {
  return use_avx2() ? avx2::sum_squares(x.data(), x.size()) : scalar::sum_squares(x.data(), x.size());
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  if (use_avx2()) {
    avx2::gemm_nn(m, n, k, a, b, c);
  } else {
    scalar::gemm_nn(m, n, k, a, b, c);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  if (use_avx2()) {
    avx2::gemm_tn(m, n, k, a, b, c);
  } else {
    scalar::gemm_tn(m, n, k, a, b, c);
  }
}

}  // namespace sqi::kernels
