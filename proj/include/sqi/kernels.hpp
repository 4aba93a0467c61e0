#pragma once
// Dense arithmetic kernels with a scalar reference implementation and
// an AVX2/FMA variant chosen at runtime from the host CPU features.
//
// The scalar namespace is the reference: every SIMD variant is tested
// against it for equivalence. Results of the two paths agree to
// rounding, not bit-for-bit (the SIMD path reassociates sums).

#include <cstddef>
#include <span>

namespace sqi::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

// True when the variant was compiled in and the CPU can execute it.
bool isa_supported(Isa isa);

// Variant currently used by the dispatching entry points below.
Isa active_isa();

// Overrides the runtime choice. Throws InvalidArgument when the
// variant is not supported. The SQI_KERNELS=scalar environment
// variable forces the scalar path at startup.
void set_isa(Isa isa);

// Dispatching entry points.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum_squares(std::span<const double> x);
// C[m x n] += A[m x k] * B[k x n], all row-major.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
// C[k x n] += A[m x k]^T * B[m x n], all row-major.
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
}  // namespace avx2

}  // namespace sqi::kernels
