#pragma once

#include <cstddef>
#include <string>

// Hot-loop vector kernels. Scalar reference implementations plus AVX2
// variants selected once at startup (or forced via set_isa / TBP_KERNELS).
// All variants are equivalence-tested against the scalar reference.
namespace tbp::kernels {

enum class Isa { scalar, avx2 };

// ISA chosen by runtime CPU detection, unless overridden.
Isa active_isa();
const char* isa_name(Isa isa);

// Force a specific ISA (throws if unsupported on this CPU). Intended for
// tests and benchmarking; not thread-safe against concurrent kernel calls.
void set_isa(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// out[i] = a[i] + s*z[i]
void add_scaled(const double* a, double s, const double* z, double* out, std::size_t n);

// sum_i a[i]^2
double sumsq(const double* a, std::size_t n);

// sum_i (a[i]-b[i])^2
double sumsq_diff(const double* a, const double* b, std::size_t n);

// sum_i sign[i]*(a[i]-b[i])^2 ; signed variant used by diagonal-signature
// ambient densities.
double signed_sumsq_diff(const double* a, const double* b, const double* sign, std::size_t n);

// out[mu] = dot(A[:,mu], x) for a column-major d x s matrix A.
void gemv_cols(const double* a_colmajor, std::size_t d, std::size_t s,
               const double* x, double* out);

namespace detail {
// Per-ISA entry points, exposed for equivalence tests.
double dot_scalar(const double*, const double*, std::size_t);
void axpy_scalar(double, const double*, double*, std::size_t);
void add_scaled_scalar(const double*, double, const double*, double*, std::size_t);
double sumsq_scalar(const double*, std::size_t);
double sumsq_diff_scalar(const double*, const double*, std::size_t);
double signed_sumsq_diff_scalar(const double*, const double*, const double*, std::size_t);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double*, const double*, std::size_t);
void axpy_avx2(double, const double*, double*, std::size_t);
void add_scaled_avx2(const double*, double, const double*, double*, std::size_t);
double sumsq_avx2(const double*, std::size_t);
double sumsq_diff_avx2(const double*, const double*, std::size_t);
double signed_sumsq_diff_avx2(const double*, const double*, const double*, std::size_t);
#endif

bool cpu_has_avx2();
}  // namespace detail

}  // namespace tbp::kernels
