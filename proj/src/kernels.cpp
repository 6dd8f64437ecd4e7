#include "tbp/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace tbp::kernels {

namespace detail {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace detail

namespace {

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*add_scaled)(const double*, double, const double*, double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*sumsq_diff)(const double*, const double*, std::size_t);
  double (*signed_sumsq_diff)(const double*, const double*, const double*, std::size_t);
};

constexpr Ops kScalarOps = {
    detail::dot_scalar,        detail::axpy_scalar,
    detail::add_scaled_scalar, detail::sumsq_scalar,
    detail::sumsq_diff_scalar, detail::signed_sumsq_diff_scalar,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops = {
    detail::dot_avx2,        detail::axpy_avx2,
    detail::add_scaled_avx2, detail::sumsq_avx2,
    detail::sumsq_diff_avx2, detail::signed_sumsq_diff_avx2,
};
#endif

Ops g_ops = kScalarOps;         // NOLINT
Isa g_isa = Isa::scalar;        // NOLINT
bool g_initialized = false;     // NOLINT

void apply_isa(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      g_ops = kScalarOps;
      break;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (!detail::cpu_has_avx2()) throw std::runtime_error("avx2 kernels unsupported on this CPU");
      g_ops = kAvx2Ops;
      break;
#else
      throw std::runtime_error("avx2 kernels unavailable on this architecture");
#endif
  }
  g_isa = isa;
}

void init_once() {
  if (g_initialized) return;
  g_initialized = true;
  Isa isa = detail::cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("TBP_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") isa = Isa::scalar;
    else if (v == "avx2") isa = Isa::avx2;
    else throw std::runtime_error("TBP_KERNELS must be 'scalar' or 'avx2', got '" + v + "'");
  }
  apply_isa(isa);
}

}  // namespace

Isa active_isa() {
  init_once();
  return g_isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void set_isa(Isa isa) {
  init_once();
  apply_isa(isa);
}

double dot(const double* a, const double* b, std::size_t n) {
  init_once();
  return g_ops.dot(a, b, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  init_once();
  g_ops.axpy(a, x, y, n);
}

void add_scaled(const double* a, double s, const double* z, double* out, std::size_t n) {
  init_once();
  g_ops.add_scaled(a, s, z, out, n);
}

double sumsq(const double* a, std::size_t n) {
  init_once();
  return g_ops.sumsq(a, n);
}

double sumsq_diff(const double* a, const double* b, std::size_t n) {
  init_once();
  return g_ops.sumsq_diff(a, b, n);
}

double signed_sumsq_diff(const double* a, const double* b, const double* sign, std::size_t n) {
  init_once();
  return g_ops.signed_sumsq_diff(a, b, sign, n);
}

void gemv_cols(const double* a_colmajor, std::size_t d, std::size_t s,
               const double* x, double* out) {
  init_once();
  for (std::size_t mu = 0; mu < s; ++mu) out[mu] = g_ops.dot(a_colmajor + mu * d, x, d);
}

}  // namespace tbp::kernels
