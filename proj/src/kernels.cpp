// Runtime backend selection for the arithmetic kernels.

#include "subdyve/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace subdyve::kernels {

namespace {

Backend detect_backend() {
  const char* forced = std::getenv("SUBDYVE_KERNELS");
  if (forced != nullptr) {
    if (std::strcmp(forced, "scalar") == 0) return Backend::scalar;
#if SUBDYVE_HAVE_AVX2_BUILD
    if (std::strcmp(forced, "avx2") == 0) return Backend::avx2;
#endif
    // Unknown or unavailable value: fall through to detection.
  }
#if SUBDYVE_HAVE_AVX2_BUILD
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Backend::avx2;
  }
#endif
  return Backend::scalar;
}

Backend g_backend = detect_backend();

}  // namespace

Backend active_backend() { return g_backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

#if SUBDYVE_HAVE_AVX2_BUILD
#define SUBDYVE_DISPATCH(fn, ...) \
  (g_backend == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SUBDYVE_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) {
  return SUBDYVE_DISPATCH(dot, a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  SUBDYVE_DISPATCH(axpy, alpha, x, y, n);
}

void combine(double a, const double* x, double b, const double* y, double* out,
             std::size_t n) {
  SUBDYVE_DISPATCH(combine, a, x, b, y, out, n);
}

double l1_diff(const double* a, const double* b, std::size_t n) {
  return SUBDYVE_DISPATCH(l1_diff, a, b, n);
}

double l2_sq(const double* a, std::size_t n) {
  return SUBDYVE_DISPATCH(l2_sq, a, n);
}

void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n) {
  SUBDYVE_DISPATCH(matmul, a, b, c, m, k, n);
}

#undef SUBDYVE_DISPATCH

}  // namespace subdyve::kernels
