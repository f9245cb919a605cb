#pragma once

#include <cstddef>

// Arithmetic inner loops shared by the similarity, propagation, feature and
// model code. Every kernel has a scalar reference implementation and an AVX2
// variant; the backend is selected once at runtime (cpuid), and can be forced
// with the SUBDYVE_KERNELS environment variable ("scalar" or "avx2") for
// equivalence testing. Vector variants may reassociate sums, so results agree
// with the scalar reference to rounding, not bitwise; a process always uses
// one backend, so repeated runs are bit-identical.
namespace subdyve::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name(Backend b);

// dot(a, b) = sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// out[i] = a*x[i] + b*y[i]
void combine(double a, const double* x, double b, const double* y, double* out,
             std::size_t n);

// sum_i |a[i] - b[i]|
double l1_diff(const double* a, const double* b, std::size_t n);

// sum_i a[i]^2
double l2_sq(const double* a, std::size_t n);

// c = a * b with a (m x k), b (k x n), c (m x n), all row-major. c is
// overwritten.
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);

// Reference (scalar) entry points, exposed for equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void combine(double a, const double* x, double b, const double* y, double* out,
             std::size_t n);
double l1_diff(const double* a, const double* b, std::size_t n);
double l2_sq(const double* a, std::size_t n);
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SUBDYVE_HAVE_AVX2_BUILD 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void combine(double a, const double* x, double b, const double* y, double* out,
             std::size_t n);
double l1_diff(const double* a, const double* b, std::size_t n);
double l2_sq(const double* a, std::size_t n);
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);
}  // namespace avx2
#else
#define SUBDYVE_HAVE_AVX2_BUILD 0
#endif

}  // namespace subdyve::kernels
