#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace subdyve {

// Deterministic RNG wrapper. All sampling helpers are hand-rolled on top of
// mt19937_64 so that draws are identical across standard libraries; the
// std::*_distribution classes are implementation-defined and must not be used
// anywhere reproducibility matters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is < n / 2^64, negligible here.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : eng_() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller. No spare caching: two uniforms per draw,
  // one output, so the stream position is a simple function of draw count.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

 private:
  std::mt19937_64 eng_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives an independent child stream from a master seed and a path of
// indices (round, molecule, atom, ...). Derivation is a pure function of the
// arguments, so per-task streams are identical no matter how work is
// scheduled across threads.
inline Rng derive_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = detail::splitmix64(master);
  for (std::uint64_t p : path) s = detail::splitmix64(s ^ (p + 0x632be59bd9b4e019ULL));
  return Rng(s);
}

}  // namespace subdyve
