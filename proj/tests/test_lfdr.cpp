#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "subdyve/errors.hpp"
#include "subdyve/lfdr.hpp"
#include "subdyve/rng.hpp"

using namespace subdyve;
using namespace subdyve::lfdr;

namespace {

std::vector<double> two_group_sample(Rng& rng, std::size_t n, double pi0, double mu1,
                                     std::vector<bool>* null_flags = nullptr) {
  std::vector<double> z;
  z.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool null = rng.uniform() < pi0;
    z.push_back(null ? rng.normal() : rng.normal(mu1, 1.0));
    if (null_flags) null_flags->push_back(null);
  }
  return z;
}

}  // namespace

TEST_CASE("zscore basics") {
  std::vector<double> two{-1.0, 1.0};
  auto r = zscore(two);
  CHECK(r.mu == doctest::Approx(0.0));
  CHECK(r.sigma == doctest::Approx(1.0));
  CHECK(r.z[0] == doctest::Approx(-1.0));
  CHECK(r.z[1] == doctest::Approx(1.0));

  std::vector<double> constant{3.0, 3.0, 3.0};
  CHECK_THROWS_AS(zscore(constant), NumericError);

  // Affine transforms leave z unchanged.
  Rng rng(5);
  std::vector<double> logits;
  for (int i = 0; i < 40; ++i) logits.push_back(rng.normal(2.0, 3.0));
  auto base = zscore(logits);
  std::vector<double> shifted;
  for (double v : logits) shifted.push_back(4.0 * v - 7.0);
  auto after = zscore(shifted);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    CHECK(after.z[i] == doctest::Approx(base.z[i]).epsilon(1e-10));
  }
}

TEST_CASE("fitted density approximates the standard normal") {
  // Sup-norm error on [-2, 2] averaged over 20 seeds must stay below 0.05.
  double mean_sup = 0.0;
  const int n_seeds = 20;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(1000 + static_cast<std::uint64_t>(s));
    std::vector<double> z;
    for (int i = 0; i < 5000; ++i) z.push_back(rng.normal());
    auto model = fit(z);
    double sup = 0.0;
    for (double t = -2.0; t <= 2.0; t += 0.01) {
      sup = std::max(sup, std::fabs(density(model, t) - null_pdf(t)));
    }
    mean_sup += sup;
  }
  mean_sup /= n_seeds;
  CHECK(mean_sup <= 0.05);
}

TEST_CASE("degenerate single-point input fails to fit") {
  std::vector<double> z(100, 0.5);
  CHECK_THROWS_AS(fit(z), NumericError);
}

TEST_CASE("huge ridge drives the fit toward a flat intercept-only density") {
  Rng rng(77);
  std::vector<double> z;
  for (int i = 0; i < 4000; ++i) z.push_back(rng.normal());
  FitOptions opts;
  opts.ridge = 1e6;
  auto model = fit(z, opts);
  for (std::size_t k = 1; k < model.beta.size(); ++k) {
    CHECK(std::fabs(model.beta[k]) <= 1e-2);
  }
}

TEST_CASE("pure-null data gives lfdr near 1 across the bulk") {
  Rng rng(31);
  std::vector<double> z;
  for (int i = 0; i < 8000; ++i) z.push_back(rng.normal());
  FitOptions opts;
  opts.pi0 = 1.0;
  auto model = fit(z, opts);
  std::vector<double> values;
  for (double v : z) values.push_back(evaluate(model, v));
  std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
  CHECK(values[values.size() / 2] >= 0.9);
}

TEST_CASE("two-group mixture matches the closed-form lfdr at z = 3") {
  // pi0 = 0.9, f1 = N(2.5, 1): true lfdr(3) = 0.9*phi(3)/(0.9*phi(3)+0.1*phi(0.5)).
  const double truth = oracles::two_group_lfdr(3.0, 0.9, 2.5);
  CHECK(truth == doctest::Approx(0.1018).epsilon(1e-3));

  Rng rng(2024);
  auto z = two_group_sample(rng, 20000, 0.9, 2.5);
  FitOptions opts;
  opts.pi0 = 0.9;
  auto model = fit(z, opts);
  CHECK(std::fabs(evaluate(model, 3.0) - truth) <= 0.05);
}

TEST_CASE("clipping caps lfdr at exactly 1") {
  Rng rng(12);
  auto z = two_group_sample(rng, 5000, 0.9, 2.5);
  FitOptions opts;
  opts.pi0 = 1.0;  // inflated null share forces clipping near the mode
  auto model = fit(z, opts);
  double max_val = 0.0;
  for (double v : z) max_val = std::max(max_val, evaluate(model, v));
  CHECK(max_val == 1.0);
}

TEST_CASE("select is monotone in tau and matches thresholding") {
  Rng rng(88);
  auto z = two_group_sample(rng, 3000, 0.9, 2.5);
  FitOptions opts;
  opts.pi0 = 0.9;
  auto model = fit(z, opts);
  auto r1 = select(model, z, 0.05);
  auto r2 = select(model, z, 0.2);
  CHECK(r1.size() <= r2.size());
  CHECK(std::includes(r2.begin(), r2.end(), r1.begin(), r1.end()));
  for (std::size_t i : r1) CHECK(evaluate(model, z[i]) <= 0.05);
}

TEST_CASE("empirical FDR stays below tau plus estimation slack") {
  // Monte-Carlo check of the selection rule: mean FDP over 100 trials at
  // tau = 0.1 must stay within 0.13.
  double fdr_sum = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Rng rng(50000 + static_cast<std::uint64_t>(t));
    std::vector<bool> is_null;
    auto z = two_group_sample(rng, 5000, 0.9, 2.5, &is_null);
    FitOptions opts;
    opts.pi0 = 0.9;
    auto model = fit(z, opts);
    auto picked = select(model, z, 0.1);
    if (picked.empty()) continue;
    double false_picks = 0.0;
    for (std::size_t i : picked) false_picks += is_null[i] ? 1.0 : 0.0;
    fdr_sum += false_picks / static_cast<double>(picked.size());
  }
  CHECK(fdr_sum / trials <= 0.13);
}

TEST_CASE("model text round trip reproduces evaluate bit-for-bit") {
  Rng rng(9);
  auto z = two_group_sample(rng, 2000, 0.9, 2.5);
  auto model = fit(z);
  auto back = deserialize(serialize(model));
  for (double v : {-3.0, -1.0, 0.0, 0.7, 2.9, 4.0}) {
    CHECK(evaluate(model, v) == evaluate(back, v));
  }
}
