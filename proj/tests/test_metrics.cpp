#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "subdyve/errors.hpp"
#include "subdyve/metrics.hpp"
#include "subdyve/rng.hpp"

using namespace subdyve;
using namespace subdyve::metrics;

namespace {

RankedList make_list(const std::vector<bool>& active_by_rank) {
  RankedList rl;
  for (std::size_t i = 0; i < active_by_rank.size(); ++i) {
    rl.ids.push_back("m" + std::to_string(i));
    rl.active.push_back(active_by_rank[i] ? 1 : 0);
  }
  return rl;
}

std::vector<bool> random_ranking(Rng& rng, std::size_t n, std::size_t n_active) {
  std::vector<bool> v(n, false);
  std::size_t placed = 0;
  while (placed < n_active) {
    const std::size_t pos = rng.below(n);
    if (!v[pos]) {
      v[pos] = true;
      ++placed;
    }
  }
  return v;
}

}  // namespace

TEST_CASE("bedroc extremes at alpha 85") {
  std::vector<bool> best(1000, false);
  for (int i = 0; i < 5; ++i) best[static_cast<std::size_t>(i)] = true;
  CHECK(bedroc(make_list(best), 85.0) >= 0.99);

  std::vector<bool> worst(1000, false);
  for (int i = 995; i < 1000; ++i) worst[static_cast<std::size_t>(i)] = true;
  CHECK(bedroc(make_list(worst), 85.0) <= 0.01);
}

TEST_CASE("bedroc matches the direct-formula oracle on 1000 random rankings") {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 10 + rng.below(41);  // 10..50
    const std::size_t n_act = 1 + rng.below(n - 1);
    if (n_act == n) continue;
    const auto ranking = random_ranking(rng, n, n_act);
    const double alpha = (trial % 2 == 0) ? 85.0 : 20.0;
    const double got = bedroc(make_list(ranking), alpha);
    const double want = oracles::bedroc_direct(ranking, alpha);
    CHECK(std::fabs(got - want) <= 1e-10);
  }
}

TEST_CASE("bedroc rejects degenerate inputs") {
  CHECK_THROWS_AS(bedroc(make_list({true, true}), 85.0), NumericError);
  CHECK_THROWS_AS(bedroc(make_list({false, false}), 85.0), NumericError);
}

TEST_CASE("enrichment factor printed example") {
  // N = 100, n = 10, top-1 active -> EF_1% = 10.
  std::vector<bool> ranking(100, false);
  ranking[0] = true;
  for (int i = 50; i < 59; ++i) ranking[static_cast<std::size_t>(i)] = true;
  CHECK(enrichment_factor(make_list(ranking), 1.0) == doctest::Approx(10.0));
}

TEST_CASE("enrichment factor edge behavior") {
  std::vector<bool> ranking(100, false);
  for (int i = 90; i < 95; ++i) ranking[static_cast<std::size_t>(i)] = true;
  CHECK(enrichment_factor(make_list(ranking), 1.0) == doctest::Approx(0.0));
  // EF at 100% is exactly 1.
  CHECK(enrichment_factor(make_list(ranking), 100.0) == doctest::Approx(1.0));
  // Empty bucket errors.
  std::vector<bool> tiny(10, false);
  tiny[0] = true;
  CHECK_THROWS_AS(enrichment_factor(make_list(tiny), 1.0), NumericError);
}

TEST_CASE("enrichment factor matches oracle on random rankings") {
  Rng rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 20 + rng.below(31);
    const std::size_t n_act = 1 + rng.below(n / 2);
    const auto ranking = random_ranking(rng, n, n_act);
    for (double pct : {10.0, 25.0, 50.0}) {
      const double got = enrichment_factor(make_list(ranking), pct);
      const double want = oracles::enrichment_factor_direct(ranking, pct);
      CHECK(std::fabs(got - want) <= 1e-10);
    }
  }
}

TEST_CASE("auroc printed examples") {
  CHECK(auroc(make_list({true, true, false, false})) == doctest::Approx(1.0));
  CHECK(auroc(make_list({false, false, true, true})) == doctest::Approx(0.0));
  // interleaved A,I,A,I
  CHECK(auroc(make_list({true, false, true, false})) == doctest::Approx(0.75));
}

TEST_CASE("auroc uses midranks for tied scores") {
  // Two actives and two inactives all sharing one score: AUROC must be 0.5.
  RankedList rl = RankedList::from_scores({"a", "b", "c", "d"},
                                          {1.0, 1.0, 1.0, 1.0}, {1, 0, 1, 0});
  CHECK(auroc(rl) == doctest::Approx(0.5));
}

TEST_CASE("auroc matches pair-counting oracle with and without ties") {
  Rng rng(808);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 8 + rng.below(30);
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::vector<std::uint8_t> flags;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("c" + std::to_string(i));
      // Coarse grid scores force ties.
      scores.push_back(static_cast<double>(rng.below(6)));
      const bool act = rng.bernoulli(0.4);
      flags.push_back(act ? 1 : 0);
      has_pos |= act;
      has_neg |= !act;
    }
    if (!has_pos || !has_neg) continue;
    std::vector<bool> act_bool(flags.size());
    for (std::size_t i = 0; i < flags.size(); ++i) act_bool[i] = flags[i] != 0;
    const double got = auroc(RankedList::from_scores(ids, scores, flags));
    const double want = oracles::auroc_pairs(scores, act_bool);
    CHECK(std::fabs(got - want) <= 1e-10);
  }
}

TEST_CASE("ranked list tie break is deterministic by id") {
  RankedList rl = RankedList::from_scores({"z", "a", "m"}, {1.0, 1.0, 2.0}, {0, 1, 0});
  CHECK(rl.ids[0] == "m");
  CHECK(rl.ids[1] == "a");
  CHECK(rl.ids[2] == "z");
}

TEST_CASE("ece trivial cases") {
  // All confident, all wrong.
  std::vector<double> conf(50, 1.0);
  std::vector<std::uint8_t> out(50, 0);
  CHECK(ece(conf, out) == doctest::Approx(1.0));

  // Single bin: |c - a|.
  std::vector<double> conf2(40, 0.7);
  std::vector<std::uint8_t> out2(40, 0);
  for (int i = 0; i < 10; ++i) out2[static_cast<std::size_t>(i)] = 1;  // accuracy 0.25
  CHECK(ece(conf2, out2, 1) == doctest::Approx(0.45));
}

TEST_CASE("ece is small for calibrated synthetic data") {
  Rng rng(31337);
  std::vector<double> conf;
  std::vector<std::uint8_t> out;
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform();
    conf.push_back(p);
    out.push_back(rng.bernoulli(p) ? 1 : 0);
  }
  CHECK(ece(conf, out) <= 0.02);
}
