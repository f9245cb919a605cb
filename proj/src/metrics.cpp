#include "subdyve/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subdyve/errors.hpp"

namespace subdyve::metrics {

std::size_t RankedList::n_active() const {
  std::size_t n = 0;
  for (std::uint8_t a : active) n += a ? 1 : 0;
  return n;
}

RankedList RankedList::from_scores(std::vector<std::string> ids,
                                   std::vector<double> scores,
                                   const std::vector<std::uint8_t>& active_flags) {
  if (ids.size() != scores.size() || ids.size() != active_flags.size()) {
    throw DataError("ranked list inputs have mismatched lengths");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  RankedList rl;
  rl.ids.reserve(ids.size());
  rl.scores.reserve(ids.size());
  rl.active.reserve(ids.size());
  for (std::size_t idx : order) {
    rl.ids.push_back(std::move(ids[idx]));
    rl.scores.push_back(scores[idx]);
    rl.active.push_back(active_flags[idx]);
  }
  return rl;
}

double bedroc(const RankedList& rl, double alpha) {
  const std::size_t N = rl.total();
  const std::size_t n = rl.n_active();
  if (n == 0 || n == N) {
    throw NumericError("bedroc undefined: active count is 0 or equals the list size");
  }
  if (alpha <= 0.0) throw NumericError("bedroc requires alpha > 0");
  const double big_n = static_cast<double>(N);
  double sum = 0.0;
  for (std::size_t r = 0; r < N; ++r) {
    if (rl.active[r]) sum += std::exp(-alpha * static_cast<double>(r + 1) / big_n);
  }
  const double ra = static_cast<double>(n) / big_n;
  // Mean of exp(-alpha*r/N) over a uniformly random rank r in {1..N}.
  const double random_mean =
      (1.0 / big_n) * (1.0 - std::exp(-alpha)) / (std::exp(alpha / big_n) - 1.0);
  const double rie = (sum / static_cast<double>(n)) / random_mean;
  const double factor =
      ra * std::sinh(alpha / 2.0) /
      (std::cosh(alpha / 2.0) - std::cosh(alpha / 2.0 - alpha * ra));
  const double constant = 1.0 / (1.0 - std::exp(alpha * (1.0 - ra)));
  return std::clamp(rie * factor + constant, 0.0, 1.0);
}

double enrichment_factor(const RankedList& rl, double x_pct) {
  const std::size_t N = rl.total();
  const std::size_t n = rl.n_active();
  if (N == 0 || n == 0) throw NumericError("enrichment factor undefined on empty classes");
  const auto bucket =
      static_cast<std::size_t>(std::floor(x_pct * static_cast<double>(N) / 100.0));
  if (bucket == 0) {
    throw NumericError("enrichment bucket is empty at " + std::to_string(x_pct) + "%");
  }
  std::size_t hits = 0;
  for (std::size_t r = 0; r < bucket && r < N; ++r) hits += rl.active[r] ? 1 : 0;
  const double top_rate = static_cast<double>(hits) / static_cast<double>(bucket);
  const double base_rate = static_cast<double>(n) / static_cast<double>(N);
  return top_rate / base_rate;
}

double auroc(const RankedList& rl) {
  const std::size_t N = rl.total();
  const std::size_t n = rl.n_active();
  if (n == 0 || n == N) throw NumericError("auroc undefined: degenerate classes");

  // Midranks over descending-score tie groups; when no scores are stored,
  // every position is its own group.
  std::vector<double> midrank(N);
  std::size_t i = 0;
  while (i < N) {
    std::size_t j = i;
    if (!rl.scores.empty()) {
      while (j + 1 < N && rl.scores[j + 1] == rl.scores[i]) ++j;
    }
    const double mid = 0.5 * static_cast<double>((i + 1) + (j + 1));
    for (std::size_t k = i; k <= j; ++k) midrank[k] = mid;
    i = j + 1;
  }
  // Positions are best-first; flip to bottom-up ranks so the Mann-Whitney
  // rank-sum counts active-over-inactive wins.
  double rank_sum = 0.0;
  for (std::size_t r = 0; r < N; ++r) {
    if (rl.active[r]) rank_sum += static_cast<double>(N) + 1.0 - midrank[r];
  }
  const double n_act = static_cast<double>(n);
  const double n_inact = static_cast<double>(N - n);
  return (rank_sum - n_act * (n_act + 1.0) / 2.0) / (n_act * n_inact);
}

double ece(std::span<const double> confidences, std::span<const std::uint8_t> outcomes,
           int bins) {
  if (confidences.size() != outcomes.size()) {
    throw DataError("ece inputs have mismatched lengths");
  }
  if (confidences.empty()) throw DataError("ece undefined on empty input");
  if (bins < 1) throw ConfigError("ece requires at least one bin");

  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> hit_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    int b = static_cast<int>(confidences[i] * bins);
    b = std::clamp(b, 0, bins - 1);
    conf_sum[static_cast<std::size_t>(b)] += confidences[i];
    hit_sum[static_cast<std::size_t>(b)] += outcomes[i] ? 1.0 : 0.0;
    count[static_cast<std::size_t>(b)]++;
  }
  double e = 0.0;
  const double total = static_cast<double>(confidences.size());
  for (int b = 0; b < bins; ++b) {
    const auto c = count[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    const double mean_conf = conf_sum[static_cast<std::size_t>(b)] / static_cast<double>(c);
    const double accuracy = hit_sum[static_cast<std::size_t>(b)] / static_cast<double>(c);
    e += (static_cast<double>(c) / total) * std::fabs(mean_conf - accuracy);
  }
  return e;
}

}  // namespace subdyve::metrics
