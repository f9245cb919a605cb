#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace subdyve::metrics {

// Ranked screening outcome, rank 1 first. Scores are kept alongside so AUROC
// can apply midranks to tied scores; BEDROC/EF consume the integer ranks,
// which are made unique by breaking score ties on compound id.
struct RankedList {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> active;
  std::vector<double> scores;  // empty means "treat all ranks as distinct"

  std::size_t total() const { return ids.size(); }
  std::size_t n_active() const;

  // Sorts by (score desc, id asc) and attaches active flags.
  static RankedList from_scores(std::vector<std::string> ids,
                                std::vector<double> scores,
                                const std::vector<std::uint8_t>& active_flags);
};

// Early-recognition score with exponential rank weighting; clipped to [0,1].
// Throws NumericError when n = 0 or n = N.
double bedroc(const RankedList& rl, double alpha);

// (n_a / N_x%) / (n / N) with N_x% = floor(x_pct*N/100); throws NumericError
// when the bucket is empty.
double enrichment_factor(const RankedList& rl, double x_pct);

// Rank-sum AUROC with midrank tie handling over the stored scores.
double auroc(const RankedList& rl);

// Expected calibration error over equal-width confidence bins.
double ece(std::span<const double> confidences, std::span<const std::uint8_t> outcomes,
           int bins = 10);

}  // namespace subdyve::metrics
