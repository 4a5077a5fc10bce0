#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/observation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

namespace blocktau {

struct ConcordanceCount {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t pairs = 0;  // n(n-1)/2

  std::int64_t net() const { return concordant - discordant; }
  // The single division shared by every path.
  double tau() const {
    return static_cast<double>(net()) / static_cast<double>(pairs);
  }
};

bool has_ties(std::span<const double> v);

// O(n^2) enumeration; valid for any finite input.
ConcordanceCount concordance_count_brute(std::span<const double> x,
                                         std::span<const double> y);
// O(n log n) inversion count; throws InvalidArgument on tied input.
ConcordanceCount concordance_count_fast(std::span<const double> x,
                                        std::span<const double> y);

// Tau-a; tied inputs and small n go through the brute-force path.
double pairwise_kendall(std::span<const double> x, std::span<const double> y);

int concordance_sign(std::pair<double, double> a, std::pair<double, double> b);

KendallMatrix kendall_matrix(const ObservationMatrix& data);

enum class AveragingSet { Pair, Block, Row, Diagonal };
std::string_view averaging_set_name(AveragingSet set);

struct ConcordanceQuantities {
  double P = 0.0;
  double Q = 0.0;
  std::optional<double> R, S, T, U;
  AveragingSet set = AveragingSet::Pair;
};

// Concordance probability implied by a tau-a value; ties get half credit.
inline double concordance_probability(double tau) { return 0.5 * (1.0 + tau); }

// Unbiased U-statistic estimates. A pair is concordant on two rows with
// credit 1, tied with credit 1/2, discordant with 0, so that P equals
// (1 + tau)/2 on any sample. Overlap of pair2 with pair1 selects R,S (one
// shared column) or T,U (disjoint).
ConcordanceQuantities concordance_quantities(
    const ObservationMatrix& data, ColumnPair pair1,
    std::optional<ColumnPair> pair2 = std::nullopt);

}  // namespace blocktau
