#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/concordance.hpp"
#include "blocktau/observation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace blocktau {

// Quantities must be the averages matching the scheme: pair values for Naive,
// block averages for Block and Random, row averages for Row, diagonal
// averages for Diagonal. The `set` tag is informational and not enforced.
struct VarianceInput {
  ConcordanceQuantities quantities;
  std::size_t n = 0;
  std::size_t g1 = 0;
  std::size_t g2 = 0;
  std::size_t N = 1;  // ignored for Naive and Block
  SchemeKind scheme = SchemeKind::Naive;
};

struct VarianceResult {
  double value = 0.0;
  double raw = 0.0;      // before clamping
  bool clamped = false;  // raw was negative
};

VarianceResult finite_sample_variance(const VarianceInput& input);

enum class LimitMode { FiniteBlock, LargeBlock };

// Constant V with n Var -> V.
VarianceResult asymptotic_variance(const VarianceInput& input, LimitMode mode);

struct OrderingInput {
  ConcordanceQuantities block;     // needs P, Q, R, S, T, U
  ConcordanceQuantities row;       // needs Q, R, S
  ConcordanceQuantities diagonal;  // needs Q, T, U
  std::size_t n = 0;
  std::size_t g1 = 0;
  std::size_t g2 = 0;
  std::size_t N = 0;  // 0 means min(g1, g2)
  // Slack allowed before an open-problem inequality counts as violated.
  double tolerance = 0.0;
};

struct SchemeVariance {
  SchemeKind scheme;
  double variance;
};

struct OrderingReport {
  bool us_precondition = false;  // U < S < (Q + U) / 2
  bool tr_precondition = false;  // T < R < (P + T) / 2
  bool applicable = false;       // both preconditions hold
  bool finite_order_holds = false;  // Var[block] < Var[diag] < Var[random]
  std::vector<SchemeVariance> variances;  // ascending
  bool open_problem_holds = true;         // U <= S <= Q for every probe
  std::vector<std::string> violations;
};

OrderingReport ordering_report(const OrderingInput& input);

// Exact U-statistic averages over an explicit list of distinct column pairs.
// R, S come from ordered combinations sharing one column, T, U from disjoint
// ones; a class with no combination is left empty. O(n^2 |pairs|).
ConcordanceQuantities averaged_quantities(const ObservationMatrix& data,
                                          const std::vector<ColumnPair>& pairs,
                                          AveragingSet set);

// Averages over the block, row or diagonal pair set of block (k1, k2); row
// and diagonal use the scheme's count for that block.
ConcordanceQuantities averaged_quantities(const ObservationMatrix& data,
                                          const Partition& partition, int k1, int k2,
                                          AveragingSet set, const EstimatorScheme& scheme = {});

struct OracleOptions {
  // Random row pairs used for the two-row terms R and T.
  std::size_t two_row_samples = 4'000'000;
  std::uint64_t seed = 1;
};

// Same averages for large tie-free samples: P, Q, S, U exactly through
// per-row concordance counts (O(n log n) per pair), R and T by an incomplete
// U-statistic over random row pairs. Throws InvalidArgument on ties.
ConcordanceQuantities oracle_quantities(const ObservationMatrix& data,
                                        const std::vector<ColumnPair>& pairs, AveragingSet set,
                                        const OracleOptions& options = {});

std::vector<ColumnPair> averaging_pairs(const Partition& partition, int k1, int k2,
                                        AveragingSet set, const EstimatorScheme& scheme = {});

}  // namespace blocktau
