#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/observation.hpp"

#include <functional>
#include <span>
#include <vector>

namespace blocktau {

using PairwiseTauFn =
    std::function<double(std::span<const double>, std::span<const double>)>;

// Memoizes pairwise sample taus of one data set so that several schemes can
// share evaluations. Not thread-safe.
class PairwiseTauCache {
 public:
  explicit PairwiseTauCache(const ObservationMatrix& data, PairwiseTauFn fn = {});

  double get(std::size_t j1, std::size_t j2);
  std::size_t evaluations() const { return evaluations_; }
  const ObservationMatrix& data() const { return data_; }

 private:
  const ObservationMatrix& data_;
  PairwiseTauFn fn_;
  Eigen::MatrixXd values_;
  std::vector<char> known_;
  std::size_t evaluations_ = 0;
};

// Mean of pairwise taus over block_pair_set(k1, k2). For Naive the mean over
// the full block is returned as well; use the matrix for per-entry values.
double block_estimate(PairwiseTauCache& cache, const Partition& partition, int k1, int k2,
                      const EstimatorScheme& scheme);

KendallMatrix averaged_kendall_matrix(const ObservationMatrix& data, const Partition& partition,
                                      const EstimatorScheme& scheme, PairwiseTauFn fn = {});

struct BlockResidual {
  int k1 = 0;
  int k2 = 0;
  double mean = 0.0;
  double max_abs_deviation = 0.0;
};

// One entry per off-diagonal block k1 < k2.
std::vector<BlockResidual> structure_residual(const KendallMatrix& naive,
                                              const Partition& partition);

}  // namespace blocktau
