#include "blocktau/block_estimators.hpp"

#include "blocktau/concordance.hpp"
#include "blocktau/error.hpp"

#include <algorithm>
#include <cmath>

namespace blocktau {

PairwiseTauCache::PairwiseTauCache(const ObservationMatrix& data, PairwiseTauFn fn)
    : data_(data), fn_(std::move(fn)) {
  if (data.n() < 2) throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  if (!fn_) fn_ = [](std::span<const double> x, std::span<const double> y) {
    return pairwise_kendall(x, y);
  };
  const auto p = static_cast<Eigen::Index>(data.p());
  values_ = Eigen::MatrixXd::Zero(p, p);
  known_.assign(data.p() * data.p(), 0);
}

double PairwiseTauCache::get(std::size_t j1, std::size_t j2) {
  if (j1 == j2) return 1.0;
  if (j1 > j2) std::swap(j1, j2);
  const std::size_t slot = j1 * data_.p() + j2;
  const auto a = static_cast<Eigen::Index>(j1), b = static_cast<Eigen::Index>(j2);
  if (!known_[slot]) {
    values_(a, b) = fn_(data_.column(j1), data_.column(j2));
    known_[slot] = 1;
    ++evaluations_;
  }
  return values_(a, b);
}

double block_estimate(PairwiseTauCache& cache, const Partition& partition, int k1, int k2,
                      const EstimatorScheme& scheme) {
  const auto pairs = block_pair_set(partition, k1, k2, scheme);
  double sum = 0.0;
  for (const auto& [a, b] : pairs) sum += cache.get(a, b);
  return sum / static_cast<double>(pairs.size());
}

KendallMatrix averaged_kendall_matrix(const ObservationMatrix& data, const Partition& partition,
                                      const EstimatorScheme& scheme, PairwiseTauFn fn) {
  if (partition.p() != data.p()) {
    throw Error(ErrorCode::InvalidPartition, "partition size differs from column count");
  }
  scheme.validate(partition);
  PairwiseTauCache cache(data, std::move(fn));
  const auto p = static_cast<Eigen::Index>(data.p());
  KendallMatrix out;
  out.values = Eigen::MatrixXd::Identity(p, p);
  out.scheme = scheme.kind;
  out.partition = partition;
  out.names = data.column_names();
  auto set = [&](std::size_t a, std::size_t b, double v) {
    out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    out.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
  };

  for (int k = 1; k <= partition.K(); ++k) {
    const auto& g = partition.members(k);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j) set(g[i], g[j], cache.get(g[i], g[j]));
  }
  for (int k1 = 1; k1 <= partition.K(); ++k1) {
    for (int k2 = k1 + 1; k2 <= partition.K(); ++k2) {
      const auto& a = partition.members(k1);
      const auto& b = partition.members(k2);
      if (scheme.kind == SchemeKind::Naive) {
        for (std::size_t i : a)
          for (std::size_t j : b) set(i, j, cache.get(i, j));
        continue;
      }
      const double v = block_estimate(cache, partition, k1, k2, scheme);
      for (std::size_t i : a)
        for (std::size_t j : b) set(i, j, v);
    }
  }
  return out;
}

std::vector<BlockResidual> structure_residual(const KendallMatrix& naive,
                                              const Partition& partition) {
  if (static_cast<std::size_t>(naive.values.rows()) != partition.p()) {
    throw Error(ErrorCode::InvalidPartition, "partition size differs from matrix size");
  }
  std::vector<BlockResidual> out;
  for (int k1 = 1; k1 <= partition.K(); ++k1) {
    for (int k2 = k1 + 1; k2 <= partition.K(); ++k2) {
      const auto& a = partition.members(k1);
      const auto& b = partition.members(k2);
      double sum = 0.0;
      for (std::size_t i : a)
        for (std::size_t j : b) sum += naive.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      BlockResidual r{k1, k2, sum / static_cast<double>(a.size() * b.size()), 0.0};
      for (std::size_t i : a)
        for (std::size_t j : b)
          r.max_abs_deviation = std::max(
              r.max_abs_deviation,
              std::abs(naive.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - r.mean));
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace blocktau
