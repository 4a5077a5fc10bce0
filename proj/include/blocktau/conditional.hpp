#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/error.hpp"
#include "blocktau/observation.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blocktau {

enum class KernelFamily { Epanechnikov, Triangular, Uniform, Custom };

// Symmetric, compactly supported univariate kernel with bandwidth h; the
// d-dimensional kernel is the product over coordinates.
class KernelSpec {
 public:
  KernelSpec(KernelFamily family, double bandwidth);
  // Tabulated on u >= 0 (starting at 0, ascending), extended symmetrically
  // and linearly interpolated; zero beyond the last abscissa. The table must
  // integrate to 1 over the real line within 1e-8.
  static KernelSpec custom(std::vector<double> u, std::vector<double> k, double bandwidth);
  static KernelSpec parse(std::string_view family, double bandwidth);

  double operator()(double u) const;
  double bandwidth() const { return h_; }
  KernelFamily family() const { return family_; }
  double support() const;
  // K_h(u) = h^-d prod_j K(u_j / h)
  double scaled(std::span<const double> u) const;

 private:
  KernelFamily family_;
  double h_;
  std::vector<double> u_, k_;
};

struct NwWeights {
  std::vector<double> w;
  double s_n = 0.0;
};

// z_samples is n x d.
NwWeights nw_weights(const Eigen::MatrixXd& z_samples, const Eigen::VectorXd& z,
                     const KernelSpec& kernel);

enum class CktVariant { V1, V2, V3, Rescaled };

struct WeightedConcordance {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  double s_n = 0.0;
  // sum over i1 != i2 of w_i1 w_i2, i.e. 1 - s_n, accumulated alongside v1
  double off_diagonal = 0.0;
  // v1 / (1 - s_n); throws DegenerateWeights when s_n is 1.
  double rescaled() const;
  double get(CktVariant variant) const;
};

// Full double sums over (i1, i2) for weights w (assumed to sum to 1).
WeightedConcordance weighted_concordance(std::span<const double> x, std::span<const double> y,
                                         std::span<const double> w);

double conditional_kendall_pair(const ObservationMatrix& data, ColumnPair cols,
                                const Eigen::MatrixXd& z_samples, const Eigen::VectorXd& z,
                                const KernelSpec& kernel, CktVariant variant);

// Rescaled conditional taus at one conditioning point; only rows with a
// positive weight take part. Not thread-safe.
class ConditionalTauCache {
 public:
  ConditionalTauCache(const ObservationMatrix& data, const NwWeights& weights);

  double get(std::size_t j1, std::size_t j2);
  double s_n() const { return s_n_; }
  std::size_t active_rows() const { return w_.size(); }

 private:
  Eigen::MatrixXd x_;  // active rows only
  std::vector<double> w_;
  double s_n_;
  Eigen::MatrixXd values_;
  std::vector<char> known_;
};

double conditional_block_estimate(ConditionalTauCache& cache, const Partition& partition, int k1,
                                  int k2, const EstimatorScheme& scheme);

struct ConditionalPointResult {
  Eigen::VectorXd z;
  std::optional<KendallMatrix> matrix;
  std::optional<ErrorCode> error;
  std::string message;
};

std::vector<ConditionalPointResult> conditional_kendall_matrix(
    const ObservationMatrix& data, const Partition& partition, const EstimatorScheme& scheme,
    const Eigen::MatrixXd& z_samples, const std::vector<Eigen::VectorXd>& grid,
    const KernelSpec& kernel);

// Points start, start+step, ... up to stop (inclusive within rounding).
std::vector<double> regular_grid(double start, double stop, double step);

}  // namespace blocktau
