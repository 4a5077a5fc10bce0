#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/observation.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blocktau {

double tau_to_rho(double tau);
double rho_to_tau(double rho);

struct PdCheck {
  bool positive_definite = false;
  double constraint_value = 0.0;
};

// Two groups of sizes b1, b2 with within-group correlations rho1, rho2 and
// between-group correlation rho3.
PdCheck block_pd_check(int b1, int b2, double rho1, double rho2, double rho3);
Eigen::MatrixXd two_block_correlation(int b1, int b2, double rho1, double rho2, double rho3);

double min_intergroup_rho(int K);

struct CorrelationResult {
  Eigen::MatrixXd correlation;
  bool repaired = false;
  double min_eigenvalue_before = 0.0;
};

// Entrywise sin(pi tau / 2). With repair, eigenvalues are clipped at 1e-10
// and the result rescaled to unit diagonal.
CorrelationResult correlation_from_tau(const Eigen::MatrixXd& tau, bool repair);
CorrelationResult correlation_from_kendall(const KendallMatrix& tau, bool repair);

// Density generator g of an elliptical law in dimension p, evaluated in log
// space so that large p does not underflow.
class GeneratorSpec {
 public:
  enum class Kind { Gaussian, StudentT, Tabulated };

  static GeneratorSpec gaussian(int p);
  static GeneratorSpec student_t(double nu, int p);
  // (u, g(u)) rows with u ascending from 0. Interpolation is monotone cubic;
  // beyond the last u the tail decays exponentially at the rate implied by
  // the final two points. Throws NonNormalizedGenerator if the implied density
  // does not integrate to 1 within 1e-4.
  static GeneratorSpec tabulated(std::vector<double> u, std::vector<double> g, int p);

  Kind kind() const { return kind_; }
  int dimension() const { return p_; }
  double nu() const { return nu_; }
  double log_g(double u) const;
  // Integral of the implied density over R^p.
  double total_mass() const;
  // Tabulated only: projection tail from the table built at construction.
  double tabulated_tail(double s) const;

 private:
  Kind kind_ = Kind::Gaussian;
  int p_ = 1;
  double nu_ = 0.0;
  double log_norm_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> table_;
  std::shared_ptr<const std::vector<double>> knots_;
  std::shared_ptr<const std::function<double(double)>> log_tail_;
  double log_tail_end_ = 0.0;
  double tail_u_ = 0.0, tail_log_g_ = 0.0, tail_rate_ = 0.0;
};

// Tail probability of a standardized one-dimensional projection.
double elliptical_tail(const GeneratorSpec& generator, double s);
// Root of elliptical_tail(q) = alpha, alpha in (0, 0.5].
double elliptical_quantile(const GeneratorSpec& generator, double alpha);

struct EllipticalModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  GeneratorSpec generator = GeneratorSpec::gaussian(1);
};

double delta_elliptic_var(const EllipticalModel& model, const Eigen::VectorXd& delta, double alpha);
// Same formula with a precomputed quantile.
double delta_elliptic_var(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                          const Eigen::VectorXd& delta, double quantile);

// Sigma = D R D with sample standard deviations and R from the tau matrix.
struct FittedModel {
  EllipticalModel model;
  CorrelationResult correlation;
};
FittedModel fit_elliptical_model(const ObservationMatrix& data, const KendallMatrix& tau,
                                 const GeneratorSpec& generator);

struct SilvermanResult {
  double h = 0.0;
  bool degenerate = false;  // Var[xi] = 0
  double xi_variance = 0.0;
  std::vector<double> xi;
};

// h = 1.06 sqrt(var * n^exponent); exponent +1/5 as printed, -1/5 optional.
double silverman_bandwidth(double xi_variance, std::size_t n, double exponent = 0.2);
SilvermanResult silverman_xi_bandwidth(const ObservationMatrix& data, const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& sigma, double exponent = 0.2);

struct BacktestResult {
  std::size_t exceedances = 0;
  double observed_rate = 0.0;
  double expected = 0.0;
  std::size_t length = 0;
  // Historical alpha-quantile loss of the same series.
  double empirical_var = 0.0;
};

BacktestResult backtest_var(std::span<const double> pnl, double var_level, double alpha);

}  // namespace blocktau
