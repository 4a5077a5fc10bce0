#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/conditional.hpp"
#include "blocktau/observation.hpp"
#include "blocktau/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blocktau {

struct EllipticalFamily {
  enum class Kind { Gaussian, StudentT } kind = Kind::Gaussian;
  double nu = 0.0;  // degrees of freedom for StudentT

  static EllipticalFamily gaussian() { return {}; }
  static EllipticalFamily student_t(double nu) { return {Kind::StudentT, nu}; }
};

// Unit diagonal, tau_diag within groups, tau_off across groups.
Eigen::MatrixXd block_tau_matrix(const Partition& partition, double tau_diag, double tau_off);

// Draws rows X = L e (scaled by sqrt(nu / W) for Student-t) with L L^T the
// correlation sin(pi tau / 2). Reusable across replications.
class EllipticalSampler {
 public:
  EllipticalSampler(const Eigen::MatrixXd& tau, EllipticalFamily family);

  ObservationMatrix sample(std::size_t n, Engine& engine) const;
  const Eigen::MatrixXd& correlation() const { return correlation_; }

 private:
  Eigen::MatrixXd correlation_;
  Eigen::MatrixXd factor_;  // factor_ * factor_^T = correlation
  EllipticalFamily family_;
};

ObservationMatrix sample_block_elliptical(const Partition& partition, double tau_diag,
                                          double tau_off, EllipticalFamily family, std::size_t n,
                                          std::uint64_t seed);

// z -> tau_off(z): constant c, slope * z, or amplitude * (cos(pi/2 * omega * z) + 1).
struct TauOffFunction {
  enum class Kind { Constant, Linear, Cosine } kind = Kind::Linear;
  double value = 0.1;  // constant value, slope or amplitude
  double omega = 1.0;

  double operator()(double z) const;
};

struct ConditionalModel {
  std::vector<int> membership;
  double tau_diag = 0.3;
  TauOffFunction tau_off;
  // X | Z = z has mean mean_slope * z and variance 1 + var_quadratic * z^2.
  double mean_slope = 1.0;
  double var_quadratic = 1.0;
};

struct ConditionalSample {
  Eigen::MatrixXd z;  // n x 1, uniform on [0, 1]
  ObservationMatrix x;
};

ConditionalSample sample_conditional_model(const ConditionalModel& model, std::size_t n,
                                           std::uint64_t seed);

// ---- experiments ----

enum class ExperimentKind { MseVsN, MseVsBlockSize, ConditionalVariance, MiseVsBandwidth };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::MseVsN;
  enum class Model { GaussianBlock, StudentTBlock, ConditionalGaussian } model = Model::GaussianBlock;
  double nu = 1.0;
  double tau_diag = 0.3;
  double tau_off = 0.1;
  TauOffFunction tau_off_fn;
  double mean_slope = 1.0;
  double var_quadratic = 1.0;
  // Sizes of the groups (two groups unless stated); the off-diagonal block
  // studied is between groups 1 and 2.
  std::vector<std::size_t> groups{10, 10};
  std::vector<std::size_t> n_values{100};
  std::vector<std::size_t> block_sizes;
  std::vector<double> bandwidths{0.5};
  std::vector<double> grid{0.5};
  std::string kernel = "epanechnikov";
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::vector<SchemeKind> schemes{SchemeKind::Naive, SchemeKind::Block, SchemeKind::Row,
                                  SchemeKind::Diagonal};
  std::optional<std::size_t> N;  // default min(g1, g2)
  unsigned threads = 1;

  void validate() const;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);

struct ResultRow {
  SchemeKind scheme = SchemeKind::Block;
  std::string sweep;      // "n", "block_size", "bandwidth"
  double sweep_value = 0.0;
  double z = 0.0;         // conditioning point, NaN when not applicable
  std::string statistic;  // "mse", "mise", "variance", "mean", "ratio_to_block"
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t count = 0;  // replications (or covered replications)
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  // Grid points lost to NoLocalData, per (scheme, sweep value).
  std::size_t excluded_points = 0;
  std::size_t total_points = 0;
};

// Per-replication estimates of the off-diagonal block (1,2) for each scheme
// at sample size n; the Naive value is the first pair of the block.
// Layout: estimates[scheme index][replication].
std::vector<std::vector<double>> block_replications(const ExperimentConfig& config,
                                                    const Partition& partition, std::size_t n,
                                                    std::uint64_t stream);

// Conditional counterpart at each grid point: [scheme][replication][grid]; NaN
// where the point has no local data.
std::vector<std::vector<std::vector<double>>> conditional_replications(
    const ExperimentConfig& config, const Partition& partition, std::size_t n, double bandwidth,
    std::uint64_t stream);

ExperimentResult mse_experiment(const ExperimentConfig& config);
ExperimentResult conditional_variance_experiment(const ExperimentConfig& config);
ExperimentResult mise_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string to_long_csv(const ExperimentResult& result);
std::string to_summary_json(const ExperimentResult& result);

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace blocktau
