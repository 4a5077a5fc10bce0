#include "blocktau/concordance.hpp"
#include "blocktau/error.hpp"
#include "blocktau/simulation.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace blocktau;

namespace {

double mean_off_tau(const ObservationMatrix& x, const Partition& p) {
  const auto& g1 = p.members(1);
  const auto& g2 = p.members(2);
  double sum = 0;
  for (auto a : g1)
    for (auto b : g2) sum += pairwise_kendall(x.column(a), x.column(b));
  return sum / static_cast<double>(g1.size() * g2.size());
}

ErrorCode config_error(const std::string& text) {
  try {
    parse_experiment_config(text).validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Sampler, BlockTauMatrix) {
  const Partition p({1, 1, 2});
  const auto t = block_tau_matrix(p, 0.3, 0.1);
  EXPECT_EQ(t(0, 0), 1.0);
  EXPECT_EQ(t(0, 1), 0.3);
  EXPECT_EQ(t(1, 2), 0.1);
  EXPECT_EQ(t(2, 0), 0.1);
}

TEST(Sampler, GaussianAndStudentTauTargets) {
  const Partition p({1, 1, 2, 2});
  for (auto family : {EllipticalFamily::gaussian(), EllipticalFamily::student_t(1.0)}) {
    const auto x = sample_block_elliptical(p, 0.3, 0.1, family, 100000, 17);
    EXPECT_NEAR(mean_off_tau(x, p), 0.1, 0.005);
    EXPECT_NEAR(pairwise_kendall(x.column(0), x.column(1)), 0.3, 0.01);
  }
}

TEST(Sampler, IndependentMargins) {
  const Partition p({1, 1, 2, 2});
  const auto x = sample_block_elliptical(p, 0.0, 0.0, EllipticalFamily::gaussian(), 50000, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      EXPECT_NEAR(pairwise_kendall(x.column(i), x.column(j)), 0.0, 0.01);
}

TEST(Sampler, SeededAndRejectsInfeasibleTaus) {
  const Partition p({1, 1, 2, 2});
  const auto a = sample_block_elliptical(p, 0.3, 0.1, EllipticalFamily::gaussian(), 50, 9);
  const auto b = sample_block_elliptical(p, 0.3, 0.1, EllipticalFamily::gaussian(), 50, 9);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_THROW(sample_block_elliptical(p, 0.0, 0.9, EllipticalFamily::gaussian(), 10, 1), Error);
}

TEST(TauOff, Shapes) {
  TauOffFunction lin{TauOffFunction::Kind::Linear, 0.1, 1.0};
  EXPECT_EQ(lin(0.0), 0.0);
  EXPECT_DOUBLE_EQ(lin(0.5), 0.05);
  TauOffFunction cosine{TauOffFunction::Kind::Cosine, 0.1, 2.0};
  EXPECT_DOUBLE_EQ(cosine(0.0), 0.2);
  EXPECT_NEAR(cosine(0.5), 0.1 * (std::cos(0.5 * std::numbers::pi) + 1), 1e-15);
  TauOffFunction c{TauOffFunction::Kind::Constant, 0.2, 1.0};
  EXPECT_EQ(c(0.7), 0.2);
}

TEST(ConditionalSampler, SliceTaus) {
  ConditionalModel m;
  m.membership = {1, 2};
  m.tau_off = {TauOffFunction::Kind::Linear, 0.6, 1.0};
  const auto s = sample_conditional_model(m, 60000, 4);
  std::vector<std::size_t> low, high;
  for (std::size_t i = 0; i < s.x.n(); ++i) {
    if (s.z(static_cast<Eigen::Index>(i), 0) < 0.05) low.push_back(i);
    if (s.z(static_cast<Eigen::Index>(i), 0) > 0.95) high.push_back(i);
  }
  const auto lo = s.x.rows(low), hi = s.x.rows(high);
  EXPECT_NEAR(pairwise_kendall(lo.column(0), lo.column(1)), 0.015, 0.04);
  EXPECT_NEAR(pairwise_kendall(hi.column(0), hi.column(1)), 0.585, 0.04);
  EXPECT_GE(s.z.minCoeff(), 0.0);
  EXPECT_LE(s.z.maxCoeff(), 1.0);
}

TEST(Config, ParsesFields) {
  const auto c = parse_experiment_config(R"({
    "experiment": "conditional_variance",
    "model": {"type": "conditional_gaussian", "tau_diag": 0.3,
              "tau_off_fn": {"type": "cosine", "amplitude": 0.1, "omega": 4}},
    "groups": [3, 5], "n_values": [50, 100],
    "grid": {"start": 0, "stop": 1, "step": 0.25},
    "bandwidths": [0.4], "kernel": "triangular",
    "replications": 7, "seed": 99, "threads": 2, "N": 2,
    "schemes": ["block", "random"]})");
  EXPECT_EQ(c.kind, ExperimentKind::ConditionalVariance);
  EXPECT_EQ(c.model, ExperimentConfig::Model::ConditionalGaussian);
  EXPECT_EQ(c.tau_off_fn.kind, TauOffFunction::Kind::Cosine);
  EXPECT_EQ(c.tau_off_fn.omega, 4.0);
  EXPECT_EQ(c.groups, (std::vector<std::size_t>{3, 5}));
  EXPECT_EQ(c.grid.size(), 5u);
  EXPECT_EQ(c.kernel, "triangular");
  EXPECT_EQ(c.replications, 7u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.threads, 2u);
  EXPECT_EQ(*c.N, 2u);
  EXPECT_EQ(c.schemes, (std::vector<SchemeKind>{SchemeKind::Block, SchemeKind::Random}));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, Errors) {
  EXPECT_EQ(config_error("{"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "nope"})"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "mse_vs_n", "replications": 1})"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "mse_vs_n", "n_values": "x"})"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "mse_vs_n", "model": {"tau_diag": 0.0, "tau_off": 0.9}})"),
            ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "conditional_variance"})"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "mse_vs_block_size"})"), ErrorCode::ConfigError);
  EXPECT_EQ(config_error(R"({"experiment": "mse_vs_n", "schemes": ["row"], "N": 50})"),
            ErrorCode::ConfigError);
}

TEST(Experiment, ComonotoneModelHasZeroMse) {
  ExperimentConfig c;
  c.kind = ExperimentKind::MseVsN;
  c.tau_diag = 1.0;
  c.tau_off = 1.0;
  c.groups = {3, 3};
  c.n_values = {10, 20};
  c.replications = 20;
  c.schemes = {SchemeKind::Naive, SchemeKind::Block, SchemeKind::Row, SchemeKind::Diagonal,
               SchemeKind::Random};
  const auto r = run_experiment(c);
  for (const auto& row : r.rows)
    if (row.statistic == "mse") EXPECT_EQ(row.value, 0.0) << scheme_name(row.scheme);
}

TEST(Experiment, DeterministicOutput) {
  ExperimentConfig c;
  c.kind = ExperimentKind::MseVsBlockSize;
  c.block_sizes = {2, 4};
  c.n_values = {8};
  c.replications = 50;
  c.seed = 5;
  c.schemes = {SchemeKind::Naive, SchemeKind::Block, SchemeKind::Random};
  const auto a = run_experiment(c);
  c.threads = 3;
  const auto b = run_experiment(c);
  EXPECT_EQ(to_long_csv(a), to_long_csv(b));
  EXPECT_EQ(to_summary_json(a), to_summary_json(b));
  c.seed = 6;
  EXPECT_NE(to_long_csv(a), to_long_csv(run_experiment(c)));
}

TEST(Experiment, CsvAndJsonShape) {
  ExperimentConfig c;
  c.kind = ExperimentKind::MseVsN;
  c.groups = {4, 4};
  c.n_values = {10, 20};
  c.replications = 2;
  const auto r = run_experiment(c);
  const std::string csv = to_long_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "scheme,sweep,sweep_value,z,statistic,value,ci_low,ci_high,count");
  // mse per scheme and n, ratio per non-block scheme and n
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1u + 2 * (4 + 3));
  for (const auto& row : r.rows) {
    EXPECT_TRUE(std::isfinite(row.ci_low) && std::isfinite(row.ci_high));
    EXPECT_LE(row.ci_low, row.ci_high);
  }
  const auto j = nlohmann::json::parse(to_summary_json(r));
  EXPECT_EQ(j.at("experiment"), "mse_vs_n");
  EXPECT_EQ(j.at("replications"), 2);
}

TEST(Experiment, ConditionalBlockBeatsDiagonal) {
  ExperimentConfig c;
  c.kind = ExperimentKind::ConditionalVariance;
  c.model = ExperimentConfig::Model::ConditionalGaussian;
  c.groups = {4, 4};
  c.n_values = {60};
  c.grid = {0.3, 0.5, 0.7};
  c.bandwidths = {0.4};
  c.replications = 1500;
  c.schemes = {SchemeKind::Block, SchemeKind::Diagonal, SchemeKind::Naive};
  const auto r = run_experiment(c);
  for (double z : c.grid) {
    double vb = 0, vd = 0, vn = 0;
    for (const auto& row : r.rows) {
      if (row.statistic != "variance" || row.z != z) continue;
      if (row.scheme == SchemeKind::Block) vb = row.value;
      if (row.scheme == SchemeKind::Diagonal) vd = row.value;
      if (row.scheme == SchemeKind::Naive) vn = row.value;
    }
    EXPECT_LT(vb, vd) << z;
    EXPECT_LT(vd, vn) << z;
  }
  EXPECT_EQ(r.excluded_points, 0u);
}

TEST(Experiment, MiseRowsPerBandwidth) {
  ExperimentConfig c;
  c.kind = ExperimentKind::MiseVsBandwidth;
  c.model = ExperimentConfig::Model::ConditionalGaussian;
  c.groups = {2, 2};
  c.n_values = {40};
  c.grid = regular_grid(0.1, 0.9, 0.2);
  c.bandwidths = {0.2, 0.5};
  c.replications = 2;
  c.schemes = {SchemeKind::Block};
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.statistic, "mise");
    EXPECT_GT(row.ci_high - row.ci_low, 0.0);
    EXPECT_TRUE(std::isfinite(row.ci_high));
  }
}
