#include "blocktau/simulation.hpp"

#include "blocktau/block_estimators.hpp"
#include "blocktau/elliptical.hpp"
#include "blocktau/error.hpp"
#include "blocktau/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace blocktau {
namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd matrix_root_or_throw(const Eigen::MatrixXd& corr, const std::string& where) {
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // singular but PSD (e.g. comonotone groups): symmetric square root
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw Error(ErrorCode::NotPositiveDefinite, "correlation not positive semidefinite " + where);
  }
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::vector<int> two_groups(std::size_t g1, std::size_t g2) {
  std::vector<int> m(g1, 1);
  m.insert(m.end(), g2, 2);
  return m;
}

std::vector<int> membership_from_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<int> m;
  for (std::size_t k = 0; k < sizes.size(); ++k) m.insert(m.end(), sizes[k], static_cast<int>(k + 1));
  return m;
}

EstimatorScheme make_scheme(const ExperimentConfig& config, SchemeKind kind, std::uint64_t seed) {
  EstimatorScheme s;
  s.kind = kind;
  s.N = config.N;
  s.seed = seed;
  return s;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // sample variance
  double m4 = 0.0;   // fourth central moment
  std::size_t count = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) {
    if (std::isnan(x)) continue;
    m.mean += x;
    ++m.count;
  }
  if (m.count == 0) return m;
  m.mean /= static_cast<double>(m.count);
  double m2 = 0.0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    const double d = (x - m.mean) * (x - m.mean);
    m2 += d;
    m.m4 += d * d;
  }
  m.m4 /= static_cast<double>(m.count);
  m.var = m.count > 1 ? m2 / static_cast<double>(m.count - 1) : 0.0;
  return m;
}

constexpr double kZ95 = 1.959963984540054;

// Mean of v with a normal 95% interval.
ResultRow mean_row(const std::vector<double>& v) {
  const Moments m = moments(v);
  ResultRow r;
  r.value = m.mean;
  const double half = kZ95 * std::sqrt(m.var / static_cast<double>(std::max<std::size_t>(m.count, 1)));
  r.ci_low = m.mean - half;
  r.ci_high = m.mean + half;
  r.count = m.count;
  return r;
}

// Ratio of means a/b over paired replications, delta-method interval.
ResultRow ratio_row(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) ma += a[i], mb += b[i];
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double vaa = 0.0, vbb = 0.0, vab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vaa += (a[i] - ma) * (a[i] - ma);
    vbb += (b[i] - mb) * (b[i] - mb);
    vab += (a[i] - ma) * (b[i] - mb);
  }
  const double d = static_cast<double>(n - 1);
  vaa /= d, vbb /= d, vab /= d;
  ResultRow r;
  r.count = n;
  r.value = mb > 0.0 ? ma / mb : kNaN;
  const double var = (vaa / (mb * mb) + ma * ma * vbb / (mb * mb * mb * mb) -
                      2.0 * ma * vab / (mb * mb * mb)) / static_cast<double>(n);
  const double half = kZ95 * std::sqrt(std::max(var, 0.0));
  r.ci_low = r.value - half;
  r.ci_high = r.value + half;
  return r;
}

ExperimentConfig::Model parse_model(const std::string& s) {
  if (s == "gaussian_block") return ExperimentConfig::Model::GaussianBlock;
  if (s == "student_t_block") return ExperimentConfig::Model::StudentTBlock;
  if (s == "conditional_gaussian") return ExperimentConfig::Model::ConditionalGaussian;
  throw Error(ErrorCode::ConfigError, "unknown model type '" + s + "'");
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "mse_vs_n") return ExperimentKind::MseVsN;
  if (s == "mse_vs_block_size") return ExperimentKind::MseVsBlockSize;
  if (s == "conditional_variance") return ExperimentKind::ConditionalVariance;
  if (s == "mise_vs_bandwidth") return ExperimentKind::MiseVsBandwidth;
  throw Error(ErrorCode::ConfigError, "unknown experiment '" + s + "'");
}

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::MseVsN: return "mse_vs_n";
    case ExperimentKind::MseVsBlockSize: return "mse_vs_block_size";
    case ExperimentKind::ConditionalVariance: return "conditional_variance";
    case ExperimentKind::MiseVsBandwidth: return "mise_vs_bandwidth";
  }
  return "unknown";
}

EllipticalFamily family_of(const ExperimentConfig& c) {
  return c.model == ExperimentConfig::Model::StudentTBlock ? EllipticalFamily::student_t(c.nu)
                                                           : EllipticalFamily::gaussian();
}

ConditionalModel conditional_model_of(const ExperimentConfig& c, const Partition& partition) {
  ConditionalModel m;
  m.membership = partition.membership();
  m.tau_diag = c.tau_diag;
  m.tau_off = c.tau_off_fn;
  m.mean_slope = c.mean_slope;
  m.var_quadratic = c.var_quadratic;
  return m;
}

}  // namespace

Eigen::MatrixXd block_tau_matrix(const Partition& partition, double tau_diag, double tau_off) {
  const auto p = static_cast<Eigen::Index>(partition.p());
  Eigen::MatrixXd t(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j) t(i, j) = 1.0;
      else if (partition.group_of(static_cast<std::size_t>(i)) ==
               partition.group_of(static_cast<std::size_t>(j)))
        t(i, j) = tau_diag;
      else t(i, j) = tau_off;
    }
  return t;
}

EllipticalSampler::EllipticalSampler(const Eigen::MatrixXd& tau, EllipticalFamily family)
    : family_(family) {
  if (family.kind == EllipticalFamily::Kind::StudentT && !(family.nu > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Student-t degrees of freedom must be positive");
  }
  correlation_ = correlation_from_tau(tau, false).correlation;
  factor_ = matrix_root_or_throw(correlation_, "for the requested taus");
}

ObservationMatrix EllipticalSampler::sample(std::size_t n, Engine& engine) const {
  const auto p = factor_.rows();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd e(p, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < e.cols(); ++i)
    for (Eigen::Index j = 0; j < p; ++j) e(j, i) = normal(engine);
  Eigen::MatrixXd x = (factor_ * e).transpose();
  if (family_.kind == EllipticalFamily::Kind::StudentT) {
    std::chi_squared_distribution<double> chi(family_.nu);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) *= std::sqrt(family_.nu / chi(engine));
  }
  return ObservationMatrix(std::move(x));
}

ObservationMatrix sample_block_elliptical(const Partition& partition, double tau_diag,
                                          double tau_off, EllipticalFamily family, std::size_t n,
                                          std::uint64_t seed) {
  EllipticalSampler sampler(block_tau_matrix(partition, tau_diag, tau_off), family);
  Engine engine(derive_seed(seed, 0));
  return sampler.sample(n, engine);
}

double TauOffFunction::operator()(double z) const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Linear: return value * z;
    case Kind::Cosine: return value * (std::cos(0.5 * std::numbers::pi * omega * z) + 1.0);
  }
  return value;
}

ConditionalSample sample_conditional_model(const ConditionalModel& model, std::size_t n,
                                           std::uint64_t seed) {
  const Partition partition(model.membership);
  const auto p = static_cast<Eigen::Index>(partition.p());
  Engine engine(derive_seed(seed, 0));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  ConditionalSample out;
  out.z.resize(static_cast<Eigen::Index>(n), 1);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd e(p);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double z = unif(engine);
    out.z(i, 0) = z;
    const Eigen::MatrixXd corr =
        correlation_from_tau(block_tau_matrix(partition, model.tau_diag, model.tau_off(z)), false)
            .correlation;
    const Eigen::MatrixXd L = matrix_root_or_throw(corr, "at z = " + std::to_string(z));
    for (Eigen::Index j = 0; j < p; ++j) e(j) = normal(engine);
    const double scale = std::sqrt(1.0 + model.var_quadratic * z * z);
    x.row(i) = (model.mean_slope * z + scale * (L * e).array()).matrix().transpose();
  }
  out.x = ObservationMatrix(std::move(x));
  return out;
}

void ExperimentConfig::validate() const {
  if (replications < 2) throw Error(ErrorCode::ConfigError, "replications must be at least 2");
  if (schemes.empty()) throw Error(ErrorCode::ConfigError, "no schemes requested");
  const bool conditional = model == Model::ConditionalGaussian;
  const bool wants_conditional =
      kind == ExperimentKind::ConditionalVariance || kind == ExperimentKind::MiseVsBandwidth;
  if (conditional != wants_conditional) {
    throw Error(ErrorCode::ConfigError, "experiment kind and model type do not match");
  }
  if (model == Model::StudentTBlock && !(nu > 0.0)) {
    throw Error(ErrorCode::ConfigError, "Student-t degrees of freedom must be positive");
  }
  std::vector<std::vector<std::size_t>> layouts;
  if (kind == ExperimentKind::MseVsBlockSize) {
    if (block_sizes.empty()) throw Error(ErrorCode::ConfigError, "block_sizes is empty");
    for (std::size_t b : block_sizes) layouts.push_back({b, b});
  } else {
    layouts.push_back(groups);
  }
  for (const auto& g : layouts) {
    if (g.size() < 2 || std::any_of(g.begin(), g.end(), [](std::size_t s) { return s == 0; })) {
      throw Error(ErrorCode::ConfigError, "need at least two non-empty groups");
    }
  }
  if (n_values.empty()) throw Error(ErrorCode::ConfigError, "n_values is empty");
  for (std::size_t n : n_values) {
    if (n < 2) throw Error(ErrorCode::ConfigError, "sample sizes must be at least 2");
  }
  if (wants_conditional) {
    if (bandwidths.empty() || grid.empty()) {
      throw Error(ErrorCode::ConfigError, "bandwidths and grid must be non-empty");
    }
    for (double h : bandwidths) {
      if (!(h > 0.0)) throw Error(ErrorCode::ConfigError, "bandwidths must be positive");
    }
    (void)KernelSpec::parse(kernel, 1.0);
  }
  // Positive definiteness after tau_to_rho, checked by eigenvalues.
  auto check = [&](const std::vector<std::size_t>& g, double off) {
    const Partition part(membership_from_sizes(g));
    const auto corr = correlation_from_tau(block_tau_matrix(part, tau_diag, off), false);
    if (!(corr.min_eigenvalue_before >= -1e-12)) {
      throw Error(ErrorCode::ConfigError,
                  "taus give a correlation that is not positive semidefinite (min eigenvalue " +
                      std::to_string(corr.min_eigenvalue_before) + ")");
    }
  };
  try {
    for (const auto& g : layouts) {
      if (conditional) {
        for (int i = 0; i <= 100; ++i) check(g, tau_off_fn(i / 100.0));
      } else {
        check(g, tau_off);
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
  try {
    for (const auto& g : layouts) {
      const Partition part(membership_from_sizes(g));
      for (SchemeKind s : schemes) make_scheme(*this, s, 0).validate(part);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.kind = parse_kind(j.at("experiment").get<std::string>());
    if (j.contains("model")) {
      const auto& m = j.at("model");
      c.model = parse_model(m.value("type", "gaussian_block"));
      c.nu = m.value("nu", c.nu);
      c.tau_diag = m.value("tau_diag", c.tau_diag);
      c.tau_off = m.value("tau_off", c.tau_off);
      c.mean_slope = m.value("mean_slope", c.mean_slope);
      c.var_quadratic = m.value("var_quadratic", c.var_quadratic);
      if (m.contains("tau_off_fn")) {
        const auto& f = m.at("tau_off_fn");
        const std::string type = f.value("type", "linear");
        if (type == "linear") {
          c.tau_off_fn = {TauOffFunction::Kind::Linear, f.value("slope", 0.1), 1.0};
        } else if (type == "cosine") {
          c.tau_off_fn = {TauOffFunction::Kind::Cosine, f.value("amplitude", 0.1), f.value("omega", 1.0)};
        } else if (type == "constant") {
          c.tau_off_fn = {TauOffFunction::Kind::Constant, f.value("value", 0.1), 1.0};
        } else {
          throw Error(ErrorCode::ConfigError, "unknown tau_off_fn type '" + type + "'");
        }
      }
    }
    if (j.contains("groups")) c.groups = j.at("groups").get<std::vector<std::size_t>>();
    if (j.contains("n_values")) c.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    if (j.contains("block_sizes")) c.block_sizes = j.at("block_sizes").get<std::vector<std::size_t>>();
    if (j.contains("bandwidths")) c.bandwidths = j.at("bandwidths").get<std::vector<double>>();
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.is_array()) c.grid = g.get<std::vector<double>>();
      else c.grid = regular_grid(g.at("start").get<double>(), g.at("stop").get<double>(), g.at("step").get<double>());
    }
    c.kernel = j.value("kernel", c.kernel);
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("N")) c.N = j.at("N").get<std::size_t>();
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad config field: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
  c.validate();
  return c;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::vector<double>> block_replications(const ExperimentConfig& config,
                                                    const Partition& partition, std::size_t n,
                                                    std::uint64_t stream) {
  EllipticalSampler sampler(block_tau_matrix(partition, config.tau_diag, config.tau_off),
                            family_of(config));
  const std::size_t M = config.replications;
  std::vector<std::vector<double>> out(config.schemes.size(), std::vector<double>(M));
  const ColumnPair first{partition.members(1).front(), partition.members(2).front()};
  parallel_for(M, config.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(config.seed, stream, r);
    Engine engine(seed);
    const ObservationMatrix data = sampler.sample(n, engine);
    PairwiseTauCache cache(data);
    for (std::size_t s = 0; s < config.schemes.size(); ++s) {
      const SchemeKind kind = config.schemes[s];
      out[s][r] = kind == SchemeKind::Naive
                      ? cache.get(first.first, first.second)
                      : block_estimate(cache, partition, 1, 2, make_scheme(config, kind, seed));
    }
  });
  return out;
}

std::vector<std::vector<std::vector<double>>> conditional_replications(
    const ExperimentConfig& config, const Partition& partition, std::size_t n, double bandwidth,
    std::uint64_t stream) {
  const ConditionalModel model = conditional_model_of(config, partition);
  const KernelSpec kernel = KernelSpec::parse(config.kernel, bandwidth);
  const std::size_t M = config.replications;
  const std::size_t G = config.grid.size();
  std::vector<std::vector<std::vector<double>>> out(
      config.schemes.size(), std::vector<std::vector<double>>(M, std::vector<double>(G, kNaN)));
  const ColumnPair first{partition.members(1).front(), partition.members(2).front()};
  parallel_for(M, config.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(config.seed, stream, r);
    const ConditionalSample sample = sample_conditional_model(model, n, seed);
    for (std::size_t g = 0; g < G; ++g) {
      Eigen::VectorXd z(1);
      z(0) = config.grid[g];
      try {
        const NwWeights w = nw_weights(sample.z, z, kernel);
        ConditionalTauCache cache(sample.x, w);
        for (std::size_t s = 0; s < config.schemes.size(); ++s) {
          const SchemeKind kind = config.schemes[s];
          out[s][r][g] = kind == SchemeKind::Naive
                             ? cache.get(first.first, first.second)
                             : conditional_block_estimate(cache, partition, 1, 2,
                                                          make_scheme(config, kind, seed));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoLocalData && e.code() != ErrorCode::DegenerateWeights) throw;
      }
    }
  });
  return out;
}

ExperimentResult mse_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.kind != ExperimentKind::MseVsN && config.kind != ExperimentKind::MseVsBlockSize) {
    throw Error(ErrorCode::ConfigError, "mse_experiment needs mse_vs_n or mse_vs_block_size");
  }
  ExperimentResult result;
  result.config = config;
  const bool by_n = config.kind == ExperimentKind::MseVsN;
  const std::size_t points = by_n ? config.n_values.size() : config.block_sizes.size();
  const auto block_index = std::find(config.schemes.begin(), config.schemes.end(), SchemeKind::Block);
  for (std::size_t i = 0; i < points; ++i) {
    const std::size_t n = by_n ? config.n_values[i] : config.n_values.front();
    const Partition partition(by_n ? membership_from_sizes(config.groups)
                                   : two_groups(config.block_sizes[i], config.block_sizes[i]));
    const double sweep = by_n ? static_cast<double>(n) : static_cast<double>(config.block_sizes[i]);
    const auto est = block_replications(config, partition, n, i);
    std::vector<std::vector<double>> sq(est.size());
    for (std::size_t s = 0; s < est.size(); ++s) {
      for (double v : est[s]) sq[s].push_back((v - config.tau_off) * (v - config.tau_off));
      ResultRow row = mean_row(sq[s]);
      row.scheme = config.schemes[s];
      row.sweep = by_n ? "n" : "block_size";
      row.sweep_value = sweep;
      row.z = kNaN;
      row.statistic = "mse";
      result.rows.push_back(row);
    }
    if (block_index != config.schemes.end()) {
      const auto b = static_cast<std::size_t>(block_index - config.schemes.begin());
      for (std::size_t s = 0; s < est.size(); ++s) {
        if (s == b) continue;
        ResultRow row = ratio_row(sq[s], sq[b]);
        row.scheme = config.schemes[s];
        row.sweep = by_n ? "n" : "block_size";
        row.sweep_value = sweep;
        row.z = kNaN;
        row.statistic = "ratio_to_block";
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

ExperimentResult conditional_variance_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  const Partition partition(membership_from_sizes(config.groups));
  const double h = config.bandwidths.front();
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    const std::size_t n = config.n_values[i];
    const auto est = conditional_replications(config, partition, n, h, i);
    for (std::size_t s = 0; s < est.size(); ++s) {
      for (std::size_t g = 0; g < config.grid.size(); ++g) {
        std::vector<double> v;
        for (const auto& rep : est[s]) v.push_back(rep[g]);
        const Moments m = moments(v);
        result.total_points += v.size();
        result.excluded_points += v.size() - m.count;
        ResultRow mean = mean_row(v);
        mean.scheme = config.schemes[s];
        mean.sweep = "n";
        mean.sweep_value = static_cast<double>(n);
        mean.z = config.grid[g];
        mean.statistic = "mean";
        result.rows.push_back(mean);
        ResultRow var = mean;
        var.statistic = "variance";
        var.value = m.var;
        const double se = std::sqrt(std::max(m.m4 - m.var * m.var, 0.0) /
                                    static_cast<double>(std::max<std::size_t>(m.count, 1)));
        var.ci_low = m.var - kZ95 * se;
        var.ci_high = m.var + kZ95 * se;
        result.rows.push_back(var);
      }
    }
  }
  return result;
}

ExperimentResult mise_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.kind != ExperimentKind::MiseVsBandwidth) {
    throw Error(ErrorCode::ConfigError, "mise_experiment needs mise_vs_bandwidth");
  }
  ExperimentResult result;
  result.config = config;
  const Partition partition(membership_from_sizes(config.groups));
  const std::size_t n = config.n_values.front();
  for (std::size_t b = 0; b < config.bandwidths.size(); ++b) {
    const double h = config.bandwidths[b];
    const auto est = conditional_replications(config, partition, n, h, b);
    for (std::size_t s = 0; s < est.size(); ++s) {
      std::vector<double> ise;
      for (const auto& rep : est[s]) {
        double sum = 0.0;
        std::size_t covered = 0;
        for (std::size_t g = 0; g < config.grid.size(); ++g) {
          ++result.total_points;
          if (std::isnan(rep[g])) {
            ++result.excluded_points;
            continue;
          }
          const double e = rep[g] - config.tau_off_fn(config.grid[g]);
          sum += e * e;
          ++covered;
        }
        ise.push_back(covered ? sum / static_cast<double>(covered) : kNaN);
      }
      ResultRow row = mean_row(ise);
      row.scheme = config.schemes[s];
      row.sweep = "bandwidth";
      row.sweep_value = h;
      row.z = kNaN;
      row.statistic = "mise";
      result.rows.push_back(row);
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::MseVsN:
    case ExperimentKind::MseVsBlockSize: return mse_experiment(config);
    case ExperimentKind::ConditionalVariance: return conditional_variance_experiment(config);
    case ExperimentKind::MiseVsBandwidth: return mise_experiment(config);
  }
  throw Error(ErrorCode::ConfigError, "unknown experiment kind");
}

std::string to_long_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "scheme,sweep,sweep_value,z,statistic,value,ci_low,ci_high,count\n";
  for (const auto& r : result.rows) {
    os << scheme_name(r.scheme) << ',' << r.sweep << ',' << format_double(r.sweep_value) << ',';
    if (!std::isnan(r.z)) os << format_double(r.z);
    os << ',' << r.statistic << ',' << format_double(r.value) << ',' << format_double(r.ci_low)
       << ',' << format_double(r.ci_high) << ',' << r.count << '\n';
  }
  return os.str();
}

std::string to_summary_json(const ExperimentResult& result) {
  const auto& c = result.config;
  json j;
  j["experiment"] = kind_name(c.kind);
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["n_values"] = c.n_values;
  j["schemes"] = json::array();
  for (SchemeKind s : c.schemes) j["schemes"].push_back(std::string(scheme_name(s)));
  j["coverage"] = {{"total_points", result.total_points},
                   {"excluded_points", result.excluded_points}};
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row = {{"scheme", std::string(scheme_name(r.scheme))},
                {"sweep", r.sweep},
                {"sweep_value", r.sweep_value},
                {"statistic", r.statistic},
                {"value", r.value},
                {"ci_low", r.ci_low},
                {"ci_high", r.ci_high},
                {"count", r.count}};
    if (!std::isnan(r.z)) row["z"] = r.z;
    rows.push_back(row);
  }
  j["results"] = rows;
  return j.dump(2);
}

}  // namespace blocktau
