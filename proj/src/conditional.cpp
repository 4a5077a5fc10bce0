#include "blocktau/conditional.hpp"

#include "blocktau/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace blocktau {

KernelSpec::KernelSpec(KernelFamily family, double bandwidth) : family_(family), h_(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::InvalidKernel, "bandwidth must be positive and finite");
  }
  if (family == KernelFamily::Custom) {
    throw Error(ErrorCode::InvalidKernel, "custom kernels need a table; use KernelSpec::custom");
  }
}

KernelSpec KernelSpec::custom(std::vector<double> u, std::vector<double> k, double bandwidth) {
  if (u.size() < 2 || u.size() != k.size()) {
    throw Error(ErrorCode::InvalidKernel, "custom kernel table needs at least two (u, K) rows");
  }
  if (u.front() != 0.0) throw Error(ErrorCode::InvalidKernel, "custom kernel table must start at u = 0");
  double integral = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(k[i]) || k[i] < 0.0) {
      throw Error(ErrorCode::InvalidKernel, "custom kernel values must be finite and nonnegative");
    }
    if (i > 0) {
      if (!(u[i] > u[i - 1])) throw Error(ErrorCode::InvalidKernel, "custom kernel u must ascend");
      // trapezoid is exact for the piecewise-linear interpolant
      integral += 0.5 * (u[i] - u[i - 1]) * (k[i] + k[i - 1]);
    }
  }
  integral *= 2.0;
  if (std::abs(integral - 1.0) > 1e-8) {
    throw Error(ErrorCode::InvalidKernel,
                "custom kernel integrates to " + std::to_string(integral) + ", not 1");
  }
  KernelSpec out(KernelFamily::Epanechnikov, bandwidth);
  out.family_ = KernelFamily::Custom;
  out.u_ = std::move(u);
  out.k_ = std::move(k);
  return out;
}

KernelSpec KernelSpec::parse(std::string_view family, double bandwidth) {
  if (family == "epanechnikov" || family == "epa") return {KernelFamily::Epanechnikov, bandwidth};
  if (family == "triangular" || family == "tri") return {KernelFamily::Triangular, bandwidth};
  if (family == "uniform") return {KernelFamily::Uniform, bandwidth};
  throw Error(ErrorCode::InvalidKernel, "unknown kernel '" + std::string(family) + "'");
}

double KernelSpec::support() const { return family_ == KernelFamily::Custom ? u_.back() : 1.0; }

double KernelSpec::operator()(double u) const {
  const double a = std::abs(u);
  switch (family_) {
    case KernelFamily::Epanechnikov: return a <= 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
    case KernelFamily::Triangular: return a <= 1.0 ? 1.0 - a : 0.0;
    case KernelFamily::Uniform: return a <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::Custom: {
      if (a > u_.back()) return 0.0;
      const auto it = std::upper_bound(u_.begin(), u_.end(), a);
      if (it == u_.end()) return k_.back();
      const std::size_t i = static_cast<std::size_t>(it - u_.begin());
      const double t = (a - u_[i - 1]) / (u_[i] - u_[i - 1]);
      return k_[i - 1] + t * (k_[i] - k_[i - 1]);
    }
  }
  return 0.0;
}

double KernelSpec::scaled(std::span<const double> u) const {
  double v = 1.0;
  for (double c : u) {
    v *= (*this)(c / h_) / h_;
    if (v == 0.0) break;
  }
  return v;
}

NwWeights nw_weights(const Eigen::MatrixXd& z_samples, const Eigen::VectorXd& z,
                     const KernelSpec& kernel) {
  if (z_samples.cols() != z.size()) {
    throw Error(ErrorCode::LengthMismatch, "conditioning point dimension differs from samples");
  }
  const auto n = z_samples.rows();
  const auto d = z_samples.cols();
  NwWeights out;
  out.w.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> diff(static_cast<std::size_t>(d));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) diff[static_cast<std::size_t>(j)] = z_samples(i, j) - z(j);
    const double k = kernel.scaled(diff);
    out.w[static_cast<std::size_t>(i)] = k;
    total += k;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::NoLocalData, "no sample within the kernel window of the conditioning point");
  }
  for (double& w : out.w) {
    w /= total;
    out.s_n += w * w;
  }
  return out;
}

double WeightedConcordance::rescaled() const {
  if (1.0 - s_n <= 64.0 * std::numeric_limits<double>::epsilon() || !(off_diagonal > 0.0)) {
    throw Error(ErrorCode::DegenerateWeights, "s_n = 1: a single observation carries all weight");
  }
  // Same per-row terms as v1 in the denominator, so fully concordant input
  // gives exactly 1.
  return std::clamp(v1 / off_diagonal, -1.0, 1.0);
}

double WeightedConcordance::get(CktVariant variant) const {
  switch (variant) {
    case CktVariant::V1: return v1;
    case CktVariant::V2: return v2;
    case CktVariant::V3: return v3;
    case CktVariant::Rescaled: return rescaled();
  }
  return v1;
}

WeightedConcordance weighted_concordance(std::span<const double> x, std::span<const double> y,
                                         std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw Error(ErrorCode::LengthMismatch, "x, y and weights differ in length");
  }
  const auto& k = kernels::active();
  const std::size_t n = x.size();
  double net = 0.0, off = 0.0, uu = 0.0, ul = 0.0, s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    const auto o = k.weighted_orthants(x[i], y[i], x.data(), y.data(), w.data(), n);
    net += w[i] * (o.concordant - o.discordant);
    off += w[i] * (o.concordant + o.discordant + (o.tied - w[i]));
    uu += w[i] * o.upper_upper;
    ul += w[i] * o.upper_lower;
    s += w[i] * w[i];
  }
  return {net, 4.0 * uu - 1.0, 1.0 - 4.0 * ul, s, off};
}

double conditional_kendall_pair(const ObservationMatrix& data, ColumnPair cols,
                                const Eigen::MatrixXd& z_samples, const Eigen::VectorXd& z,
                                const KernelSpec& kernel, CktVariant variant) {
  if (data.n() < 2) throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  if (static_cast<std::size_t>(z_samples.rows()) != data.n()) {
    throw Error(ErrorCode::LengthMismatch, "conditioning samples differ in row count from data");
  }
  if (cols.first >= data.p() || cols.second >= data.p() || cols.first == cols.second) {
    throw Error(ErrorCode::InvalidPair, "invalid column pair");
  }
  const auto weights = nw_weights(z_samples, z, kernel);
  return weighted_concordance(data.column(cols.first), data.column(cols.second), weights.w)
      .get(variant);
}

ConditionalTauCache::ConditionalTauCache(const ObservationMatrix& data, const NwWeights& weights)
    : s_n_(weights.s_n) {
  if (weights.w.size() != data.n()) {
    throw Error(ErrorCode::LengthMismatch, "weights differ in length from data rows");
  }
  std::vector<Eigen::Index> active;
  for (std::size_t i = 0; i < weights.w.size(); ++i) {
    if (weights.w[i] > 0.0) {
      active.push_back(static_cast<Eigen::Index>(i));
      w_.push_back(weights.w[i]);
    }
  }
  x_ = data.values()(active, Eigen::all);
  const auto p = static_cast<Eigen::Index>(data.p());
  values_ = Eigen::MatrixXd::Zero(p, p);
  known_.assign(data.p() * data.p(), 0);
}

double ConditionalTauCache::get(std::size_t j1, std::size_t j2) {
  if (j1 == j2) return 1.0;
  if (j1 > j2) std::swap(j1, j2);
  const std::size_t slot = j1 * static_cast<std::size_t>(values_.cols()) + j2;
  const auto a = static_cast<Eigen::Index>(j1), b = static_cast<Eigen::Index>(j2);
  if (!known_[slot]) {
    const std::size_t m = w_.size();
    values_(a, b) =
        weighted_concordance({x_.col(a).data(), m}, {x_.col(b).data(), m}, w_).rescaled();
    known_[slot] = 1;
  }
  return values_(a, b);
}

double conditional_block_estimate(ConditionalTauCache& cache, const Partition& partition, int k1,
                                  int k2, const EstimatorScheme& scheme) {
  const auto pairs = block_pair_set(partition, k1, k2, scheme);
  double sum = 0.0;
  for (const auto& [a, b] : pairs) sum += cache.get(a, b);
  return sum / static_cast<double>(pairs.size());
}

std::vector<ConditionalPointResult> conditional_kendall_matrix(
    const ObservationMatrix& data, const Partition& partition, const EstimatorScheme& scheme,
    const Eigen::MatrixXd& z_samples, const std::vector<Eigen::VectorXd>& grid,
    const KernelSpec& kernel) {
  if (data.n() < 2) throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  if (partition.p() != data.p()) {
    throw Error(ErrorCode::InvalidPartition, "partition size differs from column count");
  }
  if (static_cast<std::size_t>(z_samples.rows()) != data.n()) {
    throw Error(ErrorCode::LengthMismatch, "conditioning samples differ in row count from data");
  }
  scheme.validate(partition);
  std::vector<ConditionalPointResult> out;
  out.reserve(grid.size());
  const auto p = static_cast<Eigen::Index>(data.p());
  for (const auto& z : grid) {
    ConditionalPointResult r;
    r.z = z;
    try {
      const auto weights = nw_weights(z_samples, z, kernel);
      ConditionalTauCache cache(data, weights);
      KendallMatrix m;
      m.values = Eigen::MatrixXd::Identity(p, p);
      m.scheme = scheme.kind;
      m.partition = partition;
      m.names = data.column_names();
      auto set = [&](std::size_t a, std::size_t b, double v) {
        m.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        m.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
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
          const double v = conditional_block_estimate(cache, partition, k1, k2, scheme);
          for (std::size_t i : a)
            for (std::size_t j : b) set(i, j, v);
        }
      }
      r.matrix = std::move(m);
    } catch (const Error& e) {
      r.error = e.code();
      r.message = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> regular_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs start <= stop and step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

}  // namespace blocktau
