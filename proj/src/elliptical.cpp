#include "blocktau/elliptical.hpp"

#include "blocktau/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace blocktau {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-10;

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 18, kQuadTol);
}

// log of the integral of exp(L(t)) over [0, inf) for unimodal L. The
// integration range is cut where L is kDrop below its peak.
double log_integral_unimodal(const std::function<double(double)>& L) {
  constexpr double kDrop = 40.0;
  double t_star = 0.0;
  double best = L(0.0);
  double prev = 0.0, next = 1e-3;
  double t = 1e-3;
  for (int k = 0; k < 40; ++k, t *= 1.5) {
    const double v = L(t);
    if (v > best) {
      best = v;
      t_star = t;
      prev = k == 0 ? 0.0 : t / 1.5;
      next = t * 1.5;
    }
  }
  if (t_star > 0.0) {
    const auto r = boost::math::tools::brent_find_minima([&](double x) { return -L(x); }, prev,
                                                         next, 40);
    if (-r.second > best) {
      best = -r.second;
      t_star = r.first;
    }
  }
  if (!std::isfinite(best)) return -kInf;
  const double floor = best - kDrop;
  auto cut = [&](double inside, double outside) {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (inside + outside);
      if (L(mid) > floor) inside = mid; else outside = mid;
    }
    return outside;
  };
  const double left = (t_star == 0.0 || L(0.0) > floor) ? 0.0 : cut(t_star, 0.0);
  double step = std::max(t_star, 1.0);
  double right = t_star + step;
  bool heavy = false;
  while (L(right) > floor) {
    step *= 2.0;
    right = t_star + step;
    if (step > 1e6) {
      heavy = true;
      break;
    }
  }
  if (!heavy) right = cut(t_star, right);
  auto f = [&](double x) {
    const double v = L(x) - best;
    return std::isfinite(v) ? std::exp(v) : 0.0;
  };
  double total = integrate(f, left, t_star) + integrate(f, t_star, right);
  if (heavy) total += gauss_kronrod<double, 31>::integrate(f, right, kInf, 18, kQuadTol);
  return best + std::log(total);
}

// Log-density of the standardized one-dimensional projection at z.
double log_projection_density(const GeneratorSpec& g, double z) {
  const int p = g.dimension();
  if (p == 1) return g.log_g(z * z);
  const double a = 0.5 * (p - 1);
  const double log_c = std::log(2.0) + a * std::log(std::numbers::pi) - std::lgamma(a);
  const double z2 = z * z;
  const double power = p - 2;
  return log_c + log_integral_unimodal([&](double t) {
           const double lt = power == 0 ? 0.0 : power * std::log(t);
           return lt + g.log_g(z2 + t * t);
         });
}

// int_0^inf t^power g(z2 + t^2) dt for a tabulated g. Pieces between knots
// are polynomial in t, so a fixed Gauss rule is accurate on each.
double tabulated_radial(const GeneratorSpec& g, const std::vector<double>& knots, double z2,
                        double power) {
  auto f = [&](double t) {
    const double lt = power == 0 ? 0.0 : power * std::log(t);
    const double v = lt + g.log_g(z2 + t * t);
    return std::isfinite(v) ? std::exp(v) : 0.0;
  };
  double total = 0.0, prev = 0.0;
  for (double u : knots) {
    if (u <= z2) continue;
    const double t = std::sqrt(u - z2);
    total += boost::math::quadrature::gauss<double, 10>::integrate(f, prev, t);
    prev = t;
  }
  return total + gauss_kronrod<double, 31>::integrate(f, prev, kInf, 18, kQuadTol);
}

double tabulated_projection_density(const GeneratorSpec& g, const std::vector<double>& knots,
                                    double z) {
  const int p = g.dimension();
  if (p == 1) return std::exp(g.log_g(z * z));
  const double a = 0.5 * (p - 1);
  const double c = std::exp(std::log(2.0) + a * std::log(std::numbers::pi) - std::lgamma(a));
  return c * tabulated_radial(g, knots, z * z, p - 2);
}

}  // namespace

double tau_to_rho(double tau) {
  if (!(tau >= -1.0 && tau <= 1.0)) throw Error(ErrorCode::OutOfRange, "tau outside [-1, 1]");
  return std::sin(0.5 * std::numbers::pi * tau);
}

double rho_to_tau(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error(ErrorCode::OutOfRange, "rho outside [-1, 1]");
  return 2.0 / std::numbers::pi * std::asin(rho);
}

PdCheck block_pd_check(int b1, int b2, double rho1, double rho2, double rho3) {
  if (b1 < 2 || b2 < 2) throw Error(ErrorCode::InvalidBlockSize, "block sizes must be at least 2");
  for (double r : {rho1, rho2, rho3}) {
    if (!(r > -1.0 && r < 1.0)) throw Error(ErrorCode::OutOfRange, "correlations must lie in (-1, 1)");
  }
  const double B1 = b1, B2 = b2;
  const double c = ((B2 * B1 - B1 - B2 + 1.0) * rho2 + B1 - 1.0) * rho1 - B1 * B2 * rho3 * rho3 +
                   (B2 - 1.0) * rho2 + 1.0;
  // c is the determinant of the reduced 2x2 matrix; it is also positive when
  // both of its diagonal entries are negative, so one of them is checked too.
  return {c > 0.0 && 1.0 + (B1 - 1.0) * rho1 > 0.0, c};
}

Eigen::MatrixXd two_block_correlation(int b1, int b2, double rho1, double rho2, double rho3) {
  const int p = b1 + b2;
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (i == j) m(i, j) = 1.0;
      else if (i < b1 && j < b1) m(i, j) = rho1;
      else if (i >= b1 && j >= b1) m(i, j) = rho2;
      else m(i, j) = rho3;
    }
  return m;
}

double min_intergroup_rho(int K) {
  if (K < 2) throw Error(ErrorCode::InvalidK, "K must be at least 2");
  return -1.0 / (K - 1.0);
}

CorrelationResult correlation_from_tau(const Eigen::MatrixXd& tau, bool repair) {
  if (tau.rows() != tau.cols()) throw Error(ErrorCode::InvalidArgument, "tau matrix must be square");
  CorrelationResult out;
  out.correlation = tau.unaryExpr([](double t) { return tau_to_rho(t); });
  out.correlation.diagonal().setOnes();
  out.correlation = 0.5 * (out.correlation + out.correlation.transpose());
  if (tau.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.correlation);
  out.min_eigenvalue_before = eig.eigenvalues().minCoeff();
  if (!repair || out.min_eigenvalue_before >= 1e-10) return out;

  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(1e-10);
  Eigen::MatrixXd a = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd d = a.diagonal();
  if (!(d.minCoeff() > 0.0) || !d.allFinite()) {
    throw Error(ErrorCode::NotRepairable, "diagonal not positive after eigenvalue clipping");
  }
  const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  a = s.asDiagonal() * a * s.asDiagonal();
  a.diagonal().setOnes();
  out.correlation = 0.5 * (a + a.transpose());
  out.repaired = true;
  return out;
}

CorrelationResult correlation_from_kendall(const KendallMatrix& tau, bool repair) {
  return correlation_from_tau(tau.values, repair);
}

GeneratorSpec GeneratorSpec::gaussian(int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  GeneratorSpec g;
  g.kind_ = Kind::Gaussian;
  g.p_ = p;
  g.log_norm_ = -0.5 * p * std::log(2.0 * std::numbers::pi);
  return g;
}

GeneratorSpec GeneratorSpec::student_t(double nu, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  GeneratorSpec g;
  g.kind_ = Kind::StudentT;
  g.p_ = p;
  g.nu_ = nu;
  g.log_norm_ = std::lgamma(0.5 * (nu + p)) - std::lgamma(0.5 * nu) -
                0.5 * p * std::log(nu * std::numbers::pi);
  return g;
}

GeneratorSpec GeneratorSpec::tabulated(std::vector<double> u, std::vector<double> g, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (u.size() < 4 || u.size() != g.size()) {
    throw Error(ErrorCode::InvalidArgument, "tabulated generator needs at least four (u, g) rows");
  }
  if (u.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "tabulated generator must start at u = 0");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(g[i]) || g[i] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "tabulated generator values must be finite and nonnegative");
    }
    if (i > 0 && !(u[i] > u[i - 1])) throw Error(ErrorCode::InvalidArgument, "u must ascend");
  }
  GeneratorSpec out;
  out.kind_ = Kind::Tabulated;
  out.p_ = p;
  const std::size_t n = u.size();
  out.tail_u_ = u[n - 1];
  if (g[n - 1] == 0.0) {
    out.tail_rate_ = kInf;
    out.tail_log_g_ = -kInf;
  } else {
    if (!(g[n - 2] > g[n - 1])) {
      throw Error(ErrorCode::NonNormalizedGenerator, "tabulated generator tail does not decay");
    }
    out.tail_log_g_ = std::log(g[n - 1]);
    out.tail_rate_ = std::log(g[n - 2] / g[n - 1]) / (u[n - 1] - u[n - 2]);
  }
  out.knots_ = std::make_shared<const std::vector<double>>(u);
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
      std::move(u), std::move(g));
  out.table_ = std::make_shared<const std::function<double(double)>>(
      [spline](double x) { return std::max((*spline)(x), 0.0); });
  const double mass = out.total_mass();
  if (!(std::abs(mass - 1.0) <= 1e-4)) {
    throw Error(ErrorCode::NonNormalizedGenerator,
                "tabulated generator integrates to " + std::to_string(mass) + ", not 1");
  }

  // Projection tail G(z) on a grid, integrated segment by segment from the
  // far end; interpolated in log space.
  const double f0 = tabulated_projection_density(out, *out.knots_, 0.0);
  std::vector<double> z{0.0}, seg;
  while (z.size() < 20000) {
    const double a = z.back(), b = a + 0.02 * std::max(1.0, a);
    seg.push_back(boost::math::quadrature::gauss<double, 7>::integrate(
        [&](double x) { return tabulated_projection_density(out, *out.knots_, x); }, a, b));
    z.push_back(b);
    const double fb = tabulated_projection_density(out, *out.knots_, b);
    if (!(fb > 1e-17 * f0)) break;
  }
  std::vector<double> log_tail(z.size());
  double acc = 0.0;
  log_tail.back() = -kInf;
  for (std::size_t i = seg.size(); i-- > 0;) {
    acc += seg[i];
    log_tail[i] = std::log(acc);
  }
  // drop the zero-tail end point so the interpolant stays finite
  z.pop_back();
  log_tail.pop_back();
  out.log_tail_end_ = z.back();
  auto tail = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
      std::move(z), std::move(log_tail));
  out.log_tail_ = std::make_shared<const std::function<double(double)>>(
      [tail](double x) { return (*tail)(x); });
  return out;
}

double GeneratorSpec::tabulated_tail(double s) const {
  if (kind_ != Kind::Tabulated) throw Error(ErrorCode::InvalidArgument, "not a tabulated generator");
  if (s < 0.0) return 1.0 - tabulated_tail(-s);
  if (s >= log_tail_end_) return 0.0;
  return std::exp((*log_tail_)(s));
}

double GeneratorSpec::log_g(double u) const {
  switch (kind_) {
    case Kind::Gaussian: return log_norm_ - 0.5 * u;
    case Kind::StudentT: return log_norm_ - 0.5 * (nu_ + p_) * std::log1p(u / nu_);
    case Kind::Tabulated:
      if (u > tail_u_) return tail_log_g_ - tail_rate_ * (u - tail_u_);
      return std::log((*table_)(u));
  }
  return -kInf;
}

double GeneratorSpec::total_mass() const {
  if (kind_ == Kind::Tabulated) {
    const double half = 0.5 * p_;
    const double sphere =
        std::exp(std::log(2.0) + half * std::log(std::numbers::pi) - std::lgamma(half));
    return sphere * tabulated_radial(*this, *knots_, 0.0, p_ - 1);
  }
  // |S^{p-1}| * int_0^inf r^{p-1} g(r^2) dr
  const double half = 0.5 * p_;
  const double log_sphere = std::log(2.0) + half * std::log(std::numbers::pi) - std::lgamma(half);
  const double power = p_ - 1;
  return std::exp(log_sphere + log_integral_unimodal([&](double r) {
                    const double lr = power == 0 ? 0.0 : power * std::log(r);
                    return lr + log_g(r * r);
                  }));
}

double elliptical_tail(const GeneratorSpec& generator, double s) {
  if (generator.kind() == GeneratorSpec::Kind::Tabulated) return generator.tabulated_tail(s);
  auto f = [&](double z) { return std::exp(log_projection_density(generator, z)); };
  if (s < 0.0) {
    // symmetric projection: G(s) = 1 - G(-s)
    return 1.0 - elliptical_tail(generator, -s);
  }
  double total = integrate(f, s, s + 2.0);
  total += integrate(f, s + 2.0, s + 8.0);
  total += gauss_kronrod<double, 31>::integrate(f, s + 8.0, kInf, 18, kQuadTol);
  return total;
}

double elliptical_quantile(const GeneratorSpec& generator, double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw Error(ErrorCode::OutOfRange, "alpha must lie in (0, 0.5]");
  auto G = [&](double s) { return elliptical_tail(generator, s); };

  const double seed = boost::math::quantile(boost::math::normal(), 1.0 - alpha);
  double lo = seed, hi = seed;
  double g_seed = G(seed);
  if (std::abs(g_seed - alpha) <= 1e-8) return seed;
  if (g_seed > alpha) {
    hi = std::max(2.0 * seed, seed + 1.0);
    int k = 0;
    while (G(hi) > alpha) {
      lo = hi;
      hi *= 2.0;
      if (++k > 60) throw Error(ErrorCode::BracketingFailure, "tail never falls below alpha");
    }
  } else {
    lo = 0.5 * seed;
    int k = 0;
    while (G(lo) < alpha) {
      hi = lo;
      lo *= 0.5;
      if (++k > 60) {
        lo = 0.0;
        if (G(lo) < alpha) throw Error(ErrorCode::BracketingFailure, "tail at 0 is below alpha");
        break;
      }
    }
  }

  // The tail must be strictly decreasing across the bracket.
  double prev = G(lo);
  for (int i = 1; i <= 8; ++i) {
    const double v = G(lo + (hi - lo) * i / 8.0);
    if (!(v < prev)) {
      throw Error(ErrorCode::BracketingFailure, "tail function not strictly decreasing on bracket");
    }
    prev = v;
  }

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double v = G(mid);
    if (std::abs(v - alpha) <= 1e-8) return mid;
    if (v > alpha) lo = mid; else hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(G(mid) - alpha) > 1e-8) {
    throw Error(ErrorCode::BracketingFailure, "bisection did not reach |G(q) - alpha| <= 1e-8");
  }
  return mid;
}

double delta_elliptic_var(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                          const Eigen::VectorXd& delta, double quantile) {
  if (mu.size() != delta.size() || sigma.rows() != delta.size() || sigma.cols() != delta.size()) {
    throw Error(ErrorCode::LengthMismatch, "mu, sigma and delta dimensions differ");
  }
  const double scale2 = delta.dot(sigma * delta);
  if (!(scale2 > 0.0)) throw Error(ErrorCode::SingularPortfolio, "portfolio variance is not positive");
  return -delta.dot(mu) + quantile * std::sqrt(scale2);
}

double delta_elliptic_var(const EllipticalModel& model, const Eigen::VectorXd& delta, double alpha) {
  if (model.generator.dimension() != delta.size()) {
    throw Error(ErrorCode::LengthMismatch, "generator dimension differs from portfolio size");
  }
  // Check the portfolio before the more expensive quantile solve.
  delta_elliptic_var(model.mu, model.sigma, delta, 0.0);
  return delta_elliptic_var(model.mu, model.sigma, delta, elliptical_quantile(model.generator, alpha));
}

FittedModel fit_elliptical_model(const ObservationMatrix& data, const KendallMatrix& tau,
                                 const GeneratorSpec& generator) {
  if (data.n() < 2) throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  if (static_cast<std::size_t>(tau.values.rows()) != data.p()) {
    throw Error(ErrorCode::LengthMismatch, "tau matrix size differs from column count");
  }
  FittedModel out;
  out.correlation = correlation_from_kendall(tau, true);
  const Eigen::VectorXd mu = data.values().colwise().mean();
  const Eigen::MatrixXd centered = data.values().rowwise() - mu.transpose();
  const Eigen::VectorXd sd =
      (centered.array().square().colwise().sum() / static_cast<double>(data.n() - 1)).sqrt();
  out.model.mu = mu;
  out.model.sigma = sd.asDiagonal() * out.correlation.correlation * sd.asDiagonal();
  out.model.generator = generator;
  return out;
}

double silverman_bandwidth(double xi_variance, std::size_t n, double exponent) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  if (!(xi_variance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "variance must be nonnegative");
  return 1.06 * std::sqrt(xi_variance * std::pow(static_cast<double>(n), exponent));
}

SilvermanResult silverman_xi_bandwidth(const ObservationMatrix& data, const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& sigma, double exponent) {
  const auto p = static_cast<Eigen::Index>(data.p());
  if (mu.size() != p || sigma.rows() != p || sigma.cols() != p) {
    throw Error(ErrorCode::LengthMismatch, "mu and sigma must match the data dimension");
  }
  if (data.n() < 2) throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-12 * std::sqrt(sigma.diagonal().maxCoeff())) {
    throw Error(ErrorCode::SingularCovariance, "sigma is not invertible");
  }
  const double half_p = 0.5 * static_cast<double>(p);
  SilvermanResult out;
  out.xi.reserve(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd d = data.values().row(static_cast<Eigen::Index>(i)).transpose() - mu;
    const double m = llt.matrixL().solve(d).squaredNorm();
    // (1 + m^{p/2})^{2/p} without overflowing for large p
    double v;
    if (m == 0.0) {
      v = 1.0;
    } else if (m >= 1.0) {
      v = m * std::exp(std::log1p(std::exp(-half_p * std::log(m))) / half_p);
    } else {
      v = std::exp(std::log1p(std::exp(half_p * std::log(m))) / half_p);
    }
    out.xi.push_back(v - 1.0);
  }
  double mean = 0.0;
  for (double x : out.xi) mean += x;
  mean /= static_cast<double>(out.xi.size());
  double var = 0.0;
  for (double x : out.xi) var += (x - mean) * (x - mean);
  out.xi_variance = var / static_cast<double>(out.xi.size() - 1);
  out.h = silverman_bandwidth(out.xi_variance, data.n(), exponent);
  out.degenerate = !(out.h > 0.0);
  return out;
}

BacktestResult backtest_var(std::span<const double> pnl, double var_level, double alpha) {
  if (pnl.empty()) throw Error(ErrorCode::EmptySeries, "backtest needs a non-empty series");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::OutOfRange, "alpha must lie in (0, 1)");
  BacktestResult out;
  out.length = pnl.size();
  for (double x : pnl) out.exceedances += x < -var_level;
  out.observed_rate = static_cast<double>(out.exceedances) / static_cast<double>(out.length);
  out.expected = alpha * static_cast<double>(out.length);
  std::vector<double> sorted(pnl.begin(), pnl.end());
  std::sort(sorted.begin(), sorted.end());
  // linear interpolation between order statistics
  const double pos = alpha * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double q = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  out.empirical_var = -q;
  return out;
}

}  // namespace blocktau
