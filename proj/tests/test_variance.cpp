#include "blocktau/concordance.hpp"
#include "blocktau/error.hpp"
#include "blocktau/simulation.hpp"
#include "blocktau/variance.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace blocktau;

namespace {

ConcordanceQuantities full(double P, double Q, double R, double S, double T, double U) {
  ConcordanceQuantities q;
  q.P = P;
  q.Q = Q;
  q.R = R;
  q.S = S;
  q.T = T;
  q.U = U;
  return q;
}

VarianceInput input(ConcordanceQuantities q, std::size_t n, std::size_t g1, std::size_t g2,
                    std::size_t N, SchemeKind s) {
  return VarianceInput{q, n, g1, g2, N, s};
}

// Mean of concordance_quantities over every ordered combination of distinct
// pairs in the list, split by overlap.
ConcordanceQuantities enumerate_average(const ObservationMatrix& d,
                                        const std::vector<ColumnPair>& pairs) {
  double P = 0, Q = 0, R = 0, S = 0, T = 0, U = 0;
  int no = 0, nd = 0;
  for (const auto& a : pairs) {
    const auto single = concordance_quantities(d, a);
    P += single.P;
    Q += single.Q;
    for (const auto& b : pairs) {
      if (a == b) continue;
      const auto q = concordance_quantities(d, a, b);
      if (q.R) {
        R += *q.R;
        S += *q.S;
        ++no;
      } else {
        T += *q.T;
        U += *q.U;
        ++nd;
      }
    }
  }
  ConcordanceQuantities out;
  out.P = P / pairs.size();
  out.Q = Q / pairs.size();
  if (no) out.R = R / no, out.S = S / no;
  if (nd) out.T = T / nd, out.U = U / nd;
  return out;
}

}  // namespace

TEST(FiniteVariance, NaiveIndependenceExample) {
  const auto v = finite_sample_variance(input(full(0.5, 5.0 / 18, 0, 0, 0, 0), 10, 1, 1, 1,
                                              SchemeKind::Naive));
  EXPECT_NEAR(v.value, 50.0 / 810.0, 1e-15);
  const double n = 10;
  EXPECT_NEAR(v.value, 2 * (2 * n + 5) / (9 * n * (n - 1)), 1e-15);
  EXPECT_FALSE(v.clamped);
}

TEST(FiniteVariance, ComonotoneIsZero) {
  for (SchemeKind s : {SchemeKind::Naive, SchemeKind::Block, SchemeKind::Row,
                       SchemeKind::Diagonal, SchemeKind::Random}) {
    const auto v = finite_sample_variance(input(full(1, 1, 1, 1, 1, 1), 20, 4, 5, 3, s));
    EXPECT_EQ(v.value, 0.0) << scheme_name(s);
  }
}

TEST(FiniteVariance, RandomWithFullCountIsBlock) {
  const auto q = full(0.55, 0.33, 0.32, 0.31, 0.305, 0.303);
  const auto b = finite_sample_variance(input(q, 50, 4, 6, 0, SchemeKind::Block));
  const auto r = finite_sample_variance(input(q, 50, 4, 6, 24, SchemeKind::Random));
  EXPECT_EQ(b.value, r.value);
}

TEST(FiniteVariance, Reductions) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto q = full(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
    const std::size_t n = 3 + rng() % 200, g1 = 1 + rng() % 12, g2 = 1 + rng() % 12;
    ConcordanceQuantities naive_q;
    naive_q.P = q.P;
    naive_q.Q = q.Q;
    const auto naive = finite_sample_variance(input(naive_q, n, g1, g2, 1, SchemeKind::Naive));
    const auto row = finite_sample_variance(input(q, n, g1, g2, 1, SchemeKind::Row));
    const auto diag = finite_sample_variance(input(q, n, g1, g2, 1, SchemeKind::Diagonal));
    EXPECT_EQ(row.raw, naive.raw);
    EXPECT_EQ(diag.raw, naive.raw);
  }
}

TEST(FiniteVariance, ClampsNegative) {
  // Q below P^2 cannot happen in a population but can in noisy estimates.
  const auto v = finite_sample_variance(input(full(0.6, 0.3, 0, 0, 0, 0), 30, 1, 1, 1,
                                              SchemeKind::Naive));
  EXPECT_TRUE(v.clamped);
  EXPECT_EQ(v.value, 0.0);
  EXPECT_LT(v.raw, 0.0);
}

TEST(FiniteVariance, Errors) {
  ConcordanceQuantities q;
  q.P = 0.5;
  q.Q = 0.3;
  try {
    finite_sample_variance(input(q, 10, 3, 3, 3, SchemeKind::Block));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingQuantity);
  }
  q.R = 0.3;
  q.S = 0.3;
  EXPECT_NO_THROW(finite_sample_variance(input(q, 10, 3, 3, 3, SchemeKind::Row)));
  EXPECT_THROW(finite_sample_variance(input(q, 10, 3, 3, 3, SchemeKind::Diagonal)), Error);
  EXPECT_THROW(finite_sample_variance(input(q, 2, 3, 3, 3, SchemeKind::Naive)), Error);
  EXPECT_THROW(finite_sample_variance(input(q, 10, 3, 3, 4, SchemeKind::Row)), Error);
}

TEST(AsymptoticVariance, Examples) {
  ConcordanceQuantities ind = full(0.5, 5.0 / 18, 0.25, 0.25, 0.25, 0.25);
  EXPECT_NEAR(asymptotic_variance(input(ind, 0, 1, 1, 1, SchemeKind::Naive), LimitMode::FiniteBlock).value,
              4.0 / 9, 1e-15);
  EXPECT_EQ(asymptotic_variance(input(full(1, 1, 1, 1, 1, 1), 0, 5, 5, 5, SchemeKind::Block),
                                LimitMode::LargeBlock)
                .value,
            0.0);
  const auto q = full(0.55, 0.33, 0.32, 0.31, 0.305, 0.303);
  EXPECT_EQ(asymptotic_variance(input(q, 10, 6, 7, 0, SchemeKind::Block), LimitMode::LargeBlock).value,
            asymptotic_variance(input(q, 10, 6, 7, 5, SchemeKind::Random), LimitMode::LargeBlock).value);
  EXPECT_NEAR(asymptotic_variance(input(q, 10, 6, 7, 5, SchemeKind::Row), LimitMode::LargeBlock).value,
              16 * (0.31 - 0.55 * 0.55), 1e-15);
}

TEST(AsymptoticVariance, LimitConsistency) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  for (int t = 0; t < 20; ++t) {
    const double P = 0.55, P2 = P * P;
    const auto q = full(P, P2 + 0.02 + u(rng), P2 + u(rng), P2 + 0.005 + u(rng), P2 + u(rng),
                        P2 + 0.001 + u(rng));
    for (SchemeKind s : {SchemeKind::Naive, SchemeKind::Block, SchemeKind::Row,
                         SchemeKind::Diagonal, SchemeKind::Random}) {
      auto in = input(q, 100000, 5, 7, 4, s);
      const double nv = 1e5 * finite_sample_variance(in).value;
      const double V = asymptotic_variance(in, LimitMode::FiniteBlock).value;
      EXPECT_LT(std::abs(nv - V) / V, 0.01) << scheme_name(s);
    }
  }
}

TEST(AveragedQuantities, MatchesPairEnumeration) {
  const Partition p({1, 1, 1, 2, 2});
  auto data = sample_block_elliptical(p, 0.4, 0.2, EllipticalFamily::gaussian(), 25, 3);
  // inject ties in one column
  Eigen::MatrixXd m = data.values();
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 1) = std::round(m(i, 1) * 2);
  data = ObservationMatrix(m);
  for (AveragingSet set : {AveragingSet::Block, AveragingSet::Row, AveragingSet::Diagonal}) {
    const auto pairs = averaging_pairs(p, 1, 2, set);
    const auto got = averaged_quantities(data, pairs, set);
    const auto want = enumerate_average(data, pairs);
    EXPECT_NEAR(got.P, want.P, 1e-12);
    EXPECT_NEAR(got.Q, want.Q, 1e-12);
    ASSERT_EQ(got.R.has_value(), want.R.has_value());
    ASSERT_EQ(got.T.has_value(), want.T.has_value());
    if (want.R) {
      EXPECT_NEAR(*got.R, *want.R, 1e-12);
      EXPECT_NEAR(*got.S, *want.S, 1e-12);
    }
    if (want.T) {
      EXPECT_NEAR(*got.T, *want.T, 1e-12);
      EXPECT_NEAR(*got.U, *want.U, 1e-12);
    }
  }
}

TEST(AveragedQuantities, SinglePairMatchesPairwise) {
  const auto data = sample_block_elliptical(Partition({1, 2}), 0.5, 0.3,
                                            EllipticalFamily::gaussian(), 40, 8);
  const auto q = averaged_quantities(data, {{0, 1}}, AveragingSet::Pair);
  const auto r = concordance_quantities(data, {0, 1});
  EXPECT_EQ(q.P, r.P);
  EXPECT_NEAR(q.Q, r.Q, 1e-15);
  EXPECT_FALSE(q.R || q.S || q.T || q.U);
}

TEST(OracleQuantities, AgreesWithExactOnModerateSample) {
  const Partition p({1, 1, 1, 2, 2, 2});
  const auto data = sample_block_elliptical(p, 0.3, 0.1, EllipticalFamily::gaussian(), 400, 12);
  const auto pairs = averaging_pairs(p, 1, 2, AveragingSet::Block);
  const auto exact = averaged_quantities(data, pairs, AveragingSet::Block);
  OracleOptions opt;
  opt.two_row_samples = 2'000'000;
  const auto oracle = oracle_quantities(data, pairs, AveragingSet::Block, opt);
  EXPECT_NEAR(oracle.P, exact.P, 1e-12);
  EXPECT_NEAR(oracle.Q, exact.Q, 1e-12);
  EXPECT_NEAR(*oracle.R, *exact.R, 3e-3);
  EXPECT_NEAR(*oracle.T, *exact.T, 3e-3);
  // S and U only carry the two-row estimate through a 1/(n-2) correction
  EXPECT_NEAR(*oracle.S, *exact.S, 3e-5);
  EXPECT_NEAR(*oracle.U, *exact.U, 3e-5);
}

TEST(OracleQuantities, RejectsTies) {
  Eigen::MatrixXd m(5, 2);
  m << 1, 2, 1, 3, 2, 1, 3, 5, 4, 4;
  EXPECT_THROW(oracle_quantities(ObservationMatrix(m), {{0, 1}}, AveragingSet::Pair), Error);
}

TEST(Ordering, ComonotoneNotApplicable) {
  OrderingInput in;
  in.block = in.row = in.diagonal = full(1, 1, 1, 1, 1, 1);
  in.n = 10;
  in.g1 = in.g2 = 5;
  const auto rep = ordering_report(in);
  EXPECT_FALSE(rep.us_precondition);
  EXPECT_FALSE(rep.tr_precondition);
  EXPECT_FALSE(rep.applicable);
  EXPECT_TRUE(rep.open_problem_holds);
}

TEST(Ordering, GaussianBlockModel) {
  std::vector<int> m(10, 1);
  m.insert(m.end(), 10, 2);
  const Partition p(m);
  const auto data = sample_block_elliptical(p, 0.3, 0.1, EllipticalFamily::gaussian(), 200000, 31);
  OracleOptions opt;
  opt.two_row_samples = 1'000'000;
  OrderingInput in;
  in.block = oracle_quantities(data, averaging_pairs(p, 1, 2, AveragingSet::Block),
                               AveragingSet::Block, opt);
  in.row = oracle_quantities(data, averaging_pairs(p, 1, 2, AveragingSet::Row), AveragingSet::Row, opt);
  in.diagonal = oracle_quantities(data, averaging_pairs(p, 1, 2, AveragingSet::Diagonal),
                                  AveragingSet::Diagonal, opt);
  in.n = 4;
  in.g1 = in.g2 = 10;
  in.N = 10;
  in.tolerance = 2e-3;
  const auto rep = ordering_report(in);
  EXPECT_TRUE(rep.finite_order_holds);
  EXPECT_TRUE(rep.open_problem_holds) << (rep.violations.empty() ? "" : rep.violations.front());
  EXPECT_EQ(rep.variances.front().scheme, SchemeKind::Block);
}
