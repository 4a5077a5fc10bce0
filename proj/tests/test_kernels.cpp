#include "blocktau/concordance.hpp"
#include "blocktau/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace blocktau;

namespace {

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    simd_ = kernels::avx2_table();
    if (simd_ == nullptr) GTEST_SKIP() << "AVX2 unavailable";
  }
  const kernels::KernelTable* simd_ = nullptr;
};

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, bool coarse) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = coarse ? std::round(2.0 * nd(rng)) : nd(rng);
  return v;
}

}  // namespace

TEST_F(KernelEquivalence, SignCountsExact) {
  const auto& scalar = kernels::scalar_table();
  std::mt19937_64 rng(1);
  for (std::size_t n = 0; n < 70; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = draw(rng, n, rep % 2 == 0);
      const auto y = draw(rng, n, rep % 3 == 0);
      const double xi = rep % 4 == 0 ? 0.0 : 0.3, yi = -0.1;
      const auto a = scalar.sign_counts(xi, yi, x.data(), y.data(), n);
      const auto b = simd_->sign_counts(xi, yi, x.data(), y.data(), n);
      ASSERT_EQ(a.concordant, b.concordant);
      ASSERT_EQ(a.discordant, b.discordant);
    }
  }
}

TEST_F(KernelEquivalence, SignCountsTinyDifferences) {
  const std::vector<double> x{1e-200, -1e-200, 0.0, 1e-300, 2e-300};
  const std::vector<double> y{1e-200, 1e-200, 1e-300, -1e-300, 2e-300};
  const auto a = kernels::scalar_table().sign_counts(0.0, 0.0, x.data(), y.data(), x.size());
  const auto b = simd_->sign_counts(0.0, 0.0, x.data(), y.data(), x.size());
  EXPECT_EQ(a.concordant, 2);
  EXPECT_EQ(a.discordant, 2);
  EXPECT_EQ(a.concordant, b.concordant);
  EXPECT_EQ(a.discordant, b.discordant);
}

TEST_F(KernelEquivalence, WeightedOrthantsClose) {
  const auto& scalar = kernels::scalar_table();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < 90; n += 3) {
    const auto x = draw(rng, n, n % 2 == 0);
    const auto y = draw(rng, n, false);
    std::vector<double> w(n);
    for (auto& v : w) v = u(rng);
    const auto a = scalar.weighted_orthants(0.1, 0.0, x.data(), y.data(), w.data(), n);
    const auto b = simd_->weighted_orthants(0.1, 0.0, x.data(), y.data(), w.data(), n);
    EXPECT_NEAR(a.concordant, b.concordant, 1e-12);
    EXPECT_NEAR(a.discordant, b.discordant, 1e-12);
    EXPECT_NEAR(a.upper_upper, b.upper_upper, 1e-12);
    EXPECT_NEAR(a.upper_lower, b.upper_lower, 1e-12);
    EXPECT_NEAR(a.tied, b.tied, 1e-12);
  }
}

TEST_F(KernelEquivalence, DotClose) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 0; n < 200; n += 7) {
    const auto a = draw(rng, n, false);
    const auto b = draw(rng, n, false);
    EXPECT_NEAR(kernels::scalar_table().dot(a.data(), b.data(), n),
                simd_->dot(a.data(), b.data(), n), 1e-12);
  }
}

TEST_F(KernelEquivalence, ForcedLevelGivesSameTau) {
  std::mt19937_64 rng(4);
  const auto x = draw(rng, 300, true);
  const auto y = draw(rng, 300, true);
  ASSERT_TRUE(kernels::force_level(kernels::Level::Scalar));
  EXPECT_EQ(kernels::active_level(), kernels::Level::Scalar);
  const double a = pairwise_kendall(x, y);
  ASSERT_TRUE(kernels::force_level(kernels::Level::Avx2));
  const double b = pairwise_kendall(x, y);
  EXPECT_EQ(a, b);
}
