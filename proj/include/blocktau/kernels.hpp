#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace blocktau::kernels {

struct SignCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
};

// Weighted sums over k of w_k times an indicator relative to a fixed (xi, yi).
struct WeightedOrthants {
  double concordant = 0.0;  // (xi-xk)(yi-yk) > 0
  double discordant = 0.0;  // (xi-xk)(yi-yk) < 0
  double upper_upper = 0.0; // xi < xk and yi < yk
  double upper_lower = 0.0; // xi < xk and yi > yk
  double tied = 0.0;        // neither, including k == i itself
};

struct KernelTable {
  std::string_view name;
  // Signs of (xi - x[k]) * (yi - y[k]) for k in [0, n), compared by signs of
  // each factor so that underflow in the product cannot hide a concordance.
  SignCounts (*sign_counts)(double xi, double yi, const double* x,
                            const double* y, std::size_t n);
  WeightedOrthants (*weighted_orthants)(double xi, double yi, const double* x,
                                        const double* y, const double* w,
                                        std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

enum class Level { Scalar, Avx2 };

const KernelTable& scalar_table();
// nullptr when the build or the running CPU lacks AVX2.
const KernelTable* avx2_table();

// Best table for this CPU unless overridden with force_level.
const KernelTable& active();
Level active_level();
// Returns false if the level is unavailable on this machine.
bool force_level(Level level);

}  // namespace blocktau::kernels
