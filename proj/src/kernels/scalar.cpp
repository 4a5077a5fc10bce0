#include "blocktau/kernels.hpp"

namespace blocktau::kernels {
namespace {

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

SignCounts sign_counts_scalar(double xi, double yi, const double* x,
                              const double* y, std::size_t n) {
  SignCounts out;
  for (std::size_t k = 0; k < n; ++k) {
    const int s = sgn(xi - x[k]) * sgn(yi - y[k]);
    out.concordant += s > 0;
    out.discordant += s < 0;
  }
  return out;
}

WeightedOrthants weighted_orthants_scalar(double xi, double yi,
                                          const double* x, const double* y,
                                          const double* w, std::size_t n) {
  WeightedOrthants out;
  for (std::size_t k = 0; k < n; ++k) {
    const int sx = sgn(xi - x[k]);
    const int sy = sgn(yi - y[k]);
    const int s = sx * sy;
    if (s > 0) out.concordant += w[k];
    if (s < 0) out.discordant += w[k];
    if (s == 0) out.tied += w[k];
    if (sx < 0 && sy < 0) out.upper_upper += w[k];
    if (sx < 0 && sy > 0) out.upper_lower += w[k];
  }
  return out;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

const KernelTable kScalar{"scalar", &sign_counts_scalar,
                          &weighted_orthants_scalar, &dot_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace blocktau::kernels
