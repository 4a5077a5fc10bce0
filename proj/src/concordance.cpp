#include "blocktau/concordance.hpp"

#include "blocktau/error.hpp"
#include "blocktau/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace blocktau {
namespace {

constexpr std::size_t kBruteForceBelow = 48;

void check_pair_input(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "x and y differ in length");
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  }
}

std::int64_t pair_count(std::size_t n) {
  return static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
}

// Counts pairs i<j with v[i] > v[j]; v is sorted on return.
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf) {
  const std::size_t n = v.size();
  std::int64_t inv = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, out = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inv += static_cast<std::int64_t>(mid - i);
          buf[out++] = v[j++];
        } else {
          buf[out++] = v[i++];
        }
      }
      while (i < mid) buf[out++] = v[i++];
      while (j < hi) buf[out++] = v[j++];
    }
    v.swap(buf);
  }
  return inv;
}

}  // namespace

bool has_ties(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

ConcordanceCount concordance_count_brute(std::span<const double> x,
                                         std::span<const double> y) {
  check_pair_input(x, y);
  const auto& k = kernels::active();
  const std::size_t n = x.size();
  ConcordanceCount out;
  out.pairs = pair_count(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto c = k.sign_counts(x[i], y[i], x.data() + i + 1, y.data() + i + 1, n - i - 1);
    out.concordant += c.concordant;
    out.discordant += c.discordant;
  }
  return out;
}

ConcordanceCount concordance_count_fast(std::span<const double> x,
                                        std::span<const double> y) {
  check_pair_input(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  for (std::size_t r = 1; r < n; ++r) {
    if (x[order[r]] == x[order[r - 1]]) {
      throw Error(ErrorCode::InvalidArgument, "fast path requires tie-free x");
    }
  }
  std::vector<double> ys(n), buf(n);
  for (std::size_t r = 0; r < n; ++r) ys[r] = y[order[r]];
  const std::int64_t discordant = count_inversions(ys, buf);
  if (std::adjacent_find(ys.begin(), ys.end()) != ys.end()) {
    throw Error(ErrorCode::InvalidArgument, "fast path requires tie-free y");
  }
  ConcordanceCount out;
  out.pairs = pair_count(n);
  out.discordant = discordant;
  out.concordant = out.pairs - discordant;
  return out;
}

double pairwise_kendall(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite input to pairwise_kendall");
    }
  }
  if (x.size() < kBruteForceBelow || has_ties(x) || has_ties(y)) {
    return concordance_count_brute(x, y).tau();
  }
  return concordance_count_fast(x, y).tau();
}

int concordance_sign(std::pair<double, double> a, std::pair<double, double> b) {
  const double d1 = a.first - b.first;
  const double d2 = a.second - b.second;
  return ((d1 > 0) - (d1 < 0)) * ((d2 > 0) - (d2 < 0));
}

KendallMatrix kendall_matrix(const ObservationMatrix& data) {
  if (data.n() < 2) throw Error(ErrorCode::DegenerateSample, "need at least two observations");
  const std::size_t p = data.p();
  KendallMatrix out;
  out.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  out.scheme = SchemeKind::Naive;
  out.names = data.column_names();
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      const double t = pairwise_kendall(data.column(a), data.column(b));
      out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = t;
      out.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = t;
    }
  }
  return out;
}

std::string_view averaging_set_name(AveragingSet set) {
  switch (set) {
    case AveragingSet::Pair: return "pair";
    case AveragingSet::Block: return "block";
    case AveragingSet::Row: return "row";
    case AveragingSet::Diagonal: return "diagonal";
  }
  return "unknown";
}

ConcordanceQuantities concordance_quantities(const ObservationMatrix& data, ColumnPair pair1,
                                             std::optional<ColumnPair> pair2) {
  const std::size_t n = data.n();
  if (n < 3) throw Error(ErrorCode::DegenerateSample, "quantities need at least three rows");
  auto check = [&](ColumnPair pr) {
    if (pr.first == pr.second) throw Error(ErrorCode::InvalidPair, "pair repeats a column");
    if (pr.first >= data.p() || pr.second >= data.p()) {
      throw Error(ErrorCode::InvalidPair, "pair column out of range");
    }
  };
  check(pair1);
  int overlap = -1;
  if (pair2) {
    check(*pair2);
    overlap = (pair1.first == pair2->first) + (pair1.first == pair2->second) +
              (pair1.second == pair2->first) + (pair1.second == pair2->second);
    if (overlap == 2) throw Error(ErrorCode::InvalidPair, "pair2 equals pair1");
  }

  const auto x1 = data.column(pair1.first), y1 = data.column(pair1.second);
  std::span<const double> x2, y2;
  if (pair2) {
    x2 = data.column(pair2->first);
    y2 = data.column(pair2->second);
  }
  auto credit = [](double a1, double b1, double a2, double b2) -> std::int64_t {
    // doubled credit: 2 concordant, 1 tied, 0 discordant
    const double d1 = a1 - a2, d2 = b1 - b2;
    return 1 + ((d1 > 0) - (d1 < 0)) * ((d2 > 0) - (d2 < 0));
  };

  // Row sums s_i = sum_k c_ik and the pair sums needed to remove k == l terms.
  std::vector<std::int64_t> s1(n, 0), s2(n, 0);
  std::int64_t sum1 = 0, sum11 = 0, sum12 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const std::int64_t c1 = credit(x1[i], y1[i], x1[k], y1[k]);
      s1[i] += c1;
      s1[k] += c1;
      sum1 += c1;
      sum11 += c1 * c1;
      if (pair2) {
        const std::int64_t c2 = credit(x2[i], y2[i], x2[k], y2[k]);
        s2[i] += c2;
        s2[k] += c2;
        sum12 += c1 * c2;
      }
    }
  }
  std::int64_t row11 = 0, row12 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    row11 += s1[i] * s1[i];
    row12 += s1[i] * s2[i];
  }
  const double pairs = static_cast<double>(pair_count(n));
  const double triples = static_cast<double>(n) * static_cast<double>(n - 1) *
                         static_cast<double>(n - 2);

  ConcordanceQuantities q;
  q.set = AveragingSet::Pair;
  const std::int64_t net = sum1 - pair_count(n);  // concordant - discordant
  q.P = concordance_probability(static_cast<double>(net) / pairs);
  // ordered triples (i,k,l) distinct: sum_i (s_i^2 - sum_k c_ik^2)
  q.Q = static_cast<double>(row11 - 2 * sum11) / (4.0 * triples);
  if (pair2) {
    const double two = static_cast<double>(sum12) / (4.0 * pairs);
    const double three = static_cast<double>(row12 - 2 * sum12) / (4.0 * triples);
    if (overlap == 1) {
      q.R = two;
      q.S = three;
    } else {
      q.T = two;
      q.U = three;
    }
  }
  return q;
}

}  // namespace blocktau
