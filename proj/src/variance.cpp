#include "blocktau/variance.hpp"

#include "blocktau/error.hpp"
#include "blocktau/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace blocktau {
namespace {

double need(const std::optional<double>& v, const char* name, SchemeKind scheme) {
  if (!v) {
    throw Error(ErrorCode::MissingQuantity, std::string("quantity ") + name + " is required for the " +
                                                std::string(scheme_name(scheme)) + " formula");
  }
  return *v;
}

void check_input(const VarianceInput& in) {
  if (in.n < 3) throw Error(ErrorCode::InvalidArgument, "variance formulas need n >= 3");
  if (in.g1 < 1 || in.g2 < 1) throw Error(ErrorCode::InvalidArgument, "group sizes must be >= 1");
  const std::size_t B = in.g1 * in.g2;
  std::size_t hi = B;
  if (in.scheme == SchemeKind::Row) hi = std::max(in.g1, in.g2);
  if (in.scheme == SchemeKind::Diagonal) hi = std::min(in.g1, in.g2);
  if ((in.scheme == SchemeKind::Row || in.scheme == SchemeKind::Diagonal ||
       in.scheme == SchemeKind::Random) &&
      (in.N < 1 || in.N > hi)) {
    throw Error(ErrorCode::InvalidN, "N=" + std::to_string(in.N) + " outside [1," +
                                         std::to_string(hi) + "] for " +
                                         std::string(scheme_name(in.scheme)));
  }
}

// Shared shape of every formula:
//   scale * (P - P^2 + two + lead * (Q - P^2 + three))
// where two/three collect the cross-pair terms. Keeping one evaluation order
// makes the reductions between schemes bit-identical.
struct Terms {
  double count = 1.0;  // number of averaged pairs
  double P = 0.0;
  double Q = 0.0;
  double two = 0.0;
  double three = 0.0;
};

Terms terms_for(const VarianceInput& in) {
  const auto& q = in.quantities;
  const double P2 = q.P * q.P;
  const double a = static_cast<double>(in.g1 - 1) * static_cast<double>(in.g2 - 1);
  const double b = static_cast<double>(in.g1 + in.g2 - 2);
  const double B = static_cast<double>(in.g1 * in.g2);
  const double N = static_cast<double>(in.N);
  Terms t;
  t.P = q.P;
  t.Q = q.Q;
  switch (in.scheme) {
    case SchemeKind::Naive: break;
    case SchemeKind::Block:
    case SchemeKind::Random: {
      const double R = need(q.R, "R", in.scheme), S = need(q.S, "S", in.scheme);
      const double T = need(q.T, "T", in.scheme), U = need(q.U, "U", in.scheme);
      double f = 1.0;
      if (in.scheme == SchemeKind::Random) {
        f = in.g1 * in.g2 > 1 ? (N - 1.0) / (B - 1.0) : 0.0;
        t.count = N;
      } else {
        t.count = B;
      }
      t.two = f * (a * (T - P2) + b * (R - P2));
      t.three = f * (a * (U - P2) + b * (S - P2));
      break;
    }
    case SchemeKind::Row: {
      const double R = need(q.R, "R", in.scheme), S = need(q.S, "S", in.scheme);
      t.count = N;
      t.two = (N - 1.0) * (R - P2);
      t.three = (N - 1.0) * (S - P2);
      break;
    }
    case SchemeKind::Diagonal: {
      const double T = need(q.T, "T", in.scheme), U = need(q.U, "U", in.scheme);
      t.count = N;
      t.two = (N - 1.0) * (T - P2);
      t.three = (N - 1.0) * (U - P2);
      break;
    }
  }
  return t;
}

VarianceResult clamp(double raw) {
  VarianceResult r;
  r.raw = raw;
  r.clamped = raw < 0.0;
  r.value = r.clamped ? 0.0 : raw;
  return r;
}

// Column-grouping of a pair list: every pair touches two columns, and two
// distinct pairs overlap iff they share a column.
struct PairIndex {
  std::vector<std::size_t> columns;             // distinct columns used
  std::vector<std::array<std::size_t, 2>> slot;  // pair -> positions in columns
  double overlap_count = 0.0;                   // ordered overlapping combinations
  double disjoint_count = 0.0;
};

PairIndex index_pairs(const std::vector<ColumnPair>& pairs, std::size_t p) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidPair, "empty pair list");
  PairIndex idx;
  std::map<std::size_t, std::size_t> pos;
  std::map<std::pair<std::size_t, std::size_t>, int> seen;
  for (const auto& [a, b] : pairs) {
    if (a == b || a >= p || b >= p) throw Error(ErrorCode::InvalidPair, "invalid column pair");
    if (seen[{std::min(a, b), std::max(a, b)}]++) {
      throw Error(ErrorCode::InvalidPair, "pair list repeats a pair");
    }
    for (std::size_t c : {a, b})
      if (!pos.count(c)) {
        pos[c] = idx.columns.size();
        idx.columns.push_back(c);
      }
    idx.slot.push_back({pos[a], pos[b]});
  }
  std::vector<double> m(idx.columns.size(), 0.0);
  for (const auto& s : idx.slot) m[s[0]] += 1.0, m[s[1]] += 1.0;
  for (double mc : m) idx.overlap_count += mc * (mc - 1.0);
  const double P = static_cast<double>(pairs.size());
  idx.disjoint_count = P * (P - 1.0) - idx.overlap_count;
  return idx;
}

ConcordanceQuantities assemble(double n, double pairs, const PairIndex& idx, AveragingSet set,
                               long double credit_sum, long double q_numerator,
                               long double overlap_two, long double disjoint_two,
                               long double overlap_three, long double disjoint_three) {
  const double M = n * (n - 1.0) / 2.0;
  const double triples = n * (n - 1.0) * (n - 2.0);
  ConcordanceQuantities q;
  q.set = set;
  q.P = static_cast<double>(credit_sum / (2.0L * M * pairs));
  q.Q = static_cast<double>(q_numerator / (4.0L * triples * pairs));
  if (idx.overlap_count > 0) {
    q.R = static_cast<double>(overlap_two / (4.0L * M * idx.overlap_count));
    q.S = static_cast<double>(overlap_three / (4.0L * triples * idx.overlap_count));
  }
  if (idx.disjoint_count > 0) {
    q.T = static_cast<double>(disjoint_two / (4.0L * M * idx.disjoint_count));
    q.U = static_cast<double>(disjoint_three / (4.0L * triples * idx.disjoint_count));
  }
  return q;
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Count of added indices < i.
  std::int64_t prefix(std::size_t i) const {
    std::int64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int32_t> tree_;
};

}  // namespace

VarianceResult finite_sample_variance(const VarianceInput& input) {
  check_input(input);
  const Terms t = terms_for(input);
  const double n = static_cast<double>(input.n);
  const double P2 = t.P * t.P;
  const double raw = 8.0 / (t.count * n * (n - 1.0)) *
                     (t.P - P2 + t.two + 2.0 * (n - 2.0) * (t.Q - P2 + t.three));
  return clamp(raw);
}

VarianceResult asymptotic_variance(const VarianceInput& input, LimitMode mode) {
  VarianceInput in = input;
  if (in.n < 3) in.n = 3;  // n does not enter the limits
  check_input(in);
  const auto& q = in.quantities;
  const double P2 = q.P * q.P;
  if (mode == LimitMode::LargeBlock) {
    switch (in.scheme) {
      case SchemeKind::Naive: return clamp(16.0 * (q.Q - P2));
      case SchemeKind::Block:
      case SchemeKind::Random: return clamp(16.0 * (need(q.U, "U", in.scheme) - P2));
      case SchemeKind::Row: return clamp(16.0 * (need(q.S, "S", in.scheme) - P2));
      case SchemeKind::Diagonal: return clamp(16.0 * (need(q.U, "U", in.scheme) - P2));
    }
  }
  const Terms t = terms_for(in);
  return clamp(16.0 / t.count * (t.Q - P2 + t.three));
}

OrderingReport ordering_report(const OrderingInput& in) {
  const auto& b = in.block;
  const SchemeKind K = SchemeKind::Block;
  const double P = b.P, Q = b.Q;
  const double R = need(b.R, "R", K), S = need(b.S, "S", K);
  const double T = need(b.T, "T", K), U = need(b.U, "U", K);
  need(in.row.R, "R", SchemeKind::Row);
  need(in.row.S, "S", SchemeKind::Row);
  need(in.diagonal.T, "T", SchemeKind::Diagonal);
  need(in.diagonal.U, "U", SchemeKind::Diagonal);

  OrderingReport rep;
  rep.us_precondition = U < S && S < 0.5 * (Q + U);
  rep.tr_precondition = T < R && R < 0.5 * (P + T);
  rep.applicable = rep.us_precondition && rep.tr_precondition;

  const std::size_t N = in.N ? in.N : std::min(in.g1, in.g2);
  auto var = [&](SchemeKind scheme, ConcordanceQuantities q, std::size_t count) {
    q.P = P;  // one concordance probability per block
    VarianceInput v{q, in.n, in.g1, in.g2, count, scheme};
    return finite_sample_variance(v).value;
  };
  ConcordanceQuantities naive = b;
  const double vb = var(SchemeKind::Block, b, 1);
  const double vd = var(SchemeKind::Diagonal, in.diagonal, N);
  const double vu = var(SchemeKind::Random, b, N);
  rep.variances = {{SchemeKind::Block, vb},
                   {SchemeKind::Diagonal, vd},
                   {SchemeKind::Random, vu},
                   {SchemeKind::Row, var(SchemeKind::Row, in.row, N)},
                   {SchemeKind::Naive, var(SchemeKind::Naive, naive, 1)}};
  std::stable_sort(rep.variances.begin(), rep.variances.end(),
                   [](const SchemeVariance& x, const SchemeVariance& y) {
                     return x.variance < y.variance;
                   });
  rep.finite_order_holds = vb < vd && vd < vu;

  auto probe = [&](const char* label, double u, double s, double q) {
    std::ostringstream os;
    os.precision(8);
    if (u > s + in.tolerance) {
      os << label << ": U=" << u << " > S=" << s;
      rep.violations.push_back(os.str());
    }
    if (s > q + in.tolerance) {
      std::ostringstream o2;
      o2.precision(8);
      o2 << label << ": S=" << s << " > Q=" << q;
      rep.violations.push_back(o2.str());
    }
  };
  probe("block", U, S, Q);
  probe("row/diagonal", *in.diagonal.U, *in.row.S, in.row.Q);
  rep.open_problem_holds = rep.violations.empty();
  return rep;
}

std::vector<ColumnPair> averaging_pairs(const Partition& partition, int k1, int k2,
                                        AveragingSet set, const EstimatorScheme& scheme) {
  EstimatorScheme s = scheme;
  switch (set) {
    case AveragingSet::Pair:
      return {{partition.members(k1).front(), partition.members(k2).front()}};
    case AveragingSet::Block: s.kind = SchemeKind::Block; break;
    case AveragingSet::Row: s.kind = SchemeKind::Row; break;
    case AveragingSet::Diagonal: s.kind = SchemeKind::Diagonal; break;
  }
  return block_pair_set(partition, k1, k2, s);
}

ConcordanceQuantities averaged_quantities(const ObservationMatrix& data,
                                          const std::vector<ColumnPair>& pairs,
                                          AveragingSet set) {
  const std::size_t n = data.n();
  if (n < 3) throw Error(ErrorCode::DegenerateSample, "quantities need at least three rows");
  const PairIndex idx = index_pairs(pairs, data.p());
  const std::size_t A = pairs.size(), C = idx.columns.size();

  std::vector<std::span<const double>> col(C);
  for (std::size_t c = 0; c < C; ++c) col[c] = data.column(idx.columns[c]);

  // s(i, a): doubled credits of row i against all other rows for pair a.
  std::vector<std::int64_t> s(n * A, 0);
  std::vector<int> sign(C);
  std::vector<std::int64_t> by_col(C);
  std::int64_t credit_sum = 0, sq_sum = 0, overlap_two = 0, disjoint_two = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      for (std::size_t c = 0; c < C; ++c) {
        const double d = col[c][i] - col[c][k];
        sign[c] = (d > 0) - (d < 0);
      }
      std::fill(by_col.begin(), by_col.end(), 0);
      std::int64_t tot = 0, sq = 0;
      for (std::size_t a = 0; a < A; ++a) {
        const std::int64_t ca = 1 + sign[idx.slot[a][0]] * sign[idx.slot[a][1]];
        s[i * A + a] += ca;
        s[k * A + a] += ca;
        tot += ca;
        sq += ca * ca;
        by_col[idx.slot[a][0]] += ca;
        by_col[idx.slot[a][1]] += ca;
      }
      std::int64_t col_sq = 0;
      for (std::int64_t v : by_col) col_sq += v * v;
      const std::int64_t ov = col_sq - 2 * sq;
      credit_sum += tot;
      sq_sum += sq;
      overlap_two += ov;
      disjoint_two += tot * tot - sq - ov;
    }
  }
  __int128 q_num = 0, overlap_three = 0, disjoint_three = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(by_col.begin(), by_col.end(), 0);
    __int128 tot = 0, sq = 0;
    for (std::size_t a = 0; a < A; ++a) {
      const std::int64_t v = s[i * A + a];
      tot += v;
      sq += static_cast<__int128>(v) * v;
      by_col[idx.slot[a][0]] += v;
      by_col[idx.slot[a][1]] += v;
    }
    __int128 col_sq = 0;
    for (std::int64_t v : by_col) col_sq += static_cast<__int128>(v) * v;
    q_num += sq;
    overlap_three += col_sq - 2 * sq;
    disjoint_three += tot * tot - col_sq + sq;
  }
  // remove k == l terms from the three-row sums
  q_num -= 2 * static_cast<__int128>(sq_sum);
  overlap_three -= 2 * static_cast<__int128>(overlap_two);
  disjoint_three -= 2 * static_cast<__int128>(disjoint_two);

  return assemble(static_cast<double>(n), static_cast<double>(A), idx, set,
                  static_cast<long double>(credit_sum), static_cast<long double>(q_num),
                  static_cast<long double>(overlap_two), static_cast<long double>(disjoint_two),
                  static_cast<long double>(overlap_three), static_cast<long double>(disjoint_three));
}

ConcordanceQuantities averaged_quantities(const ObservationMatrix& data,
                                          const Partition& partition, int k1, int k2,
                                          AveragingSet set, const EstimatorScheme& scheme) {
  if (partition.p() != data.p()) {
    throw Error(ErrorCode::InvalidPartition, "partition size does not match the data");
  }
  return averaged_quantities(data, averaging_pairs(partition, k1, k2, set, scheme), set);
}

ConcordanceQuantities oracle_quantities(const ObservationMatrix& data,
                                        const std::vector<ColumnPair>& pairs, AveragingSet set,
                                        const OracleOptions& options) {
  const std::size_t n = data.n();
  if (n < 3) throw Error(ErrorCode::DegenerateSample, "quantities need at least three rows");
  if (options.two_row_samples == 0) {
    throw Error(ErrorCode::InvalidArgument, "two_row_samples must be positive");
  }
  const PairIndex idx = index_pairs(pairs, data.p());
  const std::size_t A = pairs.size(), C = idx.columns.size();

  // Ranks and x-order per column.
  std::vector<std::vector<std::uint32_t>> rank(C), order(C);
  for (std::size_t c = 0; c < C; ++c) {
    const auto v = data.column(idx.columns[c]);
    order[c].resize(n);
    std::iota(order[c].begin(), order[c].end(), 0u);
    std::sort(order[c].begin(), order[c].end(), [&](auto a, auto b) { return v[a] < v[b]; });
    rank[c].resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      if (r > 0 && v[order[c][r]] == v[order[c][r - 1]]) {
        throw Error(ErrorCode::InvalidArgument, "oracle quantities need tie-free columns");
      }
      rank[c][order[c][r]] = static_cast<std::uint32_t>(r);
    }
  }

  std::vector<std::vector<std::int64_t>> by_col(C, std::vector<std::int64_t>(n, 0));
  std::vector<std::int64_t> tot(n, 0);
  std::vector<std::int64_t> s(n);
  long double credit_sum = 0, q_num = 0, sq_total = 0;
  for (std::size_t a = 0; a < A; ++a) {
    const std::size_t cx = idx.slot[a][0], cy = idx.slot[a][1];
    Fenwick fw(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::uint32_t i = order[cx][r];
      const std::uint32_t ry = rank[cy][i];
      const std::int64_t lower = fw.prefix(ry);
      fw.add(ry);
      // concordant partners: lower-left plus upper-right
      const std::int64_t conc = 2 * lower + static_cast<std::int64_t>(n - 1) -
                                static_cast<std::int64_t>(r) - static_cast<std::int64_t>(ry);
      s[i] = 2 * conc;
    }
    long double sum = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t v = s[i];
      sum += v;
      sq += static_cast<long double>(v) * v;
      by_col[cx][i] += v;
      by_col[cy][i] += v;
      tot[i] += v;
    }
    credit_sum += sum / 2;  // each row pair counted twice
    // tie-free: c^2 = 2c, so sum_{i<k} c^2 = sum_i s_i
    q_num += sq - 2 * sum;
    sq_total += sq;
  }
  long double overlap_three = 0, disjoint_three = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double col_sq = 0;
    for (std::size_t c = 0; c < C; ++c) col_sq += static_cast<long double>(by_col[c][i]) * by_col[c][i];
    const long double t = tot[i];
    overlap_three += col_sq;
    disjoint_three += t * t - col_sq;
  }
  overlap_three -= 2 * sq_total;
  disjoint_three += sq_total;

  // Two-row terms from random row pairs.
  Engine engine(derive_seed(options.seed, 0x7e57));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<int> sign(C);
  std::vector<std::int64_t> col_acc(C);
  long double overlap_two_mean = 0, disjoint_two_mean = 0;
  for (std::size_t m = 0; m < options.two_row_samples; ++m) {
    const std::size_t i = pick(engine);
    std::size_t k = pick(engine);
    while (k == i) k = pick(engine);
    for (std::size_t c = 0; c < C; ++c) sign[c] = rank[c][i] > rank[c][k] ? 1 : -1;
    std::fill(col_acc.begin(), col_acc.end(), 0);
    std::int64_t t = 0, sq = 0;
    for (std::size_t a = 0; a < A; ++a) {
      const std::int64_t ca = 1 + sign[idx.slot[a][0]] * sign[idx.slot[a][1]];
      t += ca;
      sq += ca * ca;
      col_acc[idx.slot[a][0]] += ca;
      col_acc[idx.slot[a][1]] += ca;
    }
    std::int64_t col_sq = 0;
    for (std::int64_t v : col_acc) col_sq += v * v;
    overlap_two_mean += col_sq - 2 * sq;
    disjoint_two_mean += t * t - sq - (col_sq - 2 * sq);
  }
  const long double M = static_cast<long double>(n) * (n - 1) / 2;
  const long double scale = M / static_cast<long double>(options.two_row_samples);
  const long double overlap_two = overlap_two_mean * scale;
  const long double disjoint_two = disjoint_two_mean * scale;
  overlap_three -= 2 * overlap_two;
  disjoint_three -= 2 * disjoint_two;

  return assemble(static_cast<double>(n), static_cast<double>(A), idx, set, credit_sum, q_num,
                  overlap_two, disjoint_two, overlap_three, disjoint_three);
}

}  // namespace blocktau
