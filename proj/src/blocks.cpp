#include "blocktau/blocks.hpp"

#include "blocktau/error.hpp"
#include "blocktau/rng.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace blocktau {

Partition::Partition(std::vector<int> membership) : membership_(std::move(membership)) {
  if (membership_.empty()) {
    throw Error(ErrorCode::InvalidPartition, "partition has no columns");
  }
  const int K = *std::max_element(membership_.begin(), membership_.end());
  if (*std::min_element(membership_.begin(), membership_.end()) < 1) {
    throw Error(ErrorCode::InvalidPartition, "group ids must start at 1");
  }
  members_.assign(static_cast<std::size_t>(K), {});
  for (std::size_t j = 0; j < membership_.size(); ++j) {
    members_[static_cast<std::size_t>(membership_[j] - 1)].push_back(j);
  }
  for (int k = 1; k <= K; ++k) {
    if (members_[static_cast<std::size_t>(k - 1)].empty()) {
      throw Error(ErrorCode::InvalidPartition,
                  "group " + std::to_string(k) + " is empty; ids must form {1..K}");
    }
  }
}

const std::vector<std::size_t>& Partition::members(int k) const {
  if (k < 1 || k > K()) {
    throw Error(ErrorCode::InvalidBlock, "group " + std::to_string(k) + " does not exist");
  }
  return members_[static_cast<std::size_t>(k - 1)];
}

std::vector<std::size_t> Partition::ordering() const {
  std::vector<std::size_t> out;
  out.reserve(p());
  for (const auto& g : members_) out.insert(out.end(), g.begin(), g.end());
  return out;
}

Partition Partition::restricted(const std::vector<std::size_t>& columns) const {
  std::vector<int> m;
  m.reserve(columns.size());
  for (std::size_t c : columns) m.push_back(membership_.at(c));
  // renumber to 1..K' keeping relative order of ids
  std::vector<int> ids = m;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int& g : m) {
    g = static_cast<int>(std::lower_bound(ids.begin(), ids.end(), g) - ids.begin()) + 1;
  }
  return Partition(std::move(m));
}

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Naive: return "naive";
    case SchemeKind::Block: return "block";
    case SchemeKind::Row: return "row";
    case SchemeKind::Diagonal: return "diag";
    case SchemeKind::Random: return "random";
  }
  return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "naive") return SchemeKind::Naive;
  if (name == "block") return SchemeKind::Block;
  if (name == "row") return SchemeKind::Row;
  if (name == "diag" || name == "diagonal") return SchemeKind::Diagonal;
  if (name == "random") return SchemeKind::Random;
  throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

std::size_t EstimatorScheme::count_for(const Partition& partition, int k1, int k2) const {
  const std::size_t g1 = partition.group_size(k1);
  const std::size_t g2 = partition.group_size(k2);
  if (kind == SchemeKind::Naive || kind == SchemeKind::Block) return g1 * g2;
  const auto it = block_N.find({std::min(k1, k2), std::max(k1, k2)});
  if (it != block_N.end()) return it->second;
  return N.value_or(std::min(g1, g2));
}

void EstimatorScheme::validate(const Partition& partition) const {
  if (kind == SchemeKind::Naive || kind == SchemeKind::Block) return;
  for (const auto& [key, value] : block_N) {
    if (key.first == key.second || key.first < 1 || key.second > partition.K()) {
      throw Error(ErrorCode::InvalidBlock, "N override names an invalid block");
    }
  }
  for (int k1 = 1; k1 <= partition.K(); ++k1) {
    for (int k2 = k1 + 1; k2 <= partition.K(); ++k2) {
      const std::size_t g1 = partition.group_size(k1);
      const std::size_t g2 = partition.group_size(k2);
      const std::size_t n = count_for(partition, k1, k2);
      std::size_t hi = 0;
      switch (kind) {
        case SchemeKind::Row: hi = std::max(g1, g2); break;
        case SchemeKind::Diagonal: hi = std::min(g1, g2); break;
        default: hi = g1 * g2; break;
      }
      if (n < 1 || n > hi) {
        throw Error(ErrorCode::InvalidN,
                    "N=" + std::to_string(n) + " for block (" + std::to_string(k1) + "," +
                        std::to_string(k2) + ") outside [1," + std::to_string(hi) + "] for " +
                        std::string(scheme_name(kind)));
      }
    }
  }
}

std::vector<ColumnPair> block_pair_set(const Partition& partition, int k1, int k2,
                                       const EstimatorScheme& scheme) {
  if (k1 == k2) {
    throw Error(ErrorCode::InvalidBlock, "block_pair_set needs two distinct groups");
  }
  const auto& a = partition.members(k1);
  const auto& b = partition.members(k2);
  const std::size_t N = scheme.count_for(partition, k1, k2);
  std::vector<ColumnPair> out;

  switch (scheme.kind) {
    case SchemeKind::Naive:
    case SchemeKind::Block:
      out.reserve(a.size() * b.size());
      for (std::size_t i : a)
        for (std::size_t j : b) out.emplace_back(i, j);
      return out;
    case SchemeKind::Row: {
      if (N < 1 || N > std::max(a.size(), b.size())) break;
      if (a.size() >= b.size()) {
        for (std::size_t r = 0; r < N; ++r) out.emplace_back(a[r], b.front());
      } else {
        for (std::size_t r = 0; r < N; ++r) out.emplace_back(a.front(), b[r]);
      }
      return out;
    }
    case SchemeKind::Diagonal: {
      if (N < 1 || N > std::min(a.size(), b.size())) break;
      for (std::size_t r = 0; r < N; ++r) out.emplace_back(a[r], b[r]);
      return out;
    }
    case SchemeKind::Random: {
      if (N < 1 || N > a.size() * b.size()) break;
      // Sample in canonical orientation so (k1,k2) and (k2,k1) agree.
      const bool flip = k1 > k2;
      const auto& lo = flip ? b : a;
      const auto& hi = flip ? a : b;
      std::vector<std::size_t> cells(lo.size() * hi.size());
      for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = c;
      std::vector<std::size_t> chosen;
      chosen.reserve(N);
      Engine engine(derive_seed(scheme.seed, static_cast<std::uint64_t>(std::min(k1, k2)),
                                static_cast<std::uint64_t>(std::max(k1, k2))));
      std::sample(cells.begin(), cells.end(), std::back_inserter(chosen), N, engine);
      for (std::size_t c : chosen) {
        const std::size_t i = lo[c / hi.size()];
        const std::size_t j = hi[c % hi.size()];
        if (flip) out.emplace_back(j, i); else out.emplace_back(i, j);
      }
      return out;
    }
  }
  throw Error(ErrorCode::InvalidN, "N=" + std::to_string(N) + " out of bounds for scheme " +
                                       std::string(scheme_name(scheme.kind)));
}

}  // namespace blocktau
