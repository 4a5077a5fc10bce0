#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blocktau {

using ColumnPair = std::pair<std::size_t, std::size_t>;

// Assignment of p columns to groups 1..K. Members of each group are kept
// sorted by original column index; groups need not be contiguous.
class Partition {
 public:
  explicit Partition(std::vector<int> membership);

  std::size_t p() const { return membership_.size(); }
  int K() const { return static_cast<int>(members_.size()); }
  int group_of(std::size_t column) const { return membership_.at(column); }
  const std::vector<std::size_t>& members(int k) const;
  std::size_t group_size(int k) const { return members(k).size(); }
  const std::vector<int>& membership() const { return membership_; }

  // Columns ordered by (group, original index).
  std::vector<std::size_t> ordering() const;
  // Partition of a column subset, preserving group ids of the kept columns.
  Partition restricted(const std::vector<std::size_t>& columns) const;

 private:
  std::vector<int> membership_;
  std::vector<std::vector<std::size_t>> members_;
};

enum class SchemeKind { Naive, Block, Row, Diagonal, Random };

std::string_view scheme_name(SchemeKind kind);
SchemeKind parse_scheme(std::string_view name);

struct EstimatorScheme {
  SchemeKind kind = SchemeKind::Block;
  // Count used for every off-diagonal block unless overridden in block_N;
  // absent means min(|G_k1|, |G_k2|).
  std::optional<std::size_t> N;
  // Keyed by (min(k1,k2), max(k1,k2)).
  std::map<std::pair<int, int>, std::size_t> block_N;
  std::uint64_t seed = 0;

  std::size_t count_for(const Partition& partition, int k1, int k2) const;
  // Throws InvalidN if any block count is out of bounds for the kind.
  void validate(const Partition& partition) const;
};

struct KendallMatrix {
  Eigen::MatrixXd values;
  SchemeKind scheme = SchemeKind::Naive;
  std::optional<Partition> partition;
  std::vector<std::string> names;
};

// Column pairs (member of G_k1, member of G_k2) averaged by the scheme.
std::vector<ColumnPair> block_pair_set(const Partition& partition, int k1,
                                       int k2, const EstimatorScheme& scheme);

}  // namespace blocktau
