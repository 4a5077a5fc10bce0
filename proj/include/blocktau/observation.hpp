#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace blocktau {

// n x p sample stored column-major; rows are replications, columns variables.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  explicit ObservationMatrix(Eigen::MatrixXd values,
                             std::vector<std::string> column_names = {});

  std::size_t n() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(values_.cols()); }

  std::span<const double> column(std::size_t j) const {
    return {values_.col(static_cast<Eigen::Index>(j)).data(), n()};
  }

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& column_names() const { return names_; }

  // Selects a subset of rows, keeping names.
  ObservationMatrix rows(const std::vector<std::size_t>& index) const;
  ObservationMatrix columns(const std::vector<std::size_t>& index) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

}  // namespace blocktau
