#include "blocktau/observation.hpp"

#include "blocktau/error.hpp"

#include <cmath>

namespace blocktau {

ObservationMatrix::ObservationMatrix(Eigen::MatrixXd values,
                                     std::vector<std::string> column_names)
    : values_(std::move(values)), names_(std::move(column_names)) {
  if (!values_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument,
                "observation matrix contains non-finite values");
  }
  if (names_.empty()) {
    names_.reserve(p());
    for (std::size_t j = 0; j < p(); ++j) names_.push_back("V" + std::to_string(j + 1));
  } else if (names_.size() != p()) {
    throw Error(ErrorCode::LengthMismatch, "column name count differs from column count");
  }
}

ObservationMatrix ObservationMatrix::rows(const std::vector<std::size_t>& index) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(index.size()), values_.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(index[r]));
  }
  return ObservationMatrix(std::move(out), names_);
}

ObservationMatrix ObservationMatrix::columns(const std::vector<std::size_t>& index) const {
  Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(index.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < index.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = values_.col(static_cast<Eigen::Index>(index.at(c)));
    names.push_back(names_.at(index[c]));
  }
  return ObservationMatrix(std::move(out), std::move(names));
}

}  // namespace blocktau
