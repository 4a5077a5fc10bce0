#pragma once

#include "blocktau/blocks.hpp"
#include "blocktau/observation.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace blocktau {

struct LoadOptions {
  bool header = true;
  // Reject rows holding NaN/Inf/empty fields instead of dropping them.
  bool strict = false;
  char delimiter = ',';
};

struct LoadedObservations {
  ObservationMatrix data;
  std::size_t dropped_rows = 0;
  std::vector<std::size_t> dropped_lines;  // 1-based
};

// Throws ParseError(line, column) on malformed fields or ragged rows and
// EmptyAfterFiltering when no row survives.
LoadedObservations parse_observations(std::istream& in, const LoadOptions& options = {});
LoadedObservations load_observations(const std::string& path, const LoadOptions& options = {});

// `column,group` rows; column is a name or a 1-based index. A first row
// whose group field is not an integer is taken as a header.
Partition parse_group_file(std::istream& in, const std::vector<std::string>& column_names);
Partition load_group_file(const std::string& path, const std::vector<std::string>& column_names);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

struct NamedMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
};

// Square matrix with a header row and a leading name column.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names);
NamedMatrix read_matrix_csv(std::istream& in);

// Two numeric columns, optional header (e.g. u,g for a tabulated generator).
std::pair<std::vector<double>, std::vector<double>> read_two_columns(std::istream& in);

std::string read_text_file(const std::string& path);

}  // namespace blocktau
