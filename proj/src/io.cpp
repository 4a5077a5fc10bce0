#include "blocktau/io.hpp"

#include "blocktau/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace blocktau {
namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\"");
  return s.substr(b, e - b + 1);
}

enum class Field { Number, Missing, Bad };

// NaN, Inf and empty fields count as missing; anything else must parse fully.
Field parse_field(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return Field::Missing;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  if (ec == std::errc::result_out_of_range) return Field::Missing;
  if (ec != std::errc() || ptr != s.data() + s.size()) return Field::Bad;
  return std::isfinite(out) ? Field::Number : Field::Missing;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return f;
}

bool parse_int(const std::string& s, long& out) {
  const std::string t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return !t.empty() && ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace

LoadedObservations parse_observations(std::istream& in, const LoadOptions& options) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> names;
  std::size_t width = 0;
  if (options.header) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw Error(ErrorCode::EmptyAfterFiltering, "input is empty");
    for (const auto& f : split(line, options.delimiter)) names.push_back(trim(f));
    width = names.size();
  }
  LoadedObservations out;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, options.delimiter);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError(lineno, std::min(fields.size(), width) + 1,
                       "line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                           " fields, found " + std::to_string(fields.size()));
    }
    bool missing = false;
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      const Field f = parse_field(fields[j], row[j]);
      if (f == Field::Bad) {
        throw ParseError(lineno, j + 1, "line " + std::to_string(lineno) + ", column " +
                                            std::to_string(j + 1) + ": cannot parse '" +
                                            trim(fields[j]) + "'");
      }
      if (f == Field::Missing) {
        if (options.strict) {
          throw ParseError(lineno, j + 1, "line " + std::to_string(lineno) + ", column " +
                                              std::to_string(j + 1) + ": non-finite value");
        }
        missing = true;
      }
    }
    if (missing) {
      ++out.dropped_rows;
      out.dropped_lines.push_back(lineno);
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::EmptyAfterFiltering, "no complete rows in input");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * width + j];
  out.data = ObservationMatrix(std::move(m), std::move(names));
  return out;
}

LoadedObservations load_observations(const std::string& path, const LoadOptions& options) {
  auto f = open_or_throw(path);
  return parse_observations(f, options);
}

Partition parse_group_file(std::istream& in, const std::vector<std::string>& column_names) {
  std::map<std::string, std::size_t> by_name;
  for (std::size_t j = 0; j < column_names.size(); ++j) by_name[column_names[j]] = j;
  std::vector<int> membership(column_names.size(), 0);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) {
      throw ParseError(lineno, 1, "group file line " + std::to_string(lineno) +
                                      ": expected 'column,group'");
    }
    long group = 0;
    if (!parse_int(fields[1], group)) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError(lineno, 2, "group file line " + std::to_string(lineno) +
                                      ": group id is not an integer");
    }
    first = false;
    const std::string key = trim(fields[0]);
    std::size_t col = 0;
    long index = 0;
    if (auto it = by_name.find(key); it != by_name.end()) {
      col = it->second;
    } else if (parse_int(key, index) && index >= 1 &&
               static_cast<std::size_t>(index) <= column_names.size()) {
      col = static_cast<std::size_t>(index - 1);
    } else {
      throw ParseError(lineno, 1, "group file line " + std::to_string(lineno) +
                                      ": unknown column '" + key + "'");
    }
    if (group < 1) {
      throw ParseError(lineno, 2, "group ids must be positive");
    }
    if (membership[col] != 0) {
      throw Error(ErrorCode::InvalidPartition, "column '" + column_names[col] + "' assigned twice");
    }
    membership[col] = static_cast<int>(group);
  }
  for (std::size_t j = 0; j < membership.size(); ++j) {
    if (membership[j] == 0) {
      throw Error(ErrorCode::InvalidPartition, "column '" + column_names[j] + "' has no group");
    }
  }
  return Partition(std::move(membership));
}

Partition load_group_file(const std::string& path, const std::vector<std::string>& column_names) {
  auto f = open_or_throw(path);
  return parse_group_file(f, column_names);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names) {
  auto name = [&](Eigen::Index j) {
    return static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                      : "V" + std::to_string(j + 1);
  };
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << name(j);
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << name(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

NamedMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyAfterFiltering, "empty matrix file");
  ++lineno;
  NamedMatrix out;
  const auto header = split(line, ',');
  for (std::size_t j = 1; j < header.size(); ++j) out.names.push_back(trim(header[j]));
  const auto p = static_cast<Eigen::Index>(out.names.size());
  out.values.resize(p, p);
  Eigen::Index i = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (i >= p || static_cast<Eigen::Index>(fields.size()) != p + 1) {
      throw ParseError(lineno, 1, "matrix file line " + std::to_string(lineno) + " has wrong shape");
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      double v = 0.0;
      if (parse_field(fields[static_cast<std::size_t>(j + 1)], v) == Field::Bad) {
        throw ParseError(lineno, static_cast<std::size_t>(j + 2), "cannot parse matrix entry");
      }
      out.values(i, j) = v;
    }
    ++i;
  }
  if (i != p) throw ParseError(lineno, 1, "matrix file has " + std::to_string(i) + " rows");
  return out;
}

std::pair<std::vector<double>, std::vector<double>> read_two_columns(std::istream& in) {
  std::pair<std::vector<double>, std::vector<double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    double a = 0.0, b = 0.0;
    const bool ok = f.size() == 2 && parse_field(f[0], a) == Field::Number &&
                    parse_field(f[1], b) == Field::Number;
    if (!ok) {
      if (out.first.empty() && lineno == 1) continue;  // header
      throw ParseError(lineno, 1, "expected two numeric columns on line " + std::to_string(lineno));
    }
    out.first.push_back(a);
    out.second.push_back(b);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  auto f = open_or_throw(path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace blocktau
