#include "commands.hpp"

#include "blocktau/block_estimators.hpp"
#include "blocktau/concordance.hpp"
#include "blocktau/conditional.hpp"
#include "blocktau/elliptical.hpp"
#include "blocktau/error.hpp"
#include "blocktau/io.hpp"
#include "blocktau/simulation.hpp"
#include "blocktau/variance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace blocktau::cli {
namespace {

using json = nlohmann::json;

const std::vector<std::string> kCommands = {"ktmatrix", "cktmatrix", "variance", "quantities",
                                            "pdcheck",  "var",       "backtest", "simulate"};

std::vector<std::string> split_list(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "cannot parse " + what + " value '" + s + "'");
}

std::vector<double> number_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s, ',')) out.push_back(to_number(item, what));
  return out;
}

// Column given by name or 1-based index.
std::size_t resolve_column(const std::string& key, const std::vector<std::string>& names) {
  const auto it = std::find(names.begin(), names.end(), key);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  try {
    std::size_t used = 0;
    const long idx = std::stol(key, &used);
    if (used == key.size() && idx >= 1 && static_cast<std::size_t>(idx) <= names.size()) {
      return static_cast<std::size_t>(idx - 1);
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "unknown column '" + key + "'");
}

ColumnPair resolve_pair(const std::string& spec, const std::vector<std::string>& names) {
  const auto parts = split_list(spec, ',');
  if (parts.size() != 2) throw Error(ErrorCode::InvalidArgument, "pair must be 'a,b'");
  return {resolve_column(parts[0], names), resolve_column(parts[1], names)};
}

struct DataOptions {
  std::string path;
  bool no_header = false;
  bool strict = false;
};

void add_data_options(CLI::App* sub, DataOptions& d, bool required = true) {
  auto* opt = sub->add_option("data", d.path, "observation CSV");
  if (required) opt->required();
  sub->add_flag("--no-header", d.no_header, "first row holds data, not names");
  sub->add_flag("--strict", d.strict, "fail on non-finite values instead of dropping rows");
}

LoadedObservations load(const DataOptions& d, std::ostream& err) {
  LoadOptions opt;
  opt.header = !d.no_header;
  opt.strict = d.strict;
  LoadedObservations loaded = load_observations(d.path, opt);
  if (loaded.dropped_rows > 0) {
    err << json{{"warning", "dropped_rows"}, {"count", loaded.dropped_rows},
                {"lines", loaded.dropped_lines}}.dump()
        << '\n';
  }
  return loaded;
}

struct SchemeOptions {
  std::string scheme = "naive";
  std::string groups;
  std::size_t N = 0;
  std::uint64_t seed = 0;
};

void add_scheme_options(CLI::App* sub, SchemeOptions& s) {
  sub->add_option("--scheme", s.scheme, "naive|block|row|diag|random");
  sub->add_option("--groups", s.groups, "group file with column,group rows");
  sub->add_option("--N", s.N, "pairs averaged per block (row, diag, random)");
  sub->add_option("--seed", s.seed, "seed for the random scheme");
}

EstimatorScheme make_scheme(const SchemeOptions& s) {
  EstimatorScheme scheme;
  scheme.kind = parse_scheme(s.scheme);
  if (s.N > 0) scheme.N = s.N;
  scheme.seed = s.seed;
  return scheme;
}

Partition make_partition(const SchemeOptions& s, const std::vector<std::string>& names,
                         bool required) {
  if (s.groups.empty()) {
    if (required) throw Error(ErrorCode::InvalidArgument, "--groups is required for this scheme");
    return Partition(std::vector<int>(names.size(), 1));
  }
  return load_group_file(s.groups, names);
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  f << text;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json quantities_json(const ConcordanceQuantities& q) {
  json j{{"set", std::string(averaging_set_name(q.set))}, {"P", q.P}, {"Q", q.Q}};
  if (q.R) j["R"] = *q.R;
  if (q.S) j["S"] = *q.S;
  if (q.T) j["T"] = *q.T;
  if (q.U) j["U"] = *q.U;
  return j;
}

AveragingSet set_for(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Naive: return AveragingSet::Pair;
    case SchemeKind::Row: return AveragingSet::Row;
    case SchemeKind::Diagonal: return AveragingSet::Diagonal;
    default: return AveragingSet::Block;
  }
}

AveragingSet parse_set(const std::string& s) {
  if (s == "pair") return AveragingSet::Pair;
  if (s == "block") return AveragingSet::Block;
  if (s == "row") return AveragingSet::Row;
  if (s == "diag" || s == "diagonal") return AveragingSet::Diagonal;
  throw Error(ErrorCode::InvalidArgument, "unknown averaging set '" + s + "'");
}

// ---- subcommands ----

struct KtArgs {
  DataOptions data;
  SchemeOptions scheme;
  std::string out;
  std::string format = "csv";
};

void run_ktmatrix(const KtArgs& a, std::ostream& out, std::ostream& err) {
  const auto loaded = load(a.data, err);
  const auto& names = loaded.data.column_names();
  const EstimatorScheme scheme = make_scheme(a.scheme);
  const Partition partition = make_partition(a.scheme, names, scheme.kind != SchemeKind::Naive);
  const KendallMatrix m = a.scheme.groups.empty()
                              ? kendall_matrix(loaded.data)
                              : averaged_kendall_matrix(loaded.data, partition, scheme);
  std::ostringstream os;
  if (a.format == "json") {
    os << json{{"scheme", std::string(scheme_name(m.scheme))},
               {"names", names},
               {"matrix", matrix_json(m.values)}}
              .dump(2)
       << '\n';
  } else {
    write_matrix_csv(os, m.values, names);
  }
  emit(out, a.out, os.str());
}

struct CktArgs {
  KtArgs base;
  std::string z_cols;
  std::string grid;
  double bandwidth = 0.0;
  std::string kernel = "epanechnikov";
};

std::vector<Eigen::VectorXd> parse_grid(const std::string& spec, std::size_t d) {
  std::vector<Eigen::VectorXd> grid;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split_list(spec, ':');
    if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "grid must be start:stop:step");
    if (d != 1) throw Error(ErrorCode::InvalidArgument, "start:stop:step grids need one z column");
    for (double z : regular_grid(to_number(parts[0], "grid"), to_number(parts[1], "grid"),
                                 to_number(parts[2], "grid"))) {
      grid.push_back(Eigen::VectorXd::Constant(1, z));
    }
    return grid;
  }
  // Points separated by ';', coordinates by ','.
  for (const auto& point : split_list(spec, ';')) {
    const auto coords = number_list(point, "grid");
    if (coords.size() != d) {
      throw Error(ErrorCode::InvalidArgument, "grid point has " + std::to_string(coords.size()) +
                                                  " coordinates, expected " + std::to_string(d));
    }
    grid.push_back(Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(d)));
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
  return grid;
}

void run_cktmatrix(const CktArgs& a, std::ostream& out, std::ostream& err) {
  const auto loaded = load(a.base.data, err);
  const auto& names = loaded.data.column_names();
  std::vector<std::size_t> zc;
  for (const auto& key : split_list(a.z_cols, ',')) zc.push_back(resolve_column(key, names));
  if (zc.empty()) throw Error(ErrorCode::InvalidArgument, "--z-cols is empty");
  std::vector<std::size_t> xc;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (std::find(zc.begin(), zc.end(), j) == zc.end()) xc.push_back(j);
  const ObservationMatrix x = loaded.data.columns(xc);
  const Eigen::MatrixXd z = loaded.data.columns(zc).values();
  const EstimatorScheme scheme = make_scheme(a.base.scheme);
  const Partition partition =
      make_partition(a.base.scheme, x.column_names(), scheme.kind != SchemeKind::Naive);
  if (!(a.bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "--bandwidth must be positive");
  const KernelSpec kernel = KernelSpec::parse(a.kernel, a.bandwidth);
  const auto grid = parse_grid(a.grid, zc.size());
  const auto results = conditional_kendall_matrix(x, partition, scheme, z, grid, kernel);

  auto z_label = [](const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v(i));
    return s;
  };
  std::ostringstream os;
  if (a.base.format == "json") {
    json points = json::array();
    for (const auto& r : results) {
      json p{{"z", std::vector<double>(r.z.data(), r.z.data() + r.z.size())}};
      if (r.matrix) p["matrix"] = matrix_json(r.matrix->values);
      if (r.error) {
        p["error"] = std::string(error_code_name(*r.error));
        p["message"] = r.message;
      }
      points.push_back(p);
    }
    os << json{{"scheme", std::string(scheme_name(scheme.kind))},
               {"names", x.column_names()},
               {"points", points}}
              .dump(2)
       << '\n';
  } else {
    os << "z,row,col,value,error\n";
    for (const auto& r : results) {
      if (!r.matrix) {
        os << z_label(r.z) << ",,,," << error_code_name(*r.error) << '\n';
        continue;
      }
      const auto& m = r.matrix->values;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          os << z_label(r.z) << ',' << x.column_names()[static_cast<std::size_t>(i)] << ','
             << x.column_names()[static_cast<std::size_t>(j)] << ',' << format_double(m(i, j))
             << ",\n";
    }
  }
  emit(out, a.base.out, os.str());
}

struct VarianceArgs {
  DataOptions data;
  SchemeOptions scheme;
  std::string quantities;
  std::size_t n = 0;
  std::size_t g1 = 0, g2 = 0;
  int k1 = 1, k2 = 2;
  bool oracle = false;
};

void run_variance(const VarianceArgs& a, std::ostream& out, std::ostream& err) {
  VarianceInput in;
  in.scheme = parse_scheme(a.scheme.scheme);
  if (!a.quantities.empty()) {
    const json q = json::parse(read_text_file(a.quantities));
    in.quantities.P = q.at("P").get<double>();
    in.quantities.Q = q.at("Q").get<double>();
    for (const char* key : {"R", "S", "T", "U"}) {
      if (!q.contains(key)) continue;
      const double v = q.at(key).get<double>();
      switch (key[0]) {
        case 'R': in.quantities.R = v; break;
        case 'S': in.quantities.S = v; break;
        case 'T': in.quantities.T = v; break;
        default: in.quantities.U = v; break;
      }
    }
    in.quantities.set = set_for(in.scheme);
    if (a.n == 0 || a.g1 == 0 || a.g2 == 0) {
      throw Error(ErrorCode::InvalidArgument, "--n, --g1 and --g2 are required with --quantities");
    }
    in.n = a.n;
    in.g1 = a.g1;
    in.g2 = a.g2;
    in.N = a.scheme.N > 0 ? a.scheme.N : std::min(a.g1, a.g2);
  } else {
    if (a.data.path.empty()) {
      throw Error(ErrorCode::InvalidArgument, "give a data file or --quantities");
    }
    const auto loaded = load(a.data, err);
    const Partition partition = make_partition(a.scheme, loaded.data.column_names(), true);
    EstimatorScheme scheme = make_scheme(a.scheme);
    const AveragingSet set = set_for(in.scheme);
    const auto pairs = averaging_pairs(partition, a.k1, a.k2, set, scheme);
    in.quantities = a.oracle ? oracle_quantities(loaded.data, pairs, set)
                             : averaged_quantities(loaded.data, pairs, set);
    in.n = a.n > 0 ? a.n : loaded.data.n();
    in.g1 = partition.group_size(a.k1);
    in.g2 = partition.group_size(a.k2);
    in.N = scheme.count_for(partition, a.k1, a.k2);
  }
  const VarianceResult v = finite_sample_variance(in);
  const VarianceResult af = asymptotic_variance(in, LimitMode::FiniteBlock);
  const VarianceResult al = asymptotic_variance(in, LimitMode::LargeBlock);
  json j{{"scheme", std::string(scheme_name(in.scheme))},
         {"n", in.n},
         {"g1", in.g1},
         {"g2", in.g2},
         {"N", in.N},
         {"quantities", quantities_json(in.quantities)},
         {"variance", v.value},
         {"raw", v.raw},
         {"clamped", v.clamped},
         {"asymptotic", {{"finite_block", af.value}, {"large_block", al.value}}}};
  if (v.clamped) err << json{{"warning", "negative_variance_clamped"}, {"raw", v.raw}}.dump() << '\n';
  out << j.dump(2) << '\n';
}

struct QuantitiesArgs {
  DataOptions data;
  std::string pair1, pair2;
  std::string groups;
  std::string set = "block";
  int k1 = 1, k2 = 2;
  std::size_t N = 0;
};

void run_quantities(const QuantitiesArgs& a, std::ostream& out, std::ostream& err) {
  const auto loaded = load(a.data, err);
  const auto& names = loaded.data.column_names();
  ConcordanceQuantities q;
  if (!a.groups.empty()) {
    const Partition partition = load_group_file(a.groups, names);
    EstimatorScheme scheme;
    if (a.N > 0) scheme.N = a.N;
    q = averaged_quantities(loaded.data, partition, a.k1, a.k2, parse_set(a.set), scheme);
  } else {
    if (a.pair1.empty()) throw Error(ErrorCode::InvalidArgument, "give --pair1 or --groups");
    std::optional<ColumnPair> p2;
    if (!a.pair2.empty()) p2 = resolve_pair(a.pair2, names);
    q = concordance_quantities(loaded.data, resolve_pair(a.pair1, names), p2);
  }
  out << quantities_json(q).dump(2) << '\n';
}

struct PdArgs {
  int b1 = 0, b2 = 0;
  double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0;
  int K = 0;
};

void run_pdcheck(const PdArgs& a, std::ostream& out) {
  json j;
  if (a.K > 0) j["min_intergroup_rho"] = min_intergroup_rho(a.K);
  if (a.b1 > 0 || a.b2 > 0) {
    const PdCheck pd = block_pd_check(a.b1, a.b2, a.rho1, a.rho2, a.rho3);
    j["positive_definite"] = pd.positive_definite;
    j["constraint_value"] = pd.constraint_value;
  }
  if (j.is_null()) throw Error(ErrorCode::InvalidArgument, "give --b1/--b2/--rho* or --K");
  out << j.dump(2) << '\n';
}

struct VarArgs {
  DataOptions data;
  SchemeOptions scheme;
  std::string weights;
  double alpha = 0.05;
  std::string generator = "gaussian";
  double nu = 5.0;
  std::string table;
  double silverman_exponent = 0.2;
  std::string sigma;
  std::string mu;
};

Eigen::VectorXd read_weights(const std::string& spec) {
  std::vector<double> w;
  if (std::ifstream f(spec); f) {
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::replace(text.begin(), text.end(), '\n', ',');
    w = number_list(text, "weight");
  } else {
    w = number_list(spec, "weight");
  }
  if (w.empty()) throw Error(ErrorCode::InvalidArgument, "no portfolio weights");
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

GeneratorSpec make_generator(const VarArgs& a, int p) {
  if (a.generator == "gaussian") return GeneratorSpec::gaussian(p);
  if (a.generator == "student-t" || a.generator == "student_t" || a.generator == "t") {
    return GeneratorSpec::student_t(a.nu, p);
  }
  if (a.generator == "tabulated") {
    if (a.table.empty()) throw Error(ErrorCode::InvalidArgument, "--table is required for tabulated");
    std::ifstream f(a.table);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + a.table + "'");
    auto [u, g] = read_two_columns(f);
    return GeneratorSpec::tabulated(std::move(u), std::move(g), p);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown generator '" + a.generator + "'");
}

void run_var(const VarArgs& a, std::ostream& out, std::ostream& err) {
  const Eigen::VectorXd delta = read_weights(a.weights);
  const int p = static_cast<int>(delta.size());
  const GeneratorSpec generator = make_generator(a, p);
  json j{{"alpha", a.alpha}, {"generator", a.generator}, {"p", p}};
  EllipticalModel model;
  model.generator = generator;
  if (!a.sigma.empty()) {
    std::ifstream f(a.sigma);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + a.sigma + "'");
    model.sigma = read_matrix_csv(f).values;
    model.mu = Eigen::VectorXd::Zero(model.sigma.rows());
    if (!a.mu.empty()) {
      const auto m = number_list(a.mu, "mu");
      model.mu = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    }
  } else {
    if (a.data.path.empty()) throw Error(ErrorCode::InvalidArgument, "give a data file or --sigma");
    const auto loaded = load(a.data, err);
    const auto& names = loaded.data.column_names();
    const EstimatorScheme scheme = make_scheme(a.scheme);
    const KendallMatrix tau =
        a.scheme.groups.empty()
            ? kendall_matrix(loaded.data)
            : averaged_kendall_matrix(loaded.data, make_partition(a.scheme, names, true), scheme);
    const FittedModel fitted = fit_elliptical_model(loaded.data, tau, generator);
    model = fitted.model;
    j["repaired"] = fitted.correlation.repaired;
    j["min_eigenvalue_before"] = fitted.correlation.min_eigenvalue_before;
    const SilvermanResult s =
        silverman_xi_bandwidth(loaded.data, model.mu, model.sigma, a.silverman_exponent);
    j["silverman"] = {{"h", s.h},
                      {"xi_variance", s.xi_variance},
                      {"degenerate", s.degenerate},
                      {"exponent", a.silverman_exponent}};
    if (s.degenerate) j["silverman"]["flag"] = "DegenerateBandwidth";
  }
  const double q = elliptical_quantile(generator, a.alpha);
  j["quantile"] = q;
  j["var"] = delta_elliptic_var(model.mu, model.sigma, delta, q);
  j["mean"] = delta.dot(model.mu);
  j["scale"] = std::sqrt(delta.dot(model.sigma * delta));
  out << j.dump(2) << '\n';
}

struct BacktestArgs {
  DataOptions data;
  std::string column = "1";
  std::string weights;
  double var_level = 0.0;
  double alpha = 0.05;
};

void run_backtest(const BacktestArgs& a, std::ostream& out, std::ostream& err) {
  const auto loaded = load(a.data, err);
  std::vector<double> pnl;
  if (!a.weights.empty()) {
    const Eigen::VectorXd delta = read_weights(a.weights);
    if (static_cast<std::size_t>(delta.size()) != loaded.data.p()) {
      throw Error(ErrorCode::LengthMismatch, "weights and data columns differ");
    }
    const Eigen::VectorXd v = loaded.data.values() * delta;
    pnl.assign(v.data(), v.data() + v.size());
  } else {
    const auto col = loaded.data.column(resolve_column(a.column, loaded.data.column_names()));
    pnl.assign(col.begin(), col.end());
  }
  const BacktestResult r = backtest_var(pnl, a.var_level, a.alpha);
  out << json{{"exceedances", r.exceedances},
              {"observed_rate", r.observed_rate},
              {"expected", r.expected},
              {"length", r.length},
              {"empirical_var", r.empirical_var}}
             .dump(2)
      << '\n';
}

struct SimulateArgs {
  std::string config;
  std::string out;
  int threads = -1;
};

void run_simulate(const SimulateArgs& a, std::ostream& out) {
  ExperimentConfig config = parse_experiment_config(read_text_file(a.config));
  if (a.threads >= 0) config.threads = static_cast<unsigned>(a.threads);
  const ExperimentResult result = run_experiment(config);
  const std::string summary = to_summary_json(result);
  if (!a.out.empty()) {
    emit(out, a.out + ".csv", to_long_csv(result));
    emit(out, a.out + ".json", summary + "\n");
  }
  out << summary << '\n';
}

void report_error(std::ostream& err, const std::string& code, const std::string& message,
                  const json& extra = json::object()) {
  json j{{"error", code}, {"message", message}};
  j.update(extra);
  err << j.dump() << '\n';
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    report_error(err, "UnknownCommand", "no subcommand given");
    return 2;
  }
  const std::string& first = args.front();
  if (first.empty() || (first[0] != '-' &&
                        std::find(kCommands.begin(), kCommands.end(), first) == kCommands.end())) {
    report_error(err, "UnknownCommand", "unknown subcommand '" + first + "'");
    return 2;
  }

  CLI::App app{"Block-structured Kendall's tau estimation and elliptical VaR", "blocktau"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads, "worker threads for simulations (0 = auto)");

  KtArgs kt;
  auto* kt_cmd = app.add_subcommand("ktmatrix", "Kendall's tau matrix");
  add_data_options(kt_cmd, kt.data);
  add_scheme_options(kt_cmd, kt.scheme);
  kt_cmd->add_option("--out", kt.out, "output file (default stdout)");
  kt_cmd->add_option("--format", kt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  CktArgs ckt;
  auto* ckt_cmd = app.add_subcommand("cktmatrix", "conditional Kendall's tau matrices");
  add_data_options(ckt_cmd, ckt.base.data);
  add_scheme_options(ckt_cmd, ckt.base.scheme);
  ckt_cmd->add_option("--out", ckt.base.out, "output file (default stdout)");
  ckt_cmd->add_option("--format", ckt.base.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  ckt_cmd->add_option("--z-cols", ckt.z_cols, "conditioning columns")->required();
  ckt_cmd->add_option("--grid", ckt.grid, "start:stop:step or points 'a,b;c,d'")->required();
  ckt_cmd->add_option("--bandwidth", ckt.bandwidth, "kernel bandwidth")->required();
  ckt_cmd->add_option("--kernel", ckt.kernel, "epanechnikov|triangular|uniform");

  VarianceArgs va;
  auto* va_cmd = app.add_subcommand("variance", "finite-sample variance of an estimator");
  add_data_options(va_cmd, va.data, false);
  add_scheme_options(va_cmd, va.scheme);
  va_cmd->add_option("--quantities", va.quantities, "JSON file with P, Q, R, S, T, U");
  va_cmd->add_option("--n", va.n, "sample size in the formula");
  va_cmd->add_option("--g1", va.g1, "size of the first group");
  va_cmd->add_option("--g2", va.g2, "size of the second group");
  va_cmd->add_option("--k1", va.k1, "first group id");
  va_cmd->add_option("--k2", va.k2, "second group id");
  va_cmd->add_flag("--oracle", va.oracle, "large-sample quantity estimates (tie-free data)");

  QuantitiesArgs qa;
  auto* qa_cmd = app.add_subcommand("quantities", "concordance quantities P..U");
  add_data_options(qa_cmd, qa.data);
  qa_cmd->add_option("--pair1", qa.pair1, "first column pair 'a,b'");
  qa_cmd->add_option("--pair2", qa.pair2, "second column pair 'c,d'");
  qa_cmd->add_option("--groups", qa.groups, "group file; averages over a block");
  qa_cmd->add_option("--set", qa.set, "pair|block|row|diag");
  qa_cmd->add_option("--k1", qa.k1, "first group id");
  qa_cmd->add_option("--k2", qa.k2, "second group id");
  qa_cmd->add_option("--N", qa.N, "row/diagonal count");

  PdArgs pd;
  auto* pd_cmd = app.add_subcommand("pdcheck", "positive definiteness of block correlations");
  pd_cmd->add_option("--b1", pd.b1, "size of group 1");
  pd_cmd->add_option("--b2", pd.b2, "size of group 2");
  pd_cmd->add_option("--rho1", pd.rho1, "correlation within group 1");
  pd_cmd->add_option("--rho2", pd.rho2, "correlation within group 2");
  pd_cmd->add_option("--rho3", pd.rho3, "correlation between groups");
  pd_cmd->add_option("--K", pd.K, "number of groups for the minimal equal correlation");

  VarArgs vr;
  auto* var_cmd = app.add_subcommand("var", "Delta-Elliptic value at risk");
  add_data_options(var_cmd, vr.data, false);
  add_scheme_options(var_cmd, vr.scheme);
  var_cmd->add_option("--weights", vr.weights, "weights 'w1,w2,...' or a file")->required();
  var_cmd->add_option("--alpha", vr.alpha, "tail probability");
  var_cmd->add_option("--generator", vr.generator, "gaussian|student-t|tabulated");
  var_cmd->add_option("--nu", vr.nu, "Student-t degrees of freedom");
  var_cmd->add_option("--table", vr.table, "tabulated generator CSV (u,g)");
  var_cmd->add_option("--silverman-exponent", vr.silverman_exponent, "exponent of n in the bandwidth rule");
  var_cmd->add_option("--sigma", vr.sigma, "covariance matrix CSV instead of data");
  var_cmd->add_option("--mu", vr.mu, "mean vector 'm1,m2,...' with --sigma");

  BacktestArgs bt;
  auto* bt_cmd = app.add_subcommand("backtest", "count VaR exceedances");
  add_data_options(bt_cmd, bt.data);
  bt_cmd->add_option("--column", bt.column, "P&L column (name or 1-based index)");
  bt_cmd->add_option("--weights", bt.weights, "portfolio weights over all columns");
  bt_cmd->add_option("--var", bt.var_level, "VaR level")->required();
  bt_cmd->add_option("--alpha", bt.alpha, "tail probability");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run a simulation experiment");
  sim_cmd->add_option("--config", sim.config, "experiment JSON")->required();
  sim_cmd->add_option("--out", sim.out, "prefix for .csv and .json outputs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "InvalidArgument", e.what());
    return 2;
  }

  try {
    if (kt_cmd->parsed()) run_ktmatrix(kt, out, err);
    else if (ckt_cmd->parsed()) run_cktmatrix(ckt, out, err);
    else if (va_cmd->parsed()) run_variance(va, out, err);
    else if (qa_cmd->parsed()) run_quantities(qa, out, err);
    else if (pd_cmd->parsed()) run_pdcheck(pd, out);
    else if (var_cmd->parsed()) run_var(vr, out, err);
    else if (bt_cmd->parsed()) run_backtest(bt, out, err);
    else if (sim_cmd->parsed()) {
      sim.threads = threads;
      run_simulate(sim, out);
    }
  } catch (const ParseError& e) {
    report_error(err, "ParseError", e.what(), {{"line", e.line()}, {"column", e.column()}});
    return 1;
  } catch (const Error& e) {
    report_error(err, std::string(error_code_name(e.code())), e.what());
    return 1;
  } catch (const json::exception& e) {
    report_error(err, "ParseError", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return 1;
  }
  return 0;
}

}  // namespace blocktau::cli
