#pragma once

// `optf` command line: check | solve | grid.
//
// Exit codes: 0 success, 1 I/O or parse error, 2 admissibility checks
// failed, 3 solver did not certify an optimum.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optf/assumptions.hpp"
#include "optf/ingest.hpp"
#include "optf/report.hpp"
#include "optf/solver.hpp"

namespace optf::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kAssumptionsFailed = 2, kNotCertified = 3 };

struct CliConfig {
  std::string subcommand;
  std::string input_path;
  std::optional<std::string> output_path;
  bool no_header = false;
  double tol_grad = SolverOptions{}.tol_grad;
  std::size_t max_iter = SolverOptions{}.max_iter;
  double tol_rank = AssumptionOptions{}.tol_rank;
  double tol_cone = AssumptionOptions{}.tol_cone;
  std::size_t resolution = 50;
  std::vector<std::string> fix;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("cannot read " + path);
  return buf.str();
}

inline void write_output(const CliConfig& config, const std::string& text, std::ostream& out) {
  if (!config.output_path) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(*config.output_path, std::ios::binary);
  if (!file || !(file << text) || !file.flush()) {
    throw std::runtime_error("cannot write " + *config.output_path);
  }
}

// "name=value" or "index=value" with a 1-based index.
inline std::map<std::size_t, double> parse_fixes(const std::vector<std::string>& fixes,
                                                 const ReturnMatrix& returns) {
  std::map<std::size_t, double> out;
  for (const auto& item : fixes) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(Errc::BadSlice, "expected system=value, got " + item);
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    if (!optf::detail::parse_double(optf::detail::trim(std::string_view(item).substr(eq + 1)), value)) {
      throw Error(Errc::BadSlice, "bad fraction in " + item);
    }
    std::optional<std::size_t> index;
    const auto& names = returns.names();
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == key) index = k;
    }
    if (!index) {
      double as_number = 0.0;
      if (optf::detail::parse_double(key, as_number) && as_number >= 1.0 &&
          as_number <= static_cast<double>(names.size()) && as_number == std::floor(as_number)) {
        index = static_cast<std::size_t>(as_number) - 1;
      }
    }
    if (!index) throw Error(Errc::BadSlice, "unknown system " + key);
    if (!out.emplace(*index, value).second) throw Error(Errc::BadSlice, "system fixed twice: " + key);
  }
  return out;
}

inline int run_check(const CliConfig& config, const ReturnMatrix& returns, std::ostream& out,
                     std::ostream& err) {
  const AssumptionOptions opts{config.tol_rank, config.tol_cone};
  const auto report = assumption_report(returns, opts);
  write_output(config, to_json(report), out);
  if (!report.overall) err << "optf: admissibility checks failed\n";
  return report.overall ? kOk : kAssumptionsFailed;
}

inline int run_solve(const CliConfig& config, const ReturnMatrix& returns, std::ostream& out,
                     std::ostream& err) {
  RunReport report;
  report.input_digest = input_digest(returns);
  report.assumptions = assumption_report(returns, AssumptionOptions{config.tol_rank, config.tol_cone});
  if (!report.assumptions.overall) {
    write_output(config, to_json(report), out);
    err << "optf: admissibility checks failed; not solving\n";
    return kAssumptionsFailed;
  }

  SolverOptions opts;
  opts.tol_grad = config.tol_grad;
  opts.max_iter = config.max_iter;
  opts.assumptions = AssumptionOptions{config.tol_rank, config.tol_cone};
  const auto normalized = normalize(returns);
  SolverResult result;
  try {
    result = optimize(normalized, opts);
  } catch (const Error& e) {
    if (e.code() != Errc::UnboundedAscent) throw;
    write_output(config, to_json(report), out);
    err << "optf: " << e.what() << '\n';
    return kAssumptionsFailed;
  }
  int code = result.kkt.certified ? kOk : kNotCertified;
  if (result.kkt.certified && result.location == Location::OrthantBoundary) {
    try {
      result = refine_boundary(normalized, result, opts);
    } catch (const Error& e) {
      err << "optf: " << e.what() << '\n';
      code = kNotCertified;
    }
  }
  if (!result.kkt.certified) {
    err << "optf: no certified optimum after " << result.iterations << " iterations\n";
  }
  report.solution = std::move(result);
  write_output(config, to_json(report), out);
  return code;
}

inline int run_grid(const CliConfig& config, const ReturnMatrix& returns, std::ostream& out) {
  const auto fixed = parse_fixes(config.fix, returns);
  write_output(config, surface_grid(normalize(returns), config.resolution, fixed), out);
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CliConfig config;
  CLI::App app{"Optimal-f fractions for several trading systems from a trade-return matrix", "optf"};
  app.require_subcommand(1);

  const auto open_unit = CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        if (!optf::detail::parse_double(s, v) || !(v > 0.0 && v < 1.0)) {
          return "value must lie in (0, 1)";
        }
        return {};
      },
      "(0,1)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-i,--input", config.input_path, "CSV file of trade returns")->required();
    sub->add_option("-o,--output", config.output_path, "write output here instead of stdout");
    sub->add_flag("--no-header", config.no_header, "first row is data");
    sub->add_option("--tol-rank", config.tol_rank, "relative singular value cutoff")
        ->check(open_unit);
    sub->add_option("--tol-cone", config.tol_cone, "phase-1 threshold for a risk-free direction")
        ->check(open_unit);
  };

  auto* check = app.add_subcommand("check", "run the admissibility checks, print JSON");
  add_common(check);
  auto* solve = app.add_subcommand("solve", "check, then compute the optimal fractions");
  add_common(solve);
  solve->add_option("--tol-grad", config.tol_grad, "projected gradient stopping threshold")
      ->check(open_unit);
  solve->add_option("--max-iter", config.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  auto* grid = app.add_subcommand("grid", "TWR over a two-system slice as CSV");
  add_common(grid);
  grid->add_option("--resolution", config.resolution, "points per free axis")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  grid->add_option("--fix", config.fix, "pin a system: name=value or index=value (1-based)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "optf: " << e.what() << '\n';
    return kIoError;
  }
  config.subcommand = app.get_subcommands().front()->get_name();

  try {
    const auto text = detail::read_file(config.input_path);
    const auto returns = parse_returns(text, ParseOptions{config.no_header});
    if (config.subcommand == "check") return detail::run_check(config, returns, out, err);
    if (config.subcommand == "solve") return detail::run_solve(config, returns, out, err);
    return detail::run_grid(config, returns, out);
  } catch (const std::exception& e) {
    err << "optf: " << e.what() << '\n';
    return kIoError;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.push_back("optf");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace optf::cli
