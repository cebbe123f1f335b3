// homharm: property-suite harness and field file conversion.

#include "homharm/checks.hpp"
#include "homharm/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct CheckArgs {
  std::string suite;
  homharm::SuiteConfig cfg;
  std::string report;
  std::string format = "json";
  std::vector<std::string> tolerances;
  bool quiet = false;
};

int run_check(CheckArgs& args) {
  using namespace homharm;
  if (!is_suite(args.suite)) {
    std::cerr << "homharm: unknown suite '" << args.suite << "'; expected one of:";
    for (const auto& s : suite_names()) std::cerr << ' ' << s;
    std::cerr << '\n';
    return kExitUsage;
  }
  for (const auto& t : args.tolerances) {
    const auto eq = t.find('=');
    try {
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("missing '='");
      std::size_t used = 0;
      const double v = std::stod(t.substr(eq + 1), &used);
      if (used != t.size() - eq - 1 || !(v >= 0.0)) throw std::invalid_argument("bad value");
      args.cfg.tolerance_overrides[t.substr(0, eq)] = v;
    } catch (const std::exception&) {
      std::cerr << "homharm: --tolerance expects <check-name>=<non-negative number>, got '" << t << "'\n";
      return kExitUsage;
    }
  }
  if (args.cfg.threads == 0) args.cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  CheckReport report;
  try {
    report = run_suite(args.suite, args.cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "homharm: " << e.what() << '\n';
    return kExitUsage;
  }

  if (!args.quiet) {
    for (const auto& c : report.checks) {
      std::printf("%s  %-60s measured=%.3e tol=%.1e%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                  c.measured_error, c.tolerance, c.error.empty() ? "" : "  error: ", c.error.c_str());
    }
    std::printf("%zu/%zu checks passed\n", report.checks.size() - report.failed(), report.checks.size());
  }
  if (!args.report.empty()) {
    try {
      emit_report(report, args.report, args.format);
    } catch (const IoError& e) {
      std::cerr << "homharm: " << e.what() << '\n';
      return kExitIo;
    }
  }
  return report.all_passed() ? kExitPass : kExitFail;
}

int run_convert(const std::string& in, const std::string& out) {
  try {
    homharm::convert_field(in, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "homharm: " << e.what() << '\n';
    return kExitUsage;
  } catch (const homharm::FormatError& e) {
    std::cerr << "homharm: parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const homharm::IoError& e) {
    std::cerr << "homharm: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic analysis on homogeneous spaces: property checks and field conversion"};
  app.require_subcommand(1);

  CheckArgs args;
  auto* check = app.add_subcommand("check", "Run a property suite and write a report");
  check->add_option("--suite", args.suite, "Suite name (transforms, sparsity, conv-equivariance, "
                                           "conv-oracle, nonlin, se2, se3, gradients, all)")
      ->required();
  check->add_option("--bandwidth", args.cfg.bandwidth, "Bandwidth B")->default_val(8)->check(CLI::PositiveNumber);
  check->add_option("--seed", args.cfg.seed, "Suite seed")->default_val(42);
  check->add_option("--trials", args.cfg.trials, "Random trials per check")->default_val(20)->check(CLI::PositiveNumber);
  check->add_option("--report", args.report, "Report output path");
  check->add_option("--format", args.format, "Report format")->default_val("json")->check(CLI::IsMember({"json", "csv"}));
  check->add_option("--oversample", args.cfg.oversample, "Activation grid oversampling factor")
      ->default_val(2.0)
      ->check(CLI::Range(1.0, 64.0));
  check->add_option("--threads", args.cfg.threads, "Worker threads (0 = all cores)")
      ->envname("HOMHARM_THREADS")
      ->default_val(1)
      ->check(CLI::NonNegativeNumber);
  check->add_option("--tolerance", args.tolerances, "Override a tolerance: <check-name>=<value> (repeatable)");
  check->add_flag("--timings", args.cfg.timings, "Record wall times in the report (breaks byte-identity)");
  check->add_flag("--quiet", args.quiet, "Do not print per-check lines");

  std::string in, out;
  auto* convert = app.add_subcommand("convert", "Convert a field file between JSON and CSV (by extension)");
  convert->add_option("in", in, "Input (.json or .csv)")->required();
  convert->add_option("out", out, "Output (.json or .csv)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }
  if (check->parsed()) return run_check(args);
  return run_convert(in, out);
}
