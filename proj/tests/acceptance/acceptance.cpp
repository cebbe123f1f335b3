// Acceptance runner: one PASS/FAIL line per criterion, then a completion line.
#include "homharm/checks.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace homharm;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::vector<std::string> prefixes;
  double max_runtime_s;  // <= 0 means untimed
};

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report(const Criterion& c, const CheckReport& r) {
  int matched = 0;
  double runtime_ms = 0.0;
  std::vector<std::string> failed;
  double worst = 0.0;
  for (const auto& chk : r.checks) {
    bool hit = false;
    for (const auto& p : c.prefixes) hit = hit || starts_with(chk.name, p);
    if (!hit) continue;
    ++matched;
    runtime_ms += chk.wall_time_ms;
    if (!chk.passed) failed.push_back(chk.name + "=" + std::to_string(chk.measured_error));
    if (chk.tolerance > 0) worst = std::max(worst, chk.measured_error / chk.tolerance);
  }
  const bool time_ok = c.max_runtime_s <= 0 || runtime_ms < 1000.0 * c.max_runtime_s;
  const bool ok = matched > 0 && failed.empty() && time_ok;
  std::printf("criterion %2d %s  %s  checks=%d worst_error/tol=%.3g runtime=%.2fs", c.id, ok ? "PASS" : "FAIL",
              c.title.c_str(), matched, worst, runtime_ms / 1000.0);
  if (c.max_runtime_s > 0) std::printf(" (limit %gs)", c.max_runtime_s);
  for (const auto& f : failed) std::printf(" failed:%s", f.c_str());
  std::printf("\n");
  return ok ? 0 : 1;
}

int determinism(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "homharm_acceptance";
  fs::create_directories(dir);
  const std::string a = (dir / "run_a.json").string(), b = (dir / "run_b.json").string();
  double slowest = 0.0;
  int codes[2];
  const std::string* paths[2] = {&a, &b};
  for (int i = 0; i < 2; ++i) {
    const std::string cmd = "\"" + cli + "\" check --suite all --bandwidth 8 --seed 42 --quiet --report \"" +
                            *paths[i] + "\"";
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    codes[i] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  const std::string ja = slurp(a), jb = slurp(b);
  const bool identical = !ja.empty() && ja == jb;
  const bool ran = (codes[0] == 0 || codes[0] == 1) && codes[0] == codes[1];
  const bool ok = identical && ran && slowest < 120.0;
  std::printf("criterion 10 %s  harness determinism: byte_identical=%s bytes=%zu exit=%d,%d slowest_run=%.2fs (limit 120s)\n",
              ok ? "PASS" : "FAIL", identical ? "yes" : "no", ja.size(), codes[0], codes[1], slowest);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: homharm_acceptance <path-to-homharm>\n";
    return 2;
  }
  SuiteConfig cfg;
  cfg.bandwidth = 8;
  cfg.seed = 42;
  cfg.trials = 20;
  cfg.timings = true;
  const CheckReport r = run_suite("all", cfg);

  const std::vector<Criterion> criteria = {
      {1, "transform exactness (B=8, 3 channels)",
       {"transforms.sht_roundtrip", "transforms.sht_parseval", "transforms.so3_roundtrip",
        "transforms.so3_parseval"},
       2.0},
      {2, "lifted-field spectral sparsity, k in -2..2", {"sparsity.offcolumn"}, 0},
      {3, "sparse kernel sufficiency on Mackey inputs", {"conv-equivariance.sparse_sufficiency"}, 0},
      {4, "convolution equivariance, 20 rotations, |m|<=2", {"conv-equivariance.rotations"}, 10.0},
      {5, "spectral vs spatial convolution (B=4)", {"conv-oracle.spectral_vs_spatial"}, 30.0},
      {6, "nonlinearity: grid-aligned, oversampling sweep, sphere-path equivalence",
       {"nonlin.grid_aligned", "nonlin.oversampling_monotone", "nonlin.prior_work_equivalence"},
       0},
      {7, "SE(2)/SE(3) kernels, point convolution and composed layer", {"se2.", "se3."}, 0},
      {8, "representation-theory golden values",
       {"transforms.wigner_d_l1_closed_form", "transforms.cg_racah_l4", "transforms.cg_trivial_selection",
        "transforms.stabilizer_diagonal"},
       0},
      {9, "gradient correctness", {"gradients."}, 0},
  };
  int failures = 0;
  for (const auto& c : criteria) failures += report(c, r);
  failures += determinism(argv[1]);
  std::printf("criteria evaluated: 10, passed: %d, failed: %d\n", 10 - failures, failures);
  return failures == 0 ? 0 : 1;
}
