// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.
// Pass --report PATH to also write the full check table.

#include <cstring>
#include <iostream>

#include "microlax/verify.hpp"

using namespace microlax;

int main(int argc, char** argv) {
  verify::Options opt;
  opt.work_dir = "acceptance_work";
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--report") && i + 1 < argc) report_path = argv[++i];
    if (!std::strcmp(argv[i], "--work-dir") && i + 1 < argc) opt.work_dir = argv[++i];
  }

  struct Criterion {
    int id;
    const char* suite;
    const char* title;
  };
  const Criterion criteria[] = {
      {1, "oracle1d", "1D closed form matches the strain-scan oracle"},
      {2, "oracle2d", "2D closed form matches rank-1 / rank-2 laminate search"},
      {3, "cell", "discrete cell problem sits above the relaxed energy, gap shrinks"},
      {4, "fd", "analytic derivatives match finite differences"},
      {5, "probe", "strong monotonicity and growth probe"},
      {6, "regimes", "closed-form regime instances"},
      {7, "reduction", "anti-plane energy equals the planar beta = 0 path"},
      {8, "dynamics", "1D spinodal run: mass, energy decay, elastic residual, runtime"},
      {9, "mm", "minimizing movement descent and consistency with semi-implicit"},
      {10, "extension", "C1 extension seams and linear growth"},
      {11, "determinism", "deterministic reruns are byte-identical"},
  };

  std::vector<verify::Check> all;
  int failed = 0;
  for (const Criterion& c : criteria) {
    std::vector<verify::Check> checks;
    std::string error;
    try {
      checks = verify::run_suite(c.suite, opt);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const bool pass = error.empty() && verify::all_pass(checks);
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title;
    for (const auto& ch : checks) {
      if (!ch.pass) std::cout << " | failed: " << ch.name << " = " << ch.measured << " (bound " << ch.threshold << ")";
    }
    if (!error.empty()) std::cout << " | error: " << error;
    std::cout << std::endl;
    failed += pass ? 0 : 1;
    all.insert(all.end(), checks.begin(), checks.end());
  }
  if (!report_path.empty()) verify::report(all).write(report_path);
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (11 - failed) << "/11" << std::endl;
  return failed ? 1 : 0;
}
