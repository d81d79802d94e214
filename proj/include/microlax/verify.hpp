#pragma once

// Property suites behind `microlax verify` and the acceptance binary. Each
// suite runs at pinned seeds and returns one or more checks.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "microlax/io.hpp"

namespace microlax::verify {

struct Check {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  /// true: pass iff measured <= threshold; false: pass iff measured >= threshold
  bool upper = true;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 0x5EED;
  /// Replaces the threshold of every upper-bound check.
  std::optional<double> tol;
  /// Scratch directory for the determinism suite.
  std::string work_dir = "verify_work";
};

struct SuiteInfo {
  std::string name;
  std::string description;
};

const std::vector<SuiteInfo>& suites();

/// Throws ConfigError for unknown names.
std::vector<Check> run_suite(const std::string& name, const Options& opt);
std::vector<Check> run_all(const Options& opt);

bool all_pass(const std::vector<Check>& checks);
io::CsvTable report(const std::vector<Check>& checks);

}  // namespace microlax::verify
