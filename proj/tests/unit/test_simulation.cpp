#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "microlax/io.hpp"
#include "microlax/simulation.hpp"

using namespace microlax;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("microlax_test_sim_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_prefix(const fs::path& dir, const std::string& prefix) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().rfind(prefix, 0) == 0;
  return n;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(io::parse_double(cell, "csv"));
    rows.push_back(row);
  }
  return rows;
}

SimConfig small_1d() {
  SimConfig c;
  c.grid.nx = 64;
  c.chem.theta = 0.5;
  c.chem.kappa1 = 2.0;
  c.chem.kappa2 = 0.1;
  c.chem.lambda = 1e-3;
  c.phases.alpha2 = ElasticModulus::scalar(2.0);
  c.phases.eps_t2 = SymTensor::scalar(1.0);
  c.phases.sigma_ext = SymTensor::scalar(0.2);
  c.dt = 1e-3;
  c.t_end = 0.2;
  c.deterministic = true;
  c.snapshot_every = 50;
  return c;
}

}  // namespace

TEST_CASE("t_end = 0 writes only the initial snapshot") {
  SimConfig c = small_1d();
  c.t_end = 0.0;
  const fs::path dir = scratch("t0");
  const RunSummary s = run_simulation(c, dir.string());
  CHECK(s.accepted_steps == 0);
  CHECK(s.snapshots == 1);
  CHECK(count_prefix(dir, "a_") == 1);
  CHECK(fs::exists(dir / "a_00000000.csv"));
  CHECK(read_csv(dir / "diagnostics.csv").size() == 1);
}

TEST_CASE("diagnostics of a 1D run") {
  const SimConfig c = small_1d();
  const fs::path dir = scratch("run");
  const RunSummary s = run_simulation(c, dir.string());
  REQUIRE(s.status == "ok");
  CHECK(s.accepted_steps == 200);
  // initial, every 50 steps
  CHECK(s.snapshots == 5);
  CHECK(count_prefix(dir, "mu_") == 5);
  const auto rows = read_csv(dir / "diagnostics.csv");
  REQUIRE(rows.size() == 201);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k][3] <= rows[k - 1][3]);                               // energy
    CHECK(rows[k][4] == doctest::Approx(rows[k][3] - rows[k - 1][3]));  // increment
    CHECK(std::abs(rows[k][5] - rows[0][5]) < 1e-12);                   // mass
    CHECK(rows[k][10] <= c.tol_elast());
  }
  CHECK(slurp(dir / "manifest.ini").find("status = ok") != std::string::npos);
}

TEST_CASE("rerunning from the manifest reproduces the outputs") {
  const fs::path a = scratch("manifest_a"), b = scratch("manifest_b");
  run_simulation(small_1d(), a.string());
  const SimConfig again = io::config_from_ini(io::Ini::load((a / "manifest.ini").string()));
  run_simulation(again, b.string());
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / e.path().filename()), e.path().filename());
  }
}

TEST_CASE("step failures keep partial outputs") {
  SimConfig c = small_1d();
  c.dt = 5.0;
  c.t_end = 100.0;
  c.max_halvings = 0;
  const fs::path dir = scratch("fail");
  const RunSummary s = run_simulation(c, dir.string());
  CHECK(s.status == "step_failure");
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK(fs::exists(dir / "a_00000000.csv"));
  CHECK(slurp(dir / "manifest.ini").find("status = step_failure") != std::string::npos);
}

TEST_CASE("convergence studies") {
  const auto mms = convergence_mms(8, 3);
  REQUIRE(mms.size() == 3);
  CHECK(mms[1].order > 1.8);
  CHECK(mms[2].order > 1.8);

  SimConfig c = small_1d();
  c.grid.nx = 32;
  c.chem.lambda = 2e-2;
  c.t_end = 0.04;
  c.dt = 4e-3;
  c.a0 = 0.45;
  c.noise = 0.05;
  const auto t = convergence_time(c, 3);
  REQUIRE(t.size() == 4);
  CHECK(t.back().error == 0.0);
  for (int k = 1; k < 3; ++k) CHECK(t[k].order == doctest::Approx(1.0).epsilon(0.15));

  CHECK_THROWS_AS(convergence_mms(8, 2), Error);
  CHECK_THROWS_AS(convergence_time(c, 2), Error);
}
