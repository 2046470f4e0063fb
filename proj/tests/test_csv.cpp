#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "qllg/csv.hpp"
#include "qllg/dynamics.hpp"
#include "qllg/sampling.hpp"

using namespace qllg;
using Catch::Approx;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

TrajectoryRecord short_run(bool with_spectrum) {
  HamiltonianOp h = build_spin_chain({2, 2.0, 1.0});
  static Spectrum s = diagonalize(h);
  QLLGParams p;
  p.dt = 0.05;
  p.t_max = 1.0;
  p.residual_tol = 0.0;
  p.record_stride = 4;
  std::mt19937_64 eng(83);
  return evolve(test::random_state(eng, 2), h, p, with_spectrum ? &s : nullptr);
}

}  // namespace

TEST_CASE("deterministic double formatting", "[csv]") {
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(1.0) == "1");
  CHECK(csv::format_double(-2.5e-3) == "-0.0025");
  CHECK(csv::format_double(0.0) == "0");
  CHECK(csv::format_u64(0xFFFFFFFFFFFFFFFFull) == "18446744073709551615");
  SECTION("shortest form round-trips arbitrary doubles") {
    std::mt19937_64 eng(89);
    for (int i = 0; i < 200; ++i) {
      double v = std::ldexp(double(eng() >> 11), int(eng() % 64) - 52);
      if (eng() & 1) v = -v;
      CHECK(std::stod(csv::format_double(v)) == v);
    }
  }
}

TEST_CASE("trajectory csv schema", "[csv]") {
  auto path = tmp_path("qllg_test_traj.csv");
  SECTION("with spectrum: all five columns populated") {
    csv::write_trajectory(path, short_run(true));
    auto text = slurp(path);
    CHECK(first_line(text) == "t,energy,norm_residual,excited_weight,infidelity");
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    int rows = 0;
    while (std::getline(is, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 4);
      CHECK(line.back() != ',');
    }
    CHECK(rows >= 3);
  }
  SECTION("without spectrum: weight columns stay empty") {
    csv::write_trajectory(path, short_run(false));
    std::istringstream is(slurp(path));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      CHECK(std::count(line.begin(), line.end(), ',') == 4);
      CHECK(line.ends_with(",,"));  // both weight columns empty
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("spectrum csv schema", "[csv]") {
  auto path = tmp_path("qllg_test_spec.csv");
  auto s = diagonalize(build_spin_chain({2, 2.0, 4.0}));
  csv::write_spectrum(path, s);
  auto text = slurp(path);
  CHECK(first_line(text) == "index,energy,degeneracy_group");
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line.rfind("0,", 0) == 0);
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4);
  std::remove(path.c_str());
}

TEST_CASE("overlap stats csv schema", "[csv]") {
  auto path = tmp_path("qllg_test_stats.csv");
  auto s = diagonalize(build_spin_chain({4, 2.0, 1.0}));
  auto st = overlap_statistics(s, 200, {17, 0});
  csv::write_overlap_stats(path, st);
  auto text = slurp(path);
  CHECK(first_line(text) ==
        "dim,n_samples,mean_p0,stderr,window_lo,window_hi,empirical_frac,analytic_frac");
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.rfind("16,200,", 0) == 0);
  }
  CHECK(rows == 3);  // one per default probe window
  std::remove(path.c_str());
}

TEST_CASE("report csv schema and sentinels", "[csv]") {
  auto path = tmp_path("qllg_test_report.csv");
  {
    auto f = csv::open_out(path);
    csv::write_report_header(f);
    ConvergenceReport ok;
    ok.e_exact = -6.0;
    ok.e_sim = -5.999999;
    ok.energy_error = 1e-6;
    ok.p0 = 0.25;
    ok.t_converged = 12.5;
    ok.converged = true;
    csv::write_report_row(f, 1.5, 42, ok);
    ConvergenceReport stuck;
    stuck.t_converged = -1.0;
    stuck.converged = false;
    csv::write_report_row(f, 2.0, 43, stuck);
  }
  auto text = slurp(path);
  CHECK(first_line(text) ==
        "h,seed,p0,E_exact,E_sim,energy_error,infidelity,subspace_infidelity,"
        "fitted_rate,predicted_rate,tau_predicted,t_converged,converged");
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line.rfind("1.5,42,0.25,", 0) == 0);
  CHECK(line.ends_with(",12.5,true"));
  std::getline(is, line);
  CHECK(line.ends_with(",,false"));  // empty t_converged field
  std::remove(path.c_str());
}

TEST_CASE("checkpoint round-trip is bit exact", "[csv]") {
  auto path = tmp_path("qllg_test_ckpt.csv");
  std::mt19937_64 eng(97);
  StateVector psi = test::random_state(eng, 4);
  const std::uint64_t big_seed = 0xDEADBEEFCAFEBABEull;
  csv::write_checkpoint(path, psi, 3.25, big_seed);
  auto c = csv::load_checkpoint(path);
  CHECK(c.t_final == 3.25);
  CHECK(c.seed == big_seed);
  REQUIRE(c.state.dim() == psi.dim());
  CHECK(c.state.n_sites == 4);
  for (Eigen::Index k = 0; k < psi.dim(); ++k) {
    CHECK(c.state.amps[k].real() == psi.amps[k].real());
    CHECK(c.state.amps[k].imag() == psi.amps[k].imag());
  }
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loading failure modes", "[csv]") {
  CHECK_THROWS_AS(csv::load_checkpoint("/nonexistent/ckpt.csv"), std::runtime_error);
  auto path = tmp_path("qllg_test_badckpt.csv");
  {
    std::ofstream f(path, std::ios::binary);
    f << "not a checkpoint\n";
  }
  CHECK_THROWS_AS(csv::load_checkpoint(path), std::runtime_error);
  {
    std::ofstream f(path, std::ios::binary);
    f << "# n_sites=2 t_final=1 seed=5\nre,im\n0.5,0\n";  // 3 rows missing
  }
  CHECK_THROWS_AS(csv::load_checkpoint(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("identical inputs write identical bytes", "[csv]") {
  auto a = tmp_path("qllg_test_det_a.csv");
  auto b = tmp_path("qllg_test_det_b.csv");
  auto traj = short_run(true);
  csv::write_trajectory(a, traj);
  csv::write_trajectory(b, traj);
  CHECK(slurp(a) == slurp(b));

  auto s = diagonalize(build_spin_chain({3, 2.0, 1.0}));
  auto st1 = overlap_statistics(s, 300, {19, 5});
  auto st2 = overlap_statistics(s, 300, {19, 5});
  csv::write_overlap_stats(a, st1);
  csv::write_overlap_stats(b, st2);
  CHECK(slurp(a) == slurp(b));
  std::remove(a.c_str());
  std::remove(b.c_str());
}
