#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "qllg/config.hpp"

using namespace qllg;
using Catch::Approx;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream f(path, std::ios::binary);
  f << text;
  return path;
}

}  // namespace

TEST_CASE("toml subset parser", "[config]") {
  SECTION("sections flatten into dotted keys") {
    auto t = toml::parse("top = 1\n[model]\nn_sites = 12\nJ = 2.0\n[run]\nout = \"dir\"\n");
    CHECK(toml::require_num(t, "top") == 1.0);
    CHECK(toml::require_num(t, "model.n_sites") == 12.0);
    CHECK(toml::require_str(t, "run.out") == "dir");
  }
  SECTION("numbers, separators, booleans") {
    auto t = toml::parse("a = 1_000\nb = -2.5e-3\nc = true\nd = false\n");
    CHECK(toml::require_num(t, "a") == 1000.0);
    CHECK(toml::require_num(t, "b") == Approx(-2.5e-3));
    CHECK(toml::get_bool(t, "c", false));
    CHECK_FALSE(toml::get_bool(t, "d", true));
  }
  SECTION("arrays") {
    auto t = toml::parse("nums = [1, 2.5, 3]\nwords = [\"a\", \"b\"]\nempty = []\n");
    CHECK(toml::get_num_list(t, "nums") == std::vector<double>{1.0, 2.5, 3.0});
    REQUIRE(t.at("words").kind == toml::Value::Kind::StrList);
    CHECK(t.at("words").strs == std::vector<std::string>{"a", "b"});
    CHECK(toml::get_num_list(t, "empty").empty());
  }
  SECTION("scalar promotes to one-element list") {
    auto t = toml::parse("x = 3\n");
    CHECK(toml::get_num_list(t, "x") == std::vector<double>{3.0});
  }
  SECTION("comments and string escapes") {
    auto t = toml::parse("# full line\nkey = 7 # trailing\nname = \"a#b\\n\\\"q\\\"\"\n");
    CHECK(toml::require_num(t, "key") == 7.0);
    CHECK(toml::require_str(t, "name") == "a#b\n\"q\"");
  }
  SECTION("parse errors carry line numbers") {
    CHECK_THROWS_AS(toml::parse("a = 1\na = 2\n"), toml::ParseError);        // duplicate
    CHECK_THROWS_AS(toml::parse("[section\n"), toml::ParseError);            // malformed header
    CHECK_THROWS_AS(toml::parse("just a token\n"), toml::ParseError);        // no '='
    CHECK_THROWS_AS(toml::parse("a = 12q\n"), toml::ParseError);             // junk number
    CHECK_THROWS_AS(toml::parse("a = [1, \"x\"]\n"), toml::ParseError);      // mixed array
    CHECK_THROWS_AS(toml::parse("a = \"open\n"), toml::ParseError);          // unterminated
    CHECK_THROWS_AS(toml::parse("a = 1 2\n"), toml::ParseError);             // trailing content
    CHECK_THROWS_AS(toml::parse(" = 1\n"), toml::ParseError);                // empty key
    CHECK_THROWS_AS(toml::parse("a b = 1\n"), toml::ParseError);             // bad key char
    CHECK_THROWS_AS(toml::parse("a = [1, 2\n"), toml::ParseError);           // unterminated array
  }
  SECTION("typed accessor mismatches") {
    auto t = toml::parse("s = \"text\"\nn = 4\n");
    CHECK_THROWS_AS(toml::require_num(t, "s"), toml::ParseError);
    CHECK_THROWS_AS(toml::require_str(t, "n"), toml::ParseError);
    CHECK_THROWS_AS(toml::require_num(t, "absent"), toml::ParseError);
    CHECK(toml::get_num(t, "absent", 9.5) == 9.5);
    CHECK_THROWS_AS(toml::get_num_list(t, "s"), toml::ParseError);
  }
}

TEST_CASE("compact pauli term strings", "[config]") {
  auto t = pauli_string_from_compact("2.0 X0 X1");
  CHECK(t.coeff == 2.0);
  REQUIRE(t.sites.size() == 2);
  CHECK(t.sites[0] == std::pair{0, Axis::X});
  CHECK(t.sites[1] == std::pair{1, Axis::X});
  auto z = pauli_string_from_compact("-1.5 Z2");
  CHECK(z.coeff == -1.5);
  CHECK(z.sites[0] == std::pair{2, Axis::Z});
  auto id = pauli_string_from_compact("0.25");
  CHECK(id.sites.empty());  // identity term: coefficient only
  CHECK_THROWS_AS(pauli_string_from_compact("X0 X1"), ConfigError);
  CHECK_THROWS_AS(pauli_string_from_compact("1.0 Q0"), std::invalid_argument);
  CHECK_THROWS_AS(pauli_string_from_compact("1.0 Xq"), ConfigError);
  CHECK_THROWS_AS(pauli_string_from_compact("1.0 X"), ConfigError);
}

TEST_CASE("hamiltonian documents agree across formats", "[config]") {
  // The same two-site chain expressed three ways: JSON term list, TOML
  // compact terms, and the model shorthand. All must realize the same matrix.
  const std::string json_text = R"({
    "n_sites": 2,
    "terms": [
      {"sites": [[0,"X"],[1,"X"]], "coeff": 2.0},
      {"sites": [[0,"Y"],[1,"Y"]], "coeff": 2.0},
      {"sites": [[0,"Z"],[1,"Z"]], "coeff": 2.0},
      {"sites": [[0,"Z"]], "coeff": -1.5},
      {"sites": [[1,"Z"]], "coeff": -1.5}
    ]
  })";
  const std::string toml_text =
      "[hamiltonian]\n"
      "n_sites = 2\n"
      "terms = [\"2.0 X0 X1\", \"2.0 Y0 Y1\", \"2.0 Z0 Z1\", \"-1.5 Z0\", \"-1.5 Z1\"]\n";
  const std::string toml_shorthand =
      "[hamiltonian]\nmodel = \"heisenberg_chain\"\nn_sites = 2\nJ = 2.0\nh = 1.5\n";

  auto from_json = hamiltonian_from_json(nlohmann::json::parse(json_text));
  auto from_toml = hamiltonian_from_toml(toml::parse(toml_text));
  auto from_short = hamiltonian_from_toml(toml::parse(toml_shorthand));
  auto reference = build_spin_chain({2, 2.0, 1.5});

  CHECK((from_json.to_dense() - reference.to_dense()).norm() < 1e-14);
  CHECK((from_toml.to_dense() - reference.to_dense()).norm() < 1e-14);
  CHECK((from_short.to_dense() - reference.to_dense()).norm() < 1e-14);
}

TEST_CASE("hamiltonian json round-trip", "[config]") {
  std::mt19937_64 eng(79);
  auto h = test::random_pauli_sum(eng, 3, 7);
  auto back = hamiltonian_from_json(hamiltonian_to_json(h));
  CHECK((h.to_dense() - back.to_dense()).norm() < 1e-14);
  CHECK(back.norm_bound() == Approx(h.norm_bound()));
}

TEST_CASE("hamiltonian files load by extension", "[config]") {
  auto jpath = write_temp("qllg_test_ham.json",
                          R"({"model": "heisenberg_chain", "n_sites": 3, "J": 1.0, "h": 0.5})");
  auto tpath = write_temp("qllg_test_ham.toml",
                          "[hamiltonian]\nmodel = \"heisenberg_chain\"\nn_sites = 3\nJ = 1.0\nh = 0.5\n");
  auto reference = build_spin_chain({3, 1.0, 0.5});
  CHECK((hamiltonian_from_file(jpath).to_dense() - reference.to_dense()).norm() < 1e-14);
  CHECK((hamiltonian_from_file(tpath).to_dense() - reference.to_dense()).norm() < 1e-14);
  std::remove(jpath.c_str());
  std::remove(tpath.c_str());
  CHECK_THROWS_AS(hamiltonian_from_file("/nonexistent/nothing.toml"), toml::ParseError);
}

TEST_CASE("hamiltonian document rejections", "[config]") {
  CHECK_THROWS_AS(hamiltonian_from_json(nlohmann::json::parse(R"({"model": "ising"})")),
                  ConfigError);
  CHECK_THROWS_AS(hamiltonian_from_json(nlohmann::json::parse(R"({"n_sites": 2})")), ConfigError);
  CHECK_THROWS_AS(
      hamiltonian_from_json(nlohmann::json::parse(
          R"({"n_sites": 2, "terms": [{"sites": [[0,"XX"]], "coeff": 1.0}]})")),
      ConfigError);
  CHECK_THROWS_AS(hamiltonian_from_toml(toml::parse("[hamiltonian]\nn_sites = 2\nterms = [1, 2]\n")),
                  ConfigError);
  CHECK_THROWS_AS(hamiltonian_from_toml(toml::parse("[hamiltonian]\nn_sites = 2\n")), ConfigError);
}

TEST_CASE("default field grid", "[config]") {
  auto g = default_h_grid();
  REQUIRE(g.size() == 51);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 5.0);
  CHECK(g[13] == Approx(1.3).margin(1e-12));
}

TEST_CASE("sweep config from toml", "[config]") {
  SECTION("full document") {
    auto c = sweep_config_from_toml(toml::parse(
        "[model]\nn_sites = 6\nJ = 1.5\n"
        "[sweep]\nh_grid = [0.5, 1.0, 2.0]\n"
        "[qllg]\nkappa = 0.2\ndt = 0.01\nt_max = 50\nresidual_tol = 1e-9\nintegrator = \"euler\"\nt_max_cap = 500\n"
        "[run]\nseeds = [1, 2, 3]\nout = \"results\"\nrecord_stride = 8\nstrict = true\n"));
    CHECK(c.n_sites == 6);
    CHECK(c.J == 1.5);
    CHECK(c.h_grid == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(c.qllg.kappa == 0.2);
    CHECK(c.qllg.dt == 0.01);
    CHECK(c.qllg.t_max == 50.0);
    CHECK(c.qllg.residual_tol == 1e-9);
    CHECK(c.qllg.integrator == Integrator::euler);
    CHECK(c.t_max_cap == 500.0);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.out_dir == "results");
    CHECK(c.record_stride == 8);
    CHECK(c.strict);
  }
  SECTION("range form of the grid") {
    auto c = sweep_config_from_toml(
        toml::parse("[sweep]\nh_min = 0.0\nh_max = 1.0\nh_step = 0.25\n"));
    REQUIRE(c.h_grid.size() == 5);
    CHECK(c.h_grid.front() == 0.0);
    CHECK(c.h_grid.back() == Approx(1.0));
  }
  SECTION("defaults survive an empty document") {
    auto c = sweep_config_from_toml(toml::parse(""));
    CHECK(c.n_sites == 12);
    CHECK(c.J == 2.0);
    CHECK(c.h_grid.size() == 51);
    CHECK(c.qllg.kappa == 0.3);
    CHECK(c.seeds == std::vector<std::uint64_t>{42});
    CHECK_FALSE(c.strict);
  }
  SECTION("rejections") {
    CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[sweep]\nh_grid = []\n")), ConfigError);
    CHECK_THROWS_AS(
        sweep_config_from_toml(toml::parse("[sweep]\nh_min = 2\nh_max = 1\nh_step = 0.1\n")),
        ConfigError);
    CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[run]\nseeds = [-1]\n")), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[run]\nrecord_stride = 0\n")), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[model]\nn_sites = 1\n")), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_toml(toml::parse("[qllg]\nintegrator = \"leapfrog\"\n")),
                    std::invalid_argument);
  }
}

TEST_CASE("sweep config json round-trip", "[config]") {
  auto c = sweep_config_from_toml(toml::parse(
      "[model]\nn_sites = 4\nJ = 2.0\n[sweep]\nh_grid = [1.0, 2.0]\n"
      "[qllg]\nkappa = 0.25\n[run]\nseeds = [7]\nout = \"x\"\nstrict = true\n"));
  auto c2 = sweep_config_from_json(sweep_config_to_json(c));
  CHECK(c2.n_sites == c.n_sites);
  CHECK(c2.J == c.J);
  CHECK(c2.h_grid == c.h_grid);
  CHECK(c2.qllg.kappa == c.qllg.kappa);
  CHECK(c2.qllg.integrator == c.qllg.integrator);
  CHECK(c2.seeds == c.seeds);
  CHECK(c2.out_dir == c.out_dir);
  CHECK(c2.strict == c.strict);
}

TEST_CASE("sweep config file loading", "[config]") {
  auto tpath = write_temp("qllg_test_sweep.toml", "[model]\nn_sites = 4\n[run]\nseeds = [9]\n");
  auto c = sweep_config_from_file(tpath);
  CHECK(c.n_sites == 4);
  CHECK(c.seeds == std::vector<std::uint64_t>{9});
  std::remove(tpath.c_str());

  auto jpath = write_temp("qllg_test_sweep.json",
                          R"({"model": {"n_sites": 6}, "run": {"seeds": [3, 4]}})");
  auto cj = sweep_config_from_file(jpath);
  CHECK(cj.n_sites == 6);
  CHECK(cj.seeds == std::vector<std::uint64_t>{3, 4});
  std::remove(jpath.c_str());
}

TEST_CASE("run manifest contents", "[config]") {
  auto path = (std::filesystem::temp_directory_path() / "qllg_test_manifest.json").string();
  auto c = sweep_config_from_toml(toml::parse("[model]\nn_sites = 4\n"));
  write_manifest(path, "sweep", sweep_config_to_json(c), {{"n_rows", 8}});
  std::ifstream f(path);
  REQUIRE(f.good());
  auto m = nlohmann::json::parse(f);
  CHECK(m.at("tool") == "qllg");
  CHECK(m.at("version") == kVersion);
  CHECK(m.at("verb") == "sweep");
  CHECK(m.at("n_rows") == 8);
  CHECK(m.at("config").at("model").at("n_sites") == 4);
  CHECK(m.contains("timestamp"));
  std::remove(path.c_str());
}
