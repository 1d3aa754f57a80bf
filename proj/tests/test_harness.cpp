#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>

#include "feec/harness.hpp"

using namespace feec;
using harness::Config;

namespace {

std::string write_temp(const std::string& text) {
  static int counter = 0;
  std::string path = (std::filesystem::temp_directory_path() /
                      ("feec_cfg_" + std::to_string(counter++) + ".cfg"))
                         .string();
  std::ofstream f(path);
  f << text;
  return path;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("config parsing handles comments, whitespace, and types") {
  std::string path = write_temp(
      "# a comment\n"
      "mesh.geometry = circle   # trailing comment\n"
      "  mesh.m=24\n"
      "time.dt = 1e-3\n"
      "\n"
      "flag = 1\n");
  Config cfg = Config::load(path);
  REQUIRE(cfg.get("mesh.geometry", "square") == "circle");
  REQUIRE(cfg.geti("mesh.m", 0) == 24);
  REQUIRE(cfg.getd("time.dt", 0.0) == Catch::Approx(1e-3));
  REQUIRE(cfg.geti("flag", 0) == 1);
  REQUIRE(cfg.geti("missing", 7) == 7);
  REQUIRE(!cfg.has("comment"));
  REQUIRE(cfg.echo().find("mesh.m = 24") != std::string::npos);
  std::filesystem::remove(path);

  std::string bad = write_temp("mesh.geometry circle\n");
  REQUIRE_THROWS(Config::load(bad));
  std::filesystem::remove(bad);
}

TEST_CASE("observed order of halved-mesh error pairs") {
  REQUIRE(harness::observed_order(0.4, 0.1) == Catch::Approx(2.0));
  REQUIRE(harness::observed_order(0.2, 0.1) == Catch::Approx(1.0));
  REQUIRE_THROWS(harness::observed_order(0.0, 0.1));
  REQUIRE_THROWS(harness::observed_order(0.1, -1.0));
}

TEST_CASE("thread cap honors the environment variable") {
  setenv("FEEC_THREADS", "2", 1);
  REQUIRE(harness::max_threads() == 2);
  unsetenv("FEEC_THREADS");
  REQUIRE(harness::max_threads() >= 1);

  // run_indexed touches every index exactly once and propagates exceptions
  std::vector<int> hits(64, 0);
  harness::run_indexed(64, [&](int i) { hits[i] += 1; });
  for (int h : hits) REQUIRE(h == 1);
  REQUIRE_THROWS(harness::run_indexed(8, [](int i) {
    if (i == 3) throw std::runtime_error("boom");
  }));
}

TEST_CASE("elliptic report is self-consistent and deterministic") {
  std::string cfg_path = write_temp("mesh.geometry = square\nmesh.nx = 4\nmesh.levels = 2\n");
  Config cfg = Config::load(cfg_path);
  auto dir = std::filesystem::temp_directory_path() / "feec_ell_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  REQUIRE(harness::run_elliptic(cfg, dir.string()) == 0);
  auto lines = read_lines((dir / "report.csv").string());
  REQUIRE(lines.size() == 3);
  REQUIRE(lines[0].rfind("level,h,err_u,", 0) == 0);
  // the recorded order equals log2 of the recorded error quotient
  auto split = [](const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    std::getline(ss, tok, ',');  // level column
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
  };
  auto r0 = split(lines[1]), r1 = split(lines[2]);
  // columns after the level: h, err_u, err_u_proj, err_sigma, orders..., residual
  REQUIRE(r1[4] == Catch::Approx(std::log2(r0[1] / r1[1])).margin(1e-9));
  REQUIRE(r1[6] == Catch::Approx(std::log2(r0[3] / r1[3])).margin(1e-9));
  REQUIRE(r0[7] < 1e-10);  // residual column

  // byte-for-byte reproducibility
  auto dir2 = std::filesystem::temp_directory_path() / "feec_ell_test2";
  std::filesystem::remove_all(dir2);
  std::filesystem::create_directories(dir2);
  REQUIRE(harness::run_elliptic(cfg, dir2.string()) == 0);
  REQUIRE(read_lines((dir2 / "report.csv").string()) == lines);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
  std::filesystem::remove(cfg_path);
}

TEST_CASE("heat flow of zero data stays exactly zero") {
  auto dir = std::filesystem::temp_directory_path() / "feec_zero_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories((dir / "snapshots").parent_path());
  SimplicialComplex mesh = build_square_mesh(8, 8, 1.0);
  FormSpace sig = make_form_space(mesh, 1, 1, Family::Trimmed);
  FormSpace usp = make_form_space(mesh, 2, 1, Family::Trimmed);
  MixedSystem sys = build_mixed_system(&sig, usp, nullptr);
  BackwardEuler stepper(sys, 1e-3);
  Vec U = Vec::Zero(usp.ndof), Sigma = stepper.initial_sigma(U);
  Vec F0 = Vec::Zero(usp.ndof);
  for (int n = 0; n < 10; ++n) stepper.step(Sigma, U, F0);
  REQUIRE(U.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(Sigma.cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("masked heat flow conserves mass and loses energy") {
  harness::CShapeResult res = harness::run_cshape_core(16, 1e-4, 20, 1.0, "", 0);
  REQUIRE(res.finite);
  REQUIRE(res.nonincreasing);
  REQUIRE(res.energy.size() == 21);
  REQUIRE(res.energy.back() < res.energy.front());
  // total integral drifts only through the boundary flux, which is tiny
  // while the mass is concentrated in the interior
  REQUIRE(res.mass.back() == Catch::Approx(res.mass.front()).epsilon(1e-3));
}
