/// Command line front end: mesh construction, convergence studies, the
/// geometric-consistency (variational crime) study, and the C-shape heat
/// flow. Every subcommand takes --config <path> and --out <dir> and writes
/// CSV reports, VTK snapshots, and meta.txt into the output directory.
#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "feec/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"finite element exterior calculus experiment harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<CLI::App*> subs;
  for (const char* name : {"mesh", "elliptic", "parabolic", "crimes", "cshape"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--out", out_dir, "output directory")->required();
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    feec::harness::Config cfg;
    if (!config_path.empty()) cfg = feec::harness::Config::load(config_path);
    std::filesystem::create_directories(out_dir);
    std::string name = app.get_subcommands().front()->get_name();
    auto t0 = std::chrono::steady_clock::now();
    int rc = 1;
    if (name == "mesh") rc = feec::harness::run_mesh(cfg, out_dir);
    if (name == "elliptic") rc = feec::harness::run_elliptic(cfg, out_dir);
    if (name == "parabolic") rc = feec::harness::run_parabolic(cfg, out_dir);
    if (name == "crimes") rc = feec::harness::run_crimes(cfg, out_dir);
    if (name == "cshape") rc = feec::harness::run_cshape(cfg, out_dir);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    feec::harness::write_meta(out_dir, cfg, name, secs);
    if (rc != 0) std::cerr << "feec " << name << ": configured assertions failed\n";
    return rc;
  } catch (const std::exception& ex) {
    std::cerr << "feec: error: " << ex.what() << "\n";
    return 2;
  }
}
