#ifndef FEEC_HARNESS_HPP
#define FEEC_HARNESS_HPP

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "parabolic.hpp"

namespace feec::harness {

/// Flat `key = value` configuration, UTF-8, `#` comments, namespaced keys.
struct Config {
  std::map<std::string, std::string> kv;

  static Config load(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "Config::load: cannot open " + path);
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      std::string t = trim(line);
      if (t.empty()) continue;
      auto eq = t.find('=');
      require(eq != std::string::npos,
              "Config::load: missing '=' at line " + std::to_string(lineno));
      std::string key = trim(t.substr(0, eq)), val = trim(t.substr(eq + 1));
      require(!key.empty(), "Config::load: empty key at line " + std::to_string(lineno));
      c.kv[key] = val;
    }
    return c;
  }

  bool has(const std::string& k) const { return kv.count(k) > 0; }
  std::string get(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  double getd(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stod(it->second);
  }
  int geti(const std::string& k, int dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stoi(it->second);
  }

  std::string echo() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return os.str();
  }
};

/// Parallelism cap: FEEC_THREADS if set, hardware concurrency otherwise.
inline int max_threads() {
  if (const char* env = std::getenv("FEEC_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run fn(0..n-1), possibly in parallel; callers collect results into
/// index-addressed slots so the reduction order is deterministic.
template <typename Fn>
inline void run_indexed(int n, Fn&& fn) {
  int nt = std::min(max_threads(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

inline double observed_order(double e_coarse, double e_fine) {
  require(e_coarse > 0 && e_fine > 0, "observed_order: errors must be positive");
  return std::log2(e_coarse / e_fine);
}

namespace fields {

inline constexpr double pi = std::numbers::pi;

/// Scalar proxy of the square-domain manufactured density (a cosine family
/// centered on the domain, vanishing on the boundary of [0, side]^2).
inline double square_w(double x, double y, double side) {
  return std::cos(pi * (x - side / 2) / side) * std::cos(pi * (y - side / 2) / side);
}

inline FormField square_u(double side) {
  return [side](const Vec& p) {
    Vec v(1);
    v << square_w(p[0], p[1], side);
    return v;
  };
}

inline FormField square_f(double side) {
  return [side](const Vec& p) {
    Vec v(1);
    v << 2.0 * pi * pi / (side * side) * square_w(p[0], p[1], side);
    return v;
  };
}

inline FormField square_sigma(double side) {
  // sigma = w_y dx - w_x dy for the density u = w vol
  return [side](const Vec& p) {
    double c = pi / side;
    double wx = -c * std::sin(c * (p[0] - side / 2)) * std::cos(c * (p[1] - side / 2));
    double wy = -c * std::cos(c * (p[0] - side / 2)) * std::sin(c * (p[1] - side / 2));
    Vec v(2);
    v << wy, -wx;
    return v;
  };
}

/// Circle eigenform u = cos(theta) d theta: ambient covector x * (-y, x) on
/// the unit circle; an eigenform of the Hodge Laplacian with eigenvalue 1.
inline FormField circle_u(double scale = 1.0) {
  return [scale](const Vec& p) {
    Vec v(2);
    v << -p[0] * p[1], p[0] * p[0];
    return Vec(scale * v);
  };
}

/// Its codifferential sigma = sin(theta) = y as a 0-form.
inline FormField circle_sigma(double scale = 1.0) {
  return [scale](const Vec& p) {
    Vec v(1);
    v << scale * p[1];
    return v;
  };
}

/// Characteristic function of the default C-shaped set: the square
/// [0.2, 0.8]^2 with the arm [0.4, 1.0] x [0.4, 0.6] removed.
inline FormField cshape_mask(double side) {
  return [side](const Vec& p) {
    double x = p[0] / side, y = p[1] / side;
    bool outer = x >= 0.2 && x <= 0.8 && y >= 0.2 && y <= 0.8;
    bool cut = x >= 0.4 && y >= 0.4 && y <= 0.6;
    Vec v(1);
    v << ((outer && !cut) ? 1.0 : 0.0);
    return v;
  };
}

}  // namespace fields

// ---------------------------------------------------------------------------
// experiment runners

struct LevelErrors {
  double h = 0.0;
  double eu = 0.0;       // plain L2 error of u against the exact form
  double eu_proj = 0.0;  // discrete error against the L2-projected exact u
  double esigma = 0.0;
  double extra = 0.0;
};

inline void write_meta(const std::string& out, const Config& cfg,
                       const std::string& what, double seconds) {
  std::ofstream f(out + "/meta.txt");
  f << "tool = feec 1.0\nexperiment = " << what << "\nelapsed_s = " << seconds
    << "\n--- config ---\n"
    << cfg.echo();
}

inline std::ofstream open_csv(const std::string& path, const std::string& header) {
  std::ofstream f(path);
  require(f.good(), "cannot open " + path);
  f << header << "\n";
  f << std::setprecision(12);
  return f;
}

/// `mesh` subcommand: build the configured mesh, report counts, export VTK.
inline int run_mesh(const Config& cfg, const std::string& out) {
  std::string geom = cfg.get("mesh.geometry", "square");
  SimplicialComplex mesh;
  if (geom == "square")
    mesh = build_square_mesh(cfg.geti("mesh.nx", 8), cfg.geti("mesh.ny", 8),
                             cfg.getd("mesh.side", 1.0));
  else if (geom == "circle")
    mesh = build_circle_mesh(cfg.geti("mesh.m", 32));
  else if (geom == "sphere")
    mesh = build_icosphere(cfg.geti("mesh.level", 1));
  else
    require(false, "run_mesh: unknown geometry " + geom);
  auto csv = open_csv(out + "/report.csv", "n_vertices,n_edges,n_cells,euler,h_max");
  csv << mesh.count(0) << "," << mesh.count(1) << "," << mesh.count(mesh.dim) << ","
      << mesh.euler_characteristic() << "," << mesh.max_edge_length() << "\n";
  std::filesystem::create_directories(out + "/snapshots");
  write_vtk(mesh, out + "/snapshots/mesh.vtk");
  return 0;
}

/// Mixed elliptic convergence study. Geometries: `square` (k = 2 pair
/// RT0 x P0 with the cosine density) and `circle` (k = 1 Whitney pair with
/// the eigenform data, solved on the inscribed polygon and compared on the
/// exact circle).
inline int run_elliptic(const Config& cfg, const std::string& out) {
  std::string geom = cfg.get("mesh.geometry", "square");
  int levels = cfg.geti("mesh.levels", 3);
  require(levels >= 2, "run_elliptic: need at least 2 levels");
  std::vector<LevelErrors> res(levels);

  if (geom == "square") {
    int nx0 = cfg.geti("mesh.nx", 8);
    double side = cfg.getd("mesh.side", 1.0);
    run_indexed(levels, [&](int l) {
      SimplicialComplex mesh = build_square_mesh(nx0 << l, nx0 << l, side);
      FormSpace sig = make_form_space(mesh, 1, 1, Family::Trimmed);
      FormSpace usp = make_form_space(mesh, 2, 1, Family::Trimmed);
      // the square's top-degree harmonic space is trivial (asserted in the
      // cohomology checks); skip its dense eigensolve on the finer levels
      MixedSystem sys = build_mixed_system(&sig, usp, nullptr, {}, false);
      MixedEllipticSolver solver(sys);
      Vec F = load_vector(usp, fields::square_f(side));
      MixedSolution sol = solver.solve(F, Vec::Zero(sys.H.cols()));
      Vec Pu = project(usp, fields::square_u(side));
      res[l] = {mesh.max_edge_length(),
                l2_error(usp, sol.u, fields::square_u(side)),
                l2_norm(sys.Mu, Vec(sol.u - Pu)),
                l2_error(sig, sol.sigma, fields::square_sigma(side)),
                std::max({sol.res_sigma, sol.res_u, sol.res_harmonic})};
    });
  } else if (geom == "circle") {
    int m0 = cfg.geti("mesh.m", 32);
    run_indexed(levels, [&](int l) {
      SimplicialComplex mesh = build_circle_mesh(m0 << l);
      FormSpace sig = make_form_space(mesh, 0, 1, Family::Trimmed);
      FormSpace usp = make_form_space(mesh, 1, 1, Family::Trimmed);
      MixedSystem sys = build_mixed_system(&sig, usp, nullptr);
      MixedEllipticSolver solver(sys);
      Vec F = load_vector(usp, fields::circle_u(), true);  // exact-geometry load
      MixedSolution sol = solver.solve(F, Vec::Zero(sys.H.cols()));
      Vec Pu = project(usp, fields::circle_u(), true);
      res[l] = {mesh.max_edge_length(),
                l2_error(usp, sol.u, fields::circle_u(), true),
                l2_norm(sys.Mu, Vec(sol.u - Pu)),
                l2_error(sig, sol.sigma, fields::circle_sigma(), true),
                std::max({sol.res_sigma, sol.res_u, sol.res_harmonic})};
    });
  } else {
    require(false, "run_elliptic: unsupported geometry " + geom);
  }

  auto csv = open_csv(out + "/report.csv",
                      "level,h,err_u,err_u_proj,err_sigma,order_u,order_u_proj,"
                      "order_sigma,residual");
  for (int l = 0; l < levels; ++l) {
    double ou = l ? observed_order(res[l - 1].eu, res[l].eu) : 0.0;
    double op = l ? observed_order(res[l - 1].eu_proj, res[l].eu_proj) : 0.0;
    double os = l ? observed_order(res[l - 1].esigma, res[l].esigma) : 0.0;
    csv << l << "," << res[l].h << "," << res[l].eu << "," << res[l].eu_proj << ","
        << res[l].esigma << "," << ou << "," << op << "," << os << ","
        << res[l].extra << "\n";
  }
  return 0;
}

/// One parabolic run on a circle mesh: decaying eigenform, backward Euler,
/// per-step error tracking against the exact solution on the exact circle.
struct ParabolicRun {
  double h = 0.0, dt = 0.0;
  double eu_inf = 0.0, esigma_inf = 0.0;   // max over steps of L2 errors
  double eu_proj_inf = 0.0;                // max error against projected exact u
  double eu_l2 = 0.0, esigma_l2 = 0.0;     // trapezoid-in-time L2(I, L2)
  double r1_max = 0.0;                     // first error-equation residual
  double harmonic_drift = 0.0;             // max per-step drift of <u, q>
  std::vector<double> times, eu_series, esigma_series, energy_series;
  std::vector<double> rho_series, theta_series, psi_series, eps_series;
};

inline ParabolicRun run_parabolic_circle(int m, double T, double dt,
                                         int sample_stride = 1) {
  SimplicialComplex mesh = build_circle_mesh(m);
  FormSpace sig = make_form_space(mesh, 0, 1, Family::Trimmed);
  FormSpace usp = make_form_space(mesh, 1, 1, Family::Trimmed);
  MixedSystem sys = build_mixed_system(&sig, usp, nullptr);
  MixedEllipticSolver elliptic(sys);
  BackwardEuler stepper(sys, dt);

  // elliptic projection of the t=0 state: data -Lap u(0) = -u(0), zero
  // harmonic part; the exact solution scales it by exp(-t)
  Vec F_unit = load_vector(usp, fields::circle_u(), true);
  MixedSolution tilde0 = elliptic.solve(F_unit, Vec::Zero(sys.H.cols()));

  Vec ihu0 = project(usp, fields::circle_u(), true);
  Vec ihsig0 = project(sig, fields::circle_sigma(), true);
  Vec U = ihu0;
  Vec Sigma = stepper.initial_sigma(U);
  Vec q_u0 = sys.H.transpose() * (sys.Mu * U);

  ParabolicRun run;
  run.h = mesh.max_edge_length();
  run.dt = dt;
  int nsteps = static_cast<int>(std::round(T / dt));
  Vec F0 = Vec::Zero(usp.ndof);

  auto record = [&](int n) {
    double t = n * dt;
    double s = std::exp(-t);
    double eu = l2_error(usp, U, fields::circle_u(s), true);
    double es = l2_error(sig, Sigma, fields::circle_sigma(s), true);
    double r1 = (sys.Msigma * Sigma - sys.B.transpose() * U).norm() /
                std::max((sys.B.transpose() * U).norm(), 1e-30);
    run.r1_max = std::max(run.r1_max, r1);
    run.eu_inf = std::max(run.eu_inf, eu);
    run.eu_proj_inf = std::max(run.eu_proj_inf, l2_norm(sys.Mu, Vec(U - s * ihu0)));
    run.esigma_inf = std::max(run.esigma_inf, es);
    Vec q = sys.H.transpose() * (sys.Mu * U);
    run.harmonic_drift = std::max(run.harmonic_drift, (q - q_u0).norm());
    run.times.push_back(t);
    run.eu_series.push_back(eu);
    run.esigma_series.push_back(es);
    run.energy_series.push_back(stepper.energy(U));
    // split error functions against the elliptic projection s * tilde0;
    // the exact solution scales in time, so its projection does too
    Vec ihu = s * ihu0;
    Vec ihsig = s * ihsig0;
    run.rho_series.push_back(l2_norm(sys.Mu, Vec(s * tilde0.u - ihu)));
    run.theta_series.push_back(l2_norm(sys.Mu, Vec(U - s * tilde0.u)));
    run.psi_series.push_back(l2_norm(sys.Msigma, Vec(Sigma - ihsig)));
    run.eps_series.push_back(l2_norm(sys.Msigma, Vec(Sigma - s * tilde0.sigma)));
  };

  record(0);
  for (int n = 1; n <= nsteps; ++n) {
    stepper.step(Sigma, U, F0);
    if (n % sample_stride == 0 || n == nsteps) record(n);
  }
  // trapezoid in time over the sampled series
  auto trapz = [&](const std::vector<double>& e) {
    double acc = 0.0;
    for (size_t i = 1; i < run.times.size(); ++i)
      acc += 0.5 * (e[i] * e[i] + e[i - 1] * e[i - 1]) *
             (run.times[i] - run.times[i - 1]);
    return std::sqrt(acc);
  };
  run.eu_l2 = trapz(run.eu_series);
  run.esigma_l2 = trapz(run.esigma_series);
  return run;
}

inline int run_parabolic(const Config& cfg, const std::string& out) {
  require(cfg.get("mesh.geometry", "circle") == "circle",
          "run_parabolic: only the circle family is supported");
  int m0 = cfg.geti("mesh.m", 16);
  int levels = cfg.geti("mesh.levels", 3);
  require(levels >= 2, "run_parabolic: need at least 2 levels");
  double T = cfg.getd("time.T", 0.25);
  std::vector<ParabolicRun> runs(levels);
  run_indexed(levels, [&](int l) {
    int m = m0 << l;
    double h = 2.0 * std::sin(std::numbers::pi / m);
    double dt = cfg.has("time.dt") ? cfg.getd("time.dt", 0.0) : h * h / 4.0;
    if (cfg.has("time.dt_cap")) dt = std::min(dt, cfg.getd("time.dt_cap", dt));
    runs[l] = run_parabolic_circle(m, T, dt, cfg.geti("time.sample_stride", 1));
  });
  auto csv = open_csv(out + "/report.csv",
                      "level,h,dt,err_u_linf,err_u_proj_linf,err_sigma_linf,"
                      "err_u_l2,err_sigma_l2,order_u,order_u_proj,order_sigma,"
                      "r1_max,harmonic_drift");
  for (int l = 0; l < levels; ++l) {
    double ou = l ? observed_order(runs[l - 1].eu_inf, runs[l].eu_inf) : 0.0;
    double op = l ? observed_order(runs[l - 1].eu_proj_inf, runs[l].eu_proj_inf) : 0.0;
    double os = l ? observed_order(runs[l - 1].esigma_inf, runs[l].esigma_inf) : 0.0;
    csv << l << "," << runs[l].h << "," << runs[l].dt << "," << runs[l].eu_inf << ","
        << runs[l].eu_proj_inf << "," << runs[l].esigma_inf << "," << runs[l].eu_l2
        << "," << runs[l].esigma_l2 << "," << ou << "," << op << "," << os << ","
        << runs[l].r1_max << "," << runs[l].harmonic_drift << "\n";
  }
  auto series = open_csv(out + "/series.csv",
                         "level,t,err_u,err_sigma,energy,rho,theta,psi,eps");
  for (int l = 0; l < levels; ++l)
    for (size_t i = 0; i < runs[l].times.size(); ++i)
      series << l << "," << runs[l].times[i] << "," << runs[l].eu_series[i] << ","
             << runs[l].esigma_series[i] << "," << runs[l].energy_series[i] << ","
             << runs[l].rho_series[i] << "," << runs[l].theta_series[i] << ","
             << runs[l].psi_series[i] << "," << runs[l].eps_series[i] << "\n";
  return 0;
}

/// Geometric-consistency study on the circle (or sphere): per level the
/// sup-norm defects of the degree-s charts and the operator deviation
/// max |1 - lambda| between the chart mass matrix and its exact-surface
/// counterpart, with observed orders.
struct CrimesRow {
  double h = 0.0, delta = 0.0, nugap = 0.0, dev = 0.0;
};

inline int run_crimes(const Config& cfg, const std::string& out) {
  std::string geom = cfg.get("mesh.geometry", "circle");
  int s = cfg.geti("fem.s", 1);
  int levels = cfg.geti("mesh.levels", 3);
  require(levels >= 2, "run_crimes: need at least 2 levels");
  std::vector<CrimesRow> rows(levels);
  run_indexed(levels, [&](int l) {
    SimplicialComplex mesh;
    if (geom == "circle")
      mesh = build_circle_mesh(cfg.geti("mesh.m", 16) << l);
    else if (geom == "sphere")
      mesh = build_icosphere(cfg.geti("mesh.level", 1) + l);
    else
      require(false, "run_crimes: unsupported geometry " + geom);
    GeometricDefects gd = geometric_defects(mesh, s);
    FormSpace v0 = make_form_space(mesh, 0, 1, Family::Trimmed);
    SpMat M = mass_matrix(v0, {s, false});
    SpMat Mt = mass_matrix(v0, {s, true});
    rows[l] = {mesh.max_edge_length(), gd.distance_inf, gd.normal_gap_inf,
               mass_deviation(Mt, M)};
  });
  auto csv = open_csv(out + "/report.csv",
                      "level,h,delta_inf,nu_gap_inf,I_minus_Jh,order_delta,"
                      "order_nu,order_IJh");
  for (int l = 0; l < levels; ++l) {
    double od = l ? observed_order(rows[l - 1].delta, rows[l].delta) : 0.0;
    double on = l ? observed_order(rows[l - 1].nugap, rows[l].nugap) : 0.0;
    double oj = l ? observed_order(rows[l - 1].dev, rows[l].dev) : 0.0;
    csv << l << "," << rows[l].h << "," << rows[l].delta << "," << rows[l].nugap
        << "," << rows[l].dev << "," << od << "," << on << "," << oj << "\n";
  }
  return 0;
}

/// C-shape heat flow on the unit square: backward Euler on the RT0 x P0
/// pair from the characteristic-function density, zero load. Emits per-step
/// energy and total mass plus density snapshots.
struct CShapeResult {
  std::vector<double> energy, mass;
  bool nonincreasing = true;
  bool finite = true;
};

inline CShapeResult run_cshape_core(int nx, double dt, int nsteps, double side,
                                    const std::string& out, int snapshot_stride) {
  SimplicialComplex mesh = build_square_mesh(nx, nx, side);
  FormSpace sig = make_form_space(mesh, 1, 1, Family::Trimmed);
  FormSpace usp = make_form_space(mesh, 2, 1, Family::Trimmed);
  // the harmonic space is empty here and unused by the stepper; skipping it
  // avoids a dense eigensolve that would dominate large runs
  MixedSystem sys = build_mixed_system(&sig, usp, nullptr, {}, false);
  BackwardEuler stepper(sys, dt);
  Vec U = project(usp, fields::cshape_mask(side), {}, 8);
  Vec Sigma = stepper.initial_sigma(U);
  Vec F0 = Vec::Zero(usp.ndof);

  CShapeResult res;
  auto total_mass = [&](const Vec& u) { return u.sum(); };  // unit-integral basis
  auto snapshot = [&](int n) {
    if (out.empty()) return;
    // cell densities q = f / sqrt(det G) at the centroid
    Vec dens(mesh.count(2));
    Vec centroid(2);
    centroid << 1.0 / 3, 1.0 / 3;
    for (int e = 0; e < mesh.count(2); ++e) {
      GeomSample g = element_chart(mesh, e).sample(centroid);
      dens[e] = eval_local(usp, e, U, centroid)[0] / g.sqrtG;
    }
    std::ostringstream name;
    name << out << "/snapshots/step_" << std::setw(6) << std::setfill('0') << n
         << ".vtk";
    write_vtk(mesh, name.str(), &dens, "density");
  };

  res.energy.push_back(stepper.energy(U));
  res.mass.push_back(total_mass(U));
  if (!out.empty()) std::filesystem::create_directories(out + "/snapshots");
  snapshot(0);
  for (int n = 1; n <= nsteps; ++n) {
    stepper.step(Sigma, U, F0);
    double en = stepper.energy(U);
    if (!std::isfinite(en)) res.finite = false;
    if (en > res.energy.back() * (1.0 + 1e-12)) res.nonincreasing = false;
    res.energy.push_back(en);
    res.mass.push_back(total_mass(U));
    if (snapshot_stride > 0 && (n % snapshot_stride == 0 || n == nsteps)) snapshot(n);
  }
  return res;
}

inline int run_cshape(const Config& cfg, const std::string& out) {
  bool full_scale = cfg.geti("cshape.full_scale", 0) != 0;
  int nx = cfg.geti("mesh.nx", full_scale ? 100 : 50);
  double dt = cfg.getd("time.dt", full_scale ? 5e-5 : 1e-4);
  int nsteps = cfg.geti("time.steps", full_scale ? 1000 : 200);
  CShapeResult res = run_cshape_core(nx, dt, nsteps, cfg.getd("mesh.side", 1.0), out,
                                     cfg.geti("output.snapshot_stride", 50));
  auto csv = open_csv(out + "/series.csv", "step,energy,total_mass");
  for (size_t i = 0; i < res.energy.size(); ++i)
    csv << i << "," << res.energy[i] << "," << res.mass[i] << "\n";
  auto rep = open_csv(out + "/report.csv", "nonincreasing,finite,steps");
  rep << (res.nonincreasing ? 1 : 0) << "," << (res.finite ? 1 : 0) << ","
      << res.energy.size() - 1 << "\n";
  return (res.nonincreasing && res.finite) ? 0 : 1;
}

}  // namespace feec::harness

#endif
