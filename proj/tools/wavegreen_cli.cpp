// Batch front-end: runs the named study from a JSON config (flags override
// file values) and writes CSV/raster outputs plus a manifest listing every
// output file with its content hash.
//
// Exit codes: 0 success, 1 study failure (failing check named in the
// manifest), 2 usage or configuration error.

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavegreen/acceptance.hpp"
#include "wavegreen/greenfn.hpp"
#include "wavegreen/io.hpp"
#include "wavegreen/pdo.hpp"
#include "wavegreen/rays.hpp"
#include "wavegreen/strip.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wgf;
using pdo::cdouble;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Run {
  json cfg;
  fs::path out_dir;
  json manifest;
  std::vector<fs::path> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  template <typename T>
  T get(const std::string& key, const T& fallback) const {
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
  }
  json section(const std::string& key) const {
    return cfg.contains(key) ? cfg.at(key) : json::object();
  }
  fs::path path(const std::string& name) {
    outputs.push_back(out_dir / name);
    return outputs.back();
  }
  void finish(const std::string& command, bool ok, const std::string& failure = "") {
    manifest["command"] = command;
    manifest["config"] = cfg;
    manifest["status"] = ok ? "pass" : "fail";
    if (!failure.empty()) manifest["failure"] = failure;
    manifest["elapsed_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start)
            .count();
    json files = json::array();
    for (const auto& p : outputs)
      files.push_back({{"path", p.filename().string()},
                       {"sha256", io::sha256_file(p.string())}});
    // the raster writer emits stem.real.f64 / stem.imag.f64 / stem.json
    manifest["outputs"] = files;
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  }
};

DepthProfile make_profile(const json& p) {
  const std::string kind = p.value("kind", "constant");
  const double D0 = p.value("D0", 1.0);
  if (kind == "constant") return DepthProfile::constant(D0);
  const double delta = p.value("delta", -0.3), ell = p.value("ell", 1.5);
  Vec2 c(0, 0);
  if (p.contains("center")) c = Vec2(p["center"][0], p["center"][1]);
  if (kind == "radial-bump") return DepthProfile::radial_bump(D0, delta, ell, c);
  if (kind == "sech-trench") return DepthProfile::sech_trench(D0, delta, ell, c);
  if (kind == "csv") {
    const std::string file = p.value("file", "");
    if (!fs::exists(file)) throw ConfigError("profile file not found: " + file);
    return DepthProfile::from_csv(file, D0);
  }
  if (kind == "raster") {
    const std::string raw = p.value("file", ""), meta = p.value("meta", "");
    if (!fs::exists(raw) || !fs::exists(meta))
      throw ConfigError("profile raster/meta not found: " + raw + ", " + meta);
    return DepthProfile::from_raster(raw, meta);
  }
  throw ConfigError("unknown profile kind: " + kind);
}

std::string fmtd(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- studies ---------------------------------------------------------------

int cmd_dispersion(Run& run) {
  const auto prof = make_profile(run.section("profile"));
  const double E = run.get("E", 1.0);
  io::CsvTable t;
  t.header = {"s", "Z", "Zprime"};
  for (int k = 0; k <= 120; ++k) {
    const double s = std::pow(10.0, -3.0 + 5.0 * k / 120.0);
    t.rows.push_back({s, dispersion::dispersion_root(s),
                      dispersion::dispersion_root_prime(s)});
  }
  const double s0 = E * prof.D0();  // the operating point, exactly
  t.rows.push_back({s0, dispersion::dispersion_root(s0),
                    dispersion::dispersion_root_prime(s0)});
  t.write(run.path("dispersion.csv").string());
  run.manifest["operating_point"] = {{"s", s0},
                                     {"Z", dispersion::dispersion_root(s0)}};
  run.finish("dispersion", true);
  return 0;
}

int cmd_strip_verify(Run& run) {
  const auto prof = make_profile(run.section("profile"));
  const json g = run.section("grid");
  const double h = run.get("h", 0.3);
  strip::StripGrid grid(g.value("X", 6.0), g.value("nx", 64), 1, g.value("nz", 64));
  const auto m = strip::assemble_dtn(prof, grid, h);
  const auto rep =
      strip::adjointness_report(m, Eigen::VectorXd::Constant(grid.nx, grid.dx()));
  io::CsvTable t;
  t.header = {"r11", "r22", "r12", "pass"};
  t.rows.push_back({rep.r11, rep.r22, rep.r12, rep.pass ? 1.0 : 0.0});
  t.write(run.path("strip_verify.csv").string());
  run.manifest["adjointness"] = {{"r11", rep.r11}, {"r22", rep.r22},
                                 {"r12", rep.r12}, {"pass", rep.pass}};
  run.finish("strip-verify", rep.pass, rep.pass ? "" : "adjointness ratios above 5e-2");
  return rep.pass ? 0 : 1;
}

int cmd_rays(Run& run) {
  const auto prof = make_profile(run.section("profile"));
  const json r = run.section("rays");
  const double E = run.get("E", 1.0);
  Vec2 x0(0, 0);
  if (r.contains("x0")) x0 = Vec2(r["x0"][0], r["x0"][1]);
  const std::string kind = r.value("hamiltonian", "surface");
  rays::Hamiltonian ham = kind == "surface"    ? rays::Hamiltonian::surface()
                          : kind == "finsler"  ? rays::Hamiltonian::finsler(E)
                          : kind == "schrodinger"
                              ? rays::Hamiltonian::schrodinger(E)
                              : throw ConfigError("unknown hamiltonian: " + kind);
  const auto fan = rays::launch_fan(prof, x0, E, r.value("n_angles", 64),
                                    r.value("T", 8.0), r.value("dt", 0.02), ham);
  io::CsvTable t;
  t.header = {"theta", "t", "x1", "x2", "p1", "p2", "S", "J", "maslov"};
  const int stride = r.value("stride", 5);
  for (const auto& ray : fan.rays)
    for (size_t i = 0; i < ray.traj.states.size(); i += stride) {
      const auto& s = ray.traj.states[i];
      t.rows.push_back({ray.theta, s.t, s.x[0], s.x[1], s.p[0], s.p[1], s.S, s.J,
                        double(s.maslov)});
    }
  t.write(run.path("rays.csv").string());
  int caustic_rays = 0;
  for (const auto& ray : fan.rays) caustic_rays += !ray.caustic_times.empty();
  run.manifest["fan"] = {{"n_angles", int(fan.rays.size())},
                         {"r0", fan.r0},
                         {"caustic_rays", caustic_rays}};
  run.finish("rays", true);
  return 0;
}

int cmd_green(Run& run, bool verify) {
  const auto prof = make_profile(run.section("profile"));
  const double E = run.get("E", 1.0), h = run.get("h", 0.1);
  const json gs = run.section("grid"), ss = run.section("source"), cs = run.section("cutoffs");
  Vec2 x0(0, 0);
  if (ss.contains("x0")) x0 = Vec2(ss["x0"][0], ss["x0"][1]);
  auto model =
      greenfn::SourceModel::annular(prof, x0, E, h, ss.value("rel_width", 0.6));
  greenfn::Cutoffs cut;
  cut.rho_plateau = cs.value("rho_plateau", cut.rho_plateau);
  cut.rho_taper = cs.value("rho_taper", cut.rho_taper);
  cut.t0 = cs.value("t0", cut.t0);
  cut.j_min_rel = cs.value("j_min_rel", cut.j_min_rel);
  if (cs.value("calibrate", true))
    cut.kappa = greenfn::calibrate_constant(
        prof.depth(x0), greenfn::SourceModel::annular(
                            DepthProfile::constant(prof.depth(x0)), x0, E, 0.1));
  const pdo::Grid2 obs(gs.value("X", 4.0), gs.value("n", 256), h);
  const double r0 = dispersion::normal_form(prof, x0, E).r;
  const double cover = std::sqrt(2.0) * obs.X + x0.norm() + 1.0;
  const auto fan = rays::launch_fan(prof, x0, E, run.section("rays").value("n_angles", 256),
                                    1.15 * r0 * cover, run.section("rays").value("dt", 0.02),
                                    rays::Hamiltonian::finsler(E));
  const auto g = greenfn::assemble_green(prof, fan, model, obs, cut);

  json meta = {{"E", E},
               {"h", h},
               {"eps", g.eps},
               {"X", obs.X},
               {"n", obs.n},
               {"t0", g.t0_used},
               {"kappa", {cut.kappa.real(), cut.kappa.imag()}},
               {"cutoffs",
                {{"rho_plateau", cut.rho_plateau},
                 {"rho_taper", cut.rho_taper},
                 {"j_min_rel", cut.j_min_rel}}}};
  io::write_raster((run.out_dir / "green").string(), g.u, meta.dump(2));
  for (const char* suf : {"green_re.f64", "green_im.f64", "green.json"})
    run.outputs.push_back(run.out_dir / suf);
  io::write_raster(run.path("branch_count.f64").string(),
                   g.branch_count.cast<double>());

  bool ok = true;
  std::string failure;
  if (verify) {
    if (!prof.is_constant())
      throw ConfigError("--verify needs a constant profile (exact kernel oracle)");
    std::vector<Vec2> pts;
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < obs.n; i += 2)
      for (int j = 0; j < obs.n; j += 2) {
        const Vec2 x(obs.xat(i), obs.xat(j));
        const double R = (x - x0).norm();
        if (R < 1.0 || R > 3.0 || g.caustic_flag(i, j)) continue;
        pts.push_back(x);
        idx.push_back({i, j});
      }
    const auto v = greenfn::exact_green_constant_depth(prof.D0(), model, 0.0, pts);
    io::CsvTable t;
    t.header = {"x1", "x2", "R", "abs_u", "abs_oracle", "mod_dev", "phase_dev"};
    double wmod = 0, wph = 0;
    for (size_t k = 0; k < pts.size(); ++k) {
      const cdouble a = g.u(idx[k].first, idx[k].second);
      const double md = std::abs(std::abs(a) / std::abs(v[k]) - 1.0);
      const double pd = std::abs(std::arg(a / v[k]));
      wmod = std::max(wmod, md);
      wph = std::max(wph, pd);
      t.rows.push_back({pts[k][0], pts[k][1], (pts[k] - x0).norm(), std::abs(a),
                        std::abs(v[k]), md, pd});
    }
    t.write(run.path("oracle.csv").string());
    ok = wmod <= 0.10 && wph <= 0.10;
    if (!ok) failure = "oracle deviation above tolerance: modulus " + fmtd(wmod) +
                       ", phase " + fmtd(wph);
    run.manifest["oracle"] = {{"worst_modulus_dev", wmod},
                              {"worst_phase_dev", wph},
                              {"nodes", int(pts.size())}};
  }
  run.manifest["branch_stats"] = {{"max", g.branch_count.maxCoeff()},
                                  {"caustic_nodes", int(g.caustic_flag.sum())}};
  run.finish("green", ok, failure);
  return ok ? 0 : 1;
}

int cmd_scatter_norm(Run& run) {
  const auto prof = make_profile(run.section("profile"));
  pdo::ResolventQuery q{run.get("E", 1.0), 0.0, run.get("s", 1.0), 1e-9, 400};
  pdo::WeightedNormOptions opts;
  const json gs = run.section("grid");
  opts.X = gs.value("X", 20.0);
  opts.seed = run.get("seed", 1234);
  std::vector<double> hs = run.get("hs", std::vector<double>{0.2, 0.1, 0.05});
  const auto rep = pdo::weighted_resolvent_norm(prof, q, hs, opts);
  io::CsvTable t;
  t.header = {"h", "eps", "norm"};
  for (size_t k = 0; k < rep.hs.size(); ++k)
    t.rows.push_back({rep.hs[k], rep.eps_used[k], rep.norms[k]});
  t.write(run.path("scatter_norm.csv").string());
  run.manifest["slope"] = rep.slope;
  run.finish("scatter-norm", true);
  return 0;
}

int cmd_verify_all(Run& run) {
  const auto results = acceptance::run_all();
  io::CsvTable t;
  t.header = {"id", "pass"};
  json crit = json::array();
  std::string failure;
  for (const auto& c : results) {
    std::printf("[%s] %2d %s: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.c_str());
    std::fflush(stdout);
    t.rows.push_back({double(c.id), c.pass ? 1.0 : 0.0});
    crit.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    if (!c.pass && failure.empty()) failure = "criterion " + std::to_string(c.id) + ": " + c.name;
  }
  t.write(run.path("criteria.csv").string());
  run.manifest["criteria"] = crit;
  run.finish("verify-all", failure.empty(), failure);
  return failure.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclassical water-wave field studies"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h/--h for the parameter

  std::string config_path, out_dir = "out";
  double E = NAN, h = NAN;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--E", E, "energy (overrides config)");
  app.add_option("--h", h, "semiclassical parameter (overrides config)");

  bool green_verify = false;
  auto* c_disp = app.add_subcommand("dispersion", "dispersion-root table");
  auto* c_strip = app.add_subcommand("strip-verify", "boundary-response adjointness check");
  auto* c_rays = app.add_subcommand("rays", "ray fan trajectories");
  auto* c_green = app.add_subcommand("green", "assembled outgoing field");
  c_green->add_flag("--verify", green_verify, "compare against the exact constant-depth kernel");
  auto* c_scat = app.add_subcommand("scatter-norm", "weighted resolvent norm study");
  auto* c_all = app.add_subcommand("verify-all", "full acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    Run run;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config: " + config_path);
      try {
        in >> run.cfg;
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
      }
    }
    if (!std::isnan(E)) run.cfg["E"] = E;
    if (!std::isnan(h)) run.cfg["h"] = h;
    if (run.cfg.contains("output_dir") && out_dir == "out")
      out_dir = run.cfg["output_dir"].get<std::string>();
    run.cfg["output_dir"] = out_dir;

    // validate the profile before creating any outputs
    (void)make_profile(run.section("profile"));
    run.out_dir = out_dir;
    fs::create_directories(run.out_dir);

    if (c_disp->parsed()) return cmd_dispersion(run);
    if (c_strip->parsed()) return cmd_strip_verify(run);
    if (c_rays->parsed()) return cmd_rays(run);
    if (c_green->parsed()) return cmd_green(run, green_verify);
    if (c_scat->parsed()) return cmd_scatter_norm(run);
    if (c_all->parsed()) return cmd_verify_all(run);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "study failed: %s\n", e.what());
    return 1;
  }
}
