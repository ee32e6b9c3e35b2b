// cmem: batch driver for the composite membrane solver and its checks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cmem/config.hpp"
#include "cmem/diagnostics.hpp"
#include "cmem/errors.hpp"
#include "cmem/freeboundary.hpp"
#include "cmem/homogeneous2d.hpp"
#include "cmem/io.hpp"
#include "cmem/kernels.hpp"
#include "cmem/optimizer.hpp"

namespace fs = std::filesystem;
using namespace cmem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNoConvergence = 2;

struct Run {
  Config cfg;
  std::string out;
  std::string input;
  json manifest;

  std::string path(const std::string& name) {
    manifest["files"].push_back(name);
    return out + "/" + name;
  }
};

OptimizerOptions optimizer_options(const Config& cfg) {
  OptimizerOptions o;
  o.tol = cfg.get_double("optimizer.tol", o.tol);
  o.max_iter = cfg.get_int("optimizer.max_iter", o.max_iter);
  o.damping = cfg.get_double("optimizer.damping", o.damping);
  o.eigen.tol = cfg.get_double("eigen.tol", o.eigen.tol);
  o.eigen.max_outer = cfg.get_int("eigen.max_outer", o.eigen.max_outer);
  o.eigen.max_cg = cfg.get_int("eigen.max_cg", o.eigen.max_cg);
  if (!(o.tol > 0.0)) throw ConfigError("optimizer.tol", "must be positive");
  if (o.max_iter < 1) throw ConfigError("optimizer.max_iter", "must be at least 1");
  if (!(o.damping >= 0.0 && o.damping < 1.0)) throw ConfigError("optimizer.damping", "must lie in [0, 1)");
  if (!(o.eigen.tol > 0.0)) throw ConfigError("eigen.tol", "must be positive");
  if (o.eigen.max_outer < 1) throw ConfigError("eigen.max_outer", "must be at least 1");
  if (o.eigen.max_cg < 1) throw ConfigError("eigen.max_cg", "must be at least 1");
  return o;
}

InitSpec init_spec(const Config& cfg) {
  InitSpec init;
  try {
    init.kind = parse_init_kind(cfg.get("optimizer.init", "empty"));
  } catch (const InvalidInput& e) {
    throw ConfigError("optimizer.init", e.what());
  }
  init.seed = cfg.get_u64("optimizer.seed", 0);
  return init;
}

double alpha_of(const Config& cfg) {
  const double alpha = cfg.get_double("problem.alpha", 10.0);
  if (!(alpha >= 0.0)) throw ConfigError("problem.alpha", "must be >= 0");
  return alpha;
}

void record_tolerances(Run& run, const OptimizerOptions& o) {
  run.manifest["tolerances"]["optimizer.tol"] = o.tol;
  run.manifest["tolerances"]["eigen.tol"] = o.eigen.tol;
}

std::string pair_text(const OptimalPair& p) {
  std::string s;
  s += "lambda = " + fmt(p.lambda) + "\n";
  s += "level = " + fmt(p.level) + "\n";
  s += "alpha = " + fmt(p.alpha) + "\n";
  s += "target = " + fmt(p.target) + "\n";
  s += "measure = " + fmt(p.region.measure) + "\n";
  s += "converged = " + std::string(p.converged ? "true" : "false") + "\n";
  s += "subcritical = " + std::string(p.subcritical ? "true" : "false") + "\n";
  s += "eigen_residual = " + fmt(p.eigen_residual) + "\n";
  s += "iterations = " + std::to_string(p.history.size()) + "\n";
  s += "init = " + to_string(p.init.kind) + "\n";
  s += "seed = " + std::to_string(p.init.seed) + "\n";
  return s;
}

void write_rasters(Run& run, const OptimalPair& pair) {
  if (!run.cfg.get_bool("output.pgm", true)) return;
  const Grid2D& g = pair.mask().grid();
  std::vector<double> u(pair.u.values().begin(), pair.u.values().end());
  std::vector<double> v(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) v[k] = pair.mask().inside(k) ? pair.level - u[k] : 0.0;
  const auto su = write_pgm(run.path("u.pgm"), g, u);
  const auto sv = write_pgm(run.path("v.pgm"), g, v);
  const auto sd = write_pgm(run.path("D.pgm"), g, pair.region.fraction);
  run.manifest["rasters"]["u.pgm"] = {su.first, su.second};
  run.manifest["rasters"]["v.pgm"] = {sv.first, sv.second};
  run.manifest["rasters"]["D.pgm"] = {sd.first, sd.second};
}

void write_pair(Run& run, const OptimalPair& pair) {
  write_text(run.path("pair.txt"), pair_text(pair));
  write_field(run.path("u.txt"), pair.u);
  write_region(run.path("region.txt"), pair.region, pair.u.mask_ptr());
  const EigenPair eig{pair.lambda, pair.u, pair.eigen_residual,
                      pair.history.empty() ? 0 : pair.history.back().eigen_iterations, 0};
  write_eigenpair(run.path("eigen.txt"), eig);
  write_text(run.path("history.csv"), history_csv(pair.history));
  if (pair.level > 0.0) {
    try {
      write_text(run.path("contour.csv"), contour_csv(extract_contour(pair.u, pair.level)));
    } catch (const InvalidInput&) {
      run.manifest["notes"].push_back("free boundary could not be extracted");
    }
  }
  write_rasters(run, pair);
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

// Rebuilds a solved pair from a solve output directory.
OptimalPair load_pair(const std::string& dir, Config& cfg_out) {
  cfg_out = Config::load(dir + "/config.txt");
  const MaskPtr mask = mask_from_config(cfg_out);
  const auto kv = key_values(read_text(dir + "/pair.txt"));
  auto num = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw InvalidInput("pair.txt lacks '" + k + "'");
    return std::strtod(it->second.c_str(), nullptr);
  };
  OptimalPair p{read_field(dir + "/u.txt", mask), read_region(dir + "/region.txt", mask),
                num("level"), num("lambda"), num("alpha"), num("target"), {}, false, false, {},
                num("eigen_residual")};
  p.converged = kv.at("converged") == "true";
  p.subcritical = kv.at("subcritical") == "true";
  p.init.kind = parse_init_kind(kv.at("init"));
  p.init.seed = std::stoull(kv.at("seed"));
  return p;
}

OptimalPair solve_pair(Run& run) {
  const MaskPtr mask = mask_from_config(run.cfg);
  const double alpha = alpha_of(run.cfg);
  const double target = target_from_config(run.cfg, *mask);
  const OptimizerOptions opts = optimizer_options(run.cfg);
  record_tolerances(run, opts);
  OptimalPair pair = optimize(mask, alpha, target, init_spec(run.cfg), opts);
  pair.init = init_spec(run.cfg);
  return pair;
}

// Pair for the analysis commands: from --input when given, solved otherwise.
OptimalPair obtain_pair(Run& run) {
  if (!run.input.empty()) {
    Config stored = run.cfg;
    OptimalPair p = load_pair(run.input, stored);
    run.manifest["input"] = run.input;
    return p;
  }
  OptimalPair p = solve_pair(run);
  if (!p.converged) throw ConvergenceFailure("optimizer did not converge", 0.0);
  return p;
}

std::vector<double> radii_range(double lo, double hi, int count) {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return r;
}

// Contour vertices whose ball of radius r_ball stays inside, spread along F.
std::vector<Point> auto_centers(const OptimalPair& pair, double r_ball, int max_centers) {
  const Contour f = extract_contour(pair.u, pair.level);
  std::vector<Point> ok;
  for (const Polyline& line : f.lines) {
    for (const Point& p : line.points) {
      try {
        require_ball_inside(pair.mask(), p, r_ball);
        ok.push_back(p);
      } catch (const InvalidInput&) {
      }
    }
  }
  std::vector<Point> out;
  if (ok.empty() || max_centers < 1) return out;
  const std::size_t n = std::min<std::size_t>(ok.size(), max_centers);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ok[i * ok.size() / n]);
  return out;
}

int cmd_solve(Run& run) {
  const OptimalPair pair = solve_pair(run);
  write_pair(run, pair);
  const Grid2D& g = pair.mask().grid();
  run.manifest["result"] = {{"lambda", pair.lambda}, {"level", pair.level},
                            {"alpha", pair.alpha}, {"A", pair.target},
                            {"measure", pair.region.measure}, {"iterations", pair.history.size()},
                            {"converged", pair.converged}, {"subcritical", pair.subcritical},
                            {"init", to_string(pair.init.kind)}, {"seed", pair.init.seed},
                            {"grid", {g.nx(), g.ny()}}, {"h", g.h()}};
  std::printf("Lambda = %.17g  c = %.17g  iterations = %zu  %s\n", pair.lambda, pair.level,
              pair.history.size(), pair.converged ? "converged" : "NOT converged");
  return pair.converged ? kOk : kNoConvergence;
}

int cmd_sweep(Run& run) {
  const MaskPtr mask = mask_from_config(run.cfg);
  const double alpha = alpha_of(run.cfg);
  const auto targets = targets_from_config(run.cfg, *mask);
  const OptimizerOptions opts = optimizer_options(run.cfg);
  record_tolerances(run, opts);
  const LambdaCurve curve = sweep(mask, alpha, targets, init_spec(run.cfg), opts);
  write_text(run.path("curve.csv"), curve_csv(curve));
  bool ok = true;
  for (const auto& s : curve.samples) ok = ok && s.converged && s.error.empty();
  run.manifest["result"] = {{"strictly_increasing", curve.strictly_increasing},
                            {"max_lipschitz_ratio", curve.max_lipschitz_ratio}};
  std::printf("samples = %zu  strictly_increasing = %s  max_lipschitz_ratio = %.6g\n",
              curve.samples.size(), curve.strictly_increasing ? "true" : "false",
              curve.max_lipschitz_ratio);
  if (curve.samples.size() >= 3 && alpha > 0.0) {
    const ShapeDerivativeReport rep = shape_derivative_residual(curve, alpha);
    std::string csv = "A,slope,predicted,residual,skipped\n";
    for (const auto& e : rep.entries) {
      csv += fmt(e.target) + "," + fmt(e.slope) + "," + fmt(e.predicted) + "," + fmt(e.residual) +
             "," + (e.skipped ? "1" : "0") + "\n";
    }
    write_text(run.path("shape_derivative.csv"), csv);
    run.manifest["result"]["shape_derivative_median"] = rep.median;
    run.manifest["result"]["shape_derivative_max"] = rep.max;
    std::printf("shape derivative residual: median = %.6g  max = %.6g  used = %d\n", rep.median,
                rep.max, rep.used);
  }
  return ok ? kOk : kNoConvergence;
}

int cmd_diagnose(Run& run) {
  if (run.input.empty()) throw ConfigError("--input", "diagnose needs a solve output directory");
  Config stored = run.cfg;
  const OptimalPair pair = load_pair(run.input, stored);
  // Diagnostics keys from --config override the stored ones.
  for (const std::string& key : Config::known_keys()) {
    if (key.rfind("diagnostics.", 0) == 0 && run.cfg.has(key)) stored.set(key, run.cfg.get(key, ""));
  }
  const Config& cfg = stored;
  run.manifest["input"] = run.input;
  std::vector<CheckRow> rows;

  const double pohozaev_tol = 0.03;
  std::vector<Point> centers = cfg.get_points("diagnostics.x0_list");
  if (centers.empty()) centers = {{0.0, 0.0}, {5.0, -3.0}, {-2.0, 7.0}};
  double lo = INFINITY, hi = -INFINITY;
  for (const Point& x0 : centers) {
    const PohozaevReport r = pohozaev_residual(pair, x0);
    rows.push_back({"pohozaev", "x0=" + fmt(x0.x) + " " + fmt(x0.y), r.residual, pohozaev_tol,
                    r.residual <= pohozaev_tol});
    lo = std::min(lo, r.residual);
    hi = std::max(hi, r.residual);
  }

  UniquenessOptions uo;
  uo.optimizer = optimizer_options(cfg);
  uo.tolerance = cfg.get_double("diagnostics.uniqueness_tol", uo.tolerance);
  uo.probe_step = cfg.get_double("diagnostics.probe_step", uo.probe_step);
  auto seeds = cfg.get_u64s("diagnostics.seeds");
  if (seeds.empty()) seeds = {1, 2, 3};
  try {
    const UniquenessReport u =
        weak_uniqueness_experiment(pair.u.mask_ptr(), pair.alpha, pair.target, seeds, uo);
    rows.push_back({"weak_uniqueness", "seeds=" + std::to_string(u.runs.size()) + " optimal=" +
                                           std::to_string(u.optimal_seeds.size()),
                    u.spread, u.tolerance, u.pass});
    if (!u.pass) {
      run.manifest["result"]["uniqueness_probe_slope"] = u.probe_slope;
      run.manifest["result"]["uniqueness_probe_predicted"] = u.probe_predicted;
    }
  } catch (const ConvergenceFailure& e) {
    rows.push_back({"weak_uniqueness", "no run converged", NAN, uo.tolerance, false});
  }

  const double tau = cfg.get_double("diagnostics.tau", 1e-3);
  if (!(tau > 0.0)) throw ConfigError("diagnostics.tau", "must be positive");
  const BoundaryGradient bg = gradient_on_boundary(pair, tau);

  std::vector<double> eps = cfg.get_doubles("diagnostics.eps_list");
  if (eps.empty()) {
    const double h = pair.mask().grid().h();
    for (double m : {16.0, 8.0, 4.0, 2.0}) eps.push_back(m * h * bg.mean_grad);
  }
  const ThicknessReport th = levelset_thickness(pair.u, pair.level, eps);
  bool monotone = true;
  for (std::size_t i = 1; i < th.measure.size(); ++i) monotone = monotone && th.measure[i] <= th.measure[i - 1];
  // Coarea bound with the smallest measured |grad u| on F.
  double bound = 0.0;
  std::string length_note;
  {
    const Contour f = extract_contour(pair.u, pair.level);
    double len = 0.0;
    for (const Polyline& l : f.lines) {
      for (std::size_t k = 1; k < l.points.size(); ++k) len += norm(l.points[k] - l.points[k - 1]);
      if (l.closed && l.points.size() > 1) len += norm(l.points.front() - l.points.back());
    }
    bound = 2.0 * len / std::max(bg.min_grad, bg.threshold);
  }
  rows.push_back({"levelset_thickness", "slope", th.slope, 2.0 * bound,
                  monotone && th.slope <= 2.0 * bound});

  rows.push_back({"gradient_on_boundary", "max", bg.max_grad, bg.threshold, bg.max_grad > bg.threshold});

  const DomainSpec& spec = pair.mask().spec();
  if (spec.symmetry_axes() == 2) {
    const SymmetryVerdict v = symmetry_singularity_check(pair, spec, tau);
    rows.push_back({"symmetry_singularity", "min_grad components=" + std::to_string(v.components),
                    v.min_grad, v.threshold, v.pass});
  } else {
    rows.push_back({"symmetry_singularity", "not applicable (fewer than two axes)", NAN, NAN, false});
  }

  write_text(run.path("diagnostics.csv"), checks_csv(rows));
  run.manifest["tolerances"]["pohozaev"] = pohozaev_tol;
  run.manifest["tolerances"]["uniqueness"] = uo.tolerance;
  run.manifest["tolerances"]["tau"] = tau;
  run.manifest["result"]["pohozaev_center_spread"] = hi - lo;
  std::fputs(checks_csv(rows).c_str(), stdout);
  return kOk;
}

int cmd_weiss(Run& run) {
  const OptimalPair pair = obtain_pair(run);
  const Config& cfg = run.cfg;
  const double h = pair.mask().grid().h();
  const TwoPhaseField tp = to_two_phase(pair, cfg.get_double("weiss.band_cells", 10.0));
  WeissOptions wo;
  wo.gamma = cfg.get_double("weiss.gamma", wo.gamma);
  wo.tol = cfg.get_double("weiss.tol", wo.tol);
  const std::string mode = cfg.get("weiss.mode", "varying");
  if (mode == "frozen") wo.mode = WeissMode::frozen;
  else if (mode != "varying") throw ConfigError("weiss.mode", "expected frozen or varying");
  const double r_lo = cfg.get_double("weiss.r_min_cells", 4.0) * h;
  const double r_hi = cfg.get_double("weiss.r_max_cells", 20.0) * h;
  const int count = cfg.get_int("weiss.count", 9);
  if (!(r_lo > 0.0 && r_hi > r_lo)) throw ConfigError("weiss.r_max_cells", "need 0 < r_min < r_max");
  if (count < 2) throw ConfigError("weiss.count", "must be at least 2");
  const auto radii = radii_range(r_lo, r_hi, count);
  std::vector<Point> centers = cfg.get_points("weiss.centers");
  if (centers.empty()) centers = auto_centers(pair, r_hi + 2.0 * h, cfg.get_int("weiss.max_centers", 4));
  if (centers.empty()) throw InvalidInput("no free-boundary point admits the requested radii");

  std::vector<CheckRow> rows;
  bool all = true;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const WeissProfile p = weiss_profile(tp, centers[i], radii, wo);
    write_text(run.path("weiss_" + std::to_string(i) + ".csv"), weiss_csv(p));
    const std::string where = "x0=" + fmt(centers[i].x) + " " + fmt(centers[i].y);
    rows.push_back({"weiss_monotone", where, p.worst_drop, wo.tol, p.monotone});
    rows.push_back({"nondegeneracy", where, p.min_S_over_r2, 0.0, p.min_S_over_r2 > 0.0});
    all = all && p.monotone && p.min_S_over_r2 > 0.0;
  }
  write_text(run.path("weiss_checks.csv"), checks_csv(rows));
  run.manifest["tolerances"]["weiss.tol"] = wo.tol;
  run.manifest["tolerances"]["weiss.gamma"] = wo.gamma;
  run.manifest["result"]["all_pass"] = all;
  std::fputs(checks_csv(rows).c_str(), stdout);
  return kOk;
}

int cmd_blowup(Run& run) {
  const OptimalPair pair = obtain_pair(run);
  const Config& cfg = run.cfg;
  const double h = pair.mask().grid().h();
  const TwoPhaseField tp = to_two_phase(pair, cfg.get_double("weiss.band_cells", 10.0));
  std::vector<double> cells = cfg.get_doubles("blowup.radii_cells");
  if (cells.empty()) cells = {16.0, 11.0, 8.0, 6.0, 4.0};
  std::vector<double> radii;
  for (double c : cells) radii.push_back(c * h);
  const double tau = cfg.get_double("blowup.tau", 1e-3);
  std::vector<Point> centers = cfg.get_points("blowup.centers");
  if (centers.empty()) centers = auto_centers(pair, radii.front() + 2.0 * h, 2);
  if (centers.empty()) throw InvalidInput("no free-boundary point admits the requested radii");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const BlowupSequence s = blowup(tp, centers[i], radii, tau);
    write_text(run.path("blowup_" + std::to_string(i) + ".csv"), blowup_csv(s));
    json entry = {{"center", {centers[i].x, centers[i].y}}, {"regime", s.regime},
                  {"log_slope", s.log_slope}, {"singular_center", s.singular_center}};
    if (!s.warning.empty()) entry["warning"] = s.warning;
    run.manifest["result"]["blowups"].push_back(entry);
    std::printf("x0 = (%.6g, %.6g)  regime = %s  log_slope = %.4g\n", centers[i].x, centers[i].y,
                s.regime.c_str(), s.log_slope);
  }
  run.manifest["tolerances"]["blowup.tau"] = tau;
  return kOk;
}

int cmd_exact(Run& run) {
  const Config& cfg = run.cfg;
  const std::string kind = cfg.get("exact.kind", "halfplane");
  const double f0 = cfg.get_double("exact.f0", 1.0);
  HomogeneousSolution2D sol;
  try {
    if (kind == "halfplane") {
      sol = cfg.has("exact.g0") ? halfplane(f0, cfg.get_double("exact.g0", 0.0)) : halfplane(f0);
    } else if (kind == "nonnegative") {
      const double a = cfg.get_double("exact.a", 0.0);
      sol = cfg.has("exact.g0") ? nonnegative(f0, a, cfg.get_double("exact.g0", 0.0))
                                : nonnegative(f0, a);
    } else if (kind == "blank") {
      sol = blank_profile(f0, cfg.get_double("exact.g0", -20.0));
    } else {
      throw ConfigError("exact.kind", "expected halfplane, nonnegative or blank");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError("exact.f0", e.what());
  }
  std::vector<double> radii = cfg.get_doubles("exact.radii");
  if (radii.empty()) radii = radii_range(0.1, 0.5, 9);
  const int nodes = cfg.get_int("exact.nodes", 512);
  const WeissConstancy wc = weiss_constancy(sol, radii, nodes);
  const Grid2D grid = build_grid({-1.0, 1.0, -1.0, 1.0}, nodes, nodes);
  const PdeResidual pr = pde_residual(sol, grid);

  const std::string params = serialize(sol);
  write_text(run.path("exact.txt"), params);
  std::string csv = "r,W\n";
  for (std::size_t i = 0; i < wc.radii.size(); ++i) csv += fmt(wc.radii[i]) + "," + fmt(wc.W[i]) + "\n";
  write_text(run.path("weiss_constancy.csv"), csv);
  run.manifest["result"] = {{"W_mean", wc.mean}, {"W_spread", wc.spread},
                            {"pde_residual", pr.max_residual}};
  std::fputs(params.c_str(), stdout);
  std::printf("W_mean = %.17g\nW_spread = %.6g\npde_residual = %.6g\n", wc.mean, wc.spread,
              pr.max_residual);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite membrane eigenvalue optimization and free-boundary checks"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = "out", input;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--config", config_path, "run configuration (key = value)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "overrides optimizer.seed");
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");
  auto* solve = app.add_subcommand("solve", "optimize one (alpha, A) pair");
  auto* sweep_cmd = app.add_subcommand("sweep", "Lambda(A) curve and shape-derivative residuals");
  auto* diagnose = app.add_subcommand("diagnose", "global checks on a solved pair");
  diagnose->add_option("--input", input, "solve output directory")->required();
  auto* weiss = app.add_subcommand("weiss", "Weiss energy and nondegeneracy at free-boundary points");
  weiss->add_option("--input", input, "solve output directory (solves from the config if absent)");
  auto* blowup_cmd = app.add_subcommand("blowup", "blow-up sequences at free-boundary points");
  blowup_cmd->add_option("--input", input, "solve output directory (solves from the config if absent)");
  auto* exact = app.add_subcommand("exact", "homogeneous degree-2 solutions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  Run run;
  try {
    if (!config_path.empty()) run.cfg = Config::load(config_path);
    if (seed) run.cfg.set("optimizer.seed", std::to_string(*seed));
    if (threads == 0) threads = run.cfg.get_int("runtime.threads", 0);
    if (threads < 0) throw ConfigError("--threads", "must be >= 0");
    if (threads > 0) kernels::set_threads(threads);
    run.out = out_dir;
    run.input = input;
    fs::create_directories(run.out);
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "config error: --out: %s\n", e.what());
    return kConfigError;
  }

  std::string command;
  for (auto* sub : {solve, sweep_cmd, diagnose, weiss, blowup_cmd, exact}) {
    if (sub->parsed()) command = sub->get_name();
  }
  run.manifest = manifest_base(command, run.cfg.hash());
  int code = kOk;
  try {
    write_text(run.path("config.txt"), run.cfg.canonical());
    if (command == "solve") code = cmd_solve(run);
    else if (command == "sweep") code = cmd_sweep(run);
    else if (command == "diagnose") code = cmd_diagnose(run);
    else if (command == "weiss") code = cmd_weiss(run);
    else if (command == "blowup") code = cmd_blowup(run);
    else code = cmd_exact(run);
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    code = kConfigError;
  } catch (const ConvergenceFailure& e) {
    std::fprintf(stderr, "no convergence: %s (last residual %.3g)\n", e.what(), e.last_residual());
    code = kNoConvergence;
  }
  run.manifest["exit_code"] = code;
  try {
    write_manifest(run.out, run.manifest);
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (code == kOk) code = kConfigError;
  }
  return code;
}
