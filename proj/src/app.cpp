#include "mslab/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include <CLI11.hpp>

#include "mslab/barrier.hpp"
#include "mslab/config.hpp"
#include "mslab/experiment.hpp"
#include "mslab/io.hpp"
#include "mslab/solver.hpp"

namespace mslab {

namespace {

CurvatureProfile profile_from(const RunConfig& c) {
  if (c.family == "example1")
    return build_example1(c.phi, c.eps, c.r0, c.t_flat, c.scan_max);
  if (c.family == "example2")
    return build_example2(c.k, c.eps, c.c1, c.t_flat, c.scan_max);
  return build_constant(c.k, c.c1, c.c4, c.scan_max);
}

OperatorSpec operator_from(const RunConfig& c) {
  if (c.op_name == "minimal_graph") return minimal_graph_operator();
  if (c.op_name == "p_laplace") return p_laplace_operator(c.op_p);
  return custom_operator(c.op_coeff, c.op_e1, c.op_e2);
}

std::function<double(double)> data_from(const RunConfig& c) {
  return [c](double theta) {
    return c.data_offset + c.data_amplitude * std::cos(c.data_mode * theta + c.data_phase);
  };
}

double default_check_radius(const RunConfig& c) {
  if (c.check_r > 0.0) return c.check_r;
  // exponentially growing warps overflow doubles near t = 709/k
  if (c.family == "example2") return std::min(600.0 / std::max(c.k, 1e-6), 600.0);
  if (c.family == "constant" && c.k > 0.0)
    return std::min(600.0 / c.k, 600.0);
  return 2000.0;
}

Json witness_json(const AssumptionWitness& w) {
  Json j = Json::object();
  j.set("t", Json(w.t));
  j.set("lhs", Json(w.lhs));
  j.set("rhs", Json(w.rhs));
  return j;
}

Json gate_json(const GateResult& g) {
  Json j = Json::object();
  j.set("name", Json(g.name));
  j.set("pass", Json(g.pass));
  j.set("margin", Json(g.worst));
  j.set("threshold", Json(g.threshold));
  Json at = Json::object();
  at.set("rho", Json(g.where_rho));
  at.set("theta", Json(g.where_theta));
  j.set("at", std::move(at));
  return j;
}

Json profile_json(const CurvatureProfile& p) {
  Json j = Json::object();
  j.set("family", Json(p.family));
  j.set("C1", Json(p.C1));
  j.set("C2", Json(p.C2));
  j.set("C3", Json(p.C3));
  j.set("C4", Json(p.C4));
  j.set("T1", Json(p.T1));
  j.set("Q", Json(p.Qexp));
  j.set("phi1", Json(phi1_of_C1(p.C1)));
  return j;
}

int cmd_check(const RunConfig& cfg) {
  const CurvatureProfile profile = profile_from(cfg);
  const double r_check = default_check_radius(cfg);
  const ModelSurface surface =
      build_surface(profile, 'a', r_check, cfg.jacobi_step);
  CheckOptions opts;
  opts.sample_count = cfg.check_samples;
  opts.r_check = r_check;
  const AssumptionReport report = check_assumptions(profile, surface.warp, opts);

  Json j = Json::object();
  j.set("type", Json("assumption_check"));
  j.set("profile", profile_json(profile));
  j.set("r_checked", Json(report.r_check));
  j.set("samples", Json(static_cast<long long>(report.sample_count)));
  Json items = Json::array();
  for (const auto& item : report.items) {
    Json it = Json::object();
    it.set("name", Json(item.name));
    it.set("pass", Json(item.pass));
    it.set("worst", witness_json(item.worst));
    it.set("note", Json(item.note));
    items.push(std::move(it));
  }
  j.set("items", std::move(items));
  j.set("pass", Json(report.all_pass));
  ensure_directory(cfg.out_dir);
  write_text_file(cfg.out_dir + "/check.json", j.dump());
  std::printf("assumption check: %s (%s/check.json)\n",
              report.all_pass ? "PASS" : "FAIL", cfg.out_dir.c_str());
  return report.all_pass ? 0 : 1;
}

int cmd_barrier(const RunConfig& cfg) {
  const CurvatureProfile profile = profile_from(cfg);
  const ModelSurface surface =
      build_surface(profile, 'a', cfg.r_max, cfg.jacobi_step);
  const PolarGrid grid = make_grid(cfg.nr, cfg.ntheta, cfg.r_max);
  BarrierInputs bi;
  bi.profile = &profile;
  bi.surface = &surface;
  bi.op = operator_from(cfg);
  bi.grid = grid;
  bi.theta0 = cfg.theta0;
  bi.slope = cfg.slope;
  bi.cert_samples = cfg.cert_samples;
  bi.strict_asymptotic_gates = cfg.strict_asymptotic_gates;
  bi.r4_cap = cfg.r4_max;
  bi.seed = cfg.seed;
  const BarrierCertificate cert = build_barrier(bi);

  Json j = Json::object();
  j.set("type", Json("barrier_certificate"));
  j.set("profile", profile_json(profile));
  j.set("operator", Json(bi.op.name));
  Json g = Json::object();
  g.set("nr", Json(grid.nr));
  g.set("ntheta", Json(grid.ntheta));
  g.set("r_max", Json(grid.r_outer));
  j.set("grid", std::move(g));
  Json shape = Json::object();
  shape.set("phi1", Json(cert.phi1));
  shape.set("delta1", Json(cert.delta1));
  shape.set("delta", Json(cert.delta));
  shape.set("lambda", Json(cert.lambda));
  shape.set("budget", Json(cert.delta_budget));
  shape.set("amp", Json(cert.amp));
  j.set("shape", std::move(shape));
  Json radii = Json::object();
  radii.set("r1", Json(cert.r1_emp));
  radii.set("r2", Json(cert.r2));
  radii.set("r3", Json(cert.r3));
  radii.set("r4", Json(cert.r4));
  j.set("radii", std::move(radii));
  Json consts = Json::object();
  consts.set("c5", Json(cert.c5_emp));
  consts.set("c6", Json(cert.c6_emp));
  j.set("empirical", std::move(consts));
  Json dg = Json::array();
  for (const auto& gate : cert.direct_gates) dg.push(gate_json(gate));
  j.set("direct_gates", std::move(dg));
  Json ag = Json::array();
  for (const auto& gate : cert.asymptotic_gates) ag.push(gate_json(gate));
  j.set("asymptotic_gates", std::move(ag));
  j.set("ratio_sup", Json(cert.ratio_sup));
  j.set("samples", Json(static_cast<long long>(cert.samples_checked)));
  j.set("kernel_cells_min", Json(cert.moll.min_kernel_radius_cells));
  j.set("pass", Json(cert.pass));
  j.set("note", Json(cert.note));
  ensure_directory(cfg.out_dir);
  write_text_file(cfg.out_dir + "/barrier.json", j.dump());
  if (!cert.h.v.empty()) save_field_csv(cfg.out_dir + "/barrier_h.csv", cert.h);
  if (!cert.phi.v.empty())
    save_field_csv(cfg.out_dir + "/barrier_phi.csv", cert.phi);
  std::printf("barrier certificate: %s r4=%s ratio_sup=%s (%s/barrier.json)\n",
              cert.pass ? "PASS" : "FAIL", format_double(cert.r4).c_str(),
              format_double(cert.ratio_sup).c_str(), cfg.out_dir.c_str());
  return cert.pass ? 0 : 1;
}

int cmd_solve(const RunConfig& cfg) {
  const CurvatureProfile profile = profile_from(cfg);
  const ModelSurface surface =
      build_surface(profile, 'a', cfg.r_max, cfg.jacobi_step);
  const PolarGrid grid = make_grid(cfg.nr, cfg.ntheta, cfg.r_max, cfg.r_inner);
  const OperatorSpec op = operator_from(cfg);
  const std::vector<double> bc = extend_boundary_data(data_from(cfg), grid);
  std::vector<double> inner;
  if (cfg.r_inner > 0.0) inner.assign(static_cast<size_t>(cfg.ntheta), 0.0);
  SolveOptions so;
  so.tol_factor = cfg.tol_factor;
  so.max_newton = cfg.max_newton;
  SolveReport sr;
  const PolarField u = solve_dirichlet(grid, surface, op, bc, inner, so, sr);

  Json j = Json::object();
  j.set("type", Json("dirichlet_solve"));
  j.set("profile", profile_json(profile));
  j.set("operator", Json(op.name));
  j.set("converged", Json(sr.converged));
  j.set("newton_iterations", Json(sr.newton_iterations));
  j.set("cg_iterations", Json(sr.total_cg_iterations));
  j.set("final_residual", Json(sr.final_residual));
  j.set("tolerance", Json(sr.tolerance));
  j.set("energy", Json(sr.energy));
  ensure_directory(cfg.out_dir);
  write_text_file(cfg.out_dir + "/solve.json", j.dump());
  save_field_csv(cfg.out_dir + "/solution.csv", u);
  std::printf("dirichlet solve: %s newton=%d residual=%s (%s/solve.json)\n",
              sr.converged ? "PASS" : "FAIL", sr.newton_iterations,
              format_double(sr.final_residual).c_str(), cfg.out_dir.c_str());
  return sr.converged ? 0 : 1;
}

int cmd_exhaust(const RunConfig& cfg) {
  const CurvatureProfile profile = profile_from(cfg);
  if (cfg.radii.size() < 2)
    throw std::runtime_error("exhaustion.radii must list at least two radii");
  ExhaustionOptions opts;
  opts.radii = cfg.radii;
  opts.compacts = cfg.compacts;
  opts.nr_last = cfg.nr;
  opts.ntheta = cfg.ntheta;
  opts.envelope_eps = cfg.envelope_eps;
  opts.theta0 = cfg.theta0;
  opts.seed = cfg.seed;
  opts.cert_samples = cfg.cert_samples;
  opts.jacobi_step = cfg.jacobi_step;
  opts.solve.tol_factor = cfg.tol_factor;
  opts.solve.max_newton = cfg.max_newton;
  const OperatorSpec op = operator_from(cfg);
  const ExhaustionReport rep = run_exhaustion(profile, op, data_from(cfg), opts);

  const bool uniq_ok =
      !opts.do_uniqueness || rep.uniqueness.max_pairwise_diff <= 1e-8;
  const bool env_ok = !rep.envelope.attempted ||
                      (rep.envelope.cert_pass && rep.envelope.violations == 0);
  const bool pass = rep.diffs_decreasing && uniq_ok && env_ok;

  Json j = Json::object();
  j.set("type", Json("exhaustion"));
  j.set("profile", profile_json(profile));
  j.set("operator", Json(op.name));
  Json balls = Json::array();
  for (const auto& b : rep.balls) {
    Json bj = Json::object();
    bj.set("radius", Json(b.radius));
    bj.set("nr", Json(b.nr));
    bj.set("converged", Json(b.converged));
    bj.set("newton_iterations", Json(b.newton_iterations));
    bj.set("final_residual", Json(b.final_residual));
    bj.set("attainment", Json(b.attainment));
    balls.push(std::move(bj));
  }
  j.set("balls", std::move(balls));
  Json compacts = Json::array();
  for (const auto& c : rep.compacts) {
    Json cj = Json::object();
    cj.set("radius", Json(c.compact_radius));
    cj.set("diffs", Json::number_array(c.diffs));
    compacts.push(std::move(cj));
  }
  j.set("compacts", std::move(compacts));
  j.set("diffs_decreasing", Json(rep.diffs_decreasing));
  j.set("final_max_diff", Json(rep.final_max_diff));
  Json env = Json::object();
  env.set("attempted", Json(rep.envelope.attempted));
  env.set("cert_pass", Json(rep.envelope.cert_pass));
  env.set("slope", Json(rep.envelope.slope));
  env.set("amp", Json(rep.envelope.amp));
  env.set("delta", Json(rep.envelope.delta));
  env.set("r4", Json(rep.envelope.r4));
  env.set("cells_checked", Json(rep.envelope.cells_checked));
  env.set("violations", Json(rep.envelope.violations));
  env.set("min_upper_slack", Json(rep.envelope.min_upper_slack));
  env.set("min_lower_slack", Json(rep.envelope.min_lower_slack));
  j.set("envelope", std::move(env));
  Json uq = Json::object();
  uq.set("inits", Json(rep.uniqueness.inits));
  uq.set("max_pairwise_diff", Json(rep.uniqueness.max_pairwise_diff));
  j.set("uniqueness", std::move(uq));
  j.set("pass", Json(pass));
  ensure_directory(cfg.out_dir);
  write_text_file(cfg.out_dir + "/exhaust.json", j.dump());
  std::printf("exhaustion: %s final_diff=%s envelope_violations=%d (%s/exhaust.json)\n",
              pass ? "PASS" : "FAIL", format_double(rep.final_max_diff).c_str(),
              rep.envelope.violations, cfg.out_dir.c_str());
  return pass ? 0 : 1;
}

int cmd_props(const RunConfig& cfg) {
  const OperatorSpec op = operator_from(cfg);
  const GrowthReport growth = validate_growth(op);

  // a small seeded battery of ordered boundary pairs
  const CurvatureProfile profile = profile_from(cfg);
  const double r_max = std::min(cfg.r_max, 8.0);
  const ModelSurface surface = build_surface(profile, 'a', r_max, cfg.jacobi_step);
  const PolarGrid grid = make_grid(32, 16, r_max);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double max_violation = 0.0;
  const int pairs = 5;
  for (int p = 0; p < pairs; ++p) {
    double a1 = coef(rng), b1 = coef(rng), a2 = coef(rng), b2 = coef(rng);
    double e1 = coef(rng), e2 = coef(rng);
    std::vector<double> lo(16), hi(16);
    for (int j = 0; j < 16; ++j) {
      const double th = grid.theta(j);
      lo[j] = a1 * std::cos(th) + b1 * std::sin(th) + 0.5 * a2 * std::cos(2 * th) +
              0.5 * b2 * std::sin(2 * th);
      hi[j] = lo[j] + 0.05 + std::abs(0.3 * (e1 * std::cos(th) + e2 * std::sin(3 * th)));
    }
    SolveOptions so;
    const ComparisonReport rep = comparison_test(grid, surface, op, lo, hi, so);
    max_violation = std::max(max_violation, rep.max_violation);
  }
  const bool cmp_ok = max_violation <= 1e-8;

  Json j = Json::object();
  j.set("type", Json("property_battery"));
  j.set("operator", Json(op.name));
  Json gj = Json::object();
  gj.set("pass", Json(growth.pass));
  Json viols = Json::array();
  for (const auto& v : growth.violations) {
    Json vj = Json::object();
    vj.set("check", Json(v.check));
    vj.set("t", Json(v.t));
    vj.set("lhs", Json(v.lhs));
    vj.set("rhs", Json(v.rhs));
    viols.push(std::move(vj));
  }
  gj.set("violations", std::move(viols));
  j.set("growth", std::move(gj));
  Json cj = Json::object();
  cj.set("pairs", Json(pairs));
  cj.set("max_violation", Json(max_violation));
  cj.set("pass", Json(cmp_ok));
  j.set("comparison", std::move(cj));
  const bool pass = growth.pass && cmp_ok;
  j.set("pass", Json(pass));
  ensure_directory(cfg.out_dir);
  write_text_file(cfg.out_dir + "/props.json", j.dump());
  std::printf("property battery: %s (%s/props.json)\n", pass ? "PASS" : "FAIL",
              cfg.out_dir.c_str());
  return pass ? 0 : 1;
}

}  // namespace

int run_app(const std::vector<std::string>& args) {
  CLI::App app{"numerical laboratory for asymptotic Dirichlet problems on "
               "rotationally symmetric model surfaces"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out;
    long long seed = -1;
    int threads = 1;
  };
  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "run configuration (TOML)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory override");
    sub->add_option("--seed", c.seed, "seed override");
    sub->add_option("--threads", c.threads,
                    "reserved; the engine runs serially for determinism")
        ->check(CLI::PositiveNumber);
  };

  Common c_check, c_barrier, c_solve, c_exhaust, c_props;
  CLI::App* s_check = app.add_subcommand("check", "verify curvature assumptions");
  CLI::App* s_barrier = app.add_subcommand("barrier", "build and certify a barrier");
  CLI::App* s_solve = app.add_subcommand("solve", "solve one Dirichlet problem");
  CLI::App* s_exhaust =
      app.add_subcommand("exhaust", "run the ball exhaustion study");
  CLI::App* s_props =
      app.add_subcommand("props", "operator growth and comparison battery");
  add_common(s_check, c_check);
  add_common(s_barrier, c_barrier);
  add_common(s_solve, c_solve);
  add_common(s_exhaust, c_exhaust);
  add_common(s_props, c_props);

  std::vector<const char*> argv;
  argv.push_back("mslab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto dispatch = [&](const Common& com, int (*fn)(const RunConfig&)) {
    RunConfig cfg = RunConfig::from_toml(TomlDoc::parse_file(com.config));
    if (!com.out.empty()) cfg.out_dir = com.out;
    if (com.seed >= 0) cfg.seed = static_cast<unsigned long long>(com.seed);
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = fn(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    std::printf("wall time: %.2fs\n",
                std::chrono::duration<double>(t1 - t0).count());
    return rc;
  };

  try {
    if (s_check->parsed()) return dispatch(c_check, cmd_check);
    if (s_barrier->parsed()) return dispatch(c_barrier, cmd_barrier);
    if (s_solve->parsed()) return dispatch(c_solve, cmd_solve);
    if (s_exhaust->parsed()) return dispatch(c_exhaust, cmd_exhaust);
    if (s_props->parsed()) return dispatch(c_props, cmd_props);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

}  // namespace mslab
