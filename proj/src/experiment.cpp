#include "mslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mslab {

std::vector<double> extend_boundary_data(const std::function<double(double)>& f,
                                         const PolarGrid& grid) {
  std::vector<double> out(static_cast<size_t>(grid.ntheta));
  for (int j = 0; j < grid.ntheta; ++j) out[j] = f(grid.theta(j));
  return out;
}

double envelope_slope(const std::function<double(double)>& f, double theta0,
                      double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("envelope_slope: eps must be positive");
  double slope = 8.0 / std::numbers::pi;
  for (int iter = 0; iter < 500; ++iter) {
    const double half = 4.0 / slope;
    double lo = f(theta0), hi = lo;
    const int n = 2000;
    for (int k = 0; k <= n; ++k) {
      const double v = f(theta0 + (2.0 * k / n - 1.0) * half);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < eps / 2.0) return slope;
    slope *= 1.05;
  }
  throw std::runtime_error("envelope_slope: data oscillates too fast near theta0");
}

ExhaustionReport run_exhaustion(const CurvatureProfile& profile,
                                const OperatorSpec& op,
                                const std::function<double(double)>& data,
                                const ExhaustionOptions& opts) {
  if (opts.radii.size() < 2)
    throw std::invalid_argument("run_exhaustion: need at least two radii");
  for (size_t k = 1; k < opts.radii.size(); ++k)
    if (!(opts.radii[k] > opts.radii[k - 1]))
      throw std::invalid_argument("run_exhaustion: radii must be strictly increasing");
  const double r_last = opts.radii.back();
  const double dr = r_last / opts.nr_last;
  for (double c : opts.compacts)
    if (!(c > 0.0) || c > opts.radii.front() + 1e-9)
      throw std::invalid_argument(
          "run_exhaustion: compacts must fit inside the smallest ball");

  // every ball must share the radial spacing so cell centers coincide
  std::vector<int> nr_k;
  for (double R : opts.radii) {
    const double cells = R / dr;
    const int n = static_cast<int>(std::llround(cells));
    if (std::abs(cells - n) > 1e-9)
      throw std::invalid_argument(
          "run_exhaustion: radii must be integer multiples of the shared spacing");
    nr_k.push_back(n);
  }

  ModelSurface surface = build_surface(profile, 'a', r_last, opts.jacobi_step);

  ExhaustionReport rep;
  std::vector<PolarField> solutions;
  for (size_t k = 0; k < opts.radii.size(); ++k) {
    const PolarGrid grid = make_grid(nr_k[k], opts.ntheta, opts.radii[k]);
    const std::vector<double> bc = extend_boundary_data(data, grid);
    SolveReport sr;
    PolarField u = solve_dirichlet(grid, surface, op, bc, {}, opts.solve, sr);
    BallResult ball;
    ball.radius = opts.radii[k];
    ball.nr = nr_k[k];
    ball.converged = sr.converged;
    ball.newton_iterations = sr.newton_iterations;
    ball.final_residual = sr.final_residual;
    // boundary attainment at a fixed fraction of the ball radius
    const double ra = opts.attain_frac * opts.radii[k];
    double attain = 0.0;
    for (int j = 0; j < opts.ntheta; ++j) {
      const double pos = (ra - grid.r_inner) / dr - 0.5;
      const int i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, grid.nr - 2);
      const double w = std::clamp(pos - i0, 0.0, 1.0);
      const double uv = (1.0 - w) * u.at(i0, j) + w * u.at(i0 + 1, j);
      attain = std::max(attain, std::abs(uv - bc[j]));
    }
    ball.attainment = attain;
    rep.balls.push_back(ball);
    solutions.push_back(std::move(u));
  }

  rep.diffs_decreasing = true;
  rep.final_max_diff = 0.0;
  for (double c : opts.compacts) {
    CompactDiff cd;
    cd.compact_radius = c;
    for (size_t k = 0; k + 1 < solutions.size(); ++k) {
      double d = 0.0;
      const PolarGrid& g = solutions[k].grid;
      for (int i = 0; i < g.nr; ++i) {
        if (g.r_center(i) > c) break;
        for (int j = 0; j < g.ntheta; ++j)
          d = std::max(d, std::abs(solutions[k].at(i, j) - solutions[k + 1].at(i, j)));
      }
      cd.diffs.push_back(d);
    }
    for (size_t k = 1; k < cd.diffs.size(); ++k)
      if (!(cd.diffs[k] < cd.diffs[k - 1])) rep.diffs_decreasing = false;
    if (!cd.diffs.empty()) rep.final_max_diff = std::max(rep.final_max_diff, cd.diffs.back());
    rep.compacts.push_back(std::move(cd));
  }

  const PolarField& u_last = solutions.back();
  const PolarGrid& grid_last = u_last.grid;

  if (opts.do_envelope) {
    EnvelopeResult& env = rep.envelope;
    env.attempted = true;
    env.slope = envelope_slope(data, opts.theta0, opts.envelope_eps);
    const double f0 = data(opts.theta0);
    double dev = 0.0;
    for (int k = 0; k <= 4000; ++k)
      dev = std::max(dev, std::abs(data(2.0 * std::numbers::pi * k / 4000.0) - f0));
    env.amp = dev > 1e-12 ? 2.0 * dev : 1.0;

    BarrierInputs bi;
    bi.profile = &profile;
    bi.surface = &surface;
    bi.op = op;
    bi.grid = grid_last;
    bi.theta0 = opts.theta0;
    bi.slope = env.slope;
    bi.amp = env.amp;
    bi.cert_samples = opts.cert_samples;
    bi.r4_cap = r_last / 2.0;
    bi.seed = opts.seed;
    BarrierCertificate cert = build_barrier(bi);
    env.cert_pass = cert.pass;
    env.delta = cert.delta;
    env.r4 = cert.r4;
    if (!cert.phi.v.empty()) {
      const double eps = opts.envelope_eps;
      env.min_upper_slack = std::numeric_limits<double>::infinity();
      env.min_lower_slack = std::numeric_limits<double>::infinity();
      const double cone3 = 3.0 / env.slope;
      for (int i = 0; i < grid_last.nr; ++i) {
        if (grid_last.r_center(i) <= cert.r4) continue;
        for (int j = 0; j < grid_last.ntheta; ++j) {
          if (std::abs(wrap_angle(grid_last.theta(j) - opts.theta0)) > cone3)
            continue;
          const int c = grid_last.idx(i, j);
          const double upper = cert.phi.v[c] + f0 + eps;
          const double lower = -cert.phi.v[c] + f0 - eps;
          const double us = upper - u_last.v[c];
          const double ls = u_last.v[c] - lower;
          env.min_upper_slack = std::min(env.min_upper_slack, us);
          env.min_lower_slack = std::min(env.min_lower_slack, ls);
          ++env.cells_checked;
          if (us < 0.0 || ls < 0.0) ++env.violations;
        }
      }
    }
  }

  if (opts.do_uniqueness) {
    const std::vector<double>& bc = u_last.outer_bc;
    const double lo = *std::min_element(bc.begin(), bc.end());
    const double hi = *std::max_element(bc.begin(), bc.end());
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    const double mid = 0.5 * (lo + hi), half = std::max(0.5 * (hi - lo), 1e-3);
    std::vector<PolarField> runs;
    for (int t = 0; t < opts.uniqueness_inits; ++t) {
      std::vector<double> init(static_cast<size_t>(grid_last.cells()));
      if (t == 0) {
        std::fill(init.begin(), init.end(), lo);
      } else if (t == 1) {
        std::fill(init.begin(), init.end(), hi);
      } else {
        // smooth seeded field: white noise gets rougher as the grid refines
        // and starves Newton, while low harmonics stay an honest fresh start
        const double a = dist(rng) - mid, b = dist(rng) - mid, c = dist(rng) - mid;
        for (int i = 0; i < grid_last.nr; ++i) {
          const double x = grid_last.r_center(i) / grid_last.r_outer;
          for (int j = 0; j < grid_last.ntheta; ++j) {
            const double th = grid_last.theta(j);
            const double v =
                mid + (a * std::cos(th) + b * std::sin(2.0 * th)) * x + c * x * x;
            init[grid_last.idx(i, j)] = std::clamp(v, mid - half, mid + half);
          }
        }
      }
      SolveOptions so = opts.solve;
      so.init = &init;
      // the rough random start needs far more damped steps than a warm one
      so.max_newton = std::max(opts.solve.max_newton, 200);
      SolveReport sr;
      runs.push_back(solve_dirichlet(grid_last, surface, op, bc, {}, so, sr));
      if (!sr.converged)
        throw std::runtime_error("run_exhaustion: a uniqueness probe did not converge");
    }
    double worst = 0.0;
    for (size_t a = 0; a < runs.size(); ++a)
      for (size_t b = a + 1; b < runs.size(); ++b)
        for (size_t c = 0; c < runs[a].v.size(); ++c)
          worst = std::max(worst, std::abs(runs[a].v[c] - runs[b].v[c]));
    rep.uniqueness.inits = opts.uniqueness_inits;
    rep.uniqueness.max_pairwise_diff = worst;
  }

  return rep;
}

}  // namespace mslab
