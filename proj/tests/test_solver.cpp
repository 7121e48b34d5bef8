#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mslab/solver.hpp"

using namespace mslab;

namespace {

ModelSurface surface_of(double k, double r_max) {
  ModelSurface s;
  s.warp = integrate_jacobi([k](double) { return k; }, r_max, 1e-3);
  s.r_max = r_max;
  s.k = [k](double) { return k; };
  return s;
}

std::vector<double> sample_bc(const PolarGrid& g,
                              const std::function<double(double)>& f) {
  std::vector<double> out(static_cast<size_t>(g.ntheta));
  for (int j = 0; j < g.ntheta; ++j) out[j] = f(g.theta(j));
  return out;
}

}  // namespace

TEST_CASE("preconditioned conjugate gradients solves a tridiagonal system") {
  const int n = 5;
  auto apply = [n](const std::vector<double>& x, std::vector<double>& y) {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      y[i] = 2.0 * x[i];
      if (i > 0) y[i] -= x[i - 1];
      if (i + 1 < n) y[i] -= x[i + 1];
    }
  };
  std::vector<double> rhs(n, 1.0), x;
  const int iters = linear_solve_spd(apply, rhs, x, 1e-12, 100);
  CHECK(iters <= 5);
  const double expect[5] = {2.5, 4.0, 4.5, 4.0, 2.5};
  for (int i = 0; i < n; ++i)
    CHECK(x[i] == doctest::Approx(expect[i]).epsilon(1e-8));
}

TEST_CASE("conjugate gradients reports an indefinite operator") {
  auto apply = [](const std::vector<double>& x, std::vector<double>& y) {
    y = {x[0], -x[1]};
  };
  std::vector<double> rhs = {1.0, 1.0}, x;
  CHECK_THROWS_AS(linear_solve_spd(apply, rhs, x, 1e-10, 50), std::runtime_error);
}

TEST_CASE("harmonic solve on the curved disk matches the conformal oracle") {
  const double R = 2.0;
  ModelSurface s = surface_of(1.0, R);
  PolarGrid grid = make_grid(96, 96, R);
  auto bc = sample_bc(grid, [](double th) { return std::cos(th); });
  SolveOptions so;
  SolveReport rep;
  PolarField u = solve_dirichlet(grid, s, p_laplace_operator(2.0), bc, {}, so, rep);
  CHECK(rep.converged);
  double err = 0.0;
  const double norm = std::tanh(0.5 * R);
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j) {
      const double exact =
          std::tanh(0.5 * grid.r_center(i)) / norm * std::cos(grid.theta(j));
      err = std::max(err, std::abs(u.at(i, j) - exact));
    }
  CHECK(err < 3e-3);
}

TEST_CASE("radial annulus solve matches the log-tanh oracle") {
  ModelSurface s = surface_of(1.0, 2.0);
  PolarGrid grid = make_grid(128, 8, 2.0, 1.0);
  std::vector<double> outer(8, 1.0), inner(8, 0.0);
  SolveOptions so;
  SolveReport rep;
  PolarField u = solve_dirichlet(grid, s, p_laplace_operator(2.0), outer, inner,
                                 so, rep);
  CHECK(rep.converged);
  auto G = [](double r) { return std::log(std::tanh(0.5 * r)); };
  const double g1 = G(1.0), g2 = G(2.0);
  double err = 0.0;
  for (int i = 0; i < grid.nr; ++i) {
    const double exact = (G(grid.r_center(i)) - g1) / (g2 - g1);
    for (int j = 0; j < grid.ntheta; ++j)
      err = std::max(err, std::abs(u.at(i, j) - exact));
  }
  CHECK(err < 1.2e-3);
}

TEST_CASE("minimal graph annulus solve matches the catenoid oracle") {
  ModelSurface s = surface_of(0.0, 3.0);
  PolarGrid grid = make_grid(128, 8, 3.0, 1.0);
  const double c = 0.8;
  auto exact = [c](double r) { return c * std::acosh(r / c); };
  std::vector<double> outer(8, exact(3.0)), inner(8, exact(1.0));
  SolveOptions so;
  SolveReport rep;
  PolarField u = solve_dirichlet(grid, s, minimal_graph_operator(), outer, inner,
                                 so, rep);
  CHECK(rep.converged);
  double err = 0.0;
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j)
      err = std::max(err, std::abs(u.at(i, j) - exact(grid.r_center(i))));
  CHECK(err < 4e-3);
}

TEST_CASE("separated boundary data keeps the discrete solutions ordered") {
  ModelSurface s = surface_of(1.0, 2.0);
  PolarGrid grid = make_grid(48, 32, 2.0);
  auto lo = sample_bc(grid, [](double th) { return std::cos(th) - 0.4; });
  auto hi = sample_bc(grid, [](double th) {
    return std::cos(th) + 0.1 * std::sin(2.0 * th) + 0.2;
  });
  SolveOptions so;
  ComparisonReport rep = comparison_test(grid, s, minimal_graph_operator(), lo, hi, so);
  CHECK(rep.ordered);
  CHECK(rep.max_violation <= 1e-8);
  CHECK(rep.min_gap > 0.0);
}

TEST_CASE("solutions commute with constant shifts of the boundary data") {
  ModelSurface s = surface_of(1.0, 2.0);
  PolarGrid grid = make_grid(48, 32, 2.0);
  auto g0 = sample_bc(grid, [](double th) {
    return 0.3 * std::cos(th) + 0.2 * std::sin(3.0 * th);
  });
  auto g1 = g0;
  const double shift = 7.25;
  for (double& v : g1) v += shift;
  SolveOptions so;
  SolveReport r0, r1;
  PolarField u0 = solve_dirichlet(grid, s, minimal_graph_operator(), g0, {}, so, r0);
  PolarField u1 = solve_dirichlet(grid, s, minimal_graph_operator(), g1, {}, so, r1);
  CHECK(r0.converged);
  CHECK(r1.converged);
  double diff = 0.0;
  for (size_t k = 0; k < u0.v.size(); ++k)
    diff = std::max(diff, std::abs(u1.v[k] - u0.v[k] - shift));
  CHECK(diff <= 1e-8);
}

TEST_CASE("divergence residual is the measure-scaled energy gradient") {
  ModelSurface s = surface_of(1.0, 1.5);
  PolarGrid grid = make_grid(8, 8, 1.5);
  GridMetric metric = make_metric(grid, s);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  PolarField u = make_field(grid);
  for (double& v : u.v) v = un(rng);
  u.outer_bc.resize(8);
  for (double& v : u.outer_bc) v = un(rng);

  const OperatorSpec spec = minimal_graph_operator();
  PolarField res = discrete_residual(u, s, spec);
  std::vector<double> dir(u.v.size());
  for (double& v : dir) v = un(rng);

  double gdot = 0.0;
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j) {
      const int c = grid.idx(i, j);
      gdot += -res.v[c] * metric.measure[i] * dir[c];
    }
  const double eps = 1e-6;
  PolarField up = u, um = u;
  for (size_t k = 0; k < u.v.size(); ++k) {
    up.v[k] += eps * dir[k];
    um.v[k] -= eps * dir[k];
  }
  const double fd =
      (discrete_energy(up, s, spec) - discrete_energy(um, s, spec)) / (2.0 * eps);
  CHECK(gdot == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("solver reports a residual below its own tolerance") {
  ModelSurface s = surface_of(1.0, 2.0);
  PolarGrid grid = make_grid(32, 16, 2.0);
  auto bc = sample_bc(grid, [](double th) { return std::cos(th); });
  SolveOptions so;
  SolveReport rep;
  PolarField u = solve_dirichlet(grid, s, minimal_graph_operator(), bc, {}, so, rep);
  CHECK(rep.converged);
  CHECK(rep.final_residual <= rep.tolerance);
  PolarField res = discrete_residual(u, s, minimal_graph_operator());
  double worst = 0.0;
  for (double v : res.v) worst = std::max(worst, std::abs(v));
  CHECK(worst <= rep.tolerance * (1.0 + 1e-9));
}

TEST_CASE("solver rejects inconsistent boundary input") {
  ModelSurface s = surface_of(1.0, 2.0);
  PolarGrid annulus = make_grid(16, 8, 2.0, 1.0);
  SolveOptions so;
  SolveReport rep;
  CHECK_THROWS(solve_dirichlet(annulus, s, minimal_graph_operator(),
                               std::vector<double>(8, 1.0), {}, so, rep));
  PolarGrid disk = make_grid(16, 8, 2.0);
  CHECK_THROWS(solve_dirichlet(disk, s, minimal_graph_operator(),
                               std::vector<double>(4, 1.0), {}, so, rep));
}
