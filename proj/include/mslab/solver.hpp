#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/operators.hpp"

namespace mslab {

struct SolveOptions {
  double tol_factor = 1e-10;   // residual tolerance = tol_factor * osc(boundary data)
  int max_newton = 60;
  int max_backtracks = 30;
  double armijo_c1 = 1e-4;
  double cg_rel_tol = 1e-6;
  int cg_max_iter = 200000;
  bool harmonic_init = true;   // start Newton from the p = 2 solution
  const std::vector<double>* init = nullptr;  // optional initial iterate (cells)
};

struct SolveReport {
  bool converged = false;
  int newton_iterations = 0;
  int total_cg_iterations = 0;
  double final_residual = 0.0;  // max |divergence residual|
  double tolerance = 0.0;
  double energy = 0.0;
  std::vector<double> residual_history;
};

/* Conjugate gradients with Jacobi preconditioning for an SPD operator given
 * matrix-free.  Returns the iteration count; throws if the operator reveals
 * itself indefinite (p' A p <= 0) or the budget runs out. */
int linear_solve_spd(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::vector<double>& rhs, std::vector<double>& x, double rel_tol,
    int max_iter, const std::vector<double>* jacobi_diag = nullptr);

/* Discrete energy  sum_faces w_f Phi(|grad u|^2_f)  of the cell-centered
 * finite-volume scheme; u must carry outer (and for an annulus inner)
 * Dirichlet traces. */
double discrete_energy(const PolarField& u, const ModelSurface& surface,
                       const OperatorSpec& spec);

/* Divergence-form residual: cellwise approximation of div A(|grad u|^2) grad u,
 * i.e. minus the energy gradient divided by the cell measure. */
PolarField discrete_residual(const PolarField& u, const ModelSurface& surface,
                             const OperatorSpec& spec);

/* Damped Newton solve of the Dirichlet problem on the grid.  outer_bc has
 * ntheta entries; inner_bc is required exactly when grid.r_inner > 0. */
PolarField solve_dirichlet(const PolarGrid& grid, const ModelSurface& surface,
                           const OperatorSpec& spec,
                           const std::vector<double>& outer_bc,
                           const std::vector<double>& inner_bc,
                           const SolveOptions& opts, SolveReport& report);

struct ComparisonReport {
  double max_violation = 0.0;  // max over cells of u_low - u_high
  double min_gap = 0.0;        // min over cells of u_high - u_low
  bool ordered = false;        // max_violation <= tolerance used
  double tolerance = 0.0;
};

/* Solve with both traces and measure how far the discrete solutions are from
 * the ordering that the boundary comparison g_low <= g_high suggests. */
ComparisonReport comparison_test(const PolarGrid& grid, const ModelSurface& surface,
                                 const OperatorSpec& spec,
                                 const std::vector<double>& bc_low,
                                 const std::vector<double>& bc_high,
                                 const SolveOptions& opts, double tolerance = 1e-8);

}  // namespace mslab
