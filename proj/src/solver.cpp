#include "mslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace mslab {

namespace {

/* One face of the finite-volume scheme.  The squared gradient on the face is
 * q = L1^2 + L2^2 with two linear forms L = d + sum a_k u[c_k]; boundary
 * trace contributions are folded into the constants d. */
struct FaceOp {
  double w = 0.0;           // quadrature weight (share of adjacent cell measures)
  double d1 = 0.0, d2 = 0.0;
  int n1 = 0, n2 = 0;
  int c1[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int c2[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  double a1[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  double a2[8] = {0, 0, 0, 0, 0, 0, 0, 0};
};

struct Assembly {
  PolarGrid grid;
  std::vector<FaceOp> ops;
  std::vector<double> measure;  // per cell
};

void push1(FaceOp& op, int cell, double coef) {
  op.c1[op.n1] = cell;
  op.a1[op.n1] = coef;
  ++op.n1;
}

void push2(FaceOp& op, int cell, double coef) {
  op.c2[op.n2] = cell;
  op.a2[op.n2] = coef;
  ++op.n2;
}

/* Tangential (theta) cell-centered gradient stencil entering radial faces. */
void push_theta_grad(FaceOp& op, const PolarGrid& g, const GridMetric& m, int i,
                     int j, double factor) {
  const double c = factor / (2.0 * g.dtheta() * m.f_c[i]);
  push2(op, g.idx(i, g.wrap(j + 1)), c);
  push2(op, g.idx(i, g.wrap(j - 1)), -c);
}

/* Radial gradient entering angular faces, written as the mean of the two
 * adjacent radial face differences so that it telescopes conservatively
 * across rings; Dirichlet traces sit half a cell outside the end centers.
 * On a disk the first ring carries only its upper face difference. */
void push_radial_grad(FaceOp& op, const PolarGrid& g, int i, int j, double factor,
                      const std::vector<double>& outer_bc,
                      const std::vector<double>& inner_bc, bool has_inner) {
  const double dr = g.dr();
  double up = 0.5 * factor, down = 0.5 * factor;
  if (i == 0 && !has_inner) {
    up = factor;
    down = 0.0;
  }
  if (i < g.nr - 1) {
    push1(op, g.idx(i + 1, j), up / dr);
    push1(op, g.idx(i, j), -up / dr);
  } else {
    push1(op, g.idx(i, j), -2.0 * up / dr);
    op.d1 += 2.0 * up * outer_bc[j] / dr;
  }
  if (down != 0.0) {
    if (i > 0) {
      push1(op, g.idx(i, j), down / dr);
      push1(op, g.idx(i - 1, j), -down / dr);
    } else {
      push1(op, g.idx(0, j), 2.0 * down / dr);
      op.d1 += -2.0 * down * inner_bc[j] / dr;
    }
  }
}

Assembly assemble(const PolarGrid& grid, const GridMetric& metric,
                  const std::vector<double>& outer_bc,
                  const std::vector<double>& inner_bc) {
  const int nr = grid.nr, nt = grid.ntheta;
  const bool has_inner = grid.r_inner > 0.0;
  if (static_cast<int>(outer_bc.size()) != nt)
    throw std::invalid_argument("solver: outer trace must have ntheta entries");
  if (has_inner && static_cast<int>(inner_bc.size()) != nt)
    throw std::invalid_argument("solver: inner trace must have ntheta entries");
  if (nr < 4) throw std::invalid_argument("solver: need nr >= 4");

  Assembly as;
  as.grid = grid;
  as.measure = metric.measure;  // per-ring; expand on use
  const double dr = grid.dr(), dth = grid.dtheta();
  as.ops.reserve(static_cast<size_t>(2 * nr * nt + (has_inner ? 2 : 1) * nt));

  // interior radial faces, L1 = normal (radial), L2 = tangential average
  for (int i = 0; i + 1 < nr; ++i) {
    const double w = (metric.measure[i] + metric.measure[i + 1]) / 4.0;
    for (int j = 0; j < nt; ++j) {
      FaceOp op;
      op.w = w;
      push1(op, grid.idx(i + 1, j), 1.0 / dr);
      push1(op, grid.idx(i, j), -1.0 / dr);
      push_theta_grad(op, grid, metric, i, j, 0.5);
      push_theta_grad(op, grid, metric, i + 1, j, 0.5);
      as.ops.push_back(op);
    }
  }
  // outer boundary faces
  {
    const double f_out = metric.f_face[nr];
    for (int j = 0; j < nt; ++j) {
      FaceOp op;
      op.w = metric.measure[nr - 1] / 4.0;
      push1(op, grid.idx(nr - 1, j), -2.0 / dr);
      op.d1 = 2.0 * outer_bc[j] / dr;
      op.d2 = (outer_bc[grid.wrap(j + 1)] - outer_bc[grid.wrap(j - 1)]) /
              (2.0 * dth * f_out);
      as.ops.push_back(op);
    }
  }
  // inner boundary faces (annulus only; for a disk the face has zero length)
  if (has_inner) {
    const double f_in = metric.f_face[0];
    for (int j = 0; j < nt; ++j) {
      FaceOp op;
      op.w = metric.measure[0] / 4.0;
      push1(op, grid.idx(0, j), 2.0 / dr);
      op.d1 = -2.0 * inner_bc[j] / dr;
      op.d2 = (inner_bc[grid.wrap(j + 1)] - inner_bc[grid.wrap(j - 1)]) /
              (2.0 * dth * f_in);
      as.ops.push_back(op);
    }
  }
  // angular faces, L1 = radial average, L2 = normal (theta)
  for (int i = 0; i < nr; ++i) {
    const double w = metric.measure[i] / 2.0;  // quarter of each neighbor
    const double cth = 1.0 / (dth * metric.f_c[i]);
    for (int j = 0; j < nt; ++j) {
      FaceOp op;
      op.w = w;
      push2(op, grid.idx(i, grid.wrap(j + 1)), cth);
      push2(op, grid.idx(i, j), -cth);
      push_radial_grad(op, grid, i, j, 0.5, outer_bc, inner_bc, has_inner);
      push_radial_grad(op, grid, i, grid.wrap(j + 1), 0.5, outer_bc, inner_bc,
                       has_inner);
      as.ops.push_back(op);
    }
  }
  return as;
}

inline void face_forms(const FaceOp& op, const std::vector<double>& u, double& L1,
                       double& L2) {
  double s1 = op.d1, s2 = op.d2;
  for (int k = 0; k < op.n1; ++k) s1 += op.a1[k] * u[op.c1[k]];
  for (int k = 0; k < op.n2; ++k) s2 += op.a2[k] * u[op.c2[k]];
  L1 = s1;
  L2 = s2;
}

double energy_of(const Assembly& as, const OperatorSpec& spec,
                 const std::vector<double>& u) {
  double e = 0.0;
  for (const FaceOp& op : as.ops) {
    double L1, L2;
    face_forms(op, u, L1, L2);
    const double q = L1 * L1 + L2 * L2;
    const double phi = spec.Phi(q);
    if (!std::isfinite(phi))
      throw std::runtime_error("solver: energy density not finite on a face");
    e += op.w * phi;
  }
  return e;
}

void gradient_of(const Assembly& as, const OperatorSpec& spec,
                 const std::vector<double>& u, std::vector<double>& g) {
  g.assign(u.size(), 0.0);
  for (const FaceOp& op : as.ops) {
    double L1, L2;
    face_forms(op, u, L1, L2);
    const double q = L1 * L1 + L2 * L2;
    if (q == 0.0) continue;  // gradient contribution vanishes with the forms
    const double a = spec.A(q);
    if (!std::isfinite(a))
      throw std::runtime_error("solver: diffusivity not finite on a face");
    const double w1 = op.w * a * L1, w2 = op.w * a * L2;
    for (int k = 0; k < op.n1; ++k) g[op.c1[k]] += w1 * op.a1[k];
    for (int k = 0; k < op.n2; ++k) g[op.c2[k]] += w2 * op.a2[k];
  }
}

/* Hessian of the energy applied to v.  d2 Phi gives the rank-one term with
 * 2 A'(q) = 2 A(q) B(q); it is skipped for vanishing face gradients where it
 * tends to zero for the admissible operator class. */
void hessian_apply(const Assembly& as, const OperatorSpec& spec,
                   const std::vector<double>& u, const std::vector<double>& v,
                   std::vector<double>& hv) {
  hv.assign(u.size(), 0.0);
  for (const FaceOp& op : as.ops) {
    double L1, L2;
    face_forms(op, u, L1, L2);
    const double q = L1 * L1 + L2 * L2;
    const double a = spec.A(q);
    if (!std::isfinite(a))
      throw std::runtime_error("solver: diffusivity not finite on a face");
    double ab2 = 0.0;
    if (q > 1e-200) {
      ab2 = 2.0 * a * spec.B(q);
      if (!std::isfinite(ab2)) ab2 = 0.0;
    }
    double D1 = 0.0, D2 = 0.0;
    for (int k = 0; k < op.n1; ++k) D1 += op.a1[k] * v[op.c1[k]];
    for (int k = 0; k < op.n2; ++k) D2 += op.a2[k] * v[op.c2[k]];
    const double rank1 = ab2 * (L1 * D1 + L2 * D2);
    const double w1 = op.w * (a * D1 + rank1 * L1);
    const double w2 = op.w * (a * D2 + rank1 * L2);
    for (int k = 0; k < op.n1; ++k) hv[op.c1[k]] += w1 * op.a1[k];
    for (int k = 0; k < op.n2; ++k) hv[op.c2[k]] += w2 * op.a2[k];
  }
}

void hessian_diag(const Assembly& as, const OperatorSpec& spec,
                  const std::vector<double>& u, std::vector<double>& diag) {
  diag.assign(u.size(), 0.0);
  for (const FaceOp& op : as.ops) {
    double L1, L2;
    face_forms(op, u, L1, L2);
    const double q = L1 * L1 + L2 * L2;
    const double a = spec.A(q);
    double ab2 = 0.0;
    if (q > 1e-200) {
      ab2 = 2.0 * a * spec.B(q);
      if (!std::isfinite(ab2)) ab2 = 0.0;
    }
    for (int k = 0; k < op.n1; ++k) {
      const double d = op.a1[k];
      diag[op.c1[k]] += op.w * (a * d * d + ab2 * L1 * L1 * d * d);
    }
    for (int k = 0; k < op.n2; ++k) {
      const double d = op.a2[k];
      diag[op.c2[k]] += op.w * (a * d * d + ab2 * L2 * L2 * d * d);
    }
  }
}

std::vector<double> cell_measures(const PolarGrid& grid, const GridMetric& metric) {
  std::vector<double> m(static_cast<size_t>(grid.cells()));
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j) m[grid.idx(i, j)] = metric.measure[i];
  return m;
}

double trace_span(const std::vector<double>& outer, const std::vector<double>& inner,
                  double& scale) {
  double lo = outer[0], hi = outer[0];
  scale = 0.0;
  for (double v : outer) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
  }
  for (double v : inner) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
  }
  return hi - lo;
}

}  // namespace

int linear_solve_spd(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::vector<double>& rhs, std::vector<double>& x, double rel_tol,
    int max_iter, const std::vector<double>* jacobi_diag) {
  const size_t n = rhs.size();
  if (x.size() != n) x.assign(n, 0.0);
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };
  auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
    if (!jacobi_diag) {
      z = r;
      return;
    }
    z.resize(n);
    for (size_t k = 0; k < n; ++k) {
      const double d = (*jacobi_diag)[k];
      z[k] = (d > 0.0) ? r[k] / d : r[k];
    }
  };

  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (size_t k = 0; k < n; ++k) r[k] = rhs[k] - ap[k];
  const double bnorm = std::sqrt(dot(rhs, rhs));
  const double target = rel_tol * (bnorm > 0.0 ? bnorm : 1.0);
  if (std::sqrt(dot(r, r)) <= target) return 0;
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw std::runtime_error(
          "linear_solve_spd: operator not positive definite at iteration " +
          std::to_string(it));
    const double alpha = rz / pap;
    for (size_t k = 0; k < n; ++k) x[k] += alpha * p[k];
    for (size_t k = 0; k < n; ++k) r[k] -= alpha * ap[k];
    if (std::sqrt(dot(r, r)) <= target) return it;
    precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  return max_iter;  // caller treats the direction as approximate
}

double discrete_energy(const PolarField& u, const ModelSurface& surface,
                       const OperatorSpec& spec) {
  GridMetric metric = make_metric(u.grid, surface);
  Assembly as = assemble(u.grid, metric, u.outer_bc, u.inner_bc);
  return energy_of(as, spec, u.v);
}

PolarField discrete_residual(const PolarField& u, const ModelSurface& surface,
                             const OperatorSpec& spec) {
  GridMetric metric = make_metric(u.grid, surface);
  Assembly as = assemble(u.grid, metric, u.outer_bc, u.inner_bc);
  std::vector<double> g;
  gradient_of(as, spec, u.v, g);
  PolarField out = make_field(u.grid);
  for (int i = 0; i < u.grid.nr; ++i)
    for (int j = 0; j < u.grid.ntheta; ++j) {
      const int c = u.grid.idx(i, j);
      out.v[c] = -g[c] / metric.measure[i];
    }
  out.outer_bc = u.outer_bc;
  out.inner_bc = u.inner_bc;
  return out;
}

PolarField solve_dirichlet(const PolarGrid& grid, const ModelSurface& surface,
                           const OperatorSpec& spec,
                           const std::vector<double>& outer_bc,
                           const std::vector<double>& inner_bc,
                           const SolveOptions& opts, SolveReport& report) {
  GridMetric metric = make_metric(grid, surface);
  Assembly as = assemble(grid, metric, outer_bc, inner_bc);
  const std::vector<double> cellm = cell_measures(grid, metric);
  const size_t n = static_cast<size_t>(grid.cells());

  double scale = 0.0;
  const double osc = trace_span(outer_bc, inner_bc, scale);
  report = SolveReport{};
  report.tolerance = opts.tol_factor * osc + 1e-14 * (1.0 + scale);

  double mean = 0.0;
  {
    double s = 0.0;
    int cnt = 0;
    for (double v : outer_bc) s += v, ++cnt;
    for (double v : inner_bc) s += v, ++cnt;
    mean = s / cnt;
  }

  std::vector<double> u(n, mean);
  if (opts.init) {
    if (opts.init->size() != n)
      throw std::invalid_argument("solve_dirichlet: initial iterate has wrong size");
    u = *opts.init;
  } else if (opts.harmonic_init) {
    // quadratic energy: one linear solve from the mean gives the p = 2 solution
    const OperatorSpec p2 = p_laplace_operator(2.0);
    std::vector<double> g, diag, d(n, 0.0);
    gradient_of(as, p2, u, g);
    hessian_diag(as, p2, u, diag);
    for (size_t k = 0; k < n; ++k) g[k] = -g[k];
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      hessian_apply(as, p2, u, x, y);
    };
    report.total_cg_iterations += linear_solve_spd(apply, g, d, 1e-10,
                                                   opts.cg_max_iter, &diag);
    for (size_t k = 0; k < n; ++k) u[k] += d[k];
  }

  std::vector<double> g, diag, d, trial(n);
  for (int it = 0; it <= opts.max_newton; ++it) {
    gradient_of(as, spec, u, g);
    double res = 0.0;
    for (size_t k = 0; k < n; ++k) res = std::max(res, std::abs(g[k]) / cellm[k]);
    report.residual_history.push_back(res);
    report.final_residual = res;
    report.newton_iterations = it;
    if (res <= report.tolerance) {
      report.converged = true;
      break;
    }
    if (it == opts.max_newton) break;

    hessian_diag(as, spec, u, diag);
    std::vector<double> rhs(n);
    for (size_t k = 0; k < n; ++k) rhs[k] = -g[k];
    d.assign(n, 0.0);
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      hessian_apply(as, spec, u, x, y);
    };
    report.total_cg_iterations +=
        linear_solve_spd(apply, rhs, d, opts.cg_rel_tol, opts.cg_max_iter, &diag);

    double gd = 0.0;
    for (size_t k = 0; k < n; ++k) gd += g[k] * d[k];
    if (!(gd < 0.0)) {
      // numerically flat; nothing left to gain
      report.converged = res <= report.tolerance;
      break;
    }
    const double e0 = energy_of(as, spec, u);
    // The energy is a sum over all faces, so its evaluation carries roundoff
    // of order n_faces * ulp(e0).  Once the decrease Armijo must certify is
    // below that, the comparison reads summation noise; switch to requiring
    // a residual decrease, which is measured per cell and stays meaningful.
    const double e_noise = std::numeric_limits<double>::epsilon() *
                           (std::abs(e0) + 1.0) *
                           static_cast<double>(as.ops.size());
    const bool noise_regime = opts.armijo_c1 * (-gd) <= e_noise;
    double t = 1.0;
    bool accepted = false;
    std::vector<double> gt;
    for (int back = 0; back <= opts.max_backtracks; ++back) {
      for (size_t k = 0; k < n; ++k) trial[k] = u[k] + t * d[k];
      bool ok = false;
      try {
        if (noise_regime) {
          gradient_of(as, spec, trial, gt);
          double rt = 0.0;
          for (size_t k = 0; k < n; ++k)
            rt = std::max(rt, std::abs(gt[k]) / cellm[k]);
          ok = rt < res;
        } else {
          const double et = energy_of(as, spec, trial);
          ok = et <= e0 + opts.armijo_c1 * t * gd;
        }
      } catch (const std::runtime_error&) {
        t *= 0.5;
        continue;
      }
      if (ok) {
        u = trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; report current residual
  }

  report.energy = energy_of(as, spec, u);

  PolarField out;
  out.grid = grid;
  out.v = std::move(u);
  out.outer_bc = outer_bc;
  out.inner_bc = inner_bc;
  return out;
}

ComparisonReport comparison_test(const PolarGrid& grid, const ModelSurface& surface,
                                 const OperatorSpec& spec,
                                 const std::vector<double>& bc_low,
                                 const std::vector<double>& bc_high,
                                 const SolveOptions& opts, double tolerance) {
  SolveReport rl, rh;
  PolarField lo = solve_dirichlet(grid, surface, spec, bc_low, {}, opts, rl);
  PolarField hi = solve_dirichlet(grid, surface, spec, bc_high, {}, opts, rh);
  if (!rl.converged || !rh.converged)
    throw std::runtime_error("comparison_test: a Dirichlet solve did not converge");
  ComparisonReport rep;
  rep.tolerance = tolerance;
  rep.max_violation = -1e300;
  rep.min_gap = 1e300;
  for (size_t k = 0; k < lo.v.size(); ++k) {
    rep.max_violation = std::max(rep.max_violation, lo.v[k] - hi.v[k]);
    rep.min_gap = std::min(rep.min_gap, hi.v[k] - lo.v[k]);
  }
  rep.ordered = rep.max_violation <= tolerance;
  return rep;
}

}  // namespace mslab
