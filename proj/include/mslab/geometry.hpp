#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mslab {

/* One radial curvature bound t -> coeff * t^power * exp(rate*t), valid for
 * t >= t_join, frozen to a constant near zero.  The join on [t_flat, t_join]
 * is a C2 monotone blend applied to the radial argument, so the value stays
 * monotone whenever the branch is and equals the branch exactly beyond
 * t_join.  With t_flat >= t_join the join degenerates to a plain clamp. */
struct RadialBound {
  double coeff = 0.0;
  double power = 0.0;
  double rate = 0.0;
  double t_join = 1.0;
  double t_flat = 1.0;

  double argument(double t) const;   // the blended radial argument
  double value(double t) const;
  double derivative(double t) const;
};

enum class Monotone { decreasing, increasing };

/* Pair of radial bounds a <= b for the curvature corridor
 * -b(t)^2 <= K <= -a(t)^2, with the constants the admissibility
 * conditions are stated against. */
struct CurvatureProfile {
  std::string family;              // "example1" | "example2" | "constant"
  RadialBound a_bound;
  RadialBound b_bound;
  bool b_floor_is_a = false;       // b(t) = max(a(t), b_bound(t))
  double b_floor_const = 0.0;      // b(t) = max(b_floor_const, b_bound(t))
  Monotone b_monotone = Monotone::decreasing;

  double C1 = 0, C2 = 0, C3 = 0, C4 = 0, T1 = 0, Qexp = 0.5;

  // family parameters, kept for reports and round trips
  double par_phi = 0, par_eps = 0, par_k = 0, par_r0 = 0, t_flat = 1;

  double a(double t) const;
  double b(double t) const;
  double a_prime(double t) const;
  double b_prime(double t) const;
};

CurvatureProfile build_example1(double phi, double eps, double r0 = 1.0,
                                double t_flat = 1.0, double scan_max = 100.0);
CurvatureProfile build_example2(double k, double eps, double c1 = 5.0,
                                double t_flat = 1.0, double scan_max = 100.0);
CurvatureProfile build_constant(double k, double c1 = 5.0, double c4 = 2.0,
                                double scan_max = 100.0);

double phi1_of_C1(double c1);

/* Tabulated solution of f'' = k(t)^2 f, f(0) = 0, f'(0) = 1 on uniform
 * nodes n*step (after decimation by stride).  Evaluation is cubic Hermite,
 * using the stored second derivative for f'. */
struct WarpTable {
  double step = 0.0;
  std::vector<double> f, fp, fpp;
  std::string source;   // which bound generated the table ("a", "b", ...)

  double r_max() const { return step * double(f.size() - 1); }
  double value(double r) const;
  double derivative(double r) const;
};

WarpTable integrate_jacobi(const std::function<double(double)>& k,
                           double r_max, double step, int stride = 1,
                           const std::string& label = "a");

/* Rotationally symmetric model surface: metric dr^2 + f(r)^2 dtheta^2. */
struct ModelSurface {
  WarpTable warp;
  double r_max = 0.0;
  std::function<double(double)> k;   // curvature bound behind warp, may be null

  double f(double r) const { return warp.value(r); }
  double fp(double r) const { return warp.derivative(r); }
};

ModelSurface build_surface(const CurvatureProfile& profile, char which_bound,
                           double r_max, double step, int stride = 1);

double surface_curvature(const ModelSurface& surface, double r);

struct AssumptionWitness {
  double t = 0, lhs = 0, rhs = 0;
};

struct AssumptionVerdict {
  std::string name;
  bool pass = false;
  AssumptionWitness worst;   // most adverse sample (violating one if fail)
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionVerdict> items;
  bool all_pass = false;
  double r_check = 0;
  int sample_count = 0;
};

struct CheckOptions {
  int sample_count = 2000;
  double r_check = 2000.0;
  double tail_abs = 1e-3;    // tail quotient accepted below this outright
  double tail_decay = 0.9;   // or if it shrank by this factor over the decade
  double rel_tol = 1e-9;
};

/* Samples the admissibility conditions (A1)-(A7) on a uniform lattice.
 * warp_a must be generated from profile's a bound; the two tail limits are
 * certified as monotone decay over the largest sampled decade. */
AssumptionReport check_assumptions(const CurvatureProfile& profile,
                                   const WarpTable& warp_a,
                                   const CheckOptions& opts = {});

}  // namespace mslab
