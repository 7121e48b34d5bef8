#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/operators.hpp"

namespace mslab {

double wrap_angle(double t);  // to (-pi, pi]

/* Crude barrier profile: 1 away from the cone about theta0, dropping to
 * 2 - 2 rho near the origin and to slope * angular distance inside. */
double crude_cone_data(double rho, double theta, double theta0, double slope);

/* Ring-kernel mollifier.  Averages source cell values against a compactly
 * supported kernel chi(b(rho(y)) d(x, y)) built from grid distances on the
 * surface; rotational symmetry reduces the work to one shortest-path sweep
 * per source ring followed by circular correlations. */
struct MollifyResult {
  PolarField smoothed;
  std::vector<char> touched_by_nonunit;  // per cell: kernel saw a value != 1
  double min_kernel_radius_cells = 0.0;  // smallest support over rings, in cells
};

MollifyResult mollify_ring_kernel(const PolarGrid& grid, const ModelSurface& surface,
                                  const std::function<double(double)>& b_of_r,
                                  const std::vector<double>& source_values);

struct GateResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // signed margin, negative means violated
  double threshold = 0.0;
  double where_rho = 0.0;
  double where_theta = 0.0;
};

struct BarrierInputs {
  const CurvatureProfile* profile = nullptr;
  const ModelSurface* surface = nullptr;  // built from bound a
  OperatorSpec op;
  PolarGrid grid;
  double theta0 = 0.0;
  double slope = 3.0;  // angular slope of the crude data
  double amp = 1.0;    // amplitude of the radial part
  int cert_samples = 10000;
  bool strict_asymptotic_gates = false;
  double r4_cap = 0.0;  // 0: half the grid radius
  unsigned long long seed = 1;
};

/* Shape constants of the radial barrier part, decided before any field work:
 * growth exponent, smallness parameter and its budget.  solvable is false
 * when the operator drift bound exhausts what the geometry allows. */
struct ShapeFeasibility {
  bool solvable = false;
  double phi1 = 0.0;
  double delta1 = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  double budget = 0.0;
  std::string note;
};

ShapeFeasibility barrier_shape(const CurvatureProfile& profile,
                               const OperatorSpec& op);

struct BarrierCertificate {
  bool pass = false;
  std::string note;
  // shape constants
  double phi1 = 0.0, delta1 = 0.0, delta = 0.0, lambda = 0.0;
  double delta_budget = 0.0;  // value of the smallness bound at delta; must be < 1
  double amp = 1.0;
  // radii ladder
  double r1_emp = 0.0;  // contamination radius of the mollified data outside 2 Omega
  double r2 = 0.0;      // radius beyond which the warp growth gates hold ringwise
  double r3 = 0.0;      // max(r1, r2, T1)
  double r4 = 0.0;      // certified inner radius (last candidate tried)
  // empirical constants of the mollified data
  double c5_emp = 0.0;
  double c6_emp = 0.0;
  // certification
  std::vector<GateResult> direct_gates;
  std::vector<GateResult> asymptotic_gates;  // reported; gating only in strict mode
  double ratio_sup = 0.0;  // sup of the perturbation/leading ratio (< 1 required)
  int samples_checked = 0;
  // fields
  PolarField h;    // mollified angular profile
  PolarField phi;  // barrier amp * (r4^delta rho^-delta + h)
  MollifyResult moll;
};

BarrierCertificate build_barrier(const BarrierInputs& in);

/* Pointwise supersolution ratio  B(q) <grad q, grad u> / (-|q| Delta u) form:
 * ratio = 2 B(q) Hess u(grad u, grad u) / (-Delta u), with q = |grad u|^2.
 * The sign convention makes ratio < 1 equivalent to Q[u] < 0 where
 * Delta u < 0.  Exposed for tests; build_barrier uses the same kernel. */
struct RatioSample {
  double rho = 0.0, theta = 0.0;
  double ratio = 0.0;
  double laplacian = 0.0;
  double grad_norm = 0.0;
};

}  // namespace mslab
