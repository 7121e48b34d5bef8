#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mslab/barrier.hpp"
#include "mslab/solver.hpp"

namespace mslab {

/* Sample angular boundary data onto the outer trace of a grid. */
std::vector<double> extend_boundary_data(const std::function<double(double)>& f,
                                         const PolarGrid& grid);

struct ExhaustionOptions {
  std::vector<double> radii;     // strictly increasing ball exhaustion
  std::vector<double> compacts;  // radii of the comparison compacts
  int nr_last = 256;             // radial cells on the largest ball
  int ntheta = 64;
  double attain_frac = 0.9;      // radius fraction for boundary attainment
  double envelope_eps = 0.2;
  double theta0 = 0.0;
  bool do_envelope = true;
  bool do_uniqueness = true;
  int uniqueness_inits = 3;
  unsigned long long seed = 1;
  int cert_samples = 10000;
  double jacobi_step = 1e-3;
  SolveOptions solve;
};

struct BallResult {
  double radius = 0.0;
  int nr = 0;
  bool converged = false;
  int newton_iterations = 0;
  double final_residual = 0.0;
  double attainment = 0.0;  // sup_theta |u(attain_frac * R) - f|
};

struct CompactDiff {
  double compact_radius = 0.0;
  std::vector<double> diffs;  // sup over the compact between consecutive balls
};

struct EnvelopeResult {
  bool attempted = false;
  bool cert_pass = false;
  double slope = 0.0;  // angular slope found by the oscillation scan
  double amp = 0.0;
  double delta = 0.0;
  double r4 = 0.0;
  int cells_checked = 0;
  int violations = 0;
  double min_upper_slack = 0.0;  // min of (upper envelope - u)
  double min_lower_slack = 0.0;  // min of (u - lower envelope)
};

struct UniquenessResult {
  int inits = 0;
  double max_pairwise_diff = 0.0;
};

struct ExhaustionReport {
  std::vector<BallResult> balls;
  std::vector<CompactDiff> compacts;
  bool diffs_decreasing = false;
  double final_max_diff = 0.0;  // last consecutive diff, maximal over compacts
  EnvelopeResult envelope;
  UniquenessResult uniqueness;
};

ExhaustionReport run_exhaustion(const CurvatureProfile& profile,
                                const OperatorSpec& op,
                                const std::function<double(double)>& data,
                                const ExhaustionOptions& opts);

/* Smallest angular slope whose 4/slope cone keeps the oscillation of f
 * below eps/2; scans upward from 8/pi. */
double envelope_slope(const std::function<double(double)>& f, double theta0,
                      double eps);

}  // namespace mslab
