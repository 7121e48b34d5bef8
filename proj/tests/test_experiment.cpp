#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mslab/experiment.hpp"
#include "mslab/geometry.hpp"
#include "mslab/operators.hpp"

using namespace mslab;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("boundary data extension samples the outer trace") {
  const PolarGrid grid = make_grid(8, 8, 4.0);
  const std::vector<double> bc =
      extend_boundary_data([](double th) { return std::cos(th); }, grid);
  REQUIRE(static_cast<int>(bc.size()) == grid.ntheta);
  for (int j = 0; j < grid.ntheta; ++j)
    CHECK(bc[j] == doctest::Approx(std::cos(grid.theta(j))).epsilon(1e-14));
}

TEST_CASE("envelope slope scan lands in the predicted band for cos") {
  // For f = cos at theta0 = 0 and eps = 0.2 the oscillation over the
  // +-4/L window drops below eps/2 once 4/L < acos(0.9), i.e. L > 8.8696;
  // the geometric scan with ratio 1.05 from 8/pi first clears it at
  // L = (8/pi) * 1.05^26 = 9.0528.
  const double L = envelope_slope([](double th) { return std::cos(th); }, 0.0, 0.2);
  CHECK(L >= 8.86);
  CHECK(L <= 9.4);
  // The returned slope really does tame the oscillation.
  const double lo = std::cos(4.0 / L);
  CHECK(1.0 - lo < 0.1);
}

TEST_CASE("envelope slope returns the base value when eps is generous") {
  const double L = envelope_slope([](double th) { return std::cos(th); }, 0.0, 5.0);
  CHECK(L == doctest::Approx(8.0 / kPi).epsilon(1e-12));
}

TEST_CASE("envelope slope rejects data that oscillates at every scale") {
  // A jump at theta0 = 0 keeps the window oscillation at 1 forever.
  CHECK_THROWS_AS(
      envelope_slope([](double th) { return std::sin(th) > 0.0 ? 1.0 : 0.0; },
                     0.0, 0.2),
      std::runtime_error);
}

TEST_CASE("exhaustion on the hyperbolic disk stabilizes on compacts") {
  const CurvatureProfile prof = build_constant(1.0, 5.0, 2.0);

  ExhaustionOptions opts;
  opts.radii = {2.0, 4.0, 8.0};
  opts.compacts = {1.0, 2.0};
  opts.nr_last = 128;
  opts.ntheta = 32;
  opts.do_envelope = false;
  opts.do_uniqueness = true;
  opts.uniqueness_inits = 3;
  opts.seed = 3;

  const ExhaustionReport rep = run_exhaustion(
      prof, minimal_graph_operator(), [](double th) { return std::cos(th); },
      opts);

  REQUIRE(rep.balls.size() == 3);
  for (const BallResult& b : rep.balls) {
    INFO("ball R = " << b.radius << " iters " << b.newton_iterations);
    CHECK(b.converged);
  }
  CHECK(rep.balls[0].nr == 32);
  CHECK(rep.balls[1].nr == 64);
  CHECK(rep.balls[2].nr == 128);

  // Boundary attainment improves as the exhaustion grows.
  CHECK(rep.balls[0].attainment > rep.balls[1].attainment);
  CHECK(rep.balls[1].attainment > rep.balls[2].attainment);

  REQUIRE(rep.compacts.size() == 2);
  for (const CompactDiff& c : rep.compacts) REQUIRE(c.diffs.size() == 2);
  CHECK(rep.diffs_decreasing);
  CHECK(rep.final_max_diff > 1e-6);
  CHECK(rep.final_max_diff < 0.06);

  CHECK_FALSE(rep.envelope.attempted);
  CHECK(rep.uniqueness.inits == 3);
  CHECK(rep.uniqueness.max_pairwise_diff <= 1e-8);
}

TEST_CASE("exhaustion input validation") {
  const CurvatureProfile prof = build_constant(1.0, 5.0, 2.0);
  auto data = [](double th) { return std::cos(th); };
  const OperatorSpec op = minimal_graph_operator();

  ExhaustionOptions opts;
  opts.nr_last = 128;
  opts.ntheta = 16;
  opts.do_envelope = false;
  opts.do_uniqueness = false;

  opts.radii = {2.0};  // need at least two balls
  CHECK_THROWS_AS(run_exhaustion(prof, op, data, opts), std::exception);

  opts.radii = {4.0, 2.0};  // not increasing
  CHECK_THROWS_AS(run_exhaustion(prof, op, data, opts), std::exception);

  opts.radii = {2.0, 3.0};  // 2.0 is not a multiple of dr = 3/128
  CHECK_THROWS_AS(run_exhaustion(prof, op, data, opts), std::exception);

  opts.radii = {2.0, 4.0};
  opts.compacts = {3.0};  // compact escapes the smallest ball
  CHECK_THROWS_AS(run_exhaustion(prof, op, data, opts), std::exception);
}
