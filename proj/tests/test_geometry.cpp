#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mslab/geometry.hpp"

using namespace mslab;

TEST_CASE("jacobi integration reproduces sinh and cosh for unit curvature") {
  WarpTable tab = integrate_jacobi([](double) { return 1.0; }, 10.0, 1e-3);
  for (double r : {0.1, 0.5, 1.0, 2.5, 5.0, 7.75, 10.0}) {
    CHECK(tab.value(r) == doctest::Approx(std::sinh(r)).epsilon(1e-8));
    CHECK(tab.derivative(r) == doctest::Approx(std::cosh(r)).epsilon(1e-8));
  }
}

TEST_CASE("jacobi integration is exact for zero curvature") {
  WarpTable tab = integrate_jacobi([](double) { return 0.0; }, 8.0, 1e-3);
  for (double r : {0.25, 1.0, 3.5, 8.0}) {
    CHECK(tab.value(r) == doctest::Approx(r).epsilon(1e-12));
    CHECK(tab.derivative(r) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("jacobi integration rejects bad arguments") {
  CHECK_THROWS(integrate_jacobi([](double) { return 1.0; }, -1.0, 1e-3));
  CHECK_THROWS(integrate_jacobi([](double) { return 1.0; }, 1.0, 0.0));
  CHECK_THROWS(integrate_jacobi([](double) { return -1.0; }, 1.0, 1e-3));
}

TEST_CASE("warp table rejects out-of-range evaluation") {
  WarpTable tab = integrate_jacobi([](double) { return 1.0; }, 2.0, 1e-3);
  CHECK_THROWS_AS(tab.value(2.5), std::out_of_range);
  CHECK_THROWS_AS(tab.value(-0.1), std::out_of_range);
  CHECK_THROWS_AS(tab.derivative(2.5), std::out_of_range);
}

TEST_CASE("power-branch warp solves the Euler equation in closed form") {
  // upper bound of the power family at phi = 2: a = C1 / t beyond t = 1 with
  // C1^2 = 2, so f'' = 2 f / t^2 there, with basis t^2 and 1/t
  CurvatureProfile p = build_example1(2.0, 0.5);
  CHECK(p.C1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  ModelSurface s = build_surface(p, 'a', 50.0, 1e-3);
  const double f1 = s.f(1.0), d1 = s.fp(1.0);
  const double c1 = (f1 + d1) / 3.0;
  const double c2 = (2.0 * f1 - d1) / 3.0;
  for (double t : {1.0, 1.7, 3.0, 8.0, 15.0, 30.0, 50.0}) {
    const double exact = c1 * t * t + c2 / t;
    CHECK(s.f(t) == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("growth exponent formula and frozen reference values") {
  for (double phi : {1.5, 2.0, 3.0, 10.0}) {
    const double c1 = std::sqrt(phi * (phi - 1.0));
    CHECK(phi1_of_C1(c1) == doctest::Approx(phi).epsilon(1e-12));
  }
  CHECK(phi1_of_C1(10.0) == doctest::Approx(10.512492197250394).epsilon(1e-12));
  CHECK(phi1_of_C1(5.0) == doctest::Approx(5.524937810560445).epsilon(1e-12));
}

TEST_CASE("constant-curvature profile carries the expected constants") {
  CurvatureProfile p = build_constant(1.0, 5.0, 2.0);
  CHECK(p.C2 == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(p.C3 == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(p.T1 == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(p.C4 == doctest::Approx(2.0).epsilon(1e-12));
  for (double t : {0.0, 1.0, 10.0, 80.0}) {
    CHECK(p.a(t) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.b(t) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("radial bound blend is flat near zero and joins smoothly") {
  RadialBound bb{1.0, -1.5, 1.0, 2.0, 1.0};
  CHECK(bb.argument(0.2) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(bb.argument(0.9) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(bb.argument(5.0) == doctest::Approx(5.0).epsilon(1e-14));
  // continuity of value and derivative across the join and the flat edge
  CHECK(bb.value(2.0 - 1e-8) == doctest::Approx(bb.value(2.0 + 1e-8)).epsilon(1e-6));
  CHECK(bb.derivative(2.0 - 1e-7) ==
        doctest::Approx(bb.derivative(2.0 + 1e-7)).epsilon(1e-4));
  CHECK(std::abs(bb.derivative(1.0 + 1e-7)) < 1e-6);
  CHECK(bb.derivative(0.5) == 0.0);
  // analytic derivative against a centered difference on the smooth branch
  const double h = 1e-6;
  const double fd = (bb.value(3.0 + h) - bb.value(3.0 - h)) / (2.0 * h);
  CHECK(bb.derivative(3.0) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("family builders validate their parameters") {
  CHECK_THROWS(build_example1(1.0, 0.5));
  CHECK_THROWS(build_example1(2.0, 2.0));   // eps must stay below 2 phi - 2
  CHECK_THROWS(build_example1(2.0, 0.0));
  CHECK_THROWS(build_example2(0.0, 1.0));
  CHECK_THROWS(build_example2(1.0, -1.0));
  CHECK_THROWS(build_constant(-1.0));
}

TEST_CASE("assumption check passes for the power family") {
  CurvatureProfile p = build_example1(2.0, 0.5);
  ModelSurface s = build_surface(p, 'a', 2000.0, 1e-3, 100);
  CheckOptions opts;
  opts.r_check = 2000.0;
  AssumptionReport rep = check_assumptions(p, s.warp, opts);
  for (const auto& item : rep.items) {
    INFO(item.name << " worst at t=" << item.worst.t << " lhs=" << item.worst.lhs
                   << " rhs=" << item.worst.rhs << " (" << item.note << ")");
    CHECK(item.pass);
  }
  CHECK(rep.all_pass);
}

TEST_CASE("assumption check passes for the exponential family") {
  CurvatureProfile p = build_example2(1.0, 1.0);
  CHECK(p.par_r0 == doctest::Approx(2.0).epsilon(1e-12));
  ModelSurface s = build_surface(p, 'a', 600.0, 1e-3, 100);
  CheckOptions opts;
  opts.r_check = 600.0;
  AssumptionReport rep = check_assumptions(p, s.warp, opts);
  for (const auto& item : rep.items) {
    INFO(item.name << " worst at t=" << item.worst.t << " lhs=" << item.worst.lhs
                   << " rhs=" << item.worst.rhs << " (" << item.note << ")");
    CHECK(item.pass);
  }
  CHECK(rep.all_pass);
}

TEST_CASE("assumption check rejects the flat profile with a witness") {
  CurvatureProfile p = build_constant(0.0, 1.0, 1.0);
  ModelSurface s = build_surface(p, 'a', 100.0, 1e-3, 10);
  CheckOptions opts;
  opts.r_check = 100.0;
  opts.sample_count = 500;
  AssumptionReport rep = check_assumptions(p, s.warp, opts);
  CHECK_FALSE(rep.all_pass);
  bool saw_a5 = false;
  for (const auto& item : rep.items) {
    if (item.name != "A5") continue;
    saw_a5 = true;
    CHECK_FALSE(item.pass);
    CHECK(item.worst.t == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(item.worst.lhs == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(item.worst.rhs == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(saw_a5);
}

TEST_CASE("model surface curvature matches the generating bound") {
  CurvatureProfile p = build_constant(1.0, 5.0, 2.0);
  ModelSurface s = build_surface(p, 'a', 10.0, 1e-3);
  for (double r : {0.5, 2.0, 7.5})
    CHECK(surface_curvature(s, r) == doctest::Approx(-1.0).epsilon(1e-12));
}
