#include "mslab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace mslab {

OperatorSpec minimal_graph_operator() {
  OperatorSpec s;
  s.name = "minimal";
  s.A = [](double t) { return 1.0 / std::sqrt(1.0 + t); };
  s.B = [](double t) { return -0.5 / (1.0 + t); };
  s.Phi = [](double t) { return std::sqrt(1.0 + t) - 1.0; };
  s.A0 = 1.0;
  s.p = 2.0;
  s.B0 = 0.0;
  return s;
}

OperatorSpec p_laplace_operator(double p) {
  if (!(p > 1.0))
    throw std::invalid_argument("p_laplace: need p > 1, got " + std::to_string(p));
  OperatorSpec s;
  s.name = "plaplace";
  double e = 0.5 * (p - 2.0);
  if (p == 2.0) {
    s.A = [](double) { return 1.0; };
    s.B = [](double) { return 0.0; };
    s.Phi = [](double t) { return 0.5 * t; };
  } else {
    s.A = [e](double t) { return std::pow(t, e); };
    s.B = [e](double t) { return e / t; };
    s.Phi = [p](double t) { return std::pow(t, 0.5 * p) / p; };
  }
  s.A0 = 1.0;
  s.p = p;
  s.B0 = e;
  return s;
}

namespace {

/* Energy table for the custom family, log-uniform in s with Hermite
 * evaluation (the derivative A/2 is analytic); power-law extensions past
 * both ends. */
struct PhiTable {
  double coeff, e1, e2;
  double x_lo = std::log(1e-12), x_hi = std::log(1e12);
  int n = 4000;
  std::vector<double> val;

  double a_of(double t) const {
    return coeff * std::pow(t, e1) * std::pow(1.0 + t, e2);
  }
  double small_s(double s) const {   // (1+t)^e2 ~ 1 below s_lo
    return 0.5 * coeff * std::pow(s, e1 + 1.0) / (e1 + 1.0);
  }

  PhiTable(double c, double a, double b) : coeff(c), e1(a), e2(b) {
    val.resize(n + 1);
    double acc = small_s(std::exp(x_lo));
    val[0] = acc;
    double dx = (x_hi - x_lo) / n;
    // 4-point Gauss-Legendre per segment in x; integrand s A(s)/2
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    for (int i = 0; i < n; ++i) {
      double xa = x_lo + dx * i;
      double seg = 0.0;
      for (int q = 0; q < 4; ++q) {
        double x = xa + 0.5 * dx * (1.0 + gx[q]);
        double s = std::exp(x);
        seg += gw[q] * 0.5 * dx * s * 0.5 * a_of(s);
      }
      acc += seg;
      val[i + 1] = acc;
    }
  }

  double operator()(double s) const {
    if (s <= 0.0) return 0.0;
    double x = std::log(s);
    if (x <= x_lo) return small_s(s);
    if (x >= x_hi) {
      double g = e1 + e2;
      double s_hi = std::exp(x_hi);
      // A ~ coeff t^g above the table
      return val[n] + 0.5 * coeff *
                          (std::pow(s, g + 1.0) - std::pow(s_hi, g + 1.0)) /
                          (g + 1.0);
    }
    double dx = (x_hi - x_lo) / n;
    int i = std::min(int((x - x_lo) / dx), n - 1);
    double xa = x_lo + dx * i;
    double t = (x - xa) / dx;
    // Hermite in x with d(Phi)/dx = s A(s)/2
    auto dval = [&](int j) {
      double s_j = std::exp(x_lo + dx * j);
      return s_j * 0.5 * a_of(s_j) * dx;
    };
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * val[i] + (t3 - 2 * t2 + t) * dval(i) +
           (-2 * t3 + 3 * t2) * val[i + 1] + (t3 - t2) * dval(i + 1);
  }
};

}  // namespace

OperatorSpec custom_operator(double coeff, double e1, double e2) {
  if (!(coeff > 0.0)) throw std::invalid_argument("custom: need coeff > 0");
  if (!(std::min(e1, e1 + e2) > -0.5))
    throw std::invalid_argument("custom: B falls below -1/(2t)");
  if (e2 > 0.0)
    throw std::invalid_argument("custom: e2 > 0 breaks the growth bound at 0");

  OperatorSpec s;
  s.name = "custom";
  s.A = [coeff, e1, e2](double t) {
    return coeff * std::pow(t, e1) * std::pow(1.0 + t, e2);
  };
  s.B = [e1, e2](double t) { return e1 / t + e2 / (1.0 + t); };
  auto table = std::make_shared<PhiTable>(coeff, e1, e2);
  s.Phi = [table](double t) { return (*table)(t); };
  s.A0 = coeff;
  s.p = 2.0 * (e1 + e2) + 2.0;
  s.B0 = std::max(e1, e1 + e2);
  return s;
}

std::array<double, 2> flux(const OperatorSpec& spec, std::array<double, 2> g) {
  double q = g[0] * g[0] + g[1] * g[1];
  if (q == 0.0) return {0.0, 0.0};
  double a = spec.A(q);
  return {a * g[0], a * g[1]};
}

GrowthReport validate_growth(const OperatorSpec& spec) {
  GrowthReport rep;
  auto fail = [&rep](const std::string& check, double t, double lhs, double rhs) {
    rep.violations.push_back({check, t, lhs, rhs});
  };

  const int n = 161;
  double prev_ta = -1.0;
  for (int i = 0; i < n; ++i) {
    double t = std::pow(10.0, -8.0 + 0.1 * i);   // 1e-8 .. 1e8
    double a = spec.A(t);
    if (!(a > 0.0) || !std::isfinite(a)) fail("A_positive", t, a, 0.0);
    double cap = spec.A0 * std::pow(t, 0.5 * (spec.p - 2.0));
    if (a > cap * (1.0 + 1e-9)) fail("A_growth", t, a, cap);
    double b = spec.B(t);
    if (!(b > -0.5 / t)) fail("B_lower", t, b, -0.5 / t);
    double ub = spec.B0 / t;
    if (b > ub + 1e-9 * (std::abs(ub) + 1e-300))
      fail("B_upper", t, b, ub);
    // finite-difference check that B matches A'/A
    double h = 1e-5 * t;
    double b_fd = (spec.A(t + h) - spec.A(t - h)) / (2.0 * h) / a;
    if (std::abs(b_fd - b) > 1e-4 * std::max(1.0, std::abs(b)) &&
        std::abs(b_fd - b) > 1e-4 / t)
      fail("B_matches_A", t, b, b_fd);
    // energy density consistency 2 Phi' = A; the tolerance carries the
    // roundoff floor of the difference quotient so that energies built on
    // an O(1) offset (like sqrt(1 + s) - 1) stay checkable at small t
    double hs = 1e-4 * t;
    double phi_hi = spec.Phi(t + hs), phi_lo = spec.Phi(t - hs);
    double phi_fd = (phi_hi - phi_lo) / (2.0 * hs);
    double phi_ulp = 4.0 * std::numeric_limits<double>::epsilon() *
                     std::max({1.0, std::abs(phi_hi), std::abs(phi_lo)});
    if (std::abs(2.0 * phi_fd - a) >
        1e-6 * std::max(1.0, a) + 2.0 * phi_ulp / hs)
      fail("Phi_consistency", t, 2.0 * phi_fd, a);

    // flux monotone up to double rounding (it may plateau at saturation)
    double ta = t * spec.A(t * t);
    if (i > 0 && ta < prev_ta * (1.0 - 1e-12)) fail("flux_monotone", t, ta, prev_ta);
    prev_ta = ta;
  }

  double small = 1e-8 * spec.A(1e-16);
  if (!(small < 1e-2)) fail("flux_zero_limit", 1e-8, small, 1e-2);

  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace mslab
