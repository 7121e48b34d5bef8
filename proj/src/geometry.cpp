#include "mslab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mslab {

namespace {

double branch_eval(double coeff, double power, double rate, double t) {
  if (coeff == 0.0) return 0.0;
  double v = coeff;
  if (power != 0.0) v *= std::pow(t, power);
  if (rate != 0.0) v *= std::exp(rate * t);
  return v;
}

}  // namespace

double RadialBound::argument(double t) const {
  if (t >= t_join) return t;
  double w = t_join - t_flat;
  if (w <= 0.0) return t_join;          // degenerate join: plain clamp
  if (t <= t_flat) return t_join - 0.5 * w;
  double x = (t - t_flat) / w;
  double sx = x * x * x - 0.5 * x * x * x * x;   // integral of smoothstep
  return t_join - 0.5 * w + w * sx;
}

double RadialBound::value(double t) const {
  return branch_eval(coeff, power, rate, argument(t));
}

double RadialBound::derivative(double t) const {
  if (coeff == 0.0) return 0.0;
  double s = argument(t);
  double v = branch_eval(coeff, power, rate, s);
  double ds;
  if (t >= t_join) {
    ds = 1.0;
  } else {
    double w = t_join - t_flat;
    if (w <= 0.0 || t <= t_flat) return 0.0;
    double x = (t - t_flat) / w;
    ds = 3.0 * x * x - 2.0 * x * x * x;
  }
  return v * (power / s + rate) * ds;
}

double CurvatureProfile::a(double t) const { return a_bound.value(t); }

double CurvatureProfile::b(double t) const {
  double v = b_bound.value(t);
  if (b_floor_is_a) v = std::max(v, a(t));
  if (b_floor_const > 0.0) v = std::max(v, b_floor_const);
  return v;
}

double CurvatureProfile::a_prime(double t) const { return a_bound.derivative(t); }

double CurvatureProfile::b_prime(double t) const {
  double raw = b_bound.value(t);
  double v = raw;
  double d = b_bound.derivative(t);
  if (b_floor_is_a && a(t) > v) {
    v = a(t);
    d = a_prime(t);
  }
  if (b_floor_const > v) d = 0.0;
  return d;
}

double phi1_of_C1(double c1) {
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * c1 * c1));
}

namespace {

/* Brute-force scans producing the empirical constants C2 (bounding a, the
 * unit-shift ratio and the halving ratio of b) and C3 (lower bound in
 * b >= C3 (1+t)^-Q), with small safety margins so the sampled inequalities
 * stay true slightly beyond the scanned range. */
void scan_constants(CurvatureProfile& p, double scan_max) {
  const int n = 20000;
  double sup = 0.0, inf_c3 = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    double t = scan_max * double(i) / double(n);
    double at = p.a(t), bt = p.b(t);
    sup = std::max(sup, at);
    if (bt > 0.0) {
      sup = std::max(sup, p.b(t + 1.0) / bt);
      sup = std::max(sup, p.b(0.5 * t) / bt);
    }
    inf_c3 = std::min(inf_c3, bt * std::pow(1.0 + t, p.Qexp));
  }
  p.C2 = std::max(1.0, 1.05 * sup);
  p.C3 = (inf_c3 < 1e-12) ? 1.0 : 0.95 * inf_c3;
}

}  // namespace

CurvatureProfile build_example1(double phi, double eps, double r0,
                                double t_flat, double scan_max) {
  if (!(phi > 1.0)) throw std::invalid_argument("example1: need phi > 1");
  if (!(eps > 0.0 && eps < 2.0 * phi - 2.0))
    throw std::invalid_argument("example1: need 0 < eps < 2 phi - 2");
  if (!(r0 > 0.0)) throw std::invalid_argument("example1: need r0 > 0");

  CurvatureProfile p;
  p.family = "example1";
  p.par_phi = phi;
  p.par_eps = eps;
  p.par_r0 = r0;
  p.t_flat = t_flat;
  p.C1 = std::sqrt(phi * (phi - 1.0));
  p.C4 = 0.25 * eps;
  p.T1 = r0;
  p.Qexp = std::max(0.5, -phi + 2.0 + 0.5 * eps);

  double tf = std::min(t_flat, r0);
  p.a_bound = {p.C1, -1.0, 0.0, r0, tf};

  double bpow = phi - 2.0 - 0.5 * eps;
  p.b_bound = {1.0, bpow, 0.0, r0, tf};
  if (bpow < 0.0) {
    p.b_monotone = Monotone::decreasing;
    p.b_floor_is_a = true;         // keeps b >= a near the origin
  } else {
    p.b_monotone = Monotone::increasing;
    p.b_floor_const = p.a_bound.value(0.0);
  }

  scan_constants(p, scan_max);
  return p;
}

CurvatureProfile build_example2(double k, double eps, double c1,
                                double t_flat, double scan_max) {
  if (!(k > 0.0)) throw std::invalid_argument("example2: need k > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("example2: need eps > 0");
  if (!(c1 > 0.0)) throw std::invalid_argument("example2: need C1 > 0");

  CurvatureProfile p;
  p.family = "example2";
  p.par_k = k;
  p.par_eps = eps;
  p.t_flat = t_flat;
  p.C1 = c1;
  p.C4 = 0.25 * eps;
  p.T1 = c1 / k;
  p.Qexp = 0.5;

  p.a_bound = {k, 0.0, 0.0, 1.0, 1.0};

  /* Pick the branch start r0 so that the frozen argument stays past the
   * branch minimum (monotone increasing b) and the whole range stays >= k. */
  double bpow = -1.0 - 0.5 * eps;
  double t_min = (1.0 + 0.5 * eps) / k;
  double start = std::max({t_min, 2.0 * t_min - t_flat, t_flat, 1e-3});
  double r0 = start;
  while (branch_eval(1.0, bpow, k, 0.5 * (r0 + std::min(t_flat, r0))) < k) {
    r0 += 0.01;
    if (r0 > start + 1000.0)
      throw std::runtime_error("example2: no admissible branch start found");
  }
  p.par_r0 = r0;
  p.b_bound = {1.0, bpow, k, r0, std::min(t_flat, r0)};
  p.b_monotone = Monotone::increasing;

  scan_constants(p, scan_max);
  return p;
}

CurvatureProfile build_constant(double k, double c1, double c4,
                                double scan_max) {
  if (!(k >= 0.0)) throw std::invalid_argument("constant: need k >= 0");
  if (!(c1 > 0.0)) throw std::invalid_argument("constant: need C1 > 0");
  if (!(c4 > 0.0)) throw std::invalid_argument("constant: need C4 > 0");

  CurvatureProfile p;
  p.family = "constant";
  p.par_k = k;
  p.C1 = c1;
  p.C4 = c4;
  p.T1 = (k > 0.0) ? c1 / k : 0.0;
  p.Qexp = 0.5;
  p.a_bound = {k, 0.0, 0.0, 1.0, 1.0};
  p.b_bound = {k, 0.0, 0.0, 1.0, 1.0};
  p.b_monotone = Monotone::increasing;
  scan_constants(p, scan_max);
  return p;
}

WarpTable integrate_jacobi(const std::function<double(double)>& k,
                           double r_max, double step, int stride,
                           const std::string& label) {
  if (!(r_max > 0.0)) throw std::invalid_argument("jacobi: need r_max > 0");
  if (!(step > 0.0)) throw std::invalid_argument("jacobi: need step > 0");
  if (stride < 1) throw std::invalid_argument("jacobi: need stride >= 1");

  long long n = std::llround(r_max / step);
  if (n < 1) n = 1;
  n = ((n + stride - 1) / stride) * stride;
  double h = r_max / double(n);

  auto ksq = [&](double t) {
    double v = k(t);
    if (!(v >= 0.0))
      throw std::invalid_argument("jacobi: negative curvature bound at t=" +
                                  std::to_string(t));
    return v * v;
  };

  WarpTable tab;
  tab.step = h * stride;
  tab.source = label;
  tab.f.reserve(size_t(n / stride) + 1);
  tab.fp.reserve(size_t(n / stride) + 1);
  tab.fpp.reserve(size_t(n / stride) + 1);

  double f = 0.0, g = 1.0;
  tab.f.push_back(f);
  tab.fp.push_back(g);
  tab.fpp.push_back(ksq(0.0) * f);

  for (long long i = 0; i < n; ++i) {
    double t = h * double(i);
    double k0 = ksq(t), km = ksq(t + 0.5 * h), k1 = ksq(t + h);

    double a1f = g, a1g = k0 * f;
    double a2f = g + 0.5 * h * a1g, a2g = km * (f + 0.5 * h * a1f);
    double a3f = g + 0.5 * h * a2g, a3g = km * (f + 0.5 * h * a2f);
    double a4f = g + h * a3g, a4g = k1 * (f + h * a3f);

    f += h / 6.0 * (a1f + 2.0 * a2f + 2.0 * a3f + a4f);
    g += h / 6.0 * (a1g + 2.0 * a2g + 2.0 * a3g + a4g);

    if (!std::isfinite(f) || !std::isfinite(g))
      throw std::runtime_error("jacobi: solution blew up near t=" +
                               std::to_string(t + h));
    if ((i + 1) % stride == 0) {
      tab.f.push_back(f);
      tab.fp.push_back(g);
      tab.fpp.push_back(k1 * f);
    }
  }
  return tab;
}

namespace {

double hermite(double x0, double hstep, double y0, double d0, double y1,
               double d1, double r) {
  double t = (r - x0) / hstep;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * hstep * d0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * hstep * d1;
}

}  // namespace

double WarpTable::value(double r) const {
  if (r < 0.0 || r > r_max() * (1.0 + 1e-12))
    throw std::out_of_range("warp table: radius " + std::to_string(r) +
                            " outside [0, " + std::to_string(r_max()) + "]");
  size_t i = std::min(size_t(r / step), f.size() - 2);
  double x0 = step * double(i);
  return hermite(x0, step, f[i], fp[i], f[i + 1], fp[i + 1], r);
}

double WarpTable::derivative(double r) const {
  if (r < 0.0 || r > r_max() * (1.0 + 1e-12))
    throw std::out_of_range("warp table: radius " + std::to_string(r) +
                            " outside [0, " + std::to_string(r_max()) + "]");
  size_t i = std::min(size_t(r / step), f.size() - 2);
  double x0 = step * double(i);
  return hermite(x0, step, fp[i], fpp[i], fp[i + 1], fpp[i + 1], r);
}

ModelSurface build_surface(const CurvatureProfile& profile, char which_bound,
                           double r_max, double step, int stride) {
  std::function<double(double)> k;
  std::string label(1, which_bound);
  if (which_bound == 'a') {
    k = [profile](double t) { return profile.a(t); };
  } else if (which_bound == 'b') {
    k = [profile](double t) { return profile.b(t); };
  } else {
    throw std::invalid_argument("build_surface: bound must be 'a' or 'b'");
  }
  ModelSurface s;
  s.warp = integrate_jacobi(k, r_max, step, stride, label);
  s.r_max = r_max;
  s.k = k;
  return s;
}

double surface_curvature(const ModelSurface& surface, double r) {
  if (surface.k) {
    double v = surface.k(r);
    return -v * v;
  }
  double h = std::max(1e-4, surface.warp.step);
  double rr = std::clamp(r, h, surface.r_max - h);
  double fpp = (surface.f(rr + h) - 2.0 * surface.f(rr) + surface.f(rr - h)) /
               (h * h);
  return -fpp / surface.f(rr);
}

namespace {

struct Tracker {
  double margin = std::numeric_limits<double>::infinity();
  AssumptionWitness worst;
  void consider(double t, double lhs, double rhs, double m) {
    if (m < margin) {
      margin = m;
      worst = {t, lhs, rhs};
    }
  }
  bool pass() const { return margin >= 0.0; }
};

}  // namespace

AssumptionReport check_assumptions(const CurvatureProfile& p,
                                   const WarpTable& warp_a,
                                   const CheckOptions& opts) {
  if (warp_a.r_max() < opts.r_check * (1.0 - 1e-12))
    throw std::invalid_argument("check_assumptions: warp table shorter than r_check");
  if (opts.sample_count < 20)
    throw std::invalid_argument("check_assumptions: need at least 20 samples");

  AssumptionReport rep;
  rep.r_check = opts.r_check;
  rep.sample_count = opts.sample_count;
  double dt = opts.r_check / double(opts.sample_count);

  Tracker a1, a2, a3, a4, a5;
  bool a1_any = false;
  for (int s = 0; s <= opts.sample_count; ++s) {
    double t = dt * double(s);
    double at = p.a(t), bt = p.b(t);

    if (t >= p.T1 && t > 0.0) {
      a1_any = true;
      if (p.b_monotone == Monotone::decreasing) {
        double dev = std::abs(at * t - p.C1);
        a1.consider(t, at * t, p.C1, opts.rel_tol * p.C1 - dev);
      } else {
        a1.consider(t, at * t, p.C1, at * t - p.C1 * (1.0 - 1e-12));
      }
    }
    a2.consider(t, at, p.C2, p.C2 + opts.rel_tol - at);
    double b_shift = p.b(t + 1.0);
    a3.consider(t, b_shift, p.C2 * bt, p.C2 * bt * (1.0 + 1e-12) - b_shift);
    double b_half = p.b(0.5 * t);
    a4.consider(t, b_half, p.C2 * bt, p.C2 * bt * (1.0 + 1e-12) - b_half);
    double floor5 = p.C3 * std::pow(1.0 + t, -p.Qexp);
    a5.consider(t, bt, floor5, bt - floor5 * (1.0 - 1e-12));
  }

  auto push = [&rep](const std::string& name, const Tracker& tr,
                     bool pass_override, const std::string& note) {
    AssumptionVerdict v;
    v.name = name;
    v.pass = pass_override && tr.pass();
    v.worst = tr.worst;
    v.note = note;
    rep.items.push_back(v);
  };

  push("A1", a1, a1_any,
       a1_any ? (p.b_monotone == Monotone::decreasing ? "a = C1/t beyond T1"
                                                      : "a >= C1/t beyond T1")
              : "no sample beyond T1");
  push("A2", a2, true, "a bounded by C2");
  push("A3", a3, true, "unit shift of b bounded by C2 b");
  push("A4", a4, true, "halved argument of b bounded by C2 b");
  push("A5", a5, true, "b above C3 (1+t)^-Q");

  /* Tail limits: quotient must decay monotonically over the largest sampled
   * decade and end either below tail_abs or below tail_decay times its value
   * at the decade start. */
  auto tail_check = [&](const std::string& name,
                        const std::function<double(double)>& q) {
    AssumptionVerdict v;
    v.name = name;
    double t0 = opts.r_check / 10.0;
    int s_begin = int(std::ceil(t0 / dt));
    double q_begin = 0.0, q_prev = 0.0;
    bool mono = true, first = true;
    double worst_t = t0, worst_jump = -std::numeric_limits<double>::infinity();
    for (int s = s_begin; s <= opts.sample_count; ++s) {
      double t = dt * double(s);
      double qt = q(t);
      if (!std::isfinite(qt)) {
        v.pass = false;
        v.worst = {t, qt, 0.0};
        v.note = "quotient not finite";
        rep.items.push_back(v);
        return;
      }
      if (first) {
        q_begin = qt;
        first = false;
      } else if (qt > q_prev * (1.0 + 1e-9) + 1e-300) {
        mono = false;
        if (qt - q_prev > worst_jump) {
          worst_jump = qt - q_prev;
          worst_t = t;
        }
      }
      q_prev = qt;
    }
    double q_end = q_prev;
    bool small = q_end <= opts.tail_abs || q_end <= opts.tail_decay * q_begin;
    v.pass = mono && small;
    if (!mono)
      v.worst = {worst_t, q(worst_t), q(worst_t - dt)};
    else
      v.worst = {opts.r_check, q_end,
                 std::max(opts.tail_abs, opts.tail_decay * q_begin)};
    v.note = mono ? "decade decay" : "quotient not monotone on last decade";
    rep.items.push_back(v);
  };

  tail_check("A6", [&](double t) {
    double bt = p.b(t);
    if (bt <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(p.b_prime(t)) / (bt * bt);
  });
  tail_check("A7", [&](double t) {
    double fp = warp_a.derivative(t);
    if (fp <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::pow(t, 1.0 + p.C4) * p.b(t) / fp;
  });

  {
    AssumptionVerdict v;
    v.name = "Qrange";
    v.pass = p.Qexp > 0.0 && p.Qexp < 1.0;
    v.worst = {0.0, p.Qexp, 1.0};
    v.note = "decay exponent inside (0,1)";
    rep.items.push_back(v);
  }

  rep.all_pass = true;
  for (const auto& it : rep.items) rep.all_pass = rep.all_pass && it.pass;
  return rep;
}

}  // namespace mslab
