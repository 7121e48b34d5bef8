#include "mslab/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace mslab {

double wrap_angle(double t) {
  double w = std::remainder(t, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w = std::numbers::pi;
  return w;
}

double crude_cone_data(double rho, double theta, double theta0, double slope) {
  const double d = std::abs(wrap_angle(theta - theta0));
  return std::min(1.0, std::max(2.0 - 2.0 * rho, slope * d));
}

namespace {

/* Kernel profile: 1 on [0,1], falls to 0 at 2 along a quintic, so the
 * mollifier weights are C^2 in the distance. */
double kernel_chi(double s) {
  s = std::abs(s);
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double x = s - 1.0;
  return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double halton(unsigned long long i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

MollifyResult mollify_ring_kernel(const PolarGrid& grid, const ModelSurface& surface,
                                  const std::function<double(double)>& b_of_r,
                                  const std::vector<double>& source_values) {
  const int nr = grid.nr, nt = grid.ntheta;
  if (static_cast<int>(source_values.size()) != nr * nt)
    throw std::invalid_argument("mollify: value array does not match the grid");
  const double dr = grid.dr(), dth = grid.dtheta();

  std::vector<double> f_c(nr), f_face(nr + 1);
  for (int i = 0; i < nr; ++i) {
    f_c[i] = surface.f(grid.r_center(i));
    if (!(f_c[i] > 0.0))
      throw std::runtime_error("mollify: warp not positive inside the grid");
  }
  for (int i = 0; i <= nr; ++i)
    f_face[i] = surface.f(std::min(grid.r_inner + i * dr, surface.r_max));

  const int n = nr * nt;
  std::vector<double> dist(n, 0.0);
  std::vector<int> stamp(n, -1), done(n, -1);
  std::vector<double> num(n, 0.0), den(nr, 0.0);
  std::vector<char> touched(n, 0), nonunit(nt, 0);
  std::vector<double> ext(2 * nt, 0.0);
  std::vector<char> ext_nu(2 * nt, 0);
  std::vector<std::vector<std::pair<int, double>>> wlist(nr);

  double min_kernel_cells = std::numeric_limits<double>::infinity();

  for (int i0 = 0; i0 < nr; ++i0) {
    const double b0 = b_of_r(grid.r_center(i0));
    if (!(b0 > 0.0))
      throw std::runtime_error("mollify: curvature lower bound must be positive at r=" +
                               std::to_string(grid.r_center(i0)));
    const double cap = 2.0 / b0;
    min_kernel_cells = std::min(min_kernel_cells, cap / dr);

    // shortest grid paths from (i0, 0), truncated at the kernel support
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> heap;
    const int src = i0 * nt;
    dist[src] = 0.0;
    stamp[src] = i0;
    heap.push({0.0, src});
    while (!heap.empty()) {
      const auto [d0, v] = heap.top();
      heap.pop();
      if (d0 > cap) break;
      if (done[v] == i0) continue;
      done[v] = i0;
      const int vi = v / nt, vc = v % nt;
      const double chi = kernel_chi(b0 * d0);
      if (chi > 0.0) wlist[vi].push_back({vc, chi});
      for (int di = -1; di <= 1; ++di) {
        const int ni = vi + di;
        if (ni < 0 || ni >= nr) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          if (di == 0 && dc == 0) continue;
          double len;
          if (di == 0) {
            len = f_c[vi] * dth;
          } else if (dc == 0) {
            len = dr;
          } else {
            const double fm = f_face[vi + (di > 0 ? 1 : 0)];
            len = std::sqrt(dr * dr + fm * fm * dth * dth);
          }
          const double nd = d0 + len;
          if (nd > cap) continue;
          const int nn = ni * nt + grid.wrap(vc + dc);
          if (stamp[nn] != i0 || dist[nn] > nd) {
            stamp[nn] = i0;
            dist[nn] = nd;
            heap.push({nd, nn});
          }
        }
      }
    }

    const double m0 = f_c[i0] * dr * dth;
    bool any_nonunit = false;
    for (int j = 0; j < nt; ++j) {
      nonunit[j] = source_values[static_cast<size_t>(i0) * nt + j] != 1.0;
      any_nonunit = any_nonunit || nonunit[j];
    }
    for (int j = 0; j < nt; ++j) {
      ext[j] = ext[j + nt] = source_values[static_cast<size_t>(i0) * nt + j];
      ext_nu[j] = ext_nu[j + nt] = nonunit[j];
    }
    for (int i = 0; i < nr; ++i) {
      auto& lst = wlist[i];
      if (lst.empty()) continue;
      double* out = num.data() + static_cast<size_t>(i) * nt;
      char* trow = touched.data() + static_cast<size_t>(i) * nt;
      for (const auto& [c, chi] : lst) {
        const double w = chi * m0;
        den[i] += w;
        const double* row = ext.data() + (nt - c);
        for (int j = 0; j < nt; ++j) out[j] += w * row[j];
        if (any_nonunit) {
          const char* nrow = ext_nu.data() + (nt - c);
          for (int j = 0; j < nt; ++j) trow[j] = trow[j] | nrow[j];
        }
      }
      lst.clear();
    }
  }

  MollifyResult res;
  res.smoothed = make_field(grid);
  for (int i = 0; i < nr; ++i) {
    if (!(den[i] > 0.0))
      throw std::runtime_error("mollify: empty kernel on a ring");
    for (int j = 0; j < nt; ++j)
      res.smoothed.v[static_cast<size_t>(i) * nt + j] =
          num[static_cast<size_t>(i) * nt + j] / den[i];
  }
  res.touched_by_nonunit = std::move(touched);
  res.min_kernel_radius_cells = min_kernel_cells;
  return res;
}

ShapeFeasibility barrier_shape(const CurvatureProfile& profile,
                               const OperatorSpec& op) {
  ShapeFeasibility s;
  s.phi1 = phi1_of_C1(profile.C1);
  s.delta1 = std::min(profile.C4, (s.phi1 - 1.0) / (s.phi1 + 1.0));
  const double b0p = std::max(0.0, op.B0);
  const double bbar = std::max(0.5, op.B0);
  s.solvable = b0p < (s.phi1 - 1.0) / 2.0;
  if (!s.solvable) {
    s.note = "operator drift bound reaches the geometric budget (B0 >= (phi1-1)/2)";
    return s;
  }
  auto lam = [&s](double d) { return (1.0 + d) / ((1.0 - d) * s.phi1); };
  auto bound = [&](double d) {
    const double l = lam(d);
    return d + 2.0 * l * (b0p + bbar * d) /
                   ((1.0 - l) * (1.0 - d) * (1.0 - d) * (1.0 - d));
  };
  const double cap = 0.5 * std::min({s.delta1, s.phi1 - 1.0, profile.C4 / 2.0});
  if (bound(cap) <= 0.999) {
    s.delta = cap;
  } else {
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (bound(mid) <= 0.999) lo = mid;
      else hi = mid;
    }
    s.delta = lo;
  }
  s.lambda = lam(s.delta);
  s.budget = bound(s.delta);
  if (!(s.delta > 0.0)) {
    s.solvable = false;
    s.note = "no positive smallness parameter satisfies the budget";
  }
  return s;
}

namespace {

struct HFields {
  PolarField hr, ht, hrr, hrt, htt;
};

}  // namespace

BarrierCertificate build_barrier(const BarrierInputs& in) {
  if (!in.profile || !in.surface)
    throw std::invalid_argument("build_barrier: profile and surface are required");
  const PolarGrid& grid = in.grid;
  if (grid.r_inner != 0.0)
    throw std::invalid_argument("build_barrier: the certification grid must be a disk");
  if (!(in.slope > 0.0) || 3.0 / in.slope > std::numbers::pi)
    throw std::invalid_argument("build_barrier: slope must keep the tripled cone proper");
  if (in.cert_samples < 100)
    throw std::invalid_argument("build_barrier: need at least 100 samples");
  const int nr = grid.nr, nt = grid.ntheta;
  const double dr = grid.dr();

  BarrierCertificate cert;
  cert.amp = in.amp;
  const ShapeFeasibility shape = barrier_shape(*in.profile, in.op);
  cert.phi1 = shape.phi1;
  cert.delta1 = shape.delta1;
  cert.delta = shape.delta;
  cert.lambda = shape.lambda;
  cert.delta_budget = shape.budget;
  if (!shape.solvable) {
    cert.pass = false;
    cert.note = shape.note;
    return cert;
  }
  const double delta = shape.delta;
  const double phi1 = shape.phi1;

  // mollified angular profile
  std::vector<double> crude(static_cast<size_t>(grid.cells()));
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      crude[grid.idx(i, j)] =
          crude_cone_data(grid.r_center(i), grid.theta(j), in.theta0, in.slope);
  const CurvatureProfile& prof = *in.profile;
  cert.moll = mollify_ring_kernel(grid, *in.surface,
                                  [&prof](double r) { return prof.b(r); }, crude);
  cert.h = cert.moll.smoothed;

  // contamination radius outside the doubled cone
  const double cone2 = 2.0 / in.slope, cone3 = 3.0 / in.slope;
  double r1 = 0.0;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      if (cert.moll.touched_by_nonunit[grid.idx(i, j)] &&
          std::abs(wrap_angle(grid.theta(j) - in.theta0)) > cone2 + 1e-12)
        r1 = std::max(r1, grid.r_center(i) + 0.5 * dr);
  cert.r1_emp = r1;

  // warp samples
  std::vector<double> f_c(nr), fp_c(nr);
  for (int i = 0; i < nr; ++i) {
    f_c[i] = in.surface->f(grid.r_center(i));
    fp_c[i] = in.surface->fp(grid.r_center(i));
  }

  // ringwise growth quantity r f'/f and the radius beyond which it clears
  // both radial gates
  const double growth_threshold = std::max(1.0 + delta, (1.0 - delta) * phi1);
  std::vector<double> growth(nr);
  for (int i = 0; i < nr; ++i) growth[i] = grid.r_center(i) * fp_c[i] / f_c[i];
  int first_ok = nr;
  for (int i = nr - 1; i >= 0; --i) {
    if (growth[i] >= growth_threshold * (1.0 - 1e-12)) first_ok = i;
    else break;
  }
  if (first_ok == nr) {
    cert.pass = false;
    cert.note = "warp growth gate never holds on this grid";
    cert.r2 = std::numeric_limits<double>::infinity();
    return cert;
  }
  cert.r2 = grid.r_center(first_ok);
  cert.r3 = std::max({cert.r1_emp, cert.r2, prof.T1});

  // finite differences of the mollified profile
  HFields hf{fd_dr(cert.h), fd_dtheta(cert.h), fd_drr(cert.h), fd_drtheta(cert.h),
             fd_dthetatheta(cert.h)};

  auto in_cone3 = [&](int j) {
    return std::abs(wrap_angle(grid.theta(j) - in.theta0)) <= cone3 + 1e-12;
  };
  const int ilo = 2, ihi = nr - 4;  // rows with interior-quality stencils

  // empirical constant c5: |grad h| and Hessian of h against the curvature scale
  double c5 = 0.0;
  for (int i = ilo; i <= ihi; ++i) {
    const double r = grid.r_center(i);
    if (r < cert.r1_emp) continue;
    const double f = f_c[i], fp = fp_c[i], b = prof.b(r);
    for (int j = 0; j < nt; ++j) {
      if (!in_cone3(j)) continue;
      const int c = grid.idx(i, j);
      const double gh = std::hypot(hf.hr.v[c], hf.ht.v[c] / f);
      const double Hrr = hf.hrr.v[c];
      const double Hrt = (hf.hrt.v[c] - (fp / f) * hf.ht.v[c]) / f;
      const double Htt = hf.htt.v[c] / (f * f) + (fp / f) * hf.hr.v[c];
      const double hnorm = std::sqrt(Hrr * Hrr + 2.0 * Hrt * Hrt + Htt * Htt);
      c5 = std::max({c5, gh * f, b > 0.0 ? hnorm * f / b : 0.0});
    }
  }
  cert.c5_emp = c5;

  // ring maxima of the two third-derivative ratios driving c6, then suffix
  // maxima so each candidate radius reads its own supremum
  std::vector<double> p_hh(static_cast<size_t>(grid.cells()), 0.0);
  std::vector<double> p_hv(static_cast<size_t>(grid.cells()), 0.0);
  for (int i = 0; i < nr; ++i) {
    const double r = grid.r_center(i), f = f_c[i];
    const double vr_unit = -delta * std::pow(r, -delta - 1.0);
    for (int j = 0; j < nt; ++j) {
      const int c = grid.idx(i, j);
      const double gr = hf.hr.v[c], gt = hf.ht.v[c] / f;
      p_hh[c] = gr * gr + gt * gt;
      p_hv[c] = gr * vr_unit;
    }
  }
  PolarField phh_field = make_field(grid), phv_field = make_field(grid);
  phh_field.v = p_hh;
  phv_field.v = p_hv;
  PolarField phh_r = fd_dr(phh_field), phh_t = fd_dtheta(phh_field);
  PolarField phv_r = fd_dr(phv_field), phv_t = fd_dtheta(phv_field);
  std::vector<double> c6_ring(nr, 0.0);
  for (int i = ilo; i <= ihi; ++i) {
    const double r = grid.r_center(i), f = f_c[i], fp = fp_c[i];
    if (!(fp > 0.0)) continue;
    const double scale_ref = std::pow(r, -prof.C4 - 2.0) * fp;
    double worst = 0.0;
    for (int j = 0; j < nt; ++j) {
      if (!in_cone3(j)) continue;
      const int c = grid.idx(i, j);
      const double g3h = std::hypot(phh_r.v[c], phh_t.v[c] / f);
      const double g3v = std::hypot(phv_r.v[c], phv_t.v[c] / f);
      worst = std::max(worst, std::max(g3h, g3v) * f / scale_ref);
    }
    c6_ring[i] = worst;
  }
  std::vector<double> c6_suffix(nr + 1, 0.0);
  for (int i = nr - 1; i >= 0; --i)
    c6_suffix[i] = std::max(c6_suffix[i + 1], c6_ring[i]);

  // candidate inner radii: powers of two from the ladder up to the cap
  const double cap_r4 = in.r4_cap > 0.0 ? in.r4_cap : grid.r_outer / 2.0;
  const double r_hi = grid.r_center(ihi);
  double start = 1.0;
  while (start < std::max(cert.r3, 1.0)) start *= 2.0;
  if (start > cap_r4 || start >= r_hi) {
    cert.pass = false;
    cert.note = "no admissible inner radius below the cap";
    cert.r4 = start;
    return cert;
  }

  for (double cand = start; cand <= cap_r4 && cand < r_hi; cand *= 2.0) {
    cert.r4 = cand;
    cert.direct_gates.clear();
    cert.asymptotic_gates.clear();
    const double scale = in.amp * std::pow(cand, delta);

    // ringwise gates on rho >= cand
    double min_growth = std::numeric_limits<double>::infinity();
    double min_growth_r = 0.0;
    for (int i = 0; i < nr; ++i) {
      if (grid.r_center(i) < cand) continue;
      if (growth[i] < min_growth) {
        min_growth = growth[i];
        min_growth_r = grid.r_center(i);
      }
    }
    GateResult g1{"radial_superharmonic", min_growth > 1.0 + delta,
                  min_growth - (1.0 + delta), 0.0, min_growth_r, 0.0};
    GateResult g2{"warp_growth", min_growth >= (1.0 - delta) * phi1 * (1.0 - 1e-12),
                  min_growth - (1.0 - delta) * phi1, 0.0, min_growth_r, 0.0};
    const double drift = (delta + 1.0) / min_growth;
    GateResult g3{"drift_within_lambda", drift <= shape.lambda * (1.0 + 1e-12),
                  shape.lambda - drift, shape.lambda, min_growth_r, 0.0};

    // sampled gates on the barrier itself
    double worst_lap = -std::numeric_limits<double>::infinity(), worst_lap_r = 0.0,
           worst_lap_t = 0.0;
    double min_grad = std::numeric_limits<double>::infinity(), min_grad_r = 0.0,
           min_grad_t = 0.0;
    double ratio_sup = -std::numeric_limits<double>::infinity(), ratio_r = 0.0,
           ratio_t = 0.0;
    double sup_piece_h = 0.0, sup_piece_v = 0.0, sup_grad_dom = 0.0;
    int valid = 0;
    unsigned long long idx = in.seed == 0 ? 1 : in.seed;
    unsigned long long tries = 0;
    const unsigned long long max_tries =
        static_cast<unsigned long long>(in.cert_samples) * 1000ULL;
    while (valid < in.cert_samples && tries < max_tries) {
      ++tries;
      const double u1 = halton(idx, 2), u2 = halton(idx, 3);
      ++idx;
      const double rho = cand + u1 * (r_hi - cand);
      const double theta = in.theta0 + (2.0 * u2 - 1.0) * cone3;
      const int i = static_cast<int>((rho - grid.r_inner) / dr);
      const int j = grid.wrap(static_cast<int>(std::llround(theta / grid.dtheta())));
      if (i < ilo || i > ihi) continue;
      if (grid.r_center(i) < cand) continue;
      if (!in_cone3(j)) continue;
      ++valid;

      const double r = grid.r_center(i), f = f_c[i], fp = fp_c[i];
      const int c = grid.idx(i, j);
      const double vr = -delta * scale * std::pow(r, -delta - 1.0);
      const double vrr = delta * (delta + 1.0) * scale * std::pow(r, -delta - 2.0);
      const double ur = vr + in.amp * hf.hr.v[c];
      const double gt = in.amp * hf.ht.v[c] / f;
      const double q = ur * ur + gt * gt;
      const double lap_v = vrr + (fp / f) * vr;
      const double lap_h =
          hf.hrr.v[c] + (fp / f) * hf.hr.v[c] + hf.htt.v[c] / (f * f);
      const double lap = lap_v + in.amp * lap_h;
      if (lap > worst_lap) {
        worst_lap = lap;
        worst_lap_r = r;
        worst_lap_t = grid.theta(j);
      }
      const double gnorm = std::sqrt(q);
      if (gnorm < min_grad) {
        min_grad = gnorm;
        min_grad_r = r;
        min_grad_t = grid.theta(j);
      }
      const double Hrr_h = hf.hrr.v[c];
      const double Hrt_h = (hf.hrt.v[c] - (fp / f) * hf.ht.v[c]) / f;
      const double Htt_h = hf.htt.v[c] / (f * f) + (fp / f) * hf.hr.v[c];
      const double Hgg_v = vrr * ur * ur + (fp / f) * vr * gt * gt;
      const double Hgg_h =
          in.amp * (Hrr_h * ur * ur + 2.0 * Hrt_h * ur * gt + Htt_h * gt * gt);
      double ratio, piece_h = 0.0, piece_v = 0.0;
      if (!(q > 0.0) || !(lap < 0.0)) {
        ratio = std::numeric_limits<double>::infinity();
      } else {
        const double bq = in.op.B(q);
        ratio = 2.0 * bq * (Hgg_v + Hgg_h) / (-lap);
        piece_h = 2.0 * bq * Hgg_h / (-lap);
        piece_v = 2.0 * bq * Hgg_v / (-lap);
      }
      if (ratio > ratio_sup) {
        ratio_sup = ratio;
        ratio_r = r;
        ratio_t = grid.theta(j);
      }
      sup_piece_h = std::max(sup_piece_h, std::abs(piece_h));
      sup_piece_v = std::max(sup_piece_v, std::abs(piece_v));
      const double gh = std::hypot(hf.hr.v[c], hf.ht.v[c] / f);
      const double grad_v_unit = delta * std::pow(cand, delta) * std::pow(r, -delta - 1.0);
      sup_grad_dom = std::max(sup_grad_dom, gh / (delta * grad_v_unit));
    }
    if (valid < in.cert_samples) {
      cert.pass = false;
      cert.note = "could not place the requested number of samples";
      return cert;
    }

    GateResult g4{"barrier_superharmonic", worst_lap < 0.0, -worst_lap, 0.0,
                  worst_lap_r, worst_lap_t};
    GateResult g5{"barrier_gradient", min_grad > 0.0, min_grad, 0.0, min_grad_r,
                  min_grad_t};
    GateResult g6{"perturbation_ratio", ratio_sup < 1.0, 1.0 - ratio_sup, 1.0,
                  ratio_r, ratio_t};
    cert.direct_gates = {g1, g2, g3, g4, g5, g6};
    cert.ratio_sup = ratio_sup;
    cert.samples_checked = valid;

    const int first_ring =
        std::min(nr - 1, static_cast<int>((cand - grid.r_inner) / dr) + 1);
    cert.c6_emp = c6_suffix[std::max(0, first_ring)];

    GateResult m1{"gradient_domination", sup_grad_dom <= 1.0, 1.0 - sup_grad_dom,
                  1.0, 0.0, 0.0};
    GateResult m2{"angular_perturbation_budget", sup_piece_h <= delta,
                  delta - sup_piece_h, delta, 0.0, 0.0};
    GateResult m3{"radial_perturbation_budget",
                  sup_piece_v <= shape.budget - delta,
                  (shape.budget - delta) - sup_piece_v, shape.budget - delta, 0.0,
                  0.0};
    cert.asymptotic_gates = {m1, m2, m3};

    // assemble the barrier field for this candidate
    cert.phi = make_field(grid);
    for (int i = 0; i < nr; ++i) {
      const double rad = scale * std::pow(grid.r_center(i), -delta);
      for (int j = 0; j < nt; ++j)
        cert.phi.v[grid.idx(i, j)] = rad + in.amp * cert.h.v[grid.idx(i, j)];
    }

    bool ok = true;
    for (const GateResult& g : cert.direct_gates) ok = ok && g.pass;
    if (in.strict_asymptotic_gates)
      for (const GateResult& g : cert.asymptotic_gates) ok = ok && g.pass;
    if (ok) {
      cert.pass = true;
      return cert;
    }
  }
  cert.pass = false;
  if (cert.note.empty())
    cert.note = "no candidate inner radius certified on this grid";
  return cert;
}

}  // namespace mslab
