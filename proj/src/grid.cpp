#include "mslab/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mslab {

double PolarGrid::dtheta() const { return 2.0 * std::numbers::pi / ntheta; }

PolarGrid make_grid(int nr, int ntheta, double r_outer, double r_inner) {
  if (nr < 2) throw std::invalid_argument("make_grid: nr must be at least 2");
  if (ntheta < 4 || ntheta % 2 != 0)
    throw std::invalid_argument("make_grid: ntheta must be even and at least 4");
  if (!(r_outer > r_inner) || r_inner < 0.0)
    throw std::invalid_argument("make_grid: need 0 <= r_inner < r_outer");
  return PolarGrid{nr, ntheta, r_inner, r_outer};
}

PolarField make_field(const PolarGrid& grid, double fill) {
  PolarField u;
  u.grid = grid;
  u.v.assign(static_cast<size_t>(grid.cells()), fill);
  return u;
}

GridMetric make_metric(const PolarGrid& grid, const ModelSurface& surface) {
  if (grid.r_outer > surface.r_max * (1.0 + 1e-12))
    throw std::invalid_argument("make_metric: grid extends past the warp table");
  GridMetric m;
  m.grid = grid;
  m.f_c.resize(grid.nr);
  m.fp_c.resize(grid.nr);
  m.f_face.resize(grid.nr + 1);
  m.measure.resize(grid.nr);
  const double dr = grid.dr(), dth = grid.dtheta();
  for (int i = 0; i < grid.nr; ++i) {
    const double r = grid.r_center(i);
    m.f_c[i] = surface.f(r);
    m.fp_c[i] = surface.fp(r);
    if (!(m.f_c[i] > 0.0))
      throw std::runtime_error("make_metric: warp not positive at r=" + std::to_string(r));
    m.measure[i] = m.f_c[i] * dr * dth;
  }
  for (int i = 0; i <= grid.nr; ++i) {
    const double r = std::min(grid.r_inner + i * dr, surface.r_max);
    m.f_face[i] = surface.f(r);
  }
  return m;
}

namespace {

/* d/dr at center i from the ring values; second-order one-sided at ends. */
inline double dr_at(const PolarField& u, int i, int j, double dr) {
  const int nr = u.grid.nr;
  if (i > 0 && i < nr - 1) return (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * dr);
  if (i == 0) return (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * dr);
  return (3.0 * u.at(nr - 1, j) - 4.0 * u.at(nr - 2, j) + u.at(nr - 3, j)) / (2.0 * dr);
}

inline double drr_at(const PolarField& u, int i, int j, double dr) {
  const int nr = u.grid.nr;
  const double h2 = dr * dr;
  if (i > 0 && i < nr - 1)
    return (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / h2;
  if (i == 0)
    return (2.0 * u.at(0, j) - 5.0 * u.at(1, j) + 4.0 * u.at(2, j) - u.at(3, j)) / h2;
  return (2.0 * u.at(nr - 1, j) - 5.0 * u.at(nr - 2, j) + 4.0 * u.at(nr - 3, j) -
          u.at(nr - 4, j)) / h2;
}

}  // namespace

PolarField fd_dr(const PolarField& u) {
  if (u.grid.nr < 4) throw std::invalid_argument("fd_dr: need nr >= 4");
  PolarField out = make_field(u.grid);
  const double dr = u.grid.dr();
  for (int i = 0; i < u.grid.nr; ++i)
    for (int j = 0; j < u.grid.ntheta; ++j) out.at(i, j) = dr_at(u, i, j, dr);
  return out;
}

PolarField fd_drr(const PolarField& u) {
  if (u.grid.nr < 4) throw std::invalid_argument("fd_drr: need nr >= 4");
  PolarField out = make_field(u.grid);
  const double dr = u.grid.dr();
  for (int i = 0; i < u.grid.nr; ++i)
    for (int j = 0; j < u.grid.ntheta; ++j) out.at(i, j) = drr_at(u, i, j, dr);
  return out;
}

PolarField fd_dtheta(const PolarField& u) {
  PolarField out = make_field(u.grid);
  const double dth = u.grid.dtheta();
  for (int i = 0; i < u.grid.nr; ++i)
    for (int j = 0; j < u.grid.ntheta; ++j)
      out.at(i, j) =
          (u.at(i, u.grid.wrap(j + 1)) - u.at(i, u.grid.wrap(j - 1))) / (2.0 * dth);
  return out;
}

PolarField fd_dthetatheta(const PolarField& u) {
  PolarField out = make_field(u.grid);
  const double dth = u.grid.dtheta();
  for (int i = 0; i < u.grid.nr; ++i)
    for (int j = 0; j < u.grid.ntheta; ++j)
      out.at(i, j) = (u.at(i, u.grid.wrap(j + 1)) - 2.0 * u.at(i, j) +
                      u.at(i, u.grid.wrap(j - 1))) / (dth * dth);
  return out;
}

PolarField fd_drtheta(const PolarField& u) {
  PolarField dth = fd_dtheta(u);
  return fd_dr(dth);
}

}  // namespace mslab
