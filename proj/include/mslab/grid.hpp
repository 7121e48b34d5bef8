#pragma once

#include <vector>

#include "mslab/geometry.hpp"

namespace mslab {

/* Cell-centered polar grid on [r_inner, r_outer] x [0, 2pi); first radial
 * center sits at r_inner + dr/2.  r_inner = 0 is a disk; the inner face
 * then has zero metric length and carries no flux. */
struct PolarGrid {
  int nr = 0;
  int ntheta = 0;
  double r_inner = 0.0;
  double r_outer = 0.0;

  double dr() const { return (r_outer - r_inner) / nr; }
  double dtheta() const;
  double r_center(int i) const { return r_inner + (i + 0.5) * dr(); }
  double theta(int j) const { return j * dtheta(); }
  int idx(int i, int j) const { return i * ntheta + j; }
  int wrap(int j) const { return (j % ntheta + ntheta) % ntheta; }
  int cells() const { return nr * ntheta; }
};

PolarGrid make_grid(int nr, int ntheta, double r_outer, double r_inner = 0.0);

struct PolarField {
  PolarGrid grid;
  std::vector<double> v;          // nr * ntheta cell values
  std::vector<double> outer_bc;   // Dirichlet trace on the outer circle (or empty)
  std::vector<double> inner_bc;   // Dirichlet trace on the inner circle (annulus)

  double& at(int i, int j) { return v[grid.idx(i, j)]; }
  double at(int i, int j) const { return v[grid.idx(i, j)]; }
};

PolarField make_field(const PolarGrid& grid, double fill = 0.0);

/* Warp samples and cell measures cached on a grid. */
struct GridMetric {
  PolarGrid grid;
  std::vector<double> f_c, fp_c;  // warp and derivative at cell centers
  std::vector<double> f_face;     // warp at radial face radii, size nr+1
  std::vector<double> measure;    // f_c * dr * dtheta per ring
};

GridMetric make_metric(const PolarGrid& grid, const ModelSurface& surface);

/* Plain coordinate finite differences, central inside, second-order
 * one-sided at the radial ends, periodic in theta. */
PolarField fd_dr(const PolarField& u);
PolarField fd_drr(const PolarField& u);
PolarField fd_dtheta(const PolarField& u);
PolarField fd_dthetatheta(const PolarField& u);
PolarField fd_drtheta(const PolarField& u);

}  // namespace mslab
