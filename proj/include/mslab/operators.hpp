#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace mslab {

/* Divergence-form operator div A(|grad u|^2) grad u with structure data:
 * growth constants A0, p bounding A, the logarithmic derivative B = A'/A
 * with its upper constant B0, and the energy density Phi, 2 Phi'(s) = A(s).
 * B0 keeps the sign the defining bound carries (0 for the minimal graph,
 * (p-2)/2 for the p-Laplacian). */
struct OperatorSpec {
  std::string name;
  std::function<double(double)> A;
  std::function<double(double)> B;
  std::function<double(double)> Phi;
  double A0 = 1.0;
  double p = 2.0;
  double B0 = 0.0;
};

OperatorSpec minimal_graph_operator();
OperatorSpec p_laplace_operator(double p);

/* A(t) = coeff * t^e1 * (1+t)^e2 with analytic B and tabulated energy. */
OperatorSpec custom_operator(double coeff, double e1, double e2);

struct GrowthViolation {
  std::string check;
  double t = 0, lhs = 0, rhs = 0;
};

struct GrowthReport {
  bool pass = false;
  std::vector<GrowthViolation> violations;
};

/* Samples the structure conditions on a log lattice: positivity of A, the
 * A-growth bound, the two-sided B bound, strict monotonicity of t A(t^2),
 * the zero limit of the flux modulus, and consistency of Phi with A. */
GrowthReport validate_growth(const OperatorSpec& spec);

std::array<double, 2> flux(const OperatorSpec& spec, std::array<double, 2> g);

}  // namespace mslab
