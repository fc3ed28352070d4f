#pragma once

#include "jhol/cr_solver.hpp"
#include "jhol/forms.hpp"

#include <vector>

namespace jhol {

// Almost complex structure J = -Omega(n) for the unit self-dual form
// n = a w0 + b phi0 + c psi0 (w0 = dx12 + dx34, phi0 = dx13 - dx24,
// psi0 = dx14 + dx23), with (a, b, c) the inverse stereographic image of
// m = eps (Im h, Re h). Re[h dw0 ^ dw1] is then closed and J-anti-invariant,
// J = J0 + O(eps), and J = J0 wherever h = 0.
AlmostComplexStructure self_dual_structure(double eps, const ComplexExpr& h, const Box& box = {});

// J = (I + P) J0 (I + P)^{-1} with P = (eps / 2) J0 E_-, where E_- is the
// J0-antilinear part of E. A complex structure with J = J0 + eps E_- + O(eps^2).
AlmostComplexStructure perturbed_structure(double eps, const std::array<FieldExpr, 16>& E, const Box& box = {});

// Spanning set of Lambda_J^-: the anti-invariant parts of w0, phi0, psi0.
std::array<TwoForm, 3> anti_invariant_spanning_set(const AlmostComplexStructure& J);

struct KernelFit {
  int family_size = 0;
  int kernel_dimension = 0;        // generalized singular values below threshold
  std::vector<double> singular_values;  // ascending, |d alpha| / |alpha| on samples
  TwoForm alpha;                   // best closed member, max |coefficient| = 1 on samples
  double closedness = 0.0;         // max |d alpha| on the samples, same scale
};

// Least-squares search for closed forms sum_k c_k m_k(x) beta_l(x) with m_k
// the monomials of degree <= degree and beta_l the spanning set above.
KernelFit closed_anti_invariant_fit(const AlmostComplexStructure& J, int degree, int samples = 160,
                                    std::uint64_t seed = 0, double threshold = 1e-9);

// v = exp(psi) prod (z - z_j)^{m_j} with psi = a conj(z) + b z conj(z) + c z,
// solving dbar v + C1 v + C2 conj(v) = 0 for a random C2 = c0 + c1 z and
// C1 = -dbar psi - C2 conj(v) / v. Zeros lie in |z| < 0.3 rho, at least
// 0.1 rho apart.
struct ManufacturedCR {
  PlanarField v;
  CRSystem system;
  std::vector<std::pair<cplx, int>> zeros;
  std::function<cplx(cplx)> exact;  // v off the grid
};
ManufacturedCR manufactured_cr(std::uint64_t seed, const PolarGrid& grid = {1.0, 64, 128});

} // namespace jhol
