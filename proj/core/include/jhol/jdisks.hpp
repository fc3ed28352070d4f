#pragma once

#include "jhol/cr_solver.hpp"
#include "jhol/forms.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace jhol {

// Point of R^4 as a pair of complex coordinates w0 = x1 + i x2, w1 = x3 + i x4.
Vec4 to_real(cplx w0, cplx w1);
std::array<cplx, 2> to_complex(const Vec4& x);
Point4 to_point(const Vec4& x);

// Frame A = [v, J v, t, J t] with J(x) A = A J0, v the unit real vector of
// kappa and t the normalized part of `transverse` orthogonal to span{v, J v}.
// Without `transverse`, t is the coordinate axis with the largest such part.
Mat4 adapted_frame(const Mat4& Jx, const std::array<cplx, 2>& kappa, const std::optional<Vec4>& transverse = {});

struct DiskOptions {
  PolarGrid grid{1.0, 64, 128};  // radius taken from the requested rho
  double tol = 1e-8;
  int max_iterations = 50;
  int max_halvings = 8;
  double accept = 1e-6;           // residual accepted when tol is not reached
  std::optional<Vec4> transverse;
};

// J-holomorphic disk u : B_rho -> R^4, sampled on a polar grid as two complex
// coordinate fields.
struct Disk {
  PlanarField u0;
  PlanarField u1;
  Point4 center{};
  std::array<cplx, 2> kappa{};
  Mat4 frame = Mat4::Identity();
  double rho = 0.0;
  double residual = 0.0;  // |u_s + J(u) u_t|_inf / |Du|_inf on the grid
  int iterations = 0;
  int halvings = 0;
  double injectivity = 0.0;  // min |u(p) - u(q)| / |p - q| over a sample

  const PolarGrid& grid() const { return u0.grid(); }
  Vec4 point(cplx zeta) const;
  Vec4 at(int j, int k) const;
};

// Values and first derivatives of a disk at its grid points (ring-major).
struct DiskJet {
  std::vector<Vec4> p, us, ut;
};
DiskJet disk_jet(const Disk& d);

double disk_residual(const AlmostComplexStructure& J, const Disk& d);

// Solves u_s + J(u) u_t = 0 with u(0) = x and u'(0) in the J(x)-complex line
// of kappa, as a fixed point u = flat + T(-E(u) u_t / 2) in the adapted frame.
// Halves rho when the iteration fails; throws NumericalError after
// max_halvings, ValidationError on bad input.
Disk solve_disk(const AlmostComplexStructure& J, const Point4& x, const std::array<cplx, 2>& kappa, double rho,
                const DiskOptions& opt = {});

struct FamilyOptions {
  int n_w = 17;
  DiskOptions disk{};
};

// Q(xi, w): for each w of a square grid over [-rho, rho]^2 the disk through
// origin + A (0, w) in the J-complex line of A e1, all in the frame A built at
// the origin from kappa.
struct FibreFamily {
  Point4 origin{};
  Mat4 frame = Mat4::Identity();
  double rho = 0.0;  // disk radius and w half-width
  int n_w = 0;
  std::vector<Disk> disks;  // index a * n_w + b for w = w_node(a) + i w_node(b)

  double z_closeness = 0.0;      // max |A^{-1}(Q - origin) - (xi, w)| / (rho |xi|)
  double min_jacobian = 0.0;     // min det DQ / det A over the sample
  double max_jacobian = 0.0;
  double continuity = 0.0;       // max sup distance of adjacent disks / grid step
  double max_residual = 0.0;

  double w_node(int a) const;
  double w_step() const { return 2.0 * rho / (n_w - 1); }
  Vec4 eval(cplx xi, cplx w) const;
  // Columns d/d(Re xi), d/d(Im xi), d/d(Re w), d/d(Im w).
  Mat4 jacobian(cplx xi, cplx w) const;
  // (xi, w) with Q(xi, w) = p by Newton from the given start.
  std::pair<cplx, cplx> invert(const Vec4& p, cplx xi0, cplx w0, double* residual = nullptr) const;

  struct Cache;
  std::shared_ptr<const Cache> cache;
};

FibreFamily fibre_family(const AlmostComplexStructure& J, const Point4& origin, const std::array<cplx, 2>& kappa,
                         double rho, const FamilyOptions& opt = {});

// Psi(xi2, zeta) = Q(xi2 + tau(zeta), w(zeta)) where Q(tau, w) = u(zeta) for the
// central disk u. Along xi2 = 0 the pulled-back structure is J0.
struct NormalizedChart {
  std::shared_ptr<const FibreFamily> family;
  Disk disk;
  PlanarField tau;
  PlanarField w;          // the reparametrization g2
  double transversality_deg = 0.0;
  double inversion_residual = 0.0;
  double max_b = 0.0;       // off-diagonal blocks of the pulled-back J along the disk
  double max_a_err = 0.0;   // fibre block minus J0
  double max_a2_err = 0.0;  // disk block minus J0

  Vec4 psi(cplx xi2, cplx zeta) const;
  // Columns d/d(Re xi2), d/d(Im xi2), d/d(Re zeta), d/d(Im zeta) at xi2 = 0 and
  // grid point (j, k) of the central disk.
  Mat4 frame_on_disk(int j, int k) const;
  std::vector<Mat4> frames;  // frame_on_disk for every grid point
};

NormalizedChart normalize_along_disk(const AlmostComplexStructure& J, const Disk& disk,
                                     std::shared_ptr<const FibreFamily> family, double min_angle_deg = 10.0);

// The real 3-form with coefficients (123, 124, 134, 234) evaluated on X, Y, Z.
double eval_three_form(const std::array<double, 4>& c, const Vec4& X, const Vec4& Y, const Vec4& Z);

struct TrivializeOptions {
  double theorem_tol = 1e-3;
  GridSpec closedness_grid{7, 200, 0};
  double closedness_tol = 1e-9;
  double zero_tol = 1e-8;
  CarlemanOptions carleman{};
};

// alpha = f phi + g J phi along a J-holomorphic disk with phi = Re(Phi Xi0),
// Xi0 = phi0 - i J phi0; F = f + i g is holomorphic on B_delta.
struct TrivializedSection {
  PlanarField f0;   // f0 + i g0 in the frame (phi0, J phi0)
  PlanarField h1, h2;
  CRSystem system;
  double theorem_residual = 0.0;      // cr_residual of f0 + i g0
  double reconstruction = 0.0;        // |alpha - f0 phi0 - g0 J phi0| / |alpha|
  double min_frame_gram = 0.0;        // min det of the (phi0, J phi0) Gram matrix
  bool identically_zero = false;
  CarlemanResult carleman;            // phi = carleman.phi, F = carleman.sigma
};

TrivializedSection trivialize_alpha(const TwoForm& alpha, const AlmostComplexStructure& J, const NormalizedChart& chart,
                                    const TrivializeOptions& opt = {});

} // namespace jhol
