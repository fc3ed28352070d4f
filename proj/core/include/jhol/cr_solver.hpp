#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace jhol {

using cplx = std::complex<double>;

// Polar tensor grid on the disk of radius rho: rings r_j = (j + 1/2) rho / nr
// and angles theta_k = 2 pi k / nt.
struct PolarGrid {
  double rho = 1.0;
  int nr = 64;
  int nt = 128;

  double r(int j) const { return (j + 0.5) * rho / nr; }
  double theta(int k) const;
  cplx z(int j, int k) const;
  std::size_t size() const { return static_cast<std::size_t>(nr) * static_cast<std::size_t>(nt); }
  PolarGrid with_radius(double radius) const { return {radius, nr, nt}; }
  PolarGrid doubled() const { return {rho, 2 * nr, 2 * nt}; }
};

bool operator==(const PolarGrid& a, const PolarGrid& b);

// Complex field sampled on a polar grid; values are stored ring by ring.
// Off-grid evaluation is spectral in theta and cubic in r.
class PlanarField {
public:
  PlanarField() = default;
  explicit PlanarField(const PolarGrid& g, cplx fill = 0.0);

  static PlanarField sample(const PolarGrid& g, const std::function<cplx(cplx)>& f);

  const PolarGrid& grid() const { return g_; }
  cplx& operator()(int j, int k) {
    modes_cache_.reset();
    return v_[idx(j, k)];
  }
  cplx operator()(int j, int k) const { return v_[idx(j, k)]; }
  const std::vector<cplx>& values() const { return v_; }
  std::vector<cplx>& values() {
    modes_cache_.reset();
    return v_;
  }

  cplx eval(cplx z) const;
  // Same function on another polar grid by interpolation.
  PlanarField resample(const PolarGrid& g) const;

  double sup_norm() const;
  bool all_finite() const;
  // Index (j, k) of the grid point with the largest |value|.
  std::pair<int, int> argmax() const;
  // Interpolation error estimated by rebuilding from a half-resolution copy.
  double interpolation_error() const;

  // Fourier coefficients per ring, c[j][m + nt/2] for m in [-nt/2, nt/2).
  const std::vector<std::vector<cplx>>& modes() const;
  static PlanarField from_modes(const PolarGrid& g, const std::vector<std::vector<cplx>>& c);

  PlanarField conj() const;
  PlanarField apply(const std::function<cplx(cplx)>& f) const;

  PlanarField& operator+=(const PlanarField& o);
  PlanarField& operator-=(const PlanarField& o);
  friend PlanarField operator+(PlanarField a, const PlanarField& b) { return a += b; }
  friend PlanarField operator-(PlanarField a, const PlanarField& b) { return a -= b; }
  friend PlanarField operator*(const PlanarField& a, const PlanarField& b);
  friend PlanarField operator/(const PlanarField& a, const PlanarField& b);
  friend PlanarField operator*(cplx s, const PlanarField& a);

private:
  std::size_t idx(int j, int k) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(g_.nt) + static_cast<std::size_t>(k);
  }
  PolarGrid g_{};
  std::vector<cplx> v_;
  struct ModeCache {
    std::vector<std::vector<cplx>> c;
    int band = 0;  // largest |m| with a coefficient above 1e-15 of the largest
  };
  const ModeCache& mode_cache() const;
  mutable std::shared_ptr<const ModeCache> modes_cache_;
};

// d/dzbar = 1/2 e^{i theta} (d/dr + (i/r) d/dtheta), with fourth-order
// differences in r and spectral differentiation in theta.
PlanarField dbar(const PlanarField& f);
// d/dz = 1/2 e^{-i theta} (d/dr - (i/r) d/dtheta).
PlanarField dz(const PlanarField& f);

// (Tf)(z) = -(1/pi) iint_{B_rho} f(zeta) / (zeta - z) dA(zeta), so that
// dbar(Tf) = f.
PlanarField cauchy_transform(const PlanarField& f);

// Max of |dbar(Tf) - f| / max(|f|, 1e-300) and where it occurs.
struct TransformCheck {
  double relative_residual = 0.0;
  cplx worst{};
};
TransformCheck cauchy_residual(const PlanarField& f, const PlanarField& tf);

// dbar v + C1 v + C2 conj(v) = 0 on B_rho.
struct CRSystem {
  PlanarField c1;
  PlanarField c2;
};

double cr_residual(const PlanarField& v, const CRSystem& sys);

struct CarlemanOptions {
  double zero_threshold = 1e-8;     // relative to |v|_inf
  double precondition_tol = 1e-3;
  double sigma_tol = 1e-3;
  double min_phi = 1e-8;
  double delta_fraction = 0.5;      // starting delta / rho
  double delta_floor_fraction = 1.0 / 16.0;
};

struct CarlemanResult {
  PlanarField phi;    // nowhere zero on B_delta
  PlanarField sigma;  // holomorphic on B_delta
  double delta = 0.0;
  double input_residual = 0.0;
  double sigma_residual = 0.0;  // |dbar sigma|_inf / |sigma|_inf
  double min_abs_phi = 0.0;
  double max_abs_a = 0.0;
  double bound_a = 0.0;         // sup |C1| + sup |C2|
};

// v = Phi sigma with Phi = exp(-T(C1 + C2 conj(v)/v)).
CarlemanResult carleman_factor(const PlanarField& v, const CRSystem& sys, const CarlemanOptions& opt = {});

// Laurent coefficients a_j = (1 / 2 pi i) oint h(xi) xi^{-j-1} dxi on the
// circle |xi| = radius, by the trapezoidal rule with n nodes.
std::vector<cplx> laurent_on_circle(const std::function<cplx(cplx)>& h, double radius, int jmin, int jmax,
                                    int n = 256);

struct LaurentResult {
  int jmin = 0;
  std::vector<cplx> a;          // a[j - jmin]
  double holomorphy_residual = 0.0;
  cplx at(int j) const { return a[static_cast<std::size_t>(j - jmin)]; }
};

// Coefficients on the annulus r_in < |xi| < rho using the middle circle.
// Throws ValidationError when the sampled dbar residual exceeds tol.
LaurentResult laurent_coefficients(const std::function<cplx(cplx)>& h, double r_in, double rho, int jmin,
                                   int jmax, double tol = 1e-6);

struct HartogsOptions {
  double slice_radius = 0.5;    // circle |xi| = slice_radius
  double w_radius = 0.5;        // w ranges over |w| <= w_radius
  int w_rings = 4;
  int w_angles = 8;
  int jmin = -3;
  int jmax = 3;
  double negative_tol = 1e-8;
  double dbar_tol = 1e-6;
  double holomorphy_tol = 1e-6;
};

struct HartogsReport {
  bool extendable = false;
  std::string reason;
  cplx value{};                         // a_0(0)
  double max_negative = 0.0;            // max_w max_{j<0} |a_j(w)|
  double max_dbar_a0 = 0.0;             // max_w |d a_0 / d wbar|
  double max_holomorphy_residual = 0.0;
  std::vector<cplx> w_samples;
  std::vector<std::vector<cplx>> coefficients;  // per w sample, j = jmin..jmax
};

HartogsReport hartogs_analyze(const std::function<cplx(cplx, cplx)>& gamma, const HartogsOptions& opt = {});
// As hartogs_analyze, throwing ValidationError when the puncture is not removable.
HartogsReport hartogs_extend(const std::function<cplx(cplx, cplx)>& gamma, const HartogsOptions& opt = {});

} // namespace jhol
