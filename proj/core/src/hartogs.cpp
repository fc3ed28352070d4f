#include "jhol/cr_solver.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace jhol {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

cplx fd_dbar(const std::function<cplx(cplx)>& h, cplx z, double eta) {
  const cplx dx = (h(z + eta) - h(z - eta)) / (2.0 * eta);
  const cplx dy = (h(z + kI * eta) - h(z - kI * eta)) / (2.0 * eta);
  return 0.5 * (dx + kI * dy);
}

// Max |dbar h| / max |h| over three circles inside the annulus.
double annulus_residual(const std::function<cplx(cplx)>& h, double r_in, double rho) {
  const double eta = 1e-4 * rho;
  double res = 0.0, sup = 0.0;
  for (double frac : {0.25, 0.5, 0.75}) {
    const double r = r_in + frac * (rho - r_in);
    for (int k = 0; k < 64; ++k) {
      const cplx z = std::polar(r, 2.0 * kPi * (k + 0.5) / 64);
      res = std::max(res, std::abs(fd_dbar(h, z, eta)));
      sup = std::max(sup, std::abs(h(z)));
    }
  }
  return sup > 0 ? res / sup : res;
}

} // namespace

std::vector<cplx> laurent_on_circle(const std::function<cplx(cplx)>& h, double radius, int jmin, int jmax, int n) {
  std::vector<cplx> vals(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) vals[static_cast<std::size_t>(k)] = h(std::polar(radius, 2.0 * kPi * k / n));
  std::vector<cplx> a;
  for (int j = jmin; j <= jmax; ++j) {
    // a_j = (1/n) sum h(xi_k) xi_k^{-j}
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) s += vals[static_cast<std::size_t>(k)] * std::polar(std::pow(radius, -j), -2.0 * kPi * j * k / n);
    a.push_back(s / static_cast<double>(n));
  }
  return a;
}

LaurentResult laurent_coefficients(const std::function<cplx(cplx)>& h, double r_in, double rho, int jmin, int jmax,
                                   double tol) {
  if (!(r_in >= 0.0 && rho > r_in)) throw ValidationError("laurent_coefficients: need 0 <= r < rho");
  LaurentResult out;
  out.jmin = jmin;
  out.holomorphy_residual = annulus_residual(h, r_in, rho);
  if (!(out.holomorphy_residual <= tol)) {
    std::ostringstream os;
    os << "laurent_coefficients: function is not holomorphic on the annulus, residual " << out.holomorphy_residual;
    throw ValidationError(os.str());
  }
  out.a = laurent_on_circle(h, 0.5 * (r_in + rho), jmin, jmax);
  return out;
}

HartogsReport hartogs_analyze(const std::function<cplx(cplx, cplx)>& gamma, const HartogsOptions& opt) {
  HartogsReport rep;
  rep.w_samples.push_back(0.0);
  for (int i = 1; i <= opt.w_rings; ++i)
    for (int k = 0; k < opt.w_angles; ++k)
      rep.w_samples.push_back(std::polar(opt.w_radius * i / opt.w_rings, 2.0 * kPi * k / opt.w_angles));

  const double R = opt.slice_radius;
  auto a0 = [&](cplx w) { return laurent_on_circle([&](cplx xi) { return gamma(xi, w); }, R, 0, 0)[0]; };
  const double eta = 1e-4;
  for (cplx w : rep.w_samples) {
    const auto slice = [&](cplx xi) { return gamma(xi, w); };
    rep.max_holomorphy_residual = std::max(rep.max_holomorphy_residual, annulus_residual(slice, 0.5 * R, 1.5 * R));
    const std::vector<cplx> a = laurent_on_circle(slice, R, opt.jmin, opt.jmax);
    for (int j = opt.jmin; j < 0 && j <= opt.jmax; ++j)
      rep.max_negative = std::max(rep.max_negative, std::abs(a[static_cast<std::size_t>(j - opt.jmin)]));
    rep.coefficients.push_back(a);
    const cplx ddx = (a0(w + eta) - a0(w - eta)) / (2.0 * eta);
    const cplx ddy = (a0(w + kI * eta) - a0(w - kI * eta)) / (2.0 * eta);
    rep.max_dbar_a0 = std::max(rep.max_dbar_a0, std::abs(0.5 * (ddx + kI * ddy)));
  }
  rep.value = a0(0.0);

  std::ostringstream why;
  if (!(rep.max_holomorphy_residual <= opt.holomorphy_tol))
    why << "slices are not holomorphic (residual " << rep.max_holomorphy_residual << "); ";
  if (!(rep.max_negative <= opt.negative_tol)) why << "negative Laurent coefficients do not vanish (max " << rep.max_negative << "); ";
  if (!(rep.max_dbar_a0 <= opt.dbar_tol)) why << "a_0 is not holomorphic in w (max " << rep.max_dbar_a0 << "); ";
  rep.reason = why.str();
  rep.extendable = rep.reason.empty();
  return rep;
}

HartogsReport hartogs_extend(const std::function<cplx(cplx, cplx)>& gamma, const HartogsOptions& opt) {
  HartogsReport rep = hartogs_analyze(gamma, opt);
  if (!rep.extendable) throw ValidationError("hartogs_extend: " + rep.reason);
  return rep;
}

} // namespace jhol
