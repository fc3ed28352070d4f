#include "jhol/cr_solver.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jhol {

namespace {

void require_same_grid(const PlanarField& a, const PlanarField& b, const char* what) {
  if (!(a.grid() == b.grid())) throw ValidationError(std::string(what) + ": fields live on different grids");
}

double min_abs(const PlanarField& f) {
  double m = std::numeric_limits<double>::infinity();
  for (cplx v : f.values()) m = std::min(m, std::abs(v));
  return m;
}

// conj(v)/v, with points where |v| <= threshold taking the value of the
// nearest grid point above it.
PlanarField unit_factor(const PlanarField& v, double threshold) {
  const PolarGrid& g = v.grid();
  PlanarField u(g);
  std::vector<std::pair<int, int>> small;
  for (int j = 0; j < g.nr; ++j)
    for (int k = 0; k < g.nt; ++k) {
      if (std::abs(v(j, k)) > threshold)
        u(j, k) = std::conj(v(j, k)) / v(j, k);
      else
        small.emplace_back(j, k);
    }
  if (small.size() == g.size()) throw ValidationError("carleman_factor: v vanishes on the whole grid");
  for (const auto& [j, k] : small) {
    const cplx z = g.z(j, k);
    double best = std::numeric_limits<double>::infinity();
    cplx val = 1.0;
    for (int jj = 0; jj < g.nr; ++jj)
      for (int kk = 0; kk < g.nt; ++kk) {
        if (!(std::abs(v(jj, kk)) > threshold)) continue;
        const double d = std::abs(g.z(jj, kk) - z);
        if (d < best) {
          best = d;
          val = u(jj, kk);
        }
      }
    u(j, k) = val;
  }
  return u;
}

} // namespace

double cr_residual(const PlanarField& v, const CRSystem& sys) {
  require_same_grid(v, sys.c1, "cr_residual");
  require_same_grid(v, sys.c2, "cr_residual");
  const PlanarField r = dbar(v) + sys.c1 * v + sys.c2 * v.conj();
  const double s = v.sup_norm();
  return s > 0 ? r.sup_norm() / s : r.sup_norm();
}

CarlemanResult carleman_factor(const PlanarField& v, const CRSystem& sys, const CarlemanOptions& opt) {
  require_same_grid(v, sys.c1, "carleman_factor");
  require_same_grid(v, sys.c2, "carleman_factor");
  const double vinf = v.sup_norm();
  if (!(vinf > 0.0)) throw ValidationError("carleman_factor: v is identically zero");

  CarlemanResult out;
  out.input_residual = cr_residual(v, sys);
  if (!(out.input_residual <= opt.precondition_tol)) {
    std::ostringstream os;
    os << "carleman_factor: v does not solve the system, residual " << out.input_residual;
    throw ValidationError(os.str());
  }

  const PlanarField A = sys.c1 + sys.c2 * unit_factor(v, opt.zero_threshold * vinf);
  out.max_abs_a = A.sup_norm();
  out.bound_a = sys.c1.sup_norm() + sys.c2.sup_norm();
  const PlanarField phi_full = ((-1.0) * cauchy_transform(A)).apply([](cplx z) { return std::exp(z); });

  const PolarGrid& g = v.grid();
  std::ostringstream failures;
  for (double delta = opt.delta_fraction * g.rho; delta >= opt.delta_floor_fraction * g.rho * (1.0 - 1e-12);
       delta *= 0.5) {
    const PolarGrid inner = g.with_radius(delta);
    PlanarField phi = phi_full.resample(inner);
    const PlanarField vv = v.resample(inner);
    PlanarField sigma = vv / phi;
    const double mphi = min_abs(phi);
    const double ssup = sigma.sup_norm();
    const double sres = ssup > 0 ? dbar(sigma).sup_norm() / ssup : 0.0;
    if (mphi > opt.min_phi && sres <= opt.sigma_tol && phi.all_finite()) {
      out.phi = std::move(phi);
      out.sigma = std::move(sigma);
      out.delta = delta;
      out.min_abs_phi = mphi;
      out.sigma_residual = sres;
      return out;
    }
    failures << " [delta " << delta << ": min|Phi| " << mphi << ", dbar sigma " << sres << "]";
  }
  throw NumericalError("carleman_factor: no admissible radius" + failures.str());
}

} // namespace jhol
