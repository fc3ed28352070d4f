#include "jhol/jdisks.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jhol {

namespace {

const cplx kI(0.0, 1.0);

constexpr std::array<std::array<int, 3>, 4> kTriples{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 upper(const Mat4& m) {
  Vec6 v;
  v << m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3);
  return v;
}

std::array<double, 4> eval3(const ExprTape& f, const Point4& x) {
  std::array<double, 4> v;
  f.eval(x, v.data());
  return v;
}

std::array<double, 4> combine(double a, const std::array<double, 4>& x, double b, const std::array<double, 4>& y) {
  return {a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2], a * x[3] + b * y[3]};
}

double pair(const Mat4& beta, const Vec4& X, const Vec4& Y) { return X.dot(beta * Y); }

// (dh ^ beta)(N, u_s, u_t) with dh(N) = 0, dh(u_s) = hs, dh(u_t) = ht.
double wedge_tangential(double hs, double ht, const Mat4& beta, const Vec4& N, const Vec4& us, const Vec4& ut) {
  return -hs * pair(beta, N, ut) + ht * pair(beta, N, us);
}

} // namespace

double eval_three_form(const std::array<double, 4>& c, const Vec4& X, const Vec4& Y, const Vec4& Z) {
  double s = 0.0;
  for (int t = 0; t < 4; ++t) {
    const auto [i, j, k] = kTriples[static_cast<std::size_t>(t)];
    Eigen::Matrix3d m;
    m << X(i), Y(i), Z(i), X(j), Y(j), Z(j), X(k), Y(k), Z(k);
    s += c[static_cast<std::size_t>(t)] * m.determinant();
  }
  return s;
}

TrivializedSection trivialize_alpha(const TwoForm& alpha, const AlmostComplexStructure& J, const NormalizedChart& chart,
                                    const TrivializeOptions& opt) {
  const GridCheck closed = closedness_residual(alpha, opt.closedness_grid);
  if (!(closed.max_residual <= opt.closedness_tol)) {
    std::ostringstream os;
    os << "trivialize_alpha: alpha is not closed, |d alpha| = " << closed.max_residual;
    throw ValidationError(os.str());
  }
  const GridCheck anti = anti_invariance_residual(alpha, J, opt.closedness_grid);
  if (!(anti.max_residual <= opt.closedness_tol)) {
    std::ostringstream os;
    os << "trivialize_alpha: alpha is not J-anti-invariant, residual " << anti.max_residual;
    throw ValidationError(os.str());
  }

  Mat4 phi_const = Mat4::Zero();
  phi_const(0, 2) = 1.0;
  phi_const(2, 0) = -1.0;
  phi_const(1, 3) = -1.0;
  phi_const(3, 1) = 1.0;
  const Mat4 Ainv = chart.family->frame.inverse();
  const TwoForm psi = split_form(TwoForm::constant(Ainv.transpose() * phi_const * Ainv, J.box()), J).anti_invariant;
  const TwoForm jpsi = apply_J_anti(psi, J, opt.closedness_grid);
  const ExprTape dpsi(exterior_derivative(psi)), djpsi(exterior_derivative(jpsi));

  const Disk& disk = chart.disk;
  const PolarGrid& g = disk.grid();
  const DiskJet jet = disk_jet(disk);
  const std::size_t n = g.size();

  TrivializedSection out;
  out.h1 = PlanarField(g);
  out.h2 = PlanarField(g);
  std::vector<Mat4> psi_at(n), jpsi_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point4 p = to_point(jet.p[i]);
    psi_at[i] = psi.at(p);
    jpsi_at[i] = jpsi.at(p);
    const Mat4 Finv = chart.frames[i].inverse();
    const Vec6 target = upper(Finv.transpose() * phi_const * Finv);
    Eigen::Matrix<double, 6, 2> B;
    B.col(0) = upper(psi_at[i]);
    B.col(1) = upper(jpsi_at[i]);
    const Eigen::Vector2d h = B.colPivHouseholderQr().solve(target);
    out.h1.values()[i] = h(0);
    out.h2.values()[i] = h(1);
  }
  const PlanarField dz1 = dz(out.h1), db1 = dbar(out.h1), dz2 = dz(out.h2), db2 = dbar(out.h2);

  PlanarField c1(g), c2(g), f0(g);
  double alpha_sup = 0.0;
  std::vector<Mat4> alpha_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha_at[i] = alpha.at(to_point(jet.p[i]));
    alpha_sup = std::max(alpha_sup, form_norm(alpha_at[i]));
  }
  out.min_frame_gram = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point4 p = to_point(jet.p[i]);
    const double h1 = out.h1.values()[i].real(), h2 = out.h2.values()[i].real();
    const double h1s = (dz1.values()[i] + db1.values()[i]).real(), h1t = (kI * (dz1.values()[i] - db1.values()[i])).real();
    const double h2s = (dz2.values()[i] + db2.values()[i]).real(), h2t = (kI * (dz2.values()[i] - db2.values()[i])).real();
    const Mat4& ps = psi_at[i];
    const Mat4& jps = jpsi_at[i];
    const Mat4 phi0 = h1 * ps + h2 * jps;
    const Mat4 jphi0 = h1 * jps - h2 * ps;
    const auto dps = eval3(dpsi, p), djps = eval3(djpsi, p);
    const auto dphi = combine(h1, dps, h2, djps);
    const auto djphi = combine(h1, djps, -h2, dps);
    const Vec4& us = jet.us[i];
    const Vec4& ut = jet.ut[i];

    Eigen::Matrix2d M;
    Eigen::Vector2d Bv, Gv;
    for (int r = 0; r < 2; ++r) {
      const Vec4 N = chart.frames[i].col(r);
      M(r, 0) = pair(phi0, N, ut);
      M(r, 1) = -pair(phi0, N, us);
      Bv(r) = wedge_tangential(h1s, h1t, ps, N, us, ut) + wedge_tangential(h2s, h2t, jps, N, us, ut) +
              eval_three_form(dphi, N, us, ut);
      Gv(r) = wedge_tangential(h1s, h1t, jps, N, us, ut) - wedge_tangential(h2s, h2t, ps, N, us, ut) +
              eval_three_form(djphi, N, us, ut);
    }
    const Eigen::Vector2d mb = M.partialPivLu().solve(Bv), mg = M.partialPivLu().solve(Gv);
    const cplx P(mb(0), mb(1)), Q(mg(0), mg(1));
    c1.values()[i] = -(P - kI * Q) / 4.0;
    c2.values()[i] = -(P + kI * Q) / 4.0;

    Eigen::Matrix<double, 6, 2> B;
    B.col(0) = upper(phi0);
    B.col(1) = upper(jphi0);
    const Vec6 a = upper(alpha_at[i]);
    const Eigen::Vector2d fg = B.colPivHouseholderQr().solve(a);
    f0.values()[i] = cplx(fg(0), fg(1));
    const double scale = std::max(form_norm(alpha_at[i]), alpha_sup);
    if (scale > 0) out.reconstruction = std::max(out.reconstruction, (a - B * fg).cwiseAbs().maxCoeff() / scale);
    out.min_frame_gram = std::min(out.min_frame_gram, (B.transpose() * B).determinant());
  }
  out.system = {std::move(c1), std::move(c2)};
  out.f0 = std::move(f0);
  if (!(out.min_frame_gram > 1e-16)) throw NumericalError("trivialize_alpha: frame (phi0, J phi0) degenerates on the disk");
  if (!(out.f0.sup_norm() > opt.zero_tol)) {
    out.identically_zero = true;
    return out;
  }
  out.theorem_residual = cr_residual(out.f0, out.system);
  if (!(out.theorem_residual <= opt.theorem_tol)) {
    std::ostringstream os;
    os << "trivialize_alpha: coefficients violate the derived system, residual " << out.theorem_residual;
    throw NumericalError(os.str());
  }
  CarlemanOptions copt = opt.carleman;
  copt.precondition_tol = opt.theorem_tol;
  out.carleman = carleman_factor(out.f0, out.system, copt);
  return out;
}

} // namespace jhol
