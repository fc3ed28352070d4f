#include "jhol/jdisks.hpp"

#include "jhol/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace jhol {

namespace {

const cplx kI(0.0, 1.0);

Mat4 jet_to_mat(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
  Mat4 m;
  m << a, b, c, d;
  return m;
}

// Lagrange cubic on the uniform w nodes: first node index and weights with
// their derivatives at t.
struct Stencil {
  int first = 0;
  std::array<double, 4> w{}, dw{};
};

Stencil stencil(double lo, double h, int n, double t) {
  Stencil s;
  s.first = std::clamp(static_cast<int>(std::floor((t - lo) / h)) - 1, 0, n - 4);
  std::array<double, 4> x;
  for (int a = 0; a < 4; ++a) x[static_cast<std::size_t>(a)] = lo + h * (s.first + a);
  for (int a = 0; a < 4; ++a) {
    double p = 1.0, dp = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      const double den = x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)];
      const double fac = (t - x[static_cast<std::size_t>(b)]) / den;
      dp = dp * fac + p / den;
      p *= fac;
    }
    s.w[static_cast<std::size_t>(a)] = p;
    s.dw[static_cast<std::size_t>(a)] = dp;
  }
  return s;
}

Vec4 field_pair(const PlanarField& a, const PlanarField& b, cplx z) { return to_real(a.eval(z), b.eval(z)); }

double mat_max(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

template <class F>
void parallel_for(int n, F&& body) {
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace

Vec4 to_real(cplx w0, cplx w1) { return Vec4(w0.real(), w0.imag(), w1.real(), w1.imag()); }
std::array<cplx, 2> to_complex(const Vec4& x) { return {cplx(x(0), x(1)), cplx(x(2), x(3))}; }
Point4 to_point(const Vec4& x) { return {x(0), x(1), x(2), x(3)}; }

Mat4 adapted_frame(const Mat4& Jx, const std::array<cplx, 2>& kappa, const std::optional<Vec4>& transverse) {
  Vec4 v = to_real(kappa[0], kappa[1]);
  if (!(v.norm() > 0.0)) throw ValidationError("adapted_frame: kappa must be nonzero");
  v.normalize();
  const Vec4 jv = Jx * v;
  Eigen::Matrix<double, 4, 2> span;
  span.col(0) = v;
  span.col(1) = (jv - jv.dot(v) * v);
  if (!(span.col(1).norm() > 1e-12)) throw ValidationError("adapted_frame: J(x) v is parallel to v");
  span.col(1).normalize();
  auto residual = [&](const Vec4& t) { return Vec4(t - span * (span.transpose() * t)); };
  Vec4 t;
  if (transverse) {
    t = residual(*transverse);
  } else {
    double best = -1.0;
    for (int i = 0; i < 4; ++i) {
      const Vec4 r = residual(Vec4::Unit(i));
      if (r.norm() > best + 1e-12) {
        best = r.norm();
        t = r;
      }
    }
  }
  if (!(t.norm() > 1e-12)) throw ValidationError("adapted_frame: transverse direction lies in the complex line");
  t.normalize();
  const Mat4 A = jet_to_mat(v, jv, t, Jx * t);
  if (!(std::abs(A.determinant()) > 1e-12)) throw ValidationError("adapted_frame: degenerate frame");
  return A;
}

Vec4 Disk::point(cplx zeta) const { return field_pair(u0, u1, zeta); }
Vec4 Disk::at(int j, int k) const { return to_real(u0(j, k), u1(j, k)); }

DiskJet disk_jet(const Disk& d) {
  const PlanarField dz0 = dz(d.u0), db0 = dbar(d.u0), dz1 = dz(d.u1), db1 = dbar(d.u1);
  DiskJet jet;
  const std::size_t n = d.grid().size();
  jet.p.resize(n);
  jet.us.resize(n);
  jet.ut.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx a0 = dz0.values()[i], b0 = db0.values()[i], a1 = dz1.values()[i], b1 = db1.values()[i];
    jet.p[i] = to_real(d.u0.values()[i], d.u1.values()[i]);
    jet.us[i] = to_real(a0 + b0, a1 + b1);
    jet.ut[i] = to_real(kI * (a0 - b0), kI * (a1 - b1));
  }
  return jet;
}

namespace {

double jet_residual(const AlmostComplexStructure& J, const DiskJet& jet) {
  double res = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < jet.p.size(); ++i) {
    const Vec4 r = jet.us[i] + J.at(to_point(jet.p[i])) * jet.ut[i];
    res = std::max(res, r.lpNorm<Eigen::Infinity>());
    scale = std::max({scale, jet.us[i].lpNorm<Eigen::Infinity>(), jet.ut[i].lpNorm<Eigen::Infinity>()});
  }
  if (!std::isfinite(res)) return std::numeric_limits<double>::infinity();
  return scale > 0 ? res / scale : res;
}

double injectivity(const Disk& d) {
  const PolarGrid& g = d.grid();
  std::vector<std::pair<cplx, Vec4>> s;
  for (int j : {0, g.nr / 4, g.nr / 2, 3 * g.nr / 4, g.nr - 1})
    for (int k = 0; k < g.nt; k += std::max(1, g.nt / 16)) s.emplace_back(g.z(j, k), d.at(j, k));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      const double dz = std::abs(s[a].first - s[b].first);
      if (dz > 0) best = std::min(best, (s[a].second - s[b].second).norm() / dz);
    }
  return best;
}

// Limit of c_1(r) / r at r = 0 from the two innermost rings, c_1 = a r + b r^3 + ...
cplx mode_one_at_origin(const PlanarField& f) {
  const auto& m = f.modes();
  const PolarGrid& g = f.grid();
  const std::size_t one = static_cast<std::size_t>(1 + g.nt / 2);
  const double r0 = g.r(0), r1 = g.r(1);
  const cplx q0 = m[0][one] / r0, q1 = m[1][one] / r1;
  return (r1 * r1 * q0 - r0 * r0 * q1) / (r1 * r1 - r0 * r0);
}

struct Attempt {
  bool ok = false;
  Disk disk;
  std::string why;
};

Attempt attempt_disk(const AlmostComplexStructure& J, const Vec4& x, const Mat4& A, const PolarGrid& g,
                     const DiskOptions& opt) {
  const Mat4 Ainv = A.inverse();
  const Mat4 J0 = standard_j();
  const bool flat_j = [&] {
    for (int i = 0; i < 16; ++i)
      if (!J.entry(i / 4, i % 4).is_constant()) return false;
    return true;
  }();
  const PlanarField zeta = PlanarField::sample(g, [](cplx z) { return z; });
  PlanarField y0 = zeta, y1(g);
  Attempt out;
  const std::size_t n = g.size();
  double last_res = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const PlanarField dz0 = dz(y0), db0 = dbar(y0), dz1 = dz(y1), db1 = dbar(y1);
    PlanarField r0(g), r1(g);
    double res = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec4 y = to_real(y0.values()[i], y1.values()[i]);
      const Vec4 ys = to_real(dz0.values()[i] + db0.values()[i], dz1.values()[i] + db1.values()[i]);
      const Vec4 yt = to_real(kI * (dz0.values()[i] - db0.values()[i]), kI * (dz1.values()[i] - db1.values()[i]));
      const Mat4 Jp = J.at(to_point(x + A * y));
      const Vec4 us = A * ys, ut = A * yt;
      res = std::max(res, (us + Jp * ut).lpNorm<Eigen::Infinity>());
      scale = std::max({scale, us.lpNorm<Eigen::Infinity>(), ut.lpNorm<Eigen::Infinity>()});
      const Vec4 rhs = -0.5 * ((Ainv * Jp * A - J0) * yt);
      r0.values()[i] = cplx(rhs(0), rhs(1));
      r1.values()[i] = cplx(rhs(2), rhs(3));
    }
    res = scale > 0 ? res / scale : res;
    if (!std::isfinite(res) || res > 1e3) {
      out.why = "iteration diverged";
      return out;
    }
    out.disk.residual = res;
    out.disk.iterations = it;
    if (res <= opt.tol || flat_j) break;
    if (it >= opt.max_iterations) break;
    const PlanarField w0 = cauchy_transform(r0), w1 = cauchy_transform(r1);
    const cplx c0 = w0.eval(0.0), c1 = w1.eval(0.0), d1 = mode_one_at_origin(w1);
    PlanarField n0 = zeta + w0 - PlanarField(g, c0);
    PlanarField n1 = w1 - PlanarField(g, c1) - d1 * zeta;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      change = std::max({change, std::abs(n0.values()[i] - y0.values()[i]), std::abs(n1.values()[i] - y1.values()[i])});
    y0 = std::move(n0);
    y1 = std::move(n1);
    if (change <= 1e-14 * g.rho && res >= 0.999 * last_res) break;
    last_res = res;
  }
  if (!(out.disk.residual <= opt.accept)) {
    std::ostringstream os;
    os << "residual " << out.disk.residual << " after " << out.disk.iterations << " iterations";
    out.why = os.str();
    return out;
  }
  PlanarField u0(g), u1(g);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = to_complex(x + A * to_real(y0.values()[i], y1.values()[i]));
    u0.values()[i] = c[0];
    u1.values()[i] = c[1];
  }
  out.disk.u0 = std::move(u0);
  out.disk.u1 = std::move(u1);
  out.disk.frame = A;
  out.disk.rho = g.rho;
  out.disk.injectivity = injectivity(out.disk);
  if (!(out.disk.injectivity > 1e-6)) {
    out.why = "disk is not embedded";
    return out;
  }
  out.ok = true;
  return out;
}

} // namespace

double disk_residual(const AlmostComplexStructure& J, const Disk& d) { return jet_residual(J, disk_jet(d)); }

Disk solve_disk(const AlmostComplexStructure& J, const Point4& x, const std::array<cplx, 2>& kappa, double rho,
                const DiskOptions& opt) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("solve_disk: rho must be positive");
  if (!J.box().contains(x)) throw ValidationError("solve_disk: center lies outside the domain of J");
  const Mat4 Jx = J.at(x);
  if (!((Jx * Jx + Mat4::Identity()).cwiseAbs().maxCoeff() <= 1e-9))
    throw ValidationError("solve_disk: J(x)^2 != -I at the center");
  const Mat4 A = adapted_frame(Jx, kappa, opt.transverse);
  const Vec4 xv(x[0], x[1], x[2], x[3]);
  std::ostringstream failures;
  double r = rho;
  for (int h = 0; h <= opt.max_halvings; ++h, r *= 0.5) {
    Attempt a = attempt_disk(J, xv, A, opt.grid.with_radius(r), opt);
    if (a.ok) {
      a.disk.center = x;
      a.disk.kappa = kappa;
      a.disk.halvings = h;
      return std::move(a.disk);
    }
    failures << " [rho " << r << ": " << a.why << "]";
  }
  throw NumericalError("solve_disk: no J-holomorphic disk found" + failures.str());
}

struct FibreFamily::Cache {
  // Per disk: u and its derivatives along Re xi and Im xi.
  std::vector<std::array<PlanarField, 6>> fields;
};

double FibreFamily::w_node(int a) const { return -rho + w_step() * a; }

Vec4 FibreFamily::eval(cplx xi, cplx w) const {
  const Stencil sa = stencil(-rho, w_step(), n_w, w.real()), sb = stencil(-rho, w_step(), n_w, w.imag());
  Vec4 out = Vec4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const auto& f = cache->fields[static_cast<std::size_t>((sa.first + a) * n_w + sb.first + b)];
      out += sa.w[static_cast<std::size_t>(a)] * sb.w[static_cast<std::size_t>(b)] * field_pair(f[0], f[1], xi);
    }
  return out;
}

Mat4 FibreFamily::jacobian(cplx xi, cplx w) const {
  const Stencil sa = stencil(-rho, w_step(), n_w, w.real()), sb = stencil(-rho, w_step(), n_w, w.imag());
  Mat4 out = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const auto& f = cache->fields[static_cast<std::size_t>((sa.first + a) * n_w + sb.first + b)];
      const double wa = sa.w[static_cast<std::size_t>(a)], wb = sb.w[static_cast<std::size_t>(b)];
      const Vec4 v = field_pair(f[0], f[1], xi);
      out.col(0) += wa * wb * field_pair(f[2], f[3], xi);
      out.col(1) += wa * wb * field_pair(f[4], f[5], xi);
      out.col(2) += sa.dw[static_cast<std::size_t>(a)] * wb * v;
      out.col(3) += wa * sb.dw[static_cast<std::size_t>(b)] * v;
    }
  return out;
}

std::pair<cplx, cplx> FibreFamily::invert(const Vec4& p, cplx xi, cplx w, double* residual) const {
  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    const Vec4 r = eval(xi, w) - p;
    res = r.norm();
    const Vec4 step = jacobian(xi, w).partialPivLu().solve(r);
    xi -= cplx(step(0), step(1));
    w -= cplx(step(2), step(3));
    if (step.norm() <= 1e-15 * std::max(rho, 1.0)) {
      res = (eval(xi, w) - p).norm();
      break;
    }
  }
  if (residual) *residual = res;
  return {xi, w};
}

FibreFamily fibre_family(const AlmostComplexStructure& J, const Point4& origin, const std::array<cplx, 2>& kappa,
                         double rho, const FamilyOptions& opt) {
  if (opt.n_w < 4) throw ValidationError("fibre_family: need at least 4 w nodes per axis");
  if (!(rho > 0.0)) throw ValidationError("fibre_family: rho must be positive");
  const Mat4 Jx = J.at(origin);
  FibreFamily fam;
  fam.origin = origin;
  fam.frame = adapted_frame(Jx, kappa, opt.disk.transverse);
  fam.rho = rho;
  fam.n_w = opt.n_w;
  const Mat4& A = fam.frame;
  const Vec4 o(origin[0], origin[1], origin[2], origin[3]);
  DiskOptions dopt = opt.disk;
  dopt.transverse = Vec4(A.col(2));
  dopt.max_halvings = 0;
  const auto kap = to_complex(A.col(0));
  const int n = fam.n_w * fam.n_w;
  fam.disks.resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](int idx) {
    const cplx w(fam.w_node(idx / fam.n_w), fam.w_node(idx % fam.n_w));
    const Vec4 c = o + A * to_real(0.0, w);
    fam.disks[static_cast<std::size_t>(idx)] = solve_disk(J, to_point(c), kap, rho, dopt);
  });

  auto cache = std::make_shared<FibreFamily::Cache>();
  cache->fields.resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](int idx) {
    const Disk& d = fam.disks[static_cast<std::size_t>(idx)];
    const PlanarField a0 = dz(d.u0), b0 = dbar(d.u0), a1 = dz(d.u1), b1 = dbar(d.u1);
    auto& f = cache->fields[static_cast<std::size_t>(idx)];
    f = {d.u0, d.u1, a0 + b0, a1 + b1, kI * (a0 - b0), kI * (a1 - b1)};
    for (const auto& x : f) (void)x.modes();
  });
  fam.cache = cache;

  const Mat4 Ainv = A.inverse();
  const PolarGrid& g = fam.disks.front().grid();
  for (int idx = 0; idx < n; ++idx) {
    const Disk& d = fam.disks[static_cast<std::size_t>(idx)];
    fam.max_residual = std::max(fam.max_residual, d.residual);
    const cplx w(fam.w_node(idx / fam.n_w), fam.w_node(idx % fam.n_w));
    for (int j = 0; j < g.nr; ++j)
      for (int k = 0; k < g.nt; ++k) {
        const cplx xi = g.z(j, k);
        const Vec4 y = Ainv * (d.at(j, k) - o);
        fam.z_closeness = std::max(fam.z_closeness, (y - to_real(xi, w)).norm() / (rho * std::abs(xi)));
      }
    const int a = idx / fam.n_w, b = idx % fam.n_w;
    for (const auto& [na, nb] : {std::pair{a + 1, b}, std::pair{a, b + 1}}) {
      if (na >= fam.n_w || nb >= fam.n_w) continue;
      const Disk& e = fam.disks[static_cast<std::size_t>(na * fam.n_w + nb)];
      double sup = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        sup = std::max(sup, std::hypot(std::abs(d.u0.values()[i] - e.u0.values()[i]),
                                       std::abs(d.u1.values()[i] - e.u1.values()[i])));
      fam.continuity = std::max(fam.continuity, sup / fam.w_step());
    }
  }
  const double detA = A.determinant();
  fam.min_jacobian = std::numeric_limits<double>::infinity();
  fam.max_jacobian = 0.0;
  for (double fa : {-0.75, -0.25, 0.25, 0.75})
    for (double fb : {-0.75, -0.25, 0.25, 0.75})
      for (cplx xi : {cplx(0.0), std::polar(0.5 * rho, 0.3), std::polar(0.5 * rho, 2.4), std::polar(0.9 * rho, 4.0)}) {
        const double r = fam.jacobian(xi, cplx(fa * rho, fb * rho)).determinant() / detA;
        fam.min_jacobian = std::min(fam.min_jacobian, r);
        fam.max_jacobian = std::max(fam.max_jacobian, r);
      }
  return fam;
}

Vec4 NormalizedChart::psi(cplx xi2, cplx zeta) const { return family->eval(xi2 + tau.eval(zeta), w.eval(zeta)); }

Mat4 NormalizedChart::frame_on_disk(int j, int k) const {
  return frames[static_cast<std::size_t>(j) * static_cast<std::size_t>(disk.grid().nt) + static_cast<std::size_t>(k)];
}

NormalizedChart normalize_along_disk(const AlmostComplexStructure& J, const Disk& disk,
                                     std::shared_ptr<const FibreFamily> family, double min_angle_deg) {
  if (!family || family->disks.empty()) throw ValidationError("normalize_along_disk: empty fibre family");
  NormalizedChart ch;
  ch.family = family;
  ch.disk = disk;
  const PolarGrid& g = disk.grid();
  const DiskJet jet = disk_jet(disk);
  const Mat4 Ainv = family->frame.inverse();
  const Vec4 o(family->origin[0], family->origin[1], family->origin[2], family->origin[3]);

  auto guess = [&](const Vec4& p) {
    const Vec4 y = Ainv * (p - o);
    return std::pair{cplx(y(0), y(1)), cplx(y(2), y(3))};
  };
  auto inside = [&](cplx xi, cplx w) {
    const double lim = family->rho * (1.0 + 1e-9);
    return std::abs(xi) <= lim && std::abs(w.real()) <= lim && std::abs(w.imag()) <= lim;
  };

  {
    const Vec4 c = disk.point(0.0);
    auto [xi0, w0] = guess(c);
    std::tie(xi0, w0) = family->invert(c, xi0, w0);
    const Mat4 Dq = family->jacobian(xi0, w0);
    Eigen::Matrix<double, 4, 2> fib = Dq.leftCols<2>(), tan;
    tan.col(0) = jet.us[0];
    tan.col(1) = jet.ut[0];
    const Eigen::Matrix<double, 4, 2> q1 = fib.householderQr().householderQ() * Eigen::Matrix<double, 4, 2>::Identity();
    const Eigen::Matrix<double, 4, 2> q2 = tan.householderQr().householderQ() * Eigen::Matrix<double, 4, 2>::Identity();
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(q1.transpose() * q2);
    ch.transversality_deg = std::acos(std::clamp(svd.singularValues()(0), -1.0, 1.0)) * 180.0 / std::numbers::pi;
    if (!(ch.transversality_deg > min_angle_deg)) {
      std::ostringstream os;
      os << "normalize_along_disk: disk meets the fibres at " << ch.transversality_deg << " degrees";
      throw ValidationError(os.str());
    }
  }

  ch.tau = PlanarField(g);
  ch.w = PlanarField(g);
  ch.frames.resize(g.size());
  std::vector<double> inv_res(g.size(), 0.0), b(g.size(), 0.0), ea(g.size(), 0.0), ea2(g.size(), 0.0);
  std::vector<char> outside(g.size(), 0);
  Eigen::Matrix2d rot;
  rot << 0, -1, 1, 0;
  std::vector<cplx>& tau_v = ch.tau.values();
  std::vector<cplx>& w_v = ch.w.values();
  parallel_for(static_cast<int>(g.size()), [&](int i) {
    const std::size_t s = static_cast<std::size_t>(i);
    auto [xi, w] = guess(jet.p[s]);
    std::tie(xi, w) = family->invert(jet.p[s], xi, w, &inv_res[s]);
    if (!inside(xi, w)) outside[s] = 1;
    tau_v[s] = xi;
    w_v[s] = w;
    const Mat4 Dq = family->jacobian(xi, w);
    const Mat4 F = jet_to_mat(Dq.col(0), Dq.col(1), jet.us[s], jet.ut[s]);
    ch.frames[s] = F;
    const Mat4 Jb = F.inverse() * J.at(to_point(jet.p[s])) * F;
    b[s] = std::max(mat_max(Jb.topRightCorner<2, 2>()), mat_max(Jb.bottomLeftCorner<2, 2>()));
    ea[s] = mat_max(Jb.topLeftCorner<2, 2>() - rot);
    ea2[s] = mat_max(Jb.bottomRightCorner<2, 2>() - rot);
  });
  if (std::any_of(outside.begin(), outside.end(), [](char c) { return c != 0; }))
    throw ValidationError("normalize_along_disk: disk leaves the image of the fibre family");
  ch.inversion_residual = *std::max_element(inv_res.begin(), inv_res.end());
  ch.max_b = *std::max_element(b.begin(), b.end());
  ch.max_a_err = *std::max_element(ea.begin(), ea.end());
  ch.max_a2_err = *std::max_element(ea2.begin(), ea2.end());
  (void)ch.tau.modes();
  (void)ch.w.modes();
  return ch;
}

} // namespace jhol
