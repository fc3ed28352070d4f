#include "jhol/errors.hpp"
#include "jhol/fixtures.hpp"
#include "jhol/jdisks.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace jhol;

namespace {

const cplx kI(0.0, 1.0);
const Box kBox{{-0.5, -0.5, -0.5, -0.5}, {0.5, 0.5, 0.5, 0.5}};

double nijenhuis(const AlmostComplexStructure& J, const Point4& x) {
  const Mat4 j = J.at(x);
  std::array<Mat4, 4> d;
  for (int v = 0; v < 4; ++v) d[static_cast<std::size_t>(v)] = J.derivative(x, v);
  double worst = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 4; ++k) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l)
          s += j(l, a) * d[static_cast<std::size_t>(l)](k, b) - j(l, b) * d[static_cast<std::size_t>(l)](k, a) -
               j(k, l) * (d[static_cast<std::size_t>(a)](l, b) - d[static_cast<std::size_t>(b)](l, a));
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

// |u_s + J(u) u_t| / |Du| by central differences of off-grid evaluations.
double fd_residual(const AlmostComplexStructure& J, const Disk& d, cplx zeta) {
  const double h = 1e-4 * d.rho;
  const Vec4 us = (d.point(zeta + h) - d.point(zeta - h)) / (2 * h);
  const Vec4 ut = (d.point(zeta + kI * h) - d.point(zeta - kI * h)) / (2 * h);
  const Vec4 r = us + J.at(to_point(d.point(zeta))) * ut;
  return r.norm() / std::max(us.norm(), ut.norm());
}

// Zero of a holomorphic sampled field near z0 by Newton with complex differences.
cplx newton_zero(const PlanarField& f, cplx z) {
  const double h = 1e-5 * f.grid().rho;
  for (int it = 0; it < 50; ++it) {
    const cplx d = (f.eval(z + h) - f.eval(z - h)) / (2 * h);
    const cplx step = f.eval(z) / d;
    z -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return z;
}

int winding(const PlanarField& f, cplx c, double r) {
  double total = 0.0;
  const int n = 512;
  cplx prev = f.eval(c + r);
  for (int k = 1; k <= n; ++k) {
    const cplx cur = f.eval(c + std::polar(r, 2 * std::numbers::pi * k / n));
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

// Zero of zeta -> h(u(zeta)) by Newton with complex differences.
cplx zero_on_disk(const ComplexExpr& h, const Disk& d, cplx z) {
  auto g = [&](cplx s) {
    const Point4 p = to_point(d.point(s));
    return cplx(h.re(p), h.im(p));
  };
  const double eps = 1e-6 * d.rho;
  for (int it = 0; it < 50; ++it) {
    const cplx der = (g(z + eps) - g(z - eps)) / (2 * eps);
    const cplx step = g(z) / der;
    z -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return z;
}

FamilyOptions small_family() {
  FamilyOptions o;
  o.n_w = 9;
  o.disk.grid = {1.0, 32, 64};
  return o;
}

} // namespace

TEST_CASE("self-dual fixture is a non-integrable structure with a closed anti-invariant form") {
  const ComplexExpr h = parse_complex("w0*(1 + w1)");
  const auto J = self_dual_structure(0.05, h, kBox);
  CHECK(J.square_residual({5, 100, 3}).max_residual <= 1e-12);
  const TwoForm alpha = re_holomorphic_form(h, kBox);
  CHECK(anti_invariance_residual(alpha, J, {5, 100, 3}).max_residual <= 1e-12);
  CHECK(closedness_residual(alpha, {5, 100, 3}).max_residual <= 1e-12);
  CHECK(nijenhuis(J, {0.3, 0.1, -0.2, 0.2}) > 1e-3);
  CHECK((J.at({0, 0, 0.3, -0.1}) - standard_j()).cwiseAbs().maxCoeff() <= 1e-15);

  SUBCASE("least-squares kernel recovers the form") {
    const KernelFit fit = closed_anti_invariant_fit(J, 2);
    CHECK(fit.kernel_dimension == 1);
    CHECK(fit.closedness <= 1e-9);
    const Point4 p{0.21, -0.13, 0.3, 0.05}, q{-0.3, 0.2, -0.1, 0.4};
    const double ratio = fit.alpha.at(p)(0, 2) / alpha.at(p)(0, 2);
    CHECK((fit.alpha.at(p) - ratio * alpha.at(p)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((fit.alpha.at(q) - ratio * alpha.at(q)).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("degree 1 is too small for this form") { CHECK(closed_anti_invariant_fit(J, 1).kernel_dimension == 0); }
}

TEST_CASE("perturbed structure squares to -I and is J0 + eps E_- to first order") {
  std::array<FieldExpr, 16> E;
  E[2] = parse("x1");
  E[7] = parse("x2*x3");
  E[9] = parse("1 + x4");
  const Point4 x{0.2, -0.1, 0.3, 0.1};
  Mat4 Ex = Mat4::Zero();
  for (int i = 0; i < 16; ++i) Ex(i / 4, i % 4) = E[static_cast<std::size_t>(i)](x);
  const Mat4 J0 = standard_j();
  const Mat4 Em = 0.5 * (Ex + J0 * Ex * J0);
  for (double eps : {1e-2, 1e-3}) {
    const auto J = perturbed_structure(eps, E, kBox);
    CHECK(J.square_residual({4, 50, 1}).max_residual <= 1e-12);
    CHECK(((J.at(x) - J0) / eps - Em).cwiseAbs().maxCoeff() <= 5 * eps);
  }
}

TEST_CASE("perturbed fixture: disk deviation and closeness constants") {
  std::array<FieldExpr, 16> E;
  E[2] = parse("x1");
  E[7] = parse("x2*x3");
  E[9] = parse("x4");
  E[13] = parse("sin(x2)");
  const double eps = 0.05, rho = 0.1;
  const auto J = perturbed_structure(eps, E, kBox);
  const Disk d = solve_disk(J, {0, 0, 0, 0}, {1.0, 0.0}, rho);
  CHECK(d.residual <= 1e-6);
  double C = 0.0;
  for (int j = 0; j < d.grid().nr; ++j)
    for (int k = 0; k < d.grid().nt; ++k) {
      const cplx z = d.grid().z(j, k);
      C = std::max(C, (d.at(j, k) - Vec4(z.real(), z.imag(), 0.0, 0.0)).norm() / (eps * rho * std::abs(z)));
    }
  // Regression values measured on the default grid.
  CHECK(C == doctest::Approx(0.185922).epsilon(1e-3));
  const FibreFamily f = fibre_family(J, {0, 0, 0, 0}, {0.0, 1.0}, rho, small_family());
  CHECK(f.z_closeness <= 1.0);
  CHECK(f.z_closeness == doctest::Approx(0.025025).epsilon(1e-3));
}

TEST_CASE("adapted frame") {
  const Mat4 J0 = standard_j();
  CHECK((adapted_frame(J0, {1.0, 0.0}) - Mat4::Identity()).norm() <= 1e-15);
  const Mat4 A = adapted_frame(J0, {0.0, 1.0});
  CHECK(A.col(0).isApprox(Vec4(0, 0, 1, 0)));
  CHECK(A.col(2).isApprox(Vec4(1, 0, 0, 0)));
  Mat4 P;
  P << 1, 0.2, 0, 0.1, 0, 1, 0.3, 0, 0.1, 0, 1, 0, 0, 0.2, 0, 1;
  const Mat4 J = P * J0 * P.inverse();
  const Mat4 B = adapted_frame(J, {cplx(0.3, 0.1), cplx(-0.2, 0.5)});
  CHECK((J * B - B * J0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(adapted_frame(J0, {0.0, 0.0}), ValidationError);
}

TEST_CASE("disks for the standard structure are flat") {
  const auto J = AlmostComplexStructure::standard(kBox);
  const Disk d = solve_disk(J, {0.1, 0.0, -0.2, 0.1}, {0.0, 1.0}, 0.2);
  CHECK(d.residual <= 1e-12);
  CHECK(d.halvings == 0);
  for (cplx z : {cplx(0.0), cplx(0.05, 0.1), cplx(-0.15, 0.02)})
    CHECK((d.point(z) - Vec4(0.1, 0.0, -0.2 + z.real(), 0.1 + z.imag())).norm() <= 1e-12);
}

TEST_CASE("disk for a constant conjugated structure is affine") {
  Mat4 P;
  P << 1, 0.2, 0, 0.1, 0, 1, 0.3, 0, 0.1, 0, 1, 0, 0, 0.2, 0, 1;
  const auto J = AlmostComplexStructure::conjugated(P, kBox);
  const Disk d = solve_disk(J, {0.0, 0.1, 0.0, 0.0}, {1.0, 0.0}, 0.1);
  CHECK(d.residual <= 1e-12);
  const Vec4 c(0.0, 0.1, 0.0, 0.0);
  for (cplx z : {cplx(0.03, 0.04), cplx(-0.07, 0.01)})
    CHECK((d.point(z) - (c + z.real() * d.frame.col(0) + z.imag() * d.frame.col(1))).norm() <= 1e-12);
}

TEST_CASE("disks for the non-integrable fixture") {
  const auto J = self_dual_structure(0.05, parse_complex("w0*(1 + w1)"), kBox);
  const Point4 x{0.1, 0.05, 0.02, -0.03};
  const std::array<cplx, 2> kappa{cplx(0.0), cplx(1.0)};
  const Disk d = solve_disk(J, x, kappa, 0.1);
  CHECK(d.residual <= 1e-6);
  CHECK(d.injectivity > 0.5);
  CHECK((d.point(0.0) - Vec4(x[0], x[1], x[2], x[3])).norm() <= 1e-9);
  for (cplx z : {cplx(0.02, 0.01), cplx(-0.05, 0.06), cplx(0.0, -0.08)}) CHECK(fd_residual(J, d, z) <= 1e-6);
  // The flat disk fails the equation at the same points.
  Disk flat = d;
  flat.u0 = PlanarField::sample(d.grid(), [&](cplx) { return cplx(x[0], x[1]); });
  flat.u1 = PlanarField::sample(d.grid(), [&](cplx z) { return cplx(x[2], x[3]) + z; });
  CHECK(fd_residual(J, flat, cplx(-0.05, 0.06)) > 1e-4);

  SUBCASE("tangent at the center lies in the J-complex line of kappa") {
    const double h = 1e-4;
    const Vec4 us = (d.point(h) - d.point(-h)) / (2 * h);
    const Vec4 v(0, 0, 1, 0);
    Eigen::Matrix<double, 4, 2> L;
    L << v, J.at(x) * v;
    const Vec4 off = us - L * L.colPivHouseholderQr().solve(us);
    CHECK(off.norm() <= 1e-7 * us.norm());
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(solve_disk(J, x, kappa, 0.0), ValidationError);
    CHECK_THROWS_AS(solve_disk(J, {0.9, 0, 0, 0}, kappa, 0.1), ValidationError);
    CHECK_THROWS_AS(solve_disk(J, x, {0.0, 0.0}, 0.1), ValidationError);
  }
}

TEST_CASE("fibre families") {
  SUBCASE("standard structure gives the product family") {
    const auto J = AlmostComplexStructure::standard(kBox);
    const FibreFamily fam = fibre_family(J, {0, 0, 0, 0}, {1.0, 0.0}, 0.1, small_family());
    CHECK(fam.z_closeness <= 1e-12);
    CHECK(fam.min_jacobian == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fam.max_jacobian == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((fam.eval(cplx(0.03, 0.02), cplx(-0.04, 0.05)) - Vec4(0.03, 0.02, -0.04, 0.05)).norm() <= 1e-12);
  }
  SUBCASE("non-integrable fixture") {
    const auto J = self_dual_structure(0.05, parse_complex("w0*(1 + w1)"), kBox);
    const FibreFamily fam = fibre_family(J, {0.1, 0.05, 0.02, -0.03}, {1.0, 0.0}, 0.1, small_family());
    CHECK(fam.max_residual <= 1e-6);
    CHECK(fam.z_closeness <= 1.0);
    CHECK(fam.min_jacobian > 0.5);
    CHECK(fam.continuity < 2.0);
    // Interpolated members are close to directly solved disks.
    const cplx w(0.013, -0.027);
    DiskOptions o = small_family().disk;
    o.transverse = Vec4(fam.frame.col(2));
    const Vec4 c = Vec4(0.1, 0.05, 0.02, -0.03) + fam.frame * to_real(0.0, w);
    const Disk direct = solve_disk(J, to_point(c), to_complex(fam.frame.col(0)), 0.1, o);
    CHECK((fam.eval(cplx(0.04, -0.03), w) - direct.point(cplx(0.04, -0.03))).norm() <= 1e-7);
  }
}

TEST_CASE("normalized charts") {
  SUBCASE("standard structure gives the identity chart") {
    const auto J = AlmostComplexStructure::standard(kBox);
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, {0, 0, 0, 0}, {1.0, 0.0}, 0.1, small_family()));
    DiskOptions o;
    o.grid = {1.0, 32, 64};
    const Disk u = solve_disk(J, {0, 0, 0, 0}, {0.0, 1.0}, 0.08, o);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    CHECK(ch.transversality_deg == doctest::Approx(90.0));
    for (cplx xi : {cplx(0.0), cplx(0.02, -0.01)})
      for (cplx z : {cplx(0.01, 0.03), cplx(-0.05, 0.02)})
        CHECK((ch.psi(xi, z) - Vec4(xi.real(), xi.imag(), z.real(), z.imag())).norm() <= 1e-9);
    CHECK(ch.max_b <= 1e-9);
  }
  SUBCASE("fixture: pulled-back structure is J0 along the disk") {
    const auto J = self_dual_structure(0.05, parse_complex("w0*(1 + w1)"), kBox);
    const Point4 o{0.1, 0.05, 0.02, -0.03};
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, o, {1.0, 0.0}, 0.1, small_family()));
    DiskOptions dopt;
    dopt.grid = {1.0, 32, 64};
    const Disk u = solve_disk(J, o, {0.0, 1.0}, 0.05, dopt);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    CHECK(ch.inversion_residual <= 1e-12);
    CHECK(ch.max_b <= 1e-6);
    CHECK(ch.max_a_err <= 1e-6);
    CHECK(ch.max_a2_err <= 1e-6);
    CHECK((ch.psi(0.0, cplx(0.01, 0.02)) - u.point(cplx(0.01, 0.02))).norm() <= 1e-9);
  }
  SUBCASE("rotated family") {
    const auto J = self_dual_structure(0.05, parse_complex("w0*(1 + w1)"), kBox);
    const Point4 o{0.1, 0.05, 0.02, -0.03};
    const double s = 1 / std::sqrt(2.0);
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, o, {s, s}, 0.1, small_family()));
    DiskOptions dopt;
    dopt.grid = {1.0, 32, 64};
    const Disk u = solve_disk(J, o, {s, -s}, 0.05, dopt);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    CHECK(ch.max_b <= 1e-6);
    CHECK(ch.max_a_err <= 1e-6);
    CHECK(ch.max_a2_err <= 1e-6);
  }
  SUBCASE("disk tangent to the fibres is rejected") {
    const auto J = AlmostComplexStructure::standard(kBox);
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, {0, 0, 0, 0}, {1.0, 0.0}, 0.1, small_family()));
    const Disk u = solve_disk(J, {0, 0, 0, 0}, {1.0, 0.1}, 0.05);
    CHECK_THROWS_AS(normalize_along_disk(J, u, fam), ValidationError);
  }
}

TEST_CASE("trivialization along disks") {
  SUBCASE("standard structure: zeros of F are the zeros of h on the disk") {
    const auto J = AlmostComplexStructure::standard(kBox);
    const Point4 c{0.012, -0.008, 0.0004, 0.0};
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, c, {0.0, 1.0}, 0.1, small_family()));
    const Disk u = solve_disk(J, c, {1.0, 0.0}, 0.1);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    struct Case {
      const char* h;
      std::vector<std::pair<cplx, int>> zeros;  // in the disk parameter
    };
    // On the disk w0 = c0 + zeta, w1 = c1.
    const cplx c0(0.012, -0.008);
    const std::vector<Case> cases{{"1", {}},
                                  {"w0", {{-c0, 1}}},
                                  {"w0*w1", {{-c0, 1}}},
                                  {"w0*w0 - w1", {{std::sqrt(cplx(0.0004)) - c0, 1}, {-std::sqrt(cplx(0.0004)) - c0, 1}}},
                                  {"pow(w0, 3)", {{-c0, 3}}}};
    for (const Case& k : cases) {
      CAPTURE(k.h);
      const TwoForm alpha = re_holomorphic_form(parse_complex(k.h), kBox);
      const TrivializedSection t = trivialize_alpha(alpha, J, ch);
      CHECK(t.theorem_residual <= 1e-9);
      CHECK(t.reconstruction <= 1e-12);
      const PlanarField& F = t.carleman.sigma;
      CHECK(t.carleman.sigma_residual <= 1e-3);
      int total = 0;
      for (const auto& [z, m] : k.zeros) {
        if (std::abs(z) > 0.8 * t.carleman.delta) continue;
        CHECK(std::abs(newton_zero(F, z + cplx(1e-3, 5e-4)) - z) <= 1e-6);
        CHECK(winding(F, z, 0.004) == m);
        total += m;
      }
      CHECK(winding(F, 0.0, 0.9 * t.carleman.delta) == total);
    }
  }
  SUBCASE("non-integrable fixture") {
    const ComplexExpr h = parse_complex("w0*(1 + w1)");
    const auto J = self_dual_structure(0.05, h, kBox);
    const Point4 o{0.01, -0.005, 0.02, -0.03};
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, o, {0.0, 1.0}, 0.1, small_family()));
    const Disk u = solve_disk(J, o, {1.0, 0.0}, 0.08);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    const TrivializedSection t = trivialize_alpha(re_holomorphic_form(h, kBox), J, ch);
    CHECK(t.theorem_residual <= 1e-3);
    CHECK(t.system.c2.sup_norm() > 1e-3);  // the system is genuinely non-holomorphic
    CHECK(t.carleman.sigma_residual <= 1e-3);
    const cplx z = zero_on_disk(h, u, 0.0);
    REQUIRE(std::abs(z) < 0.5 * t.carleman.delta);
    CHECK(std::abs(newton_zero(t.carleman.sigma, z + cplx(1e-3, 0.0)) - z) <= 1e-6);
    CHECK(winding(t.carleman.sigma, z, 0.004) == 1);
  }
  SUBCASE("section vanishing on the whole disk") {
    const auto J = AlmostComplexStructure::standard(kBox);
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, {0, 0, 0, 0}, {0.0, 1.0}, 0.1, small_family()));
    const Disk u = solve_disk(J, {0, 0, 0, 0}, {1.0, 0.0}, 0.1);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    const TrivializedSection t = trivialize_alpha(re_holomorphic_form(parse_complex("w1"), kBox), J, ch);
    CHECK(t.identically_zero);
  }
  SUBCASE("inputs that are not closed or not anti-invariant are rejected") {
    const auto J = AlmostComplexStructure::standard(kBox);
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, {0, 0, 0, 0}, {0.0, 1.0}, 0.1, small_family()));
    const Disk u = solve_disk(J, {0, 0, 0, 0}, {1.0, 0.0}, 0.1);
    const NormalizedChart ch = normalize_along_disk(J, u, fam);
    const TwoForm not_closed = TwoForm::basis(1, 3, 1.0, kBox) * parse("x2");
    CHECK_THROWS_AS(trivialize_alpha(not_closed, J, ch), ValidationError);
    CHECK_THROWS_AS(trivialize_alpha(TwoForm::basis(1, 2, 1.0, kBox), J, ch), ValidationError);
  }
}
