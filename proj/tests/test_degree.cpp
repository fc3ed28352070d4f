#include "doctest.h"

#include "jhol/degree.hpp"
#include "jhol/errors.hpp"

#include <cmath>
#include <random>

using namespace jhol;

namespace {

// Number of roots of a holomorphic polynomial inside the unit disk, from the
// eigenvalues of its companion matrix. coeffs[k] multiplies z^k.
int roots_inside(const std::vector<cplx>& coeffs) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[static_cast<std::size_t>(n)];
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(C).eigenvalues();
  int inside = 0;
  for (int i = 0; i < n; ++i) inside += std::abs(ev(i)) < 1.0;
  return inside;
}

double min_root_distance_to_circle(const std::vector<cplx>& coeffs) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[static_cast<std::size_t>(n)];
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(C).eigenvalues();
  double d = 1e300;
  for (int i = 0; i < n; ++i) d = std::min(d, std::abs(std::abs(ev(i)) - 1.0));
  return d;
}

ZZbarPolynomial holomorphic(const std::vector<cplx>& coeffs) {
  ZZbarPolynomial p;
  for (std::size_t k = 0; k < coeffs.size(); ++k) p.terms.push_back({static_cast<int>(k), 0, coeffs[k]});
  return p;
}

ZZbarPolynomial monomial(int a, int b) { return ZZbarPolynomial{{{a, b, 1.0}}}; }

} // namespace

TEST_CASE("quoted multiplicities") {
  for (int k = 1; k <= 5; ++k) CHECK(winding_degree(monomial(k, 0).map()).degree == k);
  CHECK(winding_degree(monomial(0, 1).map()).degree == -1);
  CHECK(winding_degree(monomial(0, 2).map()).degree == -2);
  CHECK(winding_degree(monomial(1, 1).map()).degree == 0);
  CHECK(winding_degree(planar_from_text("x*x+y*y", "0")).degree == 0);
}

TEST_CASE("admissibility") {
  CHECK(is_admissible(monomial(1, 0).map()).admissible);
  const Admissibility a = is_admissible(planar_from_text("x", "0"));
  CHECK_FALSE(a.admissible);
  CHECK(a.margin <= 0.0);
  const Admissibility b = is_admissible(monomial(1, 1).map());
  CHECK(b.admissible);
  CHECK(b.margin > 0.9);
  CHECK_THROWS_AS(winding_degree(planar_from_text("x", "0")), ValidationError);
  // A zero on the boundary is never certified.
  CHECK_FALSE(is_admissible(planar_from_complex([](cplx z) { return z - 1.0; })).admissible);
}

TEST_CASE("perturbation example for |z|^2") {
  const cplx eps(0.1, 0.05);
  ZZbarPolynomial u = monomial(1, 1);
  u.terms.push_back({1, 0, eps});
  const auto zeros = locate_zeros<2>(u.map());
  REQUIRE(zeros.size() == 2);
  int plus = 0, minus = 0;
  for (const auto& z : zeros) {
    const cplx p(z.location(0), z.location(1));
    if (z.sign > 0) {
      ++plus;
      CHECK(std::abs(p) <= 1e-9);
      CHECK(z.det == doctest::Approx(std::norm(eps)));
    } else {
      ++minus;
      CHECK(std::abs(p + std::conj(eps)) <= 1e-9);
      CHECK(z.det == doctest::Approx(-std::norm(eps)));
    }
  }
  CHECK(plus == 1);
  CHECK(minus == 1);
  CHECK(perturb_sign_count(monomial(1, 1).map(), 0).degree == 0);
}

TEST_CASE("perturbed counts") {
  const SignCount<2> one = perturb_sign_count(monomial(1, 0).map(), 3);
  CHECK(one.degree == 1);
  CHECK(one.zeros.size() == 1);
  CHECK(one.delta == doctest::Approx(one.margin / 10));
  const SignCount<2> two = perturb_sign_count(monomial(2, 0).map(), 3);
  CHECK(two.degree == 2);
  REQUIRE(two.zeros.size() == 2);
  for (const auto& z : two.zeros) CHECK(z.sign == 1);
  for (const auto& z : two.zeros) CHECK(two.zeros[0].location != two.zeros[1].location);
}

TEST_CASE("degree on balls") {
  BallMap<3> id;
  id.f = [](const Eigen::Vector3d& p) { return p; };
  id.jac = [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Identity(); };
  CHECK(degree_ball_n<3>(id, 0).degree == 1);
  BallMap<3> refl;
  refl.f = [](const Eigen::Vector3d& p) { return Eigen::Vector3d(p(0), p(1), -p(2)); };
  CHECK(degree_ball_n<3>(refl, 0).degree == -1);
  // A map with two zeros of opposite sign: (x^2 - 1/4, y, z).
  BallMap<3> fold;
  fold.f = [](const Eigen::Vector3d& p) { return Eigen::Vector3d(p(0) * p(0) - 0.25, p(1), p(2)); };
  const SignCount<3> f = degree_ball_n<3>(fold, 1);
  CHECK(f.degree == 0);
  CHECK(f.zeros.size() == 2);
  const PlanarMap cube = monomial(3, 0).map();
  CHECK(degree_ball_n<2>(cube, 0).degree == 3);
  CHECK(winding_degree(cube).degree == 3);
}

TEST_CASE("holomorphic polynomials match root counting") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01(0.0, 1.0);
  int tested = 0;
  while (tested < 25) {
    const int deg = 1 + static_cast<int>(rng() % 4);
    std::vector<cplx> c;
    for (int k = 0; k <= deg; ++k) c.emplace_back(n01(rng), n01(rng));
    if (min_root_distance_to_circle(c) < 0.05) continue;
    const PlanarMap u = holomorphic(c).map();
    if (!is_admissible(u).admissible) continue;
    const int oracle = roots_inside(c);
    CHECK(winding_degree(u).degree == oracle);
    const SignCount<2> s = perturb_sign_count(u, static_cast<std::uint64_t>(tested));
    CHECK(s.degree == oracle);
    for (const auto& z : s.zeros) CHECK(z.sign == 1);
    CHECK(winding_degree(conjugate_map(u)).degree == -oracle);
    CHECK(winding_degree(compose_rotation(u, 0.7 * tested)).degree == oracle);
    ++tested;
  }
}

TEST_CASE("certified winding is stable under refinement") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const PlanarMap u = random_zzbar_polynomial(rng(), 3).map();
    if (!is_admissible(u).admissible) continue;
    WindingOptions coarse, fine;
    fine.initial_samples = 2 * coarse.initial_samples;
    fine.boundary_samples = 2 * coarse.boundary_samples;
    CHECK(winding_degree(u, coarse).degree == winding_degree(u, fine).degree);
  }
}

TEST_CASE("axiom checks") {
  CHECK(check_nonvanishing(planar_from_complex([](cplx z) { return z + 5.0; }), "z+5").passed);
  const AxiomCheck c = check_composition(planar_from_complex([](cplx z) { return z + 0.2; }), 2, "z+0.2");
  CHECK(c.passed);
  CHECK(c.detail.find("I(u o z^2) = 2") != std::string::npos);
  const AxiomCheck a = check_additivity(factor_map({{0.0, 1}, {0.5, 1}}), {{0.0, 0.2}, {0.5, 0.2}}, "two");
  CHECK(a.hypothesis_ok);
  CHECK(a.passed);
  // Missing a zero violates the hypothesis and is reported as a skip.
  const AxiomCheck s = check_additivity(factor_map({{0.0, 1}, {0.5, 1}}), {{0.0, 0.2}}, "one");
  CHECK_FALSE(s.hypothesis_ok);
  CHECK(check_normalization(4, {0.1, -0.2}, "pow4").passed);
  const AxiomReport r = axiom_suite(default_axiom_battery(1, 4));
  for (int ax = 1; ax <= 5; ++ax) {
    CHECK(r.instances(ax) == 4);
    CHECK(r.failures(ax) == 0);
  }
}
