#include "jhol/cli/commands.hpp"
#include "jhol/cr_solver.hpp"
#include "jhol/degree.hpp"
#include "jhol/errors.hpp"
#include "jhol/fixtures.hpp"
#include "jhol/jdisks.hpp"
#include "jhol/zero_divisor.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace jhol;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

const Box kBox{{-0.5, -0.5, -0.5, -0.5}, {0.5, 0.5, 0.5, 0.5}};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Winding of f on the circle |z - c| = r from 4096 samples.
int circle_winding(const std::function<cplx(cplx)>& f, cplx c, double r) {
  const int n = 4096;
  double total = 0.0;
  cplx prev = f(c + r);
  for (int k = 1; k <= n; ++k) {
    const cplx cur = f(c + std::polar(r, 2.0 * std::numbers::pi * k / n));
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// Roots of a polynomial p of degree <= 8, from its values on |z| = R.
std::vector<std::pair<cplx, int>> polynomial_roots(const std::function<cplx(cplx)>& p, double R) {
  const int n = 16;
  std::vector<cplx> a(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double t = 2.0 * std::numbers::pi * j / n;
      a[static_cast<std::size_t>(k)] += p(std::polar(R, t)) * std::polar(1.0, -k * t) / static_cast<double>(n);
    }
  double scale = 0.0;
  for (int k = 0; k < n; ++k) {
    a[static_cast<std::size_t>(k)] /= std::pow(R, k);
    scale = std::max(scale, std::abs(a[static_cast<std::size_t>(k)]));
  }
  int deg = n - 1;
  while (deg > 0 && std::abs(a[static_cast<std::size_t>(deg)]) <= 1e-10 * scale) --deg;
  std::vector<std::pair<cplx, int>> roots;
  if (deg == 0) return roots;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) C(i, deg - 1) = -a[static_cast<std::size_t>(i)] / a[static_cast<std::size_t>(deg)];
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(C).eigenvalues();
  for (int i = 0; i < deg; ++i) {
    bool merged = false;
    for (auto& [z, m] : roots)
      if (std::abs(z - ev[i]) < 1e-5) {
        z = (z * static_cast<double>(m) + ev[i]) / static_cast<double>(m + 1);
        ++m;
        merged = true;
      }
    if (!merged) roots.emplace_back(ev[i], 1);
  }
  return roots;
}

// Newton for a zero of multiplicity m of a holomorphic sampled field.
cplx polish_zero(const PlanarField& f, cplx z, int m) {
  const double h = 1e-5 * f.grid().rho;
  for (int it = 0; it < 60; ++it) {
    const cplx d = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
    if (std::abs(d) == 0.0) break;
    const cplx step = static_cast<double>(m) * f.eval(z) / d;
    z -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return z;
}

// 1. Multiplicities of the model maps.
Outcome criterion1() {
  struct Case {
    std::string name;
    std::function<cplx(cplx)> f;
    int expected;
  };
  std::vector<Case> cases;
  for (int k = 1; k <= 5; ++k) cases.push_back({"z^" + std::to_string(k), [k](cplx z) { return std::pow(z, k); }, k});
  cases.push_back({"conj(z)", [](cplx z) { return std::conj(z); }, -1});
  cases.push_back({"conj(z)^2", [](cplx z) { return std::conj(z * z); }, -2});
  cases.push_back({"|z|^2", [](cplx z) { return cplx(std::norm(z), 0.0); }, 0});
  Outcome o{true, ""};
  double slowest = 0.0;
  for (const Case& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const int d = winding_degree(planar_from_complex(c.f)).degree;
    const double t = seconds_since(t0);
    slowest = std::max(slowest, t);
    o.detail += c.name + "=" + std::to_string(d) + " ";
    if (d != c.expected || t > 1.0) o.passed = false;
  }
  o.detail += "(slowest " + num(slowest) + " s, limit 1 s)";
  return o;
}

// 2. Winding against signed perturbed counts.
Outcome criterion2() {
  int compared = 0, skipped = 0, mismatched = 0;
  for (std::uint64_t seed = 0; compared < 200; ++seed) {
    const PlanarMap u = random_zzbar_polynomial(seed, 3).map();
    if (!is_admissible(u).admissible) {
      ++skipped;
      continue;
    }
    ++compared;
    if (winding_degree(u).degree != perturb_sign_count(u, seed).degree) ++mismatched;
  }
  return {mismatched == 0, std::to_string(compared) + " compared, " + std::to_string(mismatched) + " mismatches, " +
                               std::to_string(skipped) + " skipped (skip rate " + num(skipped / static_cast<double>(compared + skipped)) + ")"};
}

// 3. Axiom battery.
Outcome criterion3() {
  const AxiomReport r = axiom_suite(default_axiom_battery(0, 20));
  Outcome o{true, ""};
  for (int a = 1; a <= 5; ++a) {
    o.detail += "axiom " + std::to_string(a) + ": " + std::to_string(r.instances(a)) + "/" +
                std::to_string(r.failures(a)) + "f ";
    if (r.instances(a) < 20 || r.failures(a) != 0) o.passed = false;
  }
  return o;
}

// Random smooth coefficient strings built from monomials and elementary functions.
std::string random_coefficient(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> var(1, 4), kind(0, 4);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  std::ostringstream os;
  os.precision(6);
  for (int t = 0; t < 3; ++t) {
    const int i = var(rng), j = var(rng);
    os << (t ? " + " : "") << "(" << c(rng) << ")*";
    switch (kind(rng)) {
      case 0: os << "x" << i; break;
      case 1: os << "x" << i << "*x" << j; break;
      case 2: os << "sin(x" << i << ")"; break;
      case 3: os << "exp(0.5*x" << i << ")"; break;
      default: os << "cos(x" << i << "*x" << j << ")"; break;
    }
  }
  return os.str();
}

// 4. Splitting algebra on three structures, each with its compatible form.
Outcome criterion4() {
  Mat4 P;
  P << 1, 0.2, 0, 0.1, 0, 1, 0.3, 0, 0.1, 0, 1, 0, 0, 0.2, 0, 1;
  const Mat4 Om0 = TwoForm::basis(1, 2).at({0, 0, 0, 0}) + TwoForm::basis(3, 4).at({0, 0, 0, 0});
  const Mat4 Pinv = P.inverse();
  const AlmostComplexStructure sd = self_dual_structure(0.05, parse_complex("w0*(1 + w1)"), kBox);
  // For a Euclidean-orthogonal J the compatible form is Omega_ij = J_ji.
  const TwoForm sd_omega({sd.entry(1, 0), sd.entry(2, 0), sd.entry(3, 0), sd.entry(2, 1), sd.entry(3, 1), sd.entry(3, 2)},
                         kBox);
  const std::vector<std::pair<AlmostComplexStructure, TwoForm>> structures{
      {AlmostComplexStructure::standard(kBox), TwoForm::constant(Om0, kBox)},
      {AlmostComplexStructure::conjugated(P, kBox), TwoForm::constant(Pinv.transpose() * Om0 * Pinv, kBox)},
      {sd, sd_omega}};
  std::vector<Metric> metrics;
  for (const auto& [J, w] : structures) metrics.push_back(compatible_metric(J, w, {5, 100, 1}));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  std::vector<Point4> pts(1000);
  for (auto& p : pts) p = {U(rng), U(rng), U(rng), U(rng)};
  double sum = 0.0, plus = 0.0, minus = 0.0, square = 0.0, self_dual = 0.0;
  for (int f = 0; f < 50; ++f) {
    std::array<FieldExpr, 6> c;
    for (auto& e : c) e = parse(random_coefficient(rng));
    const TwoForm alpha(c, kBox);
    const std::size_t s = static_cast<std::size_t>(f % 3);
    const AlmostComplexStructure& J = structures[s].first;
    const FormSplit sp = split_form(alpha, J);
    for (const Point4& x : pts) {
      const Mat4 Jx = J.at(x), a = alpha.at(x), ap = sp.invariant.at(x), am = sp.anti_invariant.at(x);
      sum = std::max(sum, (ap + am - a).cwiseAbs().maxCoeff());
      plus = std::max(plus, (Jx.transpose() * ap * Jx - ap).cwiseAbs().maxCoeff());
      minus = std::max(minus, (Jx.transpose() * am * Jx + am).cwiseAbs().maxCoeff());
      const Mat4 jam = Jx.transpose() * am;
      square = std::max(square, (Jx.transpose() * jam + am).cwiseAbs().maxCoeff());
      self_dual = std::max(self_dual, (hodge_star(am, metrics[s].at(x)) - am).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = sum <= 1e-12 && plus <= 1e-9 && minus <= 1e-9 && square <= 1e-9 && self_dual <= 1e-9;
  return {ok, "sum " + num(sum) + " (1e-12), eigenspaces " + num(std::max(plus, minus)) + " (1e-9), J^2 " + num(square) +
                  " (1e-9), self-dual " + num(self_dual) + " (1e-9)"};
}

// 5. Manufactured Carleman problems.
Outcome criterion5() {
  int failures = 0, zeros = 0;
  double worst_res = 0.0, min_phi = 1e300;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ManufacturedCR m = manufactured_cr(seed);
    const CarlemanResult r = carleman_factor(m.v, m.system);
    bool ok = r.sigma_residual <= 1e-3 && r.min_abs_phi >= 1e-8;
    worst_res = std::max(worst_res, r.sigma_residual);
    min_phi = std::min(min_phi, r.min_abs_phi);
    for (const auto& [z, mult] : m.zeros) {
      double sep = 0.04;
      for (const auto& [w, k] : m.zeros)
        if (w != z) sep = std::min(sep, 0.5 * std::abs(w - z));
      ok = ok && std::abs(z) + sep < r.delta &&
           circle_winding([&](cplx s) { return r.sigma.eval(s); }, z, sep) == mult;
      ++zeros;
    }
    if (!ok) ++failures;
  }
  return {failures == 0, "20 problems, " + std::to_string(zeros) + " zeros, " + std::to_string(failures) +
                             " failures; max dbar residual " + num(worst_res) + " (1e-3), min |Phi| " + num(min_phi) +
                             " (1e-8)"};
}

// 6. Disk solver: flat disks for J0, perturbed fixture disks and families.
Outcome criterion6() {
  Outcome o{true, ""};
  const auto J0 = AlmostComplexStructure::standard(kBox);
  double flat_res = 0.0, flat_dev = 0.0;
  for (const auto& [c, kappa] : std::vector<std::pair<Point4, std::array<cplx, 2>>>{
           {{0.1, 0.0, -0.2, 0.1}, {0.0, 1.0}},
           {{0.0, 0.05, 0.0, 0.0}, {1.0, 0.5}},
           {{-0.1, 0.1, 0.05, 0.0}, {cplx(0.3, 0.4), cplx(0.0, -1.0)}}}) {
    const Disk d = solve_disk(J0, c, kappa, 0.1);
    flat_res = std::max(flat_res, d.residual);
    const Vec4 cv(c[0], c[1], c[2], c[3]);
    for (cplx z : {cplx(0.03, 0.04), cplx(-0.07, 0.01), cplx(0.0, -0.09)})
      flat_dev = std::max(flat_dev, (d.point(z) - (cv + z.real() * d.frame.col(0) + z.imag() * d.frame.col(1))).norm());
  }
  o.passed = flat_res <= 1e-12 && flat_dev <= 1e-12;
  o.detail = "J0 residual " + num(flat_res) + " (1e-12), flatness " + num(flat_dev) + "; ";

  std::array<FieldExpr, 16> E;
  E[2] = parse("x1");
  E[7] = parse("x2*x3");
  E[9] = parse("x4");
  E[13] = parse("sin(x2)");
  const double eps = 0.05, rho = 0.1;
  const auto J = perturbed_structure(eps, E, kBox);
  const Disk d = solve_disk(J, {0, 0, 0, 0}, {1.0, 0.0}, rho);
  double C = 0.0;
  for (int j = 0; j < d.grid().nr; ++j)
    for (int k = 0; k < d.grid().nt; ++k) {
      const cplx z = d.grid().z(j, k);
      const Vec4 flat(z.real(), z.imag(), 0.0, 0.0);
      C = std::max(C, (d.at(j, k) - flat).norm() / (eps * rho * std::abs(z)));
    }
  o.passed = o.passed && d.residual <= 1e-6;
  o.detail += "perturbed disk residual " + num(d.residual) + " (1e-6), C " + num(C) + "; ";

  const auto t0 = std::chrono::steady_clock::now();
  const FibreFamily f = fibre_family(J, {0, 0, 0, 0}, {0.0, 1.0}, rho);
  const double t = seconds_since(t0);
  const Mat4 Ainv = f.frame.inverse();
  double ratio = 0.0;
  const PolarGrid& g = f.disks.front().grid();
  for (int a = 0; a < f.n_w; ++a)
    for (int b = 0; b < f.n_w; ++b) {
      const Disk& q = f.disks[static_cast<std::size_t>(a * f.n_w + b)];
      const cplx w(f.w_node(a), f.w_node(b));
      for (int j = 0; j < g.nr; ++j)
        for (int k = 0; k < g.nt; ++k) {
          const cplx xi = g.z(j, k);
          const Vec4 y = Ainv * q.at(j, k);
          ratio = std::max(ratio, (y - Vec4(xi.real(), xi.imag(), w.real(), w.imag())).norm() / (rho * std::abs(xi)));
        }
    }
  const bool fam_ok = f.max_residual <= 1e-6 && f.z_closeness <= 1.0 && ratio <= f.z_closeness * (1.0 + 1e-9) && t <= 300.0;
  o.passed = o.passed && fam_ok;
  o.detail += std::to_string(f.n_w) + "^2 family: residual " + num(f.max_residual) + ", z " + num(f.z_closeness) +
              ", full-grid ratio " + num(ratio) + ", " + num(t) + " s (300 s)";
  return o;
}

// 7. Trivialization along flat disks for the integrable fixtures.
Outcome criterion7() {
  const auto J = AlmostComplexStructure::standard(kBox);
  const std::vector<std::pair<Point4, std::array<cplx, 2>>> disks{
      {{0.012, -0.008, 0.0004, 0.0}, {1.0, 0.0}},
      {{0.01, 0.005, 0.003, -0.002}, {1.0, 0.5}},
      {{-0.006, 0.01, -0.004, 0.008}, {cplx(0.6, 0.2), cplx(0.3, -0.4)}},
      {{0.015, 0.0, 0.02, 0.01}, {1.0, -1.0}},
      {{0.0, -0.012, -0.01, 0.005}, {cplx(0.5, 0.5), cplx(1.0, 0.0)}}};
  const std::vector<std::string> hs{"1", "w0", "w0*w1", "w0*w0 - w1"};
  FamilyOptions fo;
  fo.n_w = 9;
  fo.disk.grid = {1.0, 32, 64};
  int runs = 0, failures = 0, matched = 0;
  double worst_res = 0.0, worst_loc = 0.0;
  for (const auto& [c, kappa] : disks) {
    const double nk = std::sqrt(std::norm(kappa[0]) + std::norm(kappa[1]));
    const std::array<cplx, 2> normal{-std::conj(kappa[1]) / nk, std::conj(kappa[0]) / nk};
    auto fam = std::make_shared<FibreFamily>(fibre_family(J, c, normal, 0.1, fo));
    const Disk d = solve_disk(J, c, kappa, 0.1);
    const NormalizedChart ch = normalize_along_disk(J, d, fam);
    const Vec4 p0 = d.point(0.0), p1 = (d.point(1e-3) - p0) / 1e-3, pi = (d.point(cplx(0.0, 1e-3)) - p0) / 1e-3;
    const cplx w0(p0[0], p0[1]), w1(p0[2], p0[3]), v0(p1[0], p1[1]), v1(p1[2], p1[3]);
    const bool holomorphic_param = std::abs(cplx(pi[0], pi[1]) - cplx(0, 1) * v0) + std::abs(cplx(pi[2], pi[3]) - cplx(0, 1) * v1) < 1e-9;
    for (const std::string& hs_text : hs) {
      ++runs;
      const ComplexExpr h = parse_complex(hs_text);
      const TrivializedSection t = trivialize_alpha(re_holomorphic_form(h, kBox), J, ch);
      const auto restricted = [&](cplx z) {
        const Point4 x{(w0 + v0 * z).real(), (w0 + v0 * z).imag(), (w1 + v1 * z).real(), (w1 + v1 * z).imag()};
        return cplx(h.re(x), h.im(x));
      };
      const PlanarField& F = t.carleman.sigma;
      const double R = 0.9 * t.carleman.delta;
      bool ok = holomorphic_param && t.theorem_residual <= 1e-3 && t.carleman.sigma_residual <= 1e-3;
      worst_res = std::max(worst_res, t.theorem_residual);
      int inside = 0;
      for (const auto& [z, m] : polynomial_roots(restricted, 0.05)) {
        if (std::abs(std::abs(z) - R) < 0.01 * R) ok = false;  // ambiguous against the boundary circle
        if (std::abs(z) >= R) continue;
        inside += m;
        double sep = R - std::abs(z);
        for (const auto& [y, k] : polynomial_roots(restricted, 0.05))
          if (y != z) sep = std::min(sep, std::abs(y - z));
        const cplx zf = polish_zero(F, z + 0.1 * sep * cplx(0.3, 0.2), m);
        worst_loc = std::max(worst_loc, std::abs(zf - z));
        ok = ok && std::abs(zf - z) <= 1e-6 &&
             circle_winding([&](cplx s) { return F.eval(s); }, z, std::min(0.004, 0.5 * sep)) == m;
        ++matched;
      }
      ok = ok && circle_winding([&](cplx s) { return F.eval(s); }, 0.0, R) == inside;
      if (!ok) ++failures;
    }
  }
  return {failures == 0, std::to_string(runs) + " (h, disk) pairs, " + std::to_string(matched) + " zeros matched, " +
                             std::to_string(failures) + " failures; max CR residual " + num(worst_res) +
                             " (1e-3), max location error " + num(worst_loc) + " (1e-6)"};
}

// 8. Positivity and precomposition on J-holomorphic disks meeting Z.
Outcome criterion8() {
  struct Fixture {
    std::string name;
    TwoForm alpha;
    AlmostComplexStructure J;
    std::vector<TestDisk> disks;
  };
  std::vector<Fixture> fixtures;
  const auto J0 = AlmostComplexStructure::standard(kBox);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // Flat complex disks through random points of {h = 0}.
  for (const std::string& h : {"w0", "w0*w1", "w0*w0 - w1", "pow(w0, 3)"}) {
    Fixture f{h, re_holomorphic_form(parse_complex(h), kBox), J0, {}};
    for (int i = 0; i < 10; ++i) {
      const cplx b(0.2 * U(rng), 0.2 * U(rng));
      const cplx a = std::string(h) == "w0*w0 - w1" ? std::sqrt(b) : cplx(0.0);
      const std::array<cplx, 2> kappa{cplx(1.0, 0.3 * U(rng)), cplx(0.5 * U(rng), 0.5 * U(rng))};
      const cplx shift(0.02 * U(rng), 0.02 * U(rng));
      f.disks.push_back(flat_disk({(a + shift).real(), (a + shift).imag(), b.real(), b.imag()}, kappa, 0.1,
                                  h + " disk " + std::to_string(i)));
      f.disks.back().j_holomorphic = true;
    }
    fixtures.push_back(std::move(f));
  }
  {
    const ComplexExpr h = parse_complex("w0*(1 + w1)");
    const auto J = self_dual_structure(0.05, h, kBox);
    Fixture f{"non-integrable", re_holomorphic_form(h, kBox), J, {}};
    for (const auto& [x, kappa] : std::vector<std::pair<Point4, std::array<cplx, 2>>>{
             {{0.01, -0.005, 0.02, -0.03}, {1.0, 0.0}},
             {{0.0, 0.01, 0.05, 0.02}, {1.0, 0.5}},
             {{-0.01, 0.0, -0.1, 0.1}, {cplx(0.8, 0.1), cplx(-0.2, 0.3)}}}) {
      const Disk d = solve_disk(J, x, kappa, 0.08);
      f.disks.push_back(from_solved_disk(d, "solved"));
      f.disks.back().j_holomorphic = true;
    }
    fixtures.push_back(std::move(f));
  }
  int meeting = 0, positive = 0, skipped = 0, composed = 0, composed_ok = 0;
  for (const Fixture& f : fixtures)
    for (const TestDisk& s : f.disks) {
      IntersectionReport r;
      try {
        r = intersection_index(f.alpha, f.J, s);
      } catch (const ValidationError&) {
        ++skipped;  // not certifiably admissible
        continue;
      }
      if (r.zeros.empty()) continue;
      ++meeting;
      if (r.total >= 1) ++positive;
      for (int k : {2, 3}) {
        ++composed;
        if (intersection_index(f.alpha, f.J, precompose_power(s, k)).total == k * r.total) ++composed_ok;
      }
    }
  return {meeting > 0 && positive == meeting && composed_ok == composed,
          std::to_string(positive) + "/" + std::to_string(meeting) + " disks meeting Z with I >= 1, " +
              std::to_string(composed_ok) + "/" + std::to_string(composed) + " precompositions exact, " +
              std::to_string(skipped) + " not admissible"};
}

// 9. Zero-set geometry.
Outcome criterion9() {
  Outcome o{true, ""};
  const auto J0 = AlmostComplexStructure::standard(kBox);
  for (const std::string& h : {"w0", "w0*w1"}) {
    const ZeroSetSample z = trace_zero_set(re_holomorphic_form(parse_complex(h), kBox), J0, kBox);
    const BoxDimension d = box_dimension(z);
    double lo = 1e300, hi = 0.0;
    for (const auto& c : z.counts) {
      const double e = c.epsilon / kBox.max_side();
      lo = std::min(lo, static_cast<double>(c.occupied) * e * e);
      hi = std::max(hi, static_cast<double>(c.occupied) * e * e);
    }
    const bool ok = d.slope >= 1.8 && d.slope <= 2.2 && hi <= 2.0 * lo;
    o.passed = o.passed && ok;
    o.detail += h + ": slope " + num(d.slope) + ", N eps^2 in [" + num(lo) + ", " + num(hi) + "]; ";
  }
  int empty = 0, total = 0;
  for (const std::string& h : {"w0", "w0*w1", "w0*w0 - w1", "pow(w0, 3)", "w0*(1 + w1)", "w0 - w1*w1*w1"}) {
    ++total;
    if (interior_emptiness_check(re_holomorphic_form(parse_complex(h), kBox), kBox, 8).empty_interior) ++empty;
  }
  o.passed = o.passed && empty == total;
  o.detail += "empty interior " + std::to_string(empty) + "/" + std::to_string(total);
  return o;
}

// 10. Hartogs extension across xi = 0.
Outcome criterion10() {
  using F = std::function<cplx(cplx, cplx)>;
  using V = std::function<cplx(cplx)>;
  const std::vector<std::pair<F, V>> families{
      {[](cplx x, cplx w) { return std::sin(x) / x * (1.0 + w); }, [](cplx w) { return 1.0 + w; }},
      {[](cplx x, cplx w) { return (std::exp(x) - 1.0) / x + w; }, [](cplx w) { return 1.0 + w; }},
      {[](cplx x, cplx w) { return (x * x + x * w) / x; }, [](cplx w) { return w; }},
      {[](cplx x, cplx w) { return (1.0 - std::cos(x)) / (x * x) * std::exp(w); }, [](cplx w) { return 0.5 * std::exp(w); }},
      {[](cplx x, cplx w) { return std::sin(x * w) / x; }, [](cplx w) { return w; }},
      {[](cplx x, cplx w) { return (std::exp(x * w) - 1.0) / x; }, [](cplx w) { return w; }},
      {[](cplx x, cplx w) { return (std::pow(1.0 + x, 3) - 1.0) / x * w * w; }, [](cplx w) { return 3.0 * w * w; }},
      {[](cplx x, cplx w) { return std::sinh(x) / x + w * w; }, [](cplx w) { return 1.0 + w * w; }},
      {[](cplx x, cplx w) { return (std::pow(x + w, 3) - w * w * w) / x; }, [](cplx w) { return 3.0 * w * w; }},
      {[](cplx x, cplx w) { return x / std::sin(x) * (2.0 + w); }, [](cplx w) { return 2.0 + w; }}};
  HartogsOptions opt;
  double neg = 0.0, err = 0.0;
  int ok = 0;
  for (const auto& [g, v] : families) {
    const HartogsReport r = hartogs_analyze(g, opt);
    double e = 0.0;
    for (std::size_t i = 0; i < r.w_samples.size(); ++i)
      e = std::max(e, std::abs(r.coefficients[i][static_cast<std::size_t>(-opt.jmin)] - v(r.w_samples[i])));
    neg = std::max(neg, r.max_negative);
    err = std::max(err, e);
    if (r.extendable && r.max_negative <= 1e-8 && e <= 1e-6) ++ok;
  }
  bool pole_rejected = false;
  try {
    hartogs_extend([](cplx x, cplx) { return 1.0 / x; }, opt);
  } catch (const ValidationError&) {
    pole_rejected = true;
  }
  return {ok == 10 && pole_rejected, std::to_string(ok) + "/10 families extend, max negative coefficient " + num(neg) +
                                         " (1e-8), max value error " + num(err) + " (1e-6), pole " +
                                         (pole_rejected ? "rejected" : "accepted")};
}

// 11. Byte-identical reports.
Outcome criterion11() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"degree", R"({"degree": {"u1": "x*x*x - 3*x*y*y + 0.1", "u2": "3*x*x*y - y*y*y"}, "seed": 4})"},
      {"axioms", R"({"axioms": {"per_axiom": 20}, "seed": 9})"},
      {"index", R"({"alpha": {"re_holo": "w0*w0 - w1"}, "index": {"disk": {"center": [0, 0, 0.01, 0], "radius": 0.3}, "power": 2}, "seed": 11})"},
      {"carleman", R"({"carleman": {"count": 3}, "seed": 5})"},
      {"zeroset", R"({"box": [[-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]], "alpha": {"re_holo": "w0*w1"}, "zeroset": {"resolution": 8, "ladder": [3, 5]}})"},
      {"hartogs", R"({"hartogs": {"gamma": "w1/w0"}})"}};
  int same = 0;
  for (const auto& [sub, text] : runs) {
    const std::string a = cli::run_command(sub, cli::parse_scene(text)).report.dump(2);
    const std::string b = cli::run_command(sub, cli::parse_scene(text)).report.dump(2);
    if (a == b && a.find("timestamp") == std::string::npos) ++same;
  }
  return {same == static_cast<int>(runs.size()),
          std::to_string(same) + "/" + std::to_string(runs.size()) + " subcommands byte-identical"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"multiplicity ground truth", criterion1},   {"winding vs perturbed count", criterion2},
      {"five-axiom suite", criterion3},            {"splitting algebra", criterion4},
      {"Carleman manufactured solutions", criterion5}, {"disk solver and fibre family", criterion6},
      {"trivialization theorem-check", criterion7}, {"intersection positivity", criterion8},
      {"zero-set geometry", criterion9},           {"Hartogs extension", criterion10},
      {"determinism", criterion11}};
  const double limits[] = {0, 60, 120, 0, 120, 0, 300, 0, 0, 0, 0};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = seconds_since(t0);
    if (limits[i] > 0 && t > limits[i]) {
      o.passed = false;
      o.detail += "; over the " + num(limits[i]) + " s limit";
    }
    if (!o.passed) ++failed;
    std::printf("criterion %2zu %s  %s: %s [%.1f s]\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), t);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
