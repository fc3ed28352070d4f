#include "jhol/degree.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace jhol {

namespace {

constexpr double kPi = std::numbers::pi;

// Lower bound for min |u| over the part of the closed unit disk selected by
// `keep`, from a grid of spacing h: every point lies within h / sqrt(2) of a
// node, and twice the local Jacobian norm bounds the variation nearby.
template <class Keep>
double certified_min(const PlanarMap& u, Keep keep, int n = 256) {
  const double h = 2.0 / n;
  const double reach = h / std::sqrt(2.0);
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const Eigen::Vector2d p(-1.0 + h * i, -1.0 + h * j);
      if (p.norm() > 1.0 + reach || !keep(p)) continue;
      const double lip = Eigen::JacobiSVD<Eigen::Matrix2d>(u.jacobian(p)).singularValues()(0);
      bound = std::min(bound, u(p).norm() - 2.0 * lip * reach);
    }
  return bound;
}

int degree_of(const PlanarMap& u) { return winding_degree(u).degree; }

AxiomCheck skipped(int axiom, const std::string& name, const std::string& why) {
  return {axiom, name, false, false, why};
}

} // namespace

int AxiomReport::instances(int axiom) const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [&](const AxiomCheck& c) { return c.axiom == axiom; }));
}

int AxiomReport::failures(int axiom) const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [&](const AxiomCheck& c) {
    return c.axiom == axiom && c.hypothesis_ok && !c.passed;
  }));
}

int AxiomReport::skips(int axiom) const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [&](const AxiomCheck& c) {
    return c.axiom == axiom && !c.hypothesis_ok;
  }));
}

int AxiomReport::total_failures() const {
  int n = 0;
  for (int a = 1; a <= 5; ++a) n += failures(a);
  return n;
}

AxiomCheck check_nonvanishing(const PlanarMap& u, const std::string& name) {
  const double m = certified_min(u, [](const Eigen::Vector2d&) { return true; });
  if (!(m > 0.0)) return skipped(1, name, "no certified lower bound for |u| on the disk");
  const int d = degree_of(u);
  std::ostringstream os;
  os << "I = " << d << ", certified min |u| >= " << m;
  return {1, name, true, d == 0, os.str()};
}

AxiomCheck check_homotopy(const PlanarMap& u0, const PlanarMap& u1, const std::string& name, int steps) {
  // Between sample times the homotopy moves by at most |u1 - u0| / steps.
  PlanarMap diff;
  diff.f = [u0, u1](const Eigen::Vector2d& p) -> Eigen::Vector2d { return u1(p) - u0(p); };
  diff.jac = [u0, u1](const Eigen::Vector2d& p) -> Eigen::Matrix2d {
    return u1.jacobian(p) - u0.jacobian(p);
  };
  const Admissibility da = is_admissible(diff);
  double dmax = 0.0;
  for (int k = 0; k < 1024; ++k) {
    const double t = 2.0 * kPi * k / 1024;
    dmax = std::max(dmax, diff(Eigen::Vector2d(std::cos(t), std::sin(t))).norm());
  }
  dmax += da.lipschitz * 2.0 * kPi / 1024;
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    const Admissibility a = is_admissible(blend(u0, u1, static_cast<double>(s) / steps));
    worst = std::min(worst, a.margin);
  }
  if (!(worst > dmax / steps)) {
    std::ostringstream os;
    os << "homotopy not certified admissible: margin " << worst << " vs drift " << dmax / steps;
    return skipped(2, name, os.str());
  }
  const int d0 = degree_of(u0), d1 = degree_of(u1);
  std::ostringstream os;
  os << "I(u0) = " << d0 << ", I(u1) = " << d1 << ", homotopy margin " << worst;
  return {2, name, true, d0 == d1, os.str()};
}

AxiomCheck check_composition(const PlanarMap& u, int k, const std::string& name) {
  if (k < 1 || !is_admissible(u).admissible) return skipped(3, name, "u not admissible or k < 1");
  const int d = degree_of(u);
  const PlanarMap c = compose_power(u, k);
  // z^k runs k times faster along the circle, so sample k times as densely.
  WindingOptions opt;
  opt.boundary_samples *= k;
  opt.initial_samples *= k;
  if (!is_admissible(c, opt.boundary_samples).admissible) return skipped(3, name, "u o theta not admissible");
  const int dc = winding_degree(c, opt).degree;
  std::ostringstream os;
  os << "I(u) = " << d << ", I(u o z^" << k << ") = " << dc;
  return {3, name, true, dc == k * d, os.str()};
}

AxiomCheck check_additivity(const PlanarMap& u, const std::vector<Disk2>& subdisks, const std::string& name) {
  for (std::size_t i = 0; i < subdisks.size(); ++i) {
    if (std::abs(subdisks[i].center) + subdisks[i].radius > 1.0)
      return skipped(4, name, "subdisk leaves the unit disk");
    for (std::size_t j = i + 1; j < subdisks.size(); ++j)
      if (std::abs(subdisks[i].center - subdisks[j].center) <= subdisks[i].radius + subdisks[j].radius)
        return skipped(4, name, "subdisks overlap");
  }
  const double m = certified_min(u, [&](const Eigen::Vector2d& p) {
    const cplx z(p(0), p(1));
    return std::none_of(subdisks.begin(), subdisks.end(),
                        [&](const Disk2& d) { return std::abs(z - d.center) < d.radius - 0.01; });
  });
  if (!(m > 0.0)) return skipped(4, name, "zeros not certified inside the subdisks");
  const int total = degree_of(u);
  int sum = 0;
  std::ostringstream os;
  os << "I(u) = " << total << ", parts:";
  for (const Disk2& d : subdisks) {
    const PlanarMap r = restrict_to(u, d);
    if (!is_admissible(r).admissible) return skipped(4, name, "restriction not admissible");
    const int di = degree_of(r);
    sum += di;
    os << ' ' << di;
  }
  return {4, name, true, sum == total, os.str()};
}

AxiomCheck check_normalization(int k, cplx a, const std::string& name) {
  if (std::abs(a) >= 1.0) return skipped(5, name, "zero not inside the disk");
  const PlanarMap u = factor_map(std::vector<std::pair<cplx, int>>(static_cast<std::size_t>(k), {a, 1}));
  const int d = degree_of(u);
  std::ostringstream os;
  os << "I((z - a)^" << k << ") = " << d;
  return {5, name, true, d == k, os.str()};
}

AxiomBattery default_axiom_battery(std::uint64_t seed, int per_axiom) {
  AxiomBattery b;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto polar = [&](double rmax) { return std::polar(rmax * std::sqrt(unit(rng)), 2.0 * kPi * unit(rng)); };
  auto name = [](const char* tag, int i) { return std::string(tag) + "-" + std::to_string(i); };

  // Random (z, zbar) polynomial with certified boundary margin.
  std::uint64_t poly_seed = seed * 1000003ULL + 17;
  auto admissible_poly = [&](double min_margin) {
    for (;;) {
      ZZbarPolynomial p = random_zzbar_polynomial(poly_seed++, 3);
      if (is_admissible(p.map()).margin > min_margin) return p;
    }
  };

  for (int i = 0; i < per_axiom; ++i) {
    ZZbarPolynomial p = random_zzbar_polynomial(poly_seed++, 1 + i % 3);
    double sum = 0.0;
    for (const auto& t : p.terms) sum += std::abs(t.c);
    p.terms.push_back({0, 0, std::polar(sum + 1.0 + 2.0 * unit(rng), 2.0 * kPi * unit(rng))});
    b.nonvanishing.emplace_back(name("shifted", i), p.map());
  }
  b.nonvanishing[0].second = planar_from_complex([](cplx z) { return z + 5.0; });

  for (int i = 0; i < per_axiom; ++i) {
    if (i % 2 == 0) {
      // z^k deformed into a product of k linear factors with roots inside.
      const int k = 1 + (i / 2) % 4;
      std::vector<std::pair<cplx, int>> roots;
      const double rmax = 0.8 * (std::pow(2.0, 1.0 / k) - 1.0);
      for (int j = 0; j < k; ++j) roots.emplace_back(polar(rmax), 1);
      const std::vector<std::pair<cplx, int>> origin(static_cast<std::size_t>(k), {0.0, 1});
      b.homotopy.emplace_back(name("roots", i), factor_map(origin), factor_map(roots));
    } else {
      const ZZbarPolynomial p = admissible_poly(0.05);
      ZZbarPolynomial q = random_zzbar_polynomial(poly_seed++, 3);
      double qmax = 0.0;
      for (int k = 0; k < 256; ++k) qmax = std::max(qmax, std::abs(q(std::polar(1.0, 2.0 * kPi * k / 256))));
      const double eta = 0.4 * is_admissible(p.map()).margin / qmax;
      for (auto& t : q.terms) t.c *= eta;
      ZZbarPolynomial r = p;
      r.terms.insert(r.terms.end(), q.terms.begin(), q.terms.end());
      b.homotopy.emplace_back(name("poly", i), p.map(), r.map());
    }
  }

  b.composition.emplace_back("shift-0.2", planar_from_complex([](cplx z) { return z + 0.2; }), 2);
  for (int i = 1; i < per_axiom; ++i) {
    const int k = 1 + i % 3;
    if (i % 2 == 0) {
      b.composition.emplace_back(name("poly", i), admissible_poly(0.05).map(), k);
    } else {
      std::vector<std::pair<cplx, int>> roots;
      for (int j = 0; j < 2; ++j) roots.emplace_back(polar(0.6), unit(rng) < 0.5 ? 1 : -1);
      b.composition.emplace_back(name("factors", i), factor_map(roots), k);
    }
  }

  b.additivity.emplace_back("two-simple", factor_map({{0.0, 1}, {0.5, 1}}),
                            std::vector<Disk2>{{0.0, 0.2}, {0.5, 0.2}});
  for (int i = 1; i < per_axiom; ++i) {
    // Two or three well separated roots of mixed orientation.
    const int count = 2 + i % 2;
    std::vector<cplx> centers;
    while (static_cast<int>(centers.size()) < count) {
      const cplx c = polar(0.6);
      if (std::all_of(centers.begin(), centers.end(), [&](cplx o) { return std::abs(o - c) > 0.5; }))
        centers.push_back(c);
    }
    std::vector<std::pair<cplx, int>> roots;
    std::vector<Disk2> disks;
    for (cplx c : centers) {
      const int mult = unit(rng) < 0.3 ? 2 : 1;
      const int orient = unit(rng) < 0.5 ? 1 : -1;
      for (int m = 0; m < mult; ++m) roots.emplace_back(c, orient);
      disks.push_back({c, 0.2});
    }
    b.additivity.emplace_back(name("mixed", i), factor_map(roots), disks);
  }

  for (int i = 0; i < per_axiom; ++i) {
    const int k = 1 + i % 5;
    b.normalization.emplace_back(name("power", i), k, i < 5 ? cplx(0.0) : polar(0.3));
  }
  return b;
}

AxiomReport axiom_suite(const AxiomBattery& b) {
  AxiomReport r;
  for (const auto& [n, u] : b.nonvanishing) r.checks.push_back(check_nonvanishing(u, n));
  for (const auto& [n, u0, u1] : b.homotopy) r.checks.push_back(check_homotopy(u0, u1, n));
  for (const auto& [n, u, k] : b.composition) r.checks.push_back(check_composition(u, k, n));
  for (const auto& [n, u, d] : b.additivity) r.checks.push_back(check_additivity(u, d, n));
  for (const auto& [n, k, a] : b.normalization) r.checks.push_back(check_normalization(k, a, n));
  return r;
}

} // namespace jhol
