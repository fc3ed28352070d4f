#include "jhol/zero_divisor.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

namespace jhol {

namespace {

constexpr double kPi = std::numbers::pi;

Mat4 constant_form(int which) {
  Mat4 m = Mat4::Zero();
  auto set = [&](int i, int j, double v) {
    m(i, j) = v;
    m(j, i) = -v;
  };
  if (which == 0) {
    set(0, 1, 1.0);
    set(2, 3, 1.0);
  } else if (which == 1) {
    set(0, 2, 1.0);
    set(1, 3, -1.0);
  } else {
    set(0, 3, 1.0);
    set(1, 2, 1.0);
  }
  return m;
}

Eigen::Matrix<double, 6, 1> upper(const Mat4& m) {
  Eigen::Matrix<double, 6, 1> v;
  v << m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3);
  return v;
}

Point4 shifted(const Point4& x, int var, double h) {
  Point4 y = x;
  y[static_cast<std::size_t>(var)] += h;
  return y;
}

AxiomCheck skipped(int axiom, const std::string& name, const std::string& why) { return {axiom, name, false, false, why}; }

} // namespace

TestDisk flat_disk(const Point4& center, const std::array<cplx, 2>& kappa, double radius, std::string name) {
  const Vec4 c(center[0], center[1], center[2], center[3]);
  TestDisk d;
  d.name = std::move(name);
  d.map = [c, kappa, radius](cplx z) { return Vec4(c + to_real(radius * z * kappa[0], radius * z * kappa[1])); };
  return d;
}

TestDisk from_solved_disk(const Disk& disk, std::string name) {
  TestDisk d;
  d.name = std::move(name);
  d.j_holomorphic = true;
  auto shared = std::make_shared<const Disk>(disk);
  d.map = [shared](cplx z) { return shared->point(shared->rho * z); };
  return d;
}

TestDisk precompose_power(const TestDisk& sigma, int k) {
  if (k < 1) throw ValidationError("precompose_power: k must be >= 1");
  TestDisk d = sigma;
  d.name = sigma.name + "^" + std::to_string(k);
  auto m = sigma.map;
  d.map = [m, k](cplx z) { return m(std::pow(z, k)); };
  return d;
}

TestDisk restrict_disk(const TestDisk& sigma, const Disk2& sub) {
  if (std::abs(sub.center) + sub.radius > 1.0 + 1e-12) throw ValidationError("restrict_disk: subdisk leaves the unit disk");
  TestDisk d = sigma;
  d.name = sigma.name + "|sub";
  auto m = sigma.map;
  d.map = [m, sub](cplx z) { return m(sub.center + sub.radius * z); };
  return d;
}

TestDisk translate_disk(const TestDisk& sigma, const Vec4& offset) {
  TestDisk d = sigma;
  d.name = sigma.name + "+v";
  auto m = sigma.map;
  d.map = [m, offset](cplx z) { return Vec4(m(z) + offset); };
  return d;
}

AntiInvariantFrame::AntiInvariantFrame(const TwoForm& alpha, const AlmostComplexStructure& J) : alpha_(alpha) {
  const GridSpec check{3, 16, 0};
  for (int l = 0; l < 3; ++l) {
    psi_[static_cast<std::size_t>(l)] = split_form(TwoForm::constant(constant_form(l), J.box()), J).anti_invariant;
    jpsi_[static_cast<std::size_t>(l)] = apply_J_anti(psi_[static_cast<std::size_t>(l)], J, check);
  }
}

int AntiInvariantFrame::best_index(const Point4& x) const {
  int best = 0;
  double norm = -1.0;
  for (int l = 0; l < 3; ++l) {
    const double n = frame_norm(x, l);
    if (n > norm) {
      norm = n;
      best = l;
    }
  }
  return best;
}

double AntiInvariantFrame::frame_norm(const Point4& x, int index) const {
  return form_norm(psi_[static_cast<std::size_t>(index)].at(x));
}

double AntiInvariantFrame::alpha_norm(const Point4& x) const { return form_norm(alpha_.at(x)); }

Eigen::Vector2d AntiInvariantFrame::coefficients(const Point4& x, int index) const {
  Eigen::Matrix<double, 6, 2> B;
  B.col(0) = upper(psi_[static_cast<std::size_t>(index)].at(x));
  B.col(1) = upper(jpsi_[static_cast<std::size_t>(index)].at(x));
  const Eigen::Matrix2d G = B.transpose() * B;
  return G.ldlt().solve(B.transpose() * upper(alpha_.at(x)));
}

Eigen::Matrix<double, 2, 4> AntiInvariantFrame::jacobian(const Point4& x, int index, double h) const {
  Eigen::Matrix<double, 2, 4> D;
  for (int v = 0; v < 4; ++v)
    D.col(v) = (coefficients(shifted(x, v, h), index) - coefficients(shifted(x, v, -h), index)) / (2.0 * h);
  return D;
}

PlanarMap section_map(const AntiInvariantFrame& frame, const TestDisk& sigma, int frame_index) {
  PlanarMap u;
  auto m = sigma.map;
  u.f = [frame, m, frame_index](const Eigen::Vector2d& p) -> Eigen::Vector2d {
    return frame.coefficients(to_point(m(cplx(p(0), p(1)))), frame_index);
  };
  return u;
}

IntersectionReport intersection_index(const TwoForm& alpha, const AlmostComplexStructure& J, const TestDisk& sigma,
                                      const IndexOptions& opt) {
  const AntiInvariantFrame frame(alpha, J);
  IntersectionReport r;
  r.disk = sigma.name;

  // One frame member for the whole disk: the one with the largest minimum norm.
  std::vector<Point4> samples;
  for (int i = 0; i <= 8; ++i)
    for (int k = 0; k < 32; ++k) samples.push_back(to_point(sigma(std::polar(i / 8.0, 2.0 * kPi * k / 32))));
  r.frame_floor = -1.0;
  for (int l = 0; l < 3; ++l) {
    double floor = std::numeric_limits<double>::infinity();
    for (const Point4& x : samples) floor = std::min(floor, frame.frame_norm(x, l));
    if (floor > r.frame_floor) {
      r.frame_floor = floor;
      r.frame_index = l;
    }
  }
  if (!(r.frame_floor > opt.frame_floor))
    throw NumericalError("intersection_index: no frame of the anti-invariant bundle along " + sigma.name);

  const PlanarMap u = section_map(frame, sigma, r.frame_index);
  // Denser boundary sampling tightens the certified margin for small |F|.
  WindingOptions wopt = opt.winding;
  for (int n = opt.winding.boundary_samples; n <= opt.max_boundary_samples; n *= 4) {
    wopt.boundary_samples = n;
    r.admissibility = is_admissible(u, n);
    if (r.admissibility.admissible || !(r.admissibility.min_sampled > 0.0)) break;
  }
  if (!r.admissibility.admissible) {
    std::ostringstream os;
    os << "intersection_index: alpha vanishes near the boundary of " << sigma.name << " (min sampled |F| "
       << r.admissibility.min_sampled << ")";
    throw ValidationError(os.str());
  }
  r.winding = winding_degree(u, wopt).degree;

  // Newton stalls near a multiple zero; its scattered endpoints form one cluster.
  std::vector<std::vector<cplx>> clusters;
  for (const auto& z : locate_zeros(u, opt.count)) {
    const cplx c(z.location(0), z.location(1));
    auto it = std::find_if(clusters.begin(), clusters.end(),
                           [&](const std::vector<cplx>& k) { return std::abs(k.front() - c) < opt.cluster_distance; });
    if (it == clusters.end())
      clusters.push_back({c});
    else
      it->push_back(c);
  }
  std::vector<cplx> zeros;
  for (const auto& k : clusters) {
    cplx mean = 0.0;
    for (cplx c : k) mean += c;
    zeros.push_back(mean / static_cast<double>(k.size()));
  }
  int sum = 0;
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const cplx z = zeros[i];
    double radius = std::min(0.05, 0.5 * (1.0 - std::abs(z)));
    for (std::size_t j = 0; j < zeros.size(); ++j)
      if (j != i) radius = std::min(radius, 0.5 * std::abs(z - zeros[j]));
    const PlanarMap local = restrict_to(u, Disk2{z, radius});
    const int m = winding_degree(local, opt.winding).degree;
    r.zeros.push_back({z, m});
    sum += m;
  }
  CountOptions copt = opt.count;
  copt.boundary_samples = std::max(copt.boundary_samples, wopt.boundary_samples);
  r.perturbed_count = perturb_sign_count(u, opt.seed, copt).degree;
  r.total = r.winding;
  if (sum != r.winding || r.perturbed_count != r.winding) {
    std::ostringstream os;
    os << "intersection_index: winding " << r.winding << ", multiplicity sum " << sum << ", perturbed count "
       << r.perturbed_count << " disagree on " << sigma.name;
    throw NumericalError(os.str());
  }
  return r;
}

namespace {

struct Probe {
  bool ok = false;
  int index = 0;
  double margin = 0.0;
  std::string why;
  int frame_index = 0;
};

Probe probe(const TwoForm& alpha, const AlmostComplexStructure& J, const TestDisk& d, const IndexOptions& opt) {
  try {
    const IntersectionReport r = intersection_index(alpha, J, d, opt);
    return {true, r.total, r.admissibility.margin, {}, r.frame_index};
  } catch (const std::runtime_error& e) {
    return {false, 0, 0.0, e.what()};
  }
}

} // namespace

AxiomReport pca_axiom_suite(const TwoForm& alpha, const AlmostComplexStructure& J, const PcaBattery& b,
                            const IndexOptions& opt) {
  AxiomReport report;
  const AntiInvariantFrame frame(alpha, J);

  for (const TestDisk& d : b.nonvanishing) {
    // Certified lower bound for |F| on a 64^2 grid covering the disk.
    const PlanarMap u = section_map(frame, d, frame.best_index(to_point(d(0.0))));
    const int n = 64;
    const double h = 2.0 / n, reach = h / std::sqrt(2.0);
    double bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const Eigen::Vector2d p(-1.0 + h * i, -1.0 + h * j);
        if (p.norm() > 1.0 + reach) continue;
        const double lip = Eigen::JacobiSVD<Eigen::Matrix2d>(u.jacobian(p)).singularValues()(0);
        bound = std::min(bound, u(p).norm() - 2.0 * lip * reach);
      }
    if (!(bound > 0.0)) {
      report.checks.push_back(skipped(1, d.name, "no certified lower bound for |alpha| on the disk"));
      continue;
    }
    const Probe p = probe(alpha, J, d, opt);
    std::ostringstream os;
    os << "I = " << p.index << ", certified min |F| >= " << bound;
    report.checks.push_back(p.ok ? AxiomCheck{1, d.name, true, p.index == 0, os.str()} : skipped(1, d.name, p.why));
  }

  for (const auto& [d0, d1] : b.homotopy) {
    const std::string name = d0.name + " ~ " + d1.name;
    const int steps = 16;
    std::vector<int> idx;
    double worst = std::numeric_limits<double>::infinity(), drift = 0.0;
    std::string why;
    std::vector<Eigen::Vector2d> prev;
    for (int s = 0; s <= steps && why.empty(); ++s) {
      const double t = static_cast<double>(s) / steps;
      TestDisk dt;
      dt.name = name;
      dt.map = [m0 = d0.map, m1 = d1.map, t](cplx z) { return Vec4((1.0 - t) * m0(z) + t * m1(z)); };
      const Probe p = probe(alpha, J, dt, opt);
      if (!p.ok) {
        why = p.why;
        break;
      }
      idx.push_back(p.index);
      worst = std::min(worst, p.margin);
      const PlanarMap u = section_map(frame, dt, p.frame_index);
      std::vector<Eigen::Vector2d> cur;
      for (int k = 0; k < 256; ++k) {
        const double a = 2.0 * kPi * k / 256;
        cur.push_back(u(Eigen::Vector2d(std::cos(a), std::sin(a))));
      }
      if (!prev.empty())
        for (int k = 0; k < 256; ++k)
          drift = std::max(drift, (cur[static_cast<std::size_t>(k)] - prev[static_cast<std::size_t>(k)]).norm());
      prev = std::move(cur);
    }
    if (!why.empty() || !(worst > drift)) {
      std::ostringstream os;
      if (why.empty())
        os << "homotopy not certified: margin " << worst << " vs step drift " << drift;
      else
        os << why;
      report.checks.push_back(skipped(2, name, os.str()));
      continue;
    }
    const bool same = std::all_of(idx.begin(), idx.end(), [&](int v) { return v == idx.front(); });
    std::ostringstream os;
    os << "I = " << idx.front() << " along " << idx.size() << " steps, margin " << worst << ", drift " << drift;
    report.checks.push_back({2, name, true, same, os.str()});
  }

  for (const auto& [d, k] : b.composition) {
    const Probe p0 = probe(alpha, J, d, opt);
    const Probe pk = probe(alpha, J, precompose_power(d, k), opt);
    if (!p0.ok || !pk.ok) {
      report.checks.push_back(skipped(3, d.name, p0.ok ? pk.why : p0.why));
      continue;
    }
    std::ostringstream os;
    os << "I(sigma) = " << p0.index << ", I(sigma o z^" << k << ") = " << pk.index;
    report.checks.push_back({3, d.name, true, pk.index == k * p0.index, os.str()});
  }

  for (const auto& [d, subs] : b.additivity) {
    const Probe whole = probe(alpha, J, d, opt);
    if (!whole.ok) {
      report.checks.push_back(skipped(4, d.name, whole.why));
      continue;
    }
    // Every zero of the whole disk must lie inside one of the subdisks.
    const IntersectionReport r = intersection_index(alpha, J, d, opt);
    bool covered = true;
    for (const IndexedZero& z : r.zeros)
      covered = covered && std::any_of(subs.begin(), subs.end(), [&](const Disk2& s) {
                  return std::abs(z.location - s.center) < s.radius - 0.01;
                });
    if (!covered) {
      report.checks.push_back(skipped(4, d.name, "zeros not inside the subdisks"));
      continue;
    }
    int sum = 0;
    std::ostringstream os;
    os << "I = " << whole.index << ", parts:";
    std::string why;
    for (const Disk2& s : subs) {
      const Probe p = probe(alpha, J, restrict_disk(d, s), opt);
      if (!p.ok) {
        why = p.why;
        break;
      }
      sum += p.index;
      os << ' ' << p.index;
    }
    report.checks.push_back(why.empty() ? AxiomCheck{4, d.name, true, sum == whole.index, os.str()}
                                        : skipped(4, d.name, why));
  }

  for (const TestDisk& d : b.positivity) {
    if (!d.j_holomorphic) {
      report.checks.push_back(skipped(5, d.name, "disk not J-holomorphic"));
      continue;
    }
    IntersectionReport r;
    try {
      r = intersection_index(alpha, J, d, opt);
    } catch (const std::runtime_error& e) {
      report.checks.push_back(skipped(5, d.name, e.what()));
      continue;
    }
    if (r.zeros.empty()) {
      report.checks.push_back(skipped(5, d.name, "disk does not meet the zero set"));
      continue;
    }
    std::ostringstream os;
    os << "I = " << r.total << " from " << r.zeros.size() << " zero(s)";
    report.checks.push_back({5, d.name, true, r.total > 0, os.str()});
  }
  return report;
}

EmptinessReport interior_emptiness_check(const TwoForm& alpha, const Box& box, int grid, double tol) {
  if (grid < 1) throw ValidationError("interior_emptiness_check: grid must be >= 1");
  const int n = grid + 1;
  std::vector<double> node(static_cast<std::size_t>(n) * n * n * n);
  auto coord = [&](int axis, double t) {
    return box.lo[static_cast<std::size_t>(axis)] +
           (box.hi[static_cast<std::size_t>(axis)] - box.lo[static_cast<std::size_t>(axis)]) * t / grid;
  };
  EmptinessReport r;
  std::size_t id = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double v = form_norm(alpha.at({coord(0, a), coord(1, b), coord(2, c), coord(3, d)}));
          node[id++] = v;
          r.max_norm = std::max(r.max_norm, v);
        }
  if (!(r.max_norm > 1e-6)) throw ValidationError("interior_emptiness_check: alpha is numerically zero on the grid");
  auto at = [&](int a, int b, int c, int d) {
    return node[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)];
  };
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b)
      for (int c = 0; c < grid; ++c)
        for (int d = 0; d < grid; ++d) {
          bool all = true;
          for (int m = 0; m < 16 && all; ++m)
            all = at(a + (m & 1), b + ((m >> 1) & 1), c + ((m >> 2) & 1), d + ((m >> 3) & 1)) <= tol;
          if (!all) continue;
          const Point4 mid{coord(0, a + 0.5), coord(1, b + 0.5), coord(2, c + 0.5), coord(3, d + 0.5)};
          if (form_norm(alpha.at(mid)) <= tol) r.offending.push_back({a, b, c, d});
        }
  r.empty_interior = r.offending.empty();
  return r;
}

} // namespace jhol
