#include "jhol/degree.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace jhol {

namespace {

constexpr double kPi = std::numbers::pi;

template <int N>
using VecN = Eigen::Matrix<double, N, 1>;
template <int N>
using MatN = Eigen::Matrix<double, N, N>;

template <int N>
std::vector<VecN<N>> sphere_samples(int n);

template <>
std::vector<VecN<2>> sphere_samples<2>(int n) {
  std::vector<VecN<2>> pts(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * k / n;
    pts[static_cast<std::size_t>(k)] = VecN<2>(std::cos(t), std::sin(t));
  }
  return pts;
}

template <>
std::vector<VecN<3>> sphere_samples<3>(int n) {
  std::vector<VecN<3>> pts;
  const int lon = 2 * n;
  pts.reserve(static_cast<std::size_t>(n * lon + 2));
  for (int i = 0; i < n; ++i) {
    const double th = kPi * (i + 0.5) / n;
    for (int j = 0; j < lon; ++j) {
      const double ph = 2.0 * kPi * j / lon;
      pts.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    }
  }
  pts.emplace_back(0.0, 0.0, 1.0);
  pts.emplace_back(0.0, 0.0, -1.0);
  return pts;
}

// Neighbour pairs used for difference quotients and the covering radius of
// the sample set.
template <int N>
struct SampleGraph {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  double covering = 0.0;
};

template <int N>
SampleGraph<N> sample_graph(int n, const std::vector<VecN<N>>& pts) {
  SampleGraph<N> g;
  if constexpr (N == 2) {
    for (int k = 0; k < n; ++k) g.edges.emplace_back(k, (k + 1) % n);
    g.covering = 2.0 * kPi / n;
  } else {
    const int lon = 2 * n;
    auto id = [&](int i, int j) { return static_cast<std::size_t>(i * lon + (j % lon)); };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < lon; ++j) {
        g.edges.emplace_back(id(i, j), id(i, j + 1));
        if (i + 1 < n) g.edges.emplace_back(id(i, j), id(i + 1, j));
      }
    const std::size_t north = pts.size() - 2, south = pts.size() - 1;
    for (int j = 0; j < lon; ++j) {
      g.edges.emplace_back(north, id(0, j));
      g.edges.emplace_back(south, id(n - 1, j));
    }
    // Every point of the sphere lies within one latitude step of a sample.
    g.covering = kPi / n;
  }
  return g;
}

cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

template <int N>
SignedZero<N> classify(const BallMap<N>& u, const VecN<N>& x, double det_floor) {
  SignedZero<N> z;
  z.location = x;
  z.det = u.jacobian(x).determinant();
  z.sign = std::abs(z.det) > det_floor ? (z.det > 0 ? 1 : -1) : 0;
  return z;
}

template <int N>
bool newton(const BallMap<N>& u, VecN<N>& x, const CountOptions& opt) {
  VecN<N> r = u(x);
  for (int it = 0; it < opt.newton_iterations; ++it) {
    if (r.norm() <= opt.newton_tol) break;
    const MatN<N> J = u.jacobian(x);
    const Eigen::FullPivLU<MatN<N>> lu(J);
    if (!lu.isInvertible()) return false;
    const VecN<N> step = lu.solve(r);
    x -= step;
    if (!x.allFinite() || x.norm() > 2.0) return false;
    r = u(x);
    if (step.norm() <= 1e-15 * (1.0 + x.norm())) break;
  }
  return r.norm() <= opt.zero_tol;
}

template <int N>
bool flagged(const std::array<VecN<N>, (1 << N)>& corners) {
  for (int c = 0; c < N; ++c) {
    double lo = corners[0](c), hi = lo;
    for (const auto& v : corners) {
      lo = std::min(lo, v(c));
      hi = std::max(hi, v(c));
    }
    const double slack = 0.25 * (hi - lo);
    if (lo > slack || hi < -slack) return false;
  }
  return true;
}

template <int N>
void scan_cell(const BallMap<N>& u, const VecN<N>& lo, double h, int depth,
               const CountOptions& opt, std::vector<VecN<N>>& seeds) {
  std::array<VecN<N>, (1 << N)> corners;
  for (int m = 0; m < (1 << N); ++m) {
    VecN<N> p = lo;
    for (int i = 0; i < N; ++i)
      if (m & (1 << i)) p(i) += h;
    corners[static_cast<std::size_t>(m)] = u(p);
  }
  if (!flagged<N>(corners)) return;
  if (depth == 0) {
    seeds.push_back(lo + VecN<N>::Constant(0.5 * h));
    return;
  }
  for (int m = 0; m < (1 << N); ++m) {
    VecN<N> sub = lo;
    for (int i = 0; i < N; ++i)
      if (m & (1 << i)) sub(i) += 0.5 * h;
    scan_cell<N>(u, sub, 0.5 * h, depth - 1, opt, seeds);
  }
}

template <int N>
bool lex_less(const VecN<N>& a, const VecN<N>& b) {
  for (int i = 0; i < N; ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

template <int N>
BallMap<N> perturbed(const BallMap<N>& u, const VecN<N>& c, const MatN<N>& B) {
  BallMap<N> out;
  out.f = [u, c, B](const VecN<N>& p) -> VecN<N> { return u(p) + c + B * p; };
  out.jac = [u, B](const VecN<N>& p) -> MatN<N> { return u.jacobian(p) + B; };
  return out;
}

} // namespace

template <int N>
typename BallMap<N>::Mat BallMap<N>::jacobian(const Vec& p) const {
  if (jac) return jac(p);
  Mat J;
  constexpr double h = 1e-6;
  for (int j = 0; j < N; ++j) {
    Vec a = p, b = p;
    a(j) += h;
    b(j) -= h;
    J.col(j) = (f(a) - f(b)) / (2.0 * h);
  }
  return J;
}

template struct BallMap<2>;
template struct BallMap<3>;

// ---------------------------------------------------------------------------
// Map constructors

PlanarMap planar_from_exprs(const FieldExpr& u1, const FieldExpr& u2) {
  const std::array<FieldExpr, 4> d{u1.diff(0), u1.diff(1), u2.diff(0), u2.diff(1)};
  PlanarMap m;
  m.f = [u1, u2](const Eigen::Vector2d& p) {
    const Point4 x{p(0), p(1), 0.0, 0.0};
    return Eigen::Vector2d(u1(x), u2(x));
  };
  m.jac = [d](const Eigen::Vector2d& p) {
    const Point4 x{p(0), p(1), 0.0, 0.0};
    Eigen::Matrix2d J;
    J << d[0](x), d[1](x), d[2](x), d[3](x);
    return J;
  };
  return m;
}

PlanarMap planar_from_text(std::string_view u1, std::string_view u2) {
  static const SymbolTable xy{{"x", 0}, {"y", 1}};
  return planar_from_exprs(parse(u1, xy), parse(u2, xy));
}

PlanarMap planar_from_complex(std::function<cplx(cplx)> f) {
  PlanarMap m;
  m.f = [f](const Eigen::Vector2d& p) {
    const cplx w = f({p(0), p(1)});
    return Eigen::Vector2d(w.real(), w.imag());
  };
  return m;
}

Eigen::Matrix2d wirtinger_jacobian(cplx p, cplx q) {
  // du = p dz + q dzbar: d/dx = p + q, d/dy = i (p - q)
  const cplx dx = p + q, dy = cplx(0.0, 1.0) * (p - q);
  Eigen::Matrix2d J;
  J << dx.real(), dy.real(), dx.imag(), dy.imag();
  return J;
}

cplx ZZbarPolynomial::operator()(cplx z) const {
  cplx s = 0.0;
  const cplx zb = std::conj(z);
  for (const Term& t : terms) s += t.c * ipow(z, t.a) * ipow(zb, t.b);
  return s;
}

std::pair<cplx, cplx> ZZbarPolynomial::wirtinger(cplx z) const {
  cplx p = 0.0, q = 0.0;
  const cplx zb = std::conj(z);
  for (const Term& t : terms) {
    if (t.a > 0) p += t.c * static_cast<double>(t.a) * ipow(z, t.a - 1) * ipow(zb, t.b);
    if (t.b > 0) q += t.c * static_cast<double>(t.b) * ipow(z, t.a) * ipow(zb, t.b - 1);
  }
  return {p, q};
}

ZZbarPolynomial ZZbarPolynomial::conjugate() const {
  ZZbarPolynomial out;
  for (const Term& t : terms) out.terms.push_back({t.b, t.a, std::conj(t.c)});
  return out;
}

int ZZbarPolynomial::total_degree() const {
  int d = 0;
  for (const Term& t : terms) d = std::max(d, t.a + t.b);
  return d;
}

PlanarMap ZZbarPolynomial::map() const {
  const ZZbarPolynomial self = *this;
  PlanarMap m;
  m.f = [self](const Eigen::Vector2d& p) {
    const cplx w = self({p(0), p(1)});
    return Eigen::Vector2d(w.real(), w.imag());
  };
  m.jac = [self](const Eigen::Vector2d& p) {
    const auto [a, b] = self.wirtinger({p(0), p(1)});
    return wirtinger_jacobian(a, b);
  };
  return m;
}

ZZbarPolynomial random_zzbar_polynomial(std::uint64_t seed, int max_degree) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  ZZbarPolynomial p;
  for (int d = 0; d <= max_degree; ++d)
    for (int a = 0; a <= d; ++a) p.terms.push_back({a, d - a, cplx(n01(rng), n01(rng))});
  return p;
}

PlanarMap restrict_to(const PlanarMap& u, const Disk2& d) {
  const Eigen::Vector2d c(d.center.real(), d.center.imag());
  const double r = d.radius;
  PlanarMap m;
  m.f = [u, c, r](const Eigen::Vector2d& p) { return u(c + r * p); };
  m.jac = [u, c, r](const Eigen::Vector2d& p) -> Eigen::Matrix2d { return r * u.jacobian(c + r * p); };
  return m;
}

PlanarMap compose_power(const PlanarMap& u, int k) {
  PlanarMap m;
  m.f = [u, k](const Eigen::Vector2d& p) {
    const cplx w = ipow(cplx(p(0), p(1)), k);
    return u(Eigen::Vector2d(w.real(), w.imag()));
  };
  m.jac = [u, k](const Eigen::Vector2d& p) -> Eigen::Matrix2d {
    const cplx z(p(0), p(1));
    const cplx w = ipow(z, k);
    const cplx dw = static_cast<double>(k) * ipow(z, k - 1);
    return u.jacobian(Eigen::Vector2d(w.real(), w.imag())) * wirtinger_jacobian(dw, 0.0);
  };
  return m;
}

PlanarMap compose_rotation(const PlanarMap& u, double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  PlanarMap m;
  m.f = [u, R](const Eigen::Vector2d& p) { return u(R * p); };
  m.jac = [u, R](const Eigen::Vector2d& p) -> Eigen::Matrix2d { return u.jacobian(R * p) * R; };
  return m;
}

PlanarMap blend(const PlanarMap& u0, const PlanarMap& u1, double t) {
  PlanarMap m;
  m.f = [u0, u1, t](const Eigen::Vector2d& p) -> Eigen::Vector2d { return (1.0 - t) * u0(p) + t * u1(p); };
  m.jac = [u0, u1, t](const Eigen::Vector2d& p) -> Eigen::Matrix2d {
    return (1.0 - t) * u0.jacobian(p) + t * u1.jacobian(p);
  };
  return m;
}

PlanarMap conjugate_map(const PlanarMap& u) {
  const Eigen::Matrix2d C = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  PlanarMap m;
  m.f = [u, C](const Eigen::Vector2d& p) -> Eigen::Vector2d { return C * u(p); };
  m.jac = [u, C](const Eigen::Vector2d& p) -> Eigen::Matrix2d { return C * u.jacobian(p); };
  return m;
}

PlanarMap factor_map(const std::vector<std::pair<cplx, int>>& factors) {
  auto values = [factors](cplx z) {
    std::vector<cplx> v;
    for (const auto& [a, o] : factors) v.push_back(o > 0 ? z - a : std::conj(z - a));
    return v;
  };
  PlanarMap m;
  m.f = [values](const Eigen::Vector2d& p) {
    cplx w = 1.0;
    for (cplx f : values({p(0), p(1)})) w *= f;
    return Eigen::Vector2d(w.real(), w.imag());
  };
  m.jac = [values, factors](const Eigen::Vector2d& p) {
    const std::vector<cplx> v = values({p(0), p(1)});
    cplx dz = 0.0, dzb = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      cplx rest = 1.0;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (i != j) rest *= v[i];
      (factors[j].second > 0 ? dz : dzb) += rest;
    }
    return wirtinger_jacobian(dz, dzb);
  };
  return m;
}

// ---------------------------------------------------------------------------
// Admissibility and winding

template <int N>
Admissibility check_admissible(const BallMap<N>& u, int n) {
  const std::vector<VecN<N>> pts = sphere_samples<N>(n);
  const SampleGraph<N> g = sample_graph<N>(n, pts);
  std::vector<VecN<N>> vals(pts.size());
  Admissibility a;
  a.min_sampled = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    vals[k] = u(pts[k]);
    a.min_sampled = std::min(a.min_sampled, vals[k].norm());
  }
  double q = 0.0;
  for (const auto& [i, j] : g.edges) {
    const double dist = (pts[i] - pts[j]).norm();
    if (dist > 0) q = std::max(q, (vals[i] - vals[j]).norm() / dist);
  }
  a.lipschitz = 2.0 * q;
  a.margin = a.min_sampled - a.lipschitz * g.covering;
  a.admissible = std::isfinite(a.margin) && a.margin > 0.0;
  return a;
}

template Admissibility check_admissible<2>(const BallMap<2>&, int);
template Admissibility check_admissible<3>(const BallMap<3>&, int);

Admissibility is_admissible(const PlanarMap& u, int n) { return check_admissible<2>(u, n); }

namespace {

struct ArcWalker {
  const PlanarMap& u;
  double L;
  std::size_t cap;
  std::size_t samples = 0;

  cplx at(double t) {
    ++samples;
    if (samples > cap) {
      std::ostringstream os;
      os << "winding refinement exceeded " << cap << " samples near t = " << t;
      throw NumericalError(os.str());
    }
    const Eigen::Vector2d v = u(Eigen::Vector2d(std::cos(t), std::sin(t)));
    return {v(0), v(1)};
  }

  // Argument change of u along the arc [t0, t1] of the unit circle. An arc is
  // accepted when |u(t) - u(t0)| <= L (t - t0) < |u(t0)| certifies that u
  // stays in a half plane, so the principal argument is the true increment.
  double arc(double t0, double t1, cplx u0, cplx u1, int depth) {
    const double inc = std::arg(u1 / u0);
    const double dt = t1 - t0;
    if ((L * dt < std::min(std::abs(u0), std::abs(u1)) && std::abs(inc) < kPi / 2) || depth > 60) {
      if (depth > 60) throw NumericalError("winding refinement did not certify an arc");
      return inc;
    }
    const double tm = 0.5 * (t0 + t1);
    const cplx um = at(tm);
    return arc(t0, tm, u0, um, depth + 1) + arc(tm, t1, um, u1, depth + 1);
  }
};

} // namespace

WindingResult winding_degree(const PlanarMap& u, const WindingOptions& opt) {
  WindingResult r;
  r.admissibility = is_admissible(u, opt.boundary_samples);
  if (!r.admissibility.admissible) {
    std::ostringstream os;
    os << "map is not admissible: boundary margin " << r.admissibility.margin;
    throw ValidationError(os.str());
  }
  ArcWalker w{u, r.admissibility.lipschitz, opt.sample_cap};
  const int m = std::max(opt.initial_samples, 4);
  std::vector<cplx> vals(static_cast<std::size_t>(m + 1));
  for (int k = 0; k < m; ++k) vals[static_cast<std::size_t>(k)] = w.at(2.0 * kPi * k / m);
  vals[static_cast<std::size_t>(m)] = vals[0];
  double total = 0.0;
  for (int k = 0; k < m; ++k)
    total += w.arc(2.0 * kPi * k / m, 2.0 * kPi * (k + 1) / m, vals[static_cast<std::size_t>(k)],
                   vals[static_cast<std::size_t>(k + 1)], 0);
  r.raw = total / (2.0 * kPi);
  r.degree = static_cast<int>(std::lround(r.raw));
  r.samples = w.samples;
  if (std::abs(r.raw - r.degree) > 1e-6)
    throw NumericalError("winding sum is not an integer: " + std::to_string(r.raw));
  return r;
}

// ---------------------------------------------------------------------------
// Zero location and signed counts

template <int N>
std::vector<SignedZero<N>> locate_zeros(const BallMap<N>& u, const CountOptions& opt) {
  const int n = opt.grid > 0 ? opt.grid : (N == 2 ? 256 : 48);
  const double h = 2.0 / n;

  // Node values are cached for the top-level scan.
  const int nn = n + 1;
  std::size_t total = 1;
  for (int i = 0; i < N; ++i) total *= static_cast<std::size_t>(nn);
  std::vector<VecN<N>> nodes(total);
  auto node_point = [&](std::size_t id) {
    VecN<N> p;
    for (int i = 0; i < N; ++i) {
      p(i) = -1.0 + h * static_cast<double>(id % static_cast<std::size_t>(nn));
      id /= static_cast<std::size_t>(nn);
    }
    return p;
  };
  for (std::size_t id = 0; id < total; ++id) nodes[id] = u(node_point(id));

  std::vector<VecN<N>> seeds;
  std::size_t cells = 1;
  for (int i = 0; i < N; ++i) cells *= static_cast<std::size_t>(n);
  for (std::size_t c = 0; c < cells; ++c) {
    std::array<int, N> idx;
    std::size_t rem = c;
    for (int i = 0; i < N; ++i) {
      idx[static_cast<std::size_t>(i)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    VecN<N> lo, nearest;
    for (int i = 0; i < N; ++i) {
      lo(i) = -1.0 + h * idx[static_cast<std::size_t>(i)];
      nearest(i) = std::clamp(0.0, lo(i), lo(i) + h);
    }
    if (nearest.norm() >= 1.0) continue;
    std::array<VecN<N>, (1 << N)> corners;
    for (int m = 0; m < (1 << N); ++m) {
      std::size_t id = 0, stride = 1;
      for (int i = 0; i < N; ++i) {
        id += stride * static_cast<std::size_t>(idx[static_cast<std::size_t>(i)] + ((m >> i) & 1));
        stride *= static_cast<std::size_t>(nn);
      }
      corners[static_cast<std::size_t>(m)] = nodes[id];
    }
    if (!flagged<N>(corners)) continue;
    if (opt.refine_levels <= 0) {
      seeds.push_back(lo + VecN<N>::Constant(0.5 * h));
      continue;
    }
    for (int m = 0; m < (1 << N); ++m) {
      VecN<N> sub = lo;
      for (int i = 0; i < N; ++i)
        if (m & (1 << i)) sub(i) += 0.5 * h;
      scan_cell<N>(u, sub, 0.5 * h, opt.refine_levels - 1, opt, seeds);
    }
  }

  std::vector<VecN<N>> found;
  for (VecN<N> x : seeds) {
    if (!newton<N>(u, x, opt)) continue;
    if (x.norm() >= 1.0) continue;
    found.push_back(x);
  }
  std::sort(found.begin(), found.end(), lex_less<N>);
  std::vector<SignedZero<N>> zeros;
  for (const VecN<N>& x : found) {
    const bool dup = std::any_of(zeros.begin(), zeros.end(), [&](const SignedZero<N>& z) {
      return (z.location - x).norm() < opt.merge_distance;
    });
    if (!dup) zeros.push_back(classify<N>(u, x, opt.det_floor));
  }
  return zeros;
}

template std::vector<SignedZero<2>> locate_zeros<2>(const BallMap<2>&, const CountOptions&);
template std::vector<SignedZero<3>> locate_zeros<3>(const BallMap<3>&, const CountOptions&);

template <int N>
SignCount<N> degree_ball_n(const BallMap<N>& u, std::uint64_t seed, const CountOptions& opt) {
  const Admissibility adm = check_admissible<N>(u, N == 2 ? opt.boundary_samples : opt.boundary_samples / 8);
  if (!adm.admissible) {
    std::ostringstream os;
    os << "map is not admissible: boundary margin " << adm.margin;
    throw ValidationError(os.str());
  }
  SignCount<N> out;
  out.margin = adm.margin;
  out.delta = adm.margin / 10.0;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    const std::uint64_t s = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt);
    std::mt19937_64 rng(s);
    std::normal_distribution<double> n01(0.0, 1.0);
    VecN<N> c;
    MatN<N> B;
    for (int i = 0; i < N; ++i) c(i) = n01(rng);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) B(i, j) = n01(rng);
    const double scale = out.delta / (c.norm() + B.norm());
    const BallMap<N> ut = perturbed<N>(u, c * scale, B * scale);
    out.attempts = attempt + 1;
    out.seed_used = s;
    out.zeros = locate_zeros<N>(ut, opt);
    const bool degenerate = std::any_of(out.zeros.begin(), out.zeros.end(),
                                        [](const SignedZero<N>& z) { return z.sign == 0; });
    if (degenerate) continue;
    out.degree = 0;
    for (const auto& z : out.zeros) out.degree += z.sign;
    return out;
  }
  throw NumericalError("degenerate zeros persisted after " + std::to_string(opt.max_attempts) +
                       " perturbations");
}

template SignCount<2> degree_ball_n<2>(const BallMap<2>&, std::uint64_t, const CountOptions&);
template SignCount<3> degree_ball_n<3>(const BallMap<3>&, std::uint64_t, const CountOptions&);

SignCount<2> perturb_sign_count(const PlanarMap& u, std::uint64_t seed, const CountOptions& opt) {
  return degree_ball_n<2>(u, seed, opt);
}

} // namespace jhol
