#include "jhol/cr_solver.hpp"

#include "jhol/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace jhol {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

int wrap(long q, int n) {
  const long r = q % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

// Fourier coefficients c[m + nt/2] = (1/nt) sum_k ring[k] exp(-i m theta_k).
std::vector<cplx> forward(const cplx* ring, int nt) {
  const std::vector<cplx> a(ring, ring + nt);
  std::vector<cplx> f;
  fft_engine().fwd(f, a);
  std::vector<cplx> c(static_cast<std::size_t>(nt));
  for (int mi = 0; mi < nt; ++mi)
    c[static_cast<std::size_t>(mi)] = f[static_cast<std::size_t>(wrap(mi - nt / 2, nt))] / static_cast<double>(nt);
  return c;
}

void inverse(const std::vector<cplx>& c, cplx* ring, int nt) {
  std::vector<cplx> a(static_cast<std::size_t>(nt));
  for (int mi = 0; mi < nt; ++mi) a[static_cast<std::size_t>(wrap(mi - nt / 2, nt))] = c[static_cast<std::size_t>(mi)];
  std::vector<cplx> out;
  fft_engine().SetFlag(Eigen::FFT<double>::Unscaled);
  fft_engine().inv(out, a);
  std::copy(out.begin(), out.end(), ring);
}

cplx ring_value(const std::vector<cplx>& c, int nt, double theta, int band) {
  cplx s = 0.0;
  const int lo = std::max(1, nt / 2 - band), hi = std::min(nt - 1, nt / 2 + band);
  const cplx step = std::polar(1.0, theta);
  cplx e = std::polar(1.0, (lo - nt / 2) * theta);
  for (int mi = lo; mi <= hi; ++mi, e *= step) s += c[static_cast<std::size_t>(mi)] * e;
  if (band >= nt / 2) s += c[0] * std::cos(0.5 * nt * theta);
  return s;
}

// Lagrange basis weights for nodes x[0..3] at t.
std::array<double, 4> lagrange4(const std::array<double, 4>& x, double t) {
  std::array<double, 4> w{};
  for (int a = 0; a < 4; ++a) {
    double p = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) p *= (t - x[static_cast<std::size_t>(b)]) / (x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]);
    w[static_cast<std::size_t>(a)] = p;
  }
  return w;
}

// Monomial coefficients of the Lagrange basis polynomials: l_a(s) = sum_p c[a][p] s^p.
std::array<std::array<double, 4>, 4> lagrange_monomials(const std::array<double, 4>& x) {
  std::array<std::array<double, 4>, 4> out{};
  for (int a = 0; a < 4; ++a) {
    std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
    double denom = 1.0;
    int deg = 0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      const double xb = x[static_cast<std::size_t>(b)];
      for (int p = deg + 1; p >= 1; --p) poly[static_cast<std::size_t>(p)] = poly[static_cast<std::size_t>(p - 1)] - xb * poly[static_cast<std::size_t>(p)];
      poly[0] = -xb * poly[0];
      ++deg;
      denom *= x[static_cast<std::size_t>(a)] - xb;
    }
    for (int p = 0; p < 4; ++p) out[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] = poly[static_cast<std::size_t>(p)] / denom;
  }
  return out;
}

// Radial node on the line through the origin: i >= 0 is ring i, i < 0 is the
// reflection of ring -i-1 through the origin.
double line_node(const PolarGrid& g, int i) { return i >= 0 ? g.r(i) : -g.r(-i - 1); }

// int_a^b (r/s)^m s^p ds for 0 <= a < b.
double kernel_moment(int m, int p, double a, double b, double r) {
  const int e = p + 1 - m;
  if (e == 0) return std::pow(r, m) * (std::log(b) - std::log(a));
  const double tb = std::pow(b, p + 1) * std::pow(r / b, m);
  const double ta = a == 0.0 ? 0.0 : std::pow(a, p + 1) * std::pow(r / a, m);
  return (tb - ta) / e;
}

// Radial weights of the Cauchy transform per output mode m: the output ring
// i receives sum_j W[m][i][j] f_{m+1}(r_j).
struct TransformWeights {
  PolarGrid g;
  std::vector<std::vector<double>> w;  // [mode index][i * nr + j]
};

std::shared_ptr<const TransformWeights> build_weights(const PolarGrid& g) {
  auto tw = std::make_shared<TransformWeights>();
  tw->g = g;
  const int nr = g.nr, nt = g.nt;
  tw->w.assign(static_cast<std::size_t>(nt), std::vector<double>(static_cast<std::size_t>(nr * nr), 0.0));

  // Panels [edge_q, edge_{q+1}] with edges 0, r_0, ..., r_{nr-1}, rho and the
  // four interpolation nodes (line indices) used on each.
  std::vector<double> edges{0.0};
  for (int j = 0; j < nr; ++j) edges.push_back(g.r(j));
  edges.push_back(g.rho);
  const int panels = nr + 1;
  std::vector<std::array<int, 4>> nodes(static_cast<std::size_t>(panels));
  for (int q = 0; q < panels; ++q) {
    // Panel q spans line nodes q-1 .. q (q = 0 is [0, r_0]).
    int first = q - 2;
    first = std::min(first, nr - 4);
    nodes[static_cast<std::size_t>(q)] = {first, first + 1, first + 2, first + 3};
  }
  std::vector<std::array<std::array<double, 4>, 4>> mono(static_cast<std::size_t>(panels));
  for (int q = 0; q < panels; ++q) {
    std::array<double, 4> x{};
    for (int a = 0; a < 4; ++a) x[static_cast<std::size_t>(a)] = line_node(g, nodes[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)]);
    mono[static_cast<std::size_t>(q)] = lagrange_monomials(x);
  }

  for (int mi = 0; mi < nt; ++mi) {
    const int m = mi - nt / 2;
    const int n = m + 1;
    if (n >= nt / 2) continue;  // no input mode
    const double parity = (n % 2 == 0) ? 1.0 : -1.0;
    auto& W = tw->w[static_cast<std::size_t>(mi)];
    for (int i = 0; i < nr; ++i) {
      const double r = g.r(i);
      // Output ring i sits at edge i + 1.
      const int qlo = m >= 0 ? i + 1 : 0;
      const int qhi = m >= 0 ? panels : i + 1;
      const double sign = m >= 0 ? -2.0 : 2.0;
      for (int q = qlo; q < qhi; ++q) {
        const double a = edges[static_cast<std::size_t>(q)], b = edges[static_cast<std::size_t>(q + 1)];
        std::array<double, 4> mom{};
        for (int p = 0; p < 4; ++p) mom[static_cast<std::size_t>(p)] = kernel_moment(m, p, a, b, r);
        for (int an = 0; an < 4; ++an) {
          double wgt = 0.0;
          for (int p = 0; p < 4; ++p) wgt += mono[static_cast<std::size_t>(q)][static_cast<std::size_t>(an)][static_cast<std::size_t>(p)] * mom[static_cast<std::size_t>(p)];
          const int li = nodes[static_cast<std::size_t>(q)][static_cast<std::size_t>(an)];
          const int j = li >= 0 ? li : -li - 1;
          const double s = li >= 0 ? 1.0 : parity;
          W[static_cast<std::size_t>(i * nr + j)] += sign * s * wgt;
        }
      }
    }
  }
  return tw;
}

std::shared_ptr<const TransformWeights> weights_for(const PolarGrid& g) {
  static std::mutex mu;
  static std::map<std::tuple<double, int, int>, std::shared_ptr<const TransformWeights>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{g.rho, g.nr, g.nt}];
  if (!slot) slot = build_weights(g);
  return slot;
}

void check_grid(const PolarGrid& g) {
  if (g.nr < 6 || g.nt < 8 || g.nt % 2 != 0 || !(g.rho > 0.0))
    throw ValidationError("polar grid needs nr >= 6, even nt >= 8 and rho > 0");
}

} // namespace

double PolarGrid::theta(int k) const { return 2.0 * kPi * k / nt; }
cplx PolarGrid::z(int j, int k) const { return std::polar(r(j), theta(k)); }

bool operator==(const PolarGrid& a, const PolarGrid& b) {
  return a.rho == b.rho && a.nr == b.nr && a.nt == b.nt;
}

PlanarField::PlanarField(const PolarGrid& g, cplx fill) : g_(g), v_(g.size(), fill) { check_grid(g); }

PlanarField PlanarField::sample(const PolarGrid& g, const std::function<cplx(cplx)>& f) {
  PlanarField out(g);
  for (int j = 0; j < g.nr; ++j)
    for (int k = 0; k < g.nt; ++k) out(j, k) = f(g.z(j, k));
  return out;
}

const PlanarField::ModeCache& PlanarField::mode_cache() const {
  if (!modes_cache_) {
    auto m = std::make_shared<ModeCache>();
    m->c.reserve(static_cast<std::size_t>(g_.nr));
    double top = 0.0;
    for (int j = 0; j < g_.nr; ++j) {
      m->c.push_back(forward(&v_[idx(j, 0)], g_.nt));
      for (cplx v : m->c.back()) top = std::max(top, std::abs(v));
    }
    for (const auto& ring : m->c)
      for (int mi = 0; mi < g_.nt; ++mi)
        if (std::abs(ring[static_cast<std::size_t>(mi)]) > 1e-15 * top) m->band = std::max(m->band, std::abs(mi - g_.nt / 2));
    modes_cache_ = m;
  }
  return *modes_cache_;
}

const std::vector<std::vector<cplx>>& PlanarField::modes() const { return mode_cache().c; }

PlanarField PlanarField::from_modes(const PolarGrid& g, const std::vector<std::vector<cplx>>& c) {
  PlanarField out(g);
  for (int j = 0; j < g.nr; ++j) inverse(c[static_cast<std::size_t>(j)], &out.v_[out.idx(j, 0)], g.nt);
  return out;
}

cplx PlanarField::eval(cplx z) const {
  const ModeCache& mc = mode_cache();
  const auto& m = mc.c;
  const double r = std::abs(z);
  const double th = std::arg(z);
  const double h = g_.rho / g_.nr;
  // Line index of the node just below r (line node i sits at (i + 1/2) h).
  int below = static_cast<int>(std::floor(r / h - 0.5));
  int first = std::clamp(below - 1, -2, g_.nr - 4);
  std::array<double, 4> x{};
  std::array<cplx, 4> y{};
  for (int a = 0; a < 4; ++a) {
    const int li = first + a;
    x[static_cast<std::size_t>(a)] = line_node(g_, li);
    const int j = li >= 0 ? li : -li - 1;
    const double ang = li >= 0 ? th : th + kPi;
    y[static_cast<std::size_t>(a)] = ring_value(m[static_cast<std::size_t>(j)], g_.nt, ang, mc.band);
  }
  const auto w = lagrange4(x, r);
  cplx s = 0.0;
  for (int a = 0; a < 4; ++a) s += w[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(a)];
  return s;
}

PlanarField PlanarField::resample(const PolarGrid& g) const {
  if (g == g_) return *this;
  return sample(g, [this](cplx z) { return eval(z); });
}

double PlanarField::sup_norm() const {
  double s = 0.0;
  for (cplx v : v_) s = std::max(s, std::abs(v));
  return s;
}

bool PlanarField::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

std::pair<int, int> PlanarField::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v_.size(); ++i)
    if (std::abs(v_[i]) > std::abs(v_[best])) best = i;
  return {static_cast<int>(best / static_cast<std::size_t>(g_.nt)), static_cast<int>(best % static_cast<std::size_t>(g_.nt))};
}

double PlanarField::interpolation_error() const {
  const PolarGrid half{g_.rho, std::max(6, g_.nr / 2), std::max(8, g_.nt / 2)};
  const PlanarField coarse = resample(half);
  double err = 0.0;
  for (int j = 0; j < g_.nr; ++j)
    for (int k = 0; k < g_.nt; ++k) err = std::max(err, std::abs(coarse.eval(g_.z(j, k)) - (*this)(j, k)));
  const double s = sup_norm();
  return s > 0 ? err / s : err;
}

PlanarField PlanarField::conj() const {
  PlanarField out(*this);
  out.modes_cache_.reset();
  for (cplx& v : out.v_) v = std::conj(v);
  return out;
}

PlanarField PlanarField::apply(const std::function<cplx(cplx)>& f) const {
  PlanarField out(*this);
  out.modes_cache_.reset();
  for (cplx& v : out.v_) v = f(v);
  return out;
}

PlanarField& PlanarField::operator+=(const PlanarField& o) {
  modes_cache_.reset();
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

PlanarField& PlanarField::operator-=(const PlanarField& o) {
  modes_cache_.reset();
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

PlanarField operator*(const PlanarField& a, const PlanarField& b) {
  PlanarField out(a.g_);
  for (std::size_t i = 0; i < a.v_.size(); ++i) out.v_[i] = a.v_[i] * b.v_[i];
  return out;
}

PlanarField operator/(const PlanarField& a, const PlanarField& b) {
  PlanarField out(a.g_);
  for (std::size_t i = 0; i < a.v_.size(); ++i) out.v_[i] = a.v_[i] / b.v_[i];
  return out;
}

PlanarField operator*(cplx s, const PlanarField& a) {
  PlanarField out(a.g_);
  for (std::size_t i = 0; i < a.v_.size(); ++i) out.v_[i] = s * a.v_[i];
  return out;
}

namespace {

// (d/dr, d/dtheta) of f on the grid.
std::pair<PlanarField, PlanarField> polar_derivatives(const PlanarField& f) {
  const PolarGrid& g = f.grid();
  const int nr = g.nr, nt = g.nt;
  const double h = g.rho / nr;
  PlanarField fr(g), ft(g);
  // Value at line index li along angle index k.
  auto at = [&](int li, int k) { return li >= 0 ? f(li, k) : f(-li - 1, (k + nt / 2) % nt); };
  for (int k = 0; k < nt; ++k)
    for (int j = 0; j < nr; ++j) {
      cplx d;
      if (j <= nr - 3) {
        d = (at(j - 2, k) - 8.0 * at(j - 1, k) + 8.0 * at(j + 1, k) - at(j + 2, k)) / (12.0 * h);
      } else if (j == nr - 2) {
        d = (3.0 * at(j + 1, k) + 10.0 * at(j, k) - 18.0 * at(j - 1, k) + 6.0 * at(j - 2, k) - at(j - 3, k)) / (12.0 * h);
      } else {
        d = (25.0 * at(j, k) - 48.0 * at(j - 1, k) + 36.0 * at(j - 2, k) - 16.0 * at(j - 3, k) + 3.0 * at(j - 4, k)) / (12.0 * h);
      }
      fr(j, k) = d;
    }
  auto c = f.modes();
  for (auto& ring : c) {
    ring[0] = 0.0;
    for (int mi = 1; mi < nt; ++mi) ring[static_cast<std::size_t>(mi)] *= kI * static_cast<double>(mi - nt / 2);
  }
  ft = PlanarField::from_modes(g, c);
  return {fr, ft};
}

PlanarField wirtinger(const PlanarField& f, double s) {
  const auto [fr, ft] = polar_derivatives(f);
  const PolarGrid& g = f.grid();
  PlanarField out(g);
  for (int j = 0; j < g.nr; ++j)
    for (int k = 0; k < g.nt; ++k) {
      const double r = g.r(j);
      out(j, k) = 0.5 * std::polar(1.0, s * g.theta(k)) * (fr(j, k) + s * kI / r * ft(j, k));
    }
  return out;
}

} // namespace

PlanarField dbar(const PlanarField& f) { return wirtinger(f, 1.0); }
PlanarField dz(const PlanarField& f) { return wirtinger(f, -1.0); }

PlanarField cauchy_transform(const PlanarField& f) {
  const PolarGrid& g = f.grid();
  if (!f.all_finite()) throw NumericalError("cauchy_transform: non-finite input");
  const auto tw = weights_for(g);
  const auto& in = f.modes();
  const int nr = g.nr, nt = g.nt;
  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(nr), std::vector<cplx>(static_cast<std::size_t>(nt), 0.0));
  for (int mi = 0; mi < nt; ++mi) {
    const int ni = mi + 1;  // input mode m + 1
    if (ni >= nt) continue;
    const auto& W = tw->w[static_cast<std::size_t>(mi)];
    for (int i = 0; i < nr; ++i) {
      cplx s = 0.0;
      for (int j = 0; j < nr; ++j) s += W[static_cast<std::size_t>(i * nr + j)] * in[static_cast<std::size_t>(j)][static_cast<std::size_t>(ni)];
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(mi)] = s;
    }
  }
  PlanarField t = PlanarField::from_modes(g, out);
  if (!t.all_finite()) throw NumericalError("cauchy_transform: quadrature produced non-finite values");
  return t;
}

TransformCheck cauchy_residual(const PlanarField& f, const PlanarField& tf) {
  const PlanarField r = dbar(tf) - f;
  const auto [j, k] = r.argmax();
  const double scale = std::max(f.sup_norm(), 1e-300);
  return {std::abs(r(j, k)) / scale, r.grid().z(j, k)};
}

} // namespace jhol
