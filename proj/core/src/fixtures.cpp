#include "jhol/fixtures.hpp"

#include "jhol/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace jhol {

namespace {

using SymMat = std::array<FieldExpr, 16>;

FieldExpr& at(SymMat& m, int i, int j) { return m[static_cast<std::size_t>(4 * i + j)]; }
const FieldExpr& at(const SymMat& m, int i, int j) { return m[static_cast<std::size_t>(4 * i + j)]; }

bool is_zero(const FieldExpr& e) { return e.is_constant() && e.constant_value() == 0.0; }

SymMat constant(const Mat4& m) {
  SymMat s;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) at(s, i, j) = FieldExpr(m(i, j));
  return s;
}

SymMat mul(const SymMat& a, const SymMat& b) {
  SymMat out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      FieldExpr acc(0.0);
      for (int k = 0; k < 4; ++k) {
        if (is_zero(at(a, i, k)) || is_zero(at(b, k, j))) continue;
        acc += at(a, i, k) * at(b, k, j);
      }
      at(out, i, j) = acc;
    }
  return out;
}

FieldExpr det3(const SymMat& m, int skip_row, int skip_col) {
  int r[3], c[3];
  for (int i = 0, n = 0; i < 4; ++i)
    if (i != skip_row) r[n++] = i;
  for (int j = 0, n = 0; j < 4; ++j)
    if (j != skip_col) c[n++] = j;
  auto e = [&](int i, int j) { return at(m, r[i], c[j]); };
  return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
         e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
}

// Skew matrix of a 2-form given by its (12, 13, 14, 23, 24, 34) coefficients.
Mat4 form_matrix(const std::array<double, 6>& c) {
  Mat4 m = Mat4::Zero();
  constexpr std::array<std::pair<int, int>, 6> pairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (int s = 0; s < 6; ++s) {
    m(pairs[static_cast<std::size_t>(s)].first, pairs[static_cast<std::size_t>(s)].second) = c[static_cast<std::size_t>(s)];
    m(pairs[static_cast<std::size_t>(s)].second, pairs[static_cast<std::size_t>(s)].first) = -c[static_cast<std::size_t>(s)];
  }
  return m;
}

const Mat4& omega0() {
  static const Mat4 m = form_matrix({1, 0, 0, 0, 0, 1});
  return m;
}
const Mat4& phi0() {
  static const Mat4 m = form_matrix({0, 1, 0, 0, -1, 0});
  return m;
}
const Mat4& psi0() {
  static const Mat4 m = form_matrix({0, 0, 1, 1, 0, 0});
  return m;
}

struct Monomial {
  std::array<int, 4> e{};
  double value(const Point4& x) const {
    double v = 1.0;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) v *= x[static_cast<std::size_t>(i)];
    return v;
  }
  double grad(const Point4& x, int var) const {
    const int p = e[static_cast<std::size_t>(var)];
    if (p == 0) return 0.0;
    Monomial m = *this;
    m.e[static_cast<std::size_t>(var)] -= 1;
    return p * m.value(x);
  }
  FieldExpr expr() const {
    FieldExpr out(1.0);
    for (int i = 0; i < 4; ++i)
      if (e[static_cast<std::size_t>(i)] > 0) out *= pow(FieldExpr::variable(i), e[static_cast<std::size_t>(i)]);
    return out;
  }
};

std::vector<Monomial> monomials(int degree) {
  std::vector<Monomial> out;
  for (int total = 0; total <= degree; ++total)
    for (int a = total; a >= 0; --a)
      for (int b = total - a; b >= 0; --b)
        for (int c = total - a - b; c >= 0; --c) out.push_back({{a, b, c, total - a - b - c}});
  return out;
}

constexpr std::array<std::array<int, 3>, 4> kTriples{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

} // namespace

AlmostComplexStructure self_dual_structure(double eps, const ComplexExpr& h, const Box& box) {
  const FieldExpr m1 = FieldExpr(eps) * h.im;
  const FieldExpr m2 = FieldExpr(eps) * h.re;
  const FieldExpr q = m1 * m1 + m2 * m2;
  const FieldExpr s = FieldExpr(1.0) + q;
  const FieldExpr a = (FieldExpr(1.0) - q) / s;
  const FieldExpr b = FieldExpr(2.0) * m1 / s;
  const FieldExpr c = FieldExpr(2.0) * m2 / s;
  std::array<FieldExpr, 16> e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      FieldExpr acc(0.0);
      if (omega0()(i, j) != 0.0) acc += FieldExpr(-omega0()(i, j)) * a;
      if (phi0()(i, j) != 0.0) acc += FieldExpr(-phi0()(i, j)) * b;
      if (psi0()(i, j) != 0.0) acc += FieldExpr(-psi0()(i, j)) * c;
      e[static_cast<std::size_t>(4 * i + j)] = acc;
    }
  return AlmostComplexStructure(std::move(e), box);
}

AlmostComplexStructure perturbed_structure(double eps, const std::array<FieldExpr, 16>& E, const Box& box) {
  const SymMat J0 = constant(standard_j());
  const SymMat JEJ = mul(mul(J0, E), J0);
  SymMat P;
  SymMat Em;
  for (std::size_t i = 0; i < 16; ++i) Em[i] = FieldExpr(0.5) * (E[i] + JEJ[i]);
  P = mul(J0, Em);
  SymMat M;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) at(M, i, j) = FieldExpr(0.5 * eps) * at(P, i, j) + FieldExpr(i == j ? 1.0 : 0.0);
  SymMat adj;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) at(adj, j, i) = FieldExpr((i + j) % 2 == 0 ? 1.0 : -1.0) * det3(M, i, j);
  FieldExpr det(0.0);
  for (int j = 0; j < 4; ++j) det += at(M, 0, j) * at(adj, j, 0);
  SymMat J = mul(mul(M, J0), adj);
  for (auto& e : J) e = e / det;
  return AlmostComplexStructure(std::move(J), box);
}

std::array<TwoForm, 3> anti_invariant_spanning_set(const AlmostComplexStructure& J) {
  const Box& box = J.box();
  return {split_form(TwoForm::constant(omega0(), box), J).anti_invariant,
          split_form(TwoForm::constant(phi0(), box), J).anti_invariant,
          split_form(TwoForm::constant(psi0(), box), J).anti_invariant};
}

KernelFit closed_anti_invariant_fit(const AlmostComplexStructure& J, int degree, int samples, std::uint64_t seed,
                                    double threshold) {
  if (degree < 0 || samples <= 0) throw ValidationError("closed_anti_invariant_fit: need degree >= 0 and samples > 0");
  const auto beta = anti_invariant_spanning_set(J);
  std::vector<ExprTape> dbeta;
  for (int l = 0; l < 3; ++l) dbeta.emplace_back(exterior_derivative(beta[static_cast<std::size_t>(l)]));
  const std::vector<Monomial> mons = monomials(degree);
  const int n = static_cast<int>(mons.size()) * 3;

  const std::vector<Point4> pts = validation_points(J.box(), GridSpec{0, samples, seed});
  const int ns = static_cast<int>(pts.size());
  Eigen::MatrixXd Ev(6 * ns, n), Dv(4 * ns, n);
  for (int p = 0; p < ns; ++p) {
    const Point4& x = pts[static_cast<std::size_t>(p)];
    std::array<Mat4, 3> bx;
    std::array<std::array<double, 4>, 3> dbx;
    for (int l = 0; l < 3; ++l) {
      bx[static_cast<std::size_t>(l)] = beta[static_cast<std::size_t>(l)].at(x);
      dbeta[static_cast<std::size_t>(l)].eval(x, dbx[static_cast<std::size_t>(l)].data());
    }
    for (std::size_t k = 0; k < mons.size(); ++k) {
      const double mv = mons[k].value(x);
      std::array<double, 4> g;
      for (int v = 0; v < 4; ++v) g[static_cast<std::size_t>(v)] = mons[k].grad(x, v);
      for (int l = 0; l < 3; ++l) {
        const int col = static_cast<int>(k) * 3 + l;
        const Mat4& b = bx[static_cast<std::size_t>(l)];
        int s = 0;
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j) Ev(6 * p + s++, col) = mv * b(i, j);
        for (int t = 0; t < 4; ++t) {
          const auto [i, j, kk] = kTriples[static_cast<std::size_t>(t)];
          const double dm = g[static_cast<std::size_t>(i)] * b(j, kk) - g[static_cast<std::size_t>(j)] * b(i, kk) +
                            g[static_cast<std::size_t>(kk)] * b(i, j);
          Dv(4 * p + t, col) = dm + mv * dbx[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
        }
      }
    }
  }

  // Minimize |D c| subject to |E c| = 1, restricted to the range of E.
  Eigen::JacobiSVD<Eigen::MatrixXd> se(Ev, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = se.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > 1e-10 * s(0)) ++r;
  if (r == 0) throw NumericalError("closed_anti_invariant_fit: spanning set vanishes on the samples");
  Eigen::MatrixXd W = se.matrixV().leftCols(r) * s.head(r).cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> sd(Dv * W, Eigen::ComputeThinV);
  const Eigen::VectorXd& t = sd.singularValues();

  KernelFit out;
  out.family_size = n;
  for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) out.singular_values.push_back(t(i));
  for (double v : out.singular_values)
    if (v <= threshold) ++out.kernel_dimension;
  Eigen::VectorXd c = W * sd.matrixV().col(t.size() - 1);
  const Eigen::VectorXd ev = Ev * c;
  const double scale = ev.cwiseAbs().maxCoeff();
  c /= scale;
  out.closedness = (Dv * c).cwiseAbs().maxCoeff();

  TwoForm alpha(std::array<FieldExpr, 6>{}, J.box());
  for (std::size_t k = 0; k < mons.size(); ++k) {
    const FieldExpr m = mons[k].expr();
    for (int l = 0; l < 3; ++l) {
      const double ck = c(static_cast<int>(k) * 3 + l);
      if (std::abs(ck) < 1e-14) continue;
      alpha = alpha + beta[static_cast<std::size_t>(l)] * (FieldExpr(ck) * m);
    }
  }
  out.alpha = alpha;
  return out;
}

ManufacturedCR manufactured_cr(std::uint64_t seed, const PolarGrid& grid) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto small = [&](double s) { return cplx(s * unit(rng), s * unit(rng)); };
  const double rho = grid.rho;
  const cplx a = small(0.3), b = small(0.2 / rho), c = small(0.2);
  const cplx c0 = small(0.4), c1 = small(0.3 / rho);

  ManufacturedCR out;
  const int count = 1 + static_cast<int>(rng() % 3);
  while (static_cast<int>(out.zeros.size()) < count) {
    const cplx z = std::polar(0.3 * rho * std::sqrt(0.5 * (unit(rng) + 1.0)), std::numbers::pi * unit(rng));
    const bool apart = std::all_of(out.zeros.begin(), out.zeros.end(),
                                   [&](const auto& q) { return std::abs(q.first - z) >= 0.1 * rho; });
    const int m = 1 + static_cast<int>(rng() % 2);
    if (apart) out.zeros.push_back({z, m});
  }
  const auto zeros = out.zeros;
  out.exact = [=](cplx z) {
    cplx p = std::exp(a * std::conj(z) + b * z * std::conj(z) + c * z);
    for (const auto& [q, m] : zeros)
      for (int k = 0; k < m; ++k) p *= z - q;
    return p;
  };
  const auto exact = out.exact;
  const auto C2 = [=](cplx z) { return c0 + c1 * z; };
  out.v = PlanarField::sample(grid, exact);
  out.system.c2 = PlanarField::sample(grid, C2);
  out.system.c1 = PlanarField::sample(grid, [=](cplx z) {
    const cplx v = exact(z);
    const cplx unit_ratio = std::abs(v) > 0.0 ? std::conj(v) / v : cplx(1.0);
    return -(a + b * z) - C2(z) * unit_ratio;
  });
  return out;
}

} // namespace jhol
