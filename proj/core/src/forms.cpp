#include "jhol/forms.hpp"

#include "jhol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

namespace jhol {

namespace {

constexpr std::array<std::pair<int, int>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

std::string describe(const Point4& x) {
  std::ostringstream os;
  os << '(' << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ')';
  return os.str();
}

template <class F>
GridCheck max_over(const Box& box, const GridSpec& grid, F&& residual) {
  GridCheck out;
  for (const Point4& x : validation_points(box, grid)) {
    const double r = residual(x);
    if (!(r <= out.max_residual)) {  // NaN propagates as worst
      out.max_residual = r;
      out.worst = x;
    }
  }
  return out;
}

double skew_max(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

bool Box::contains(const Point4& x, double slack) const {
  for (int i = 0; i < 4; ++i)
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  return true;
}

double Box::max_side() const {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s = std::max(s, hi[i] - lo[i]);
  return s;
}

std::vector<Point4> validation_points(const Box& box, const GridSpec& grid) {
  std::vector<Point4> pts;
  const int n = std::max(grid.per_axis, 1);
  pts.reserve(static_cast<std::size_t>(n * n * n * n + grid.random_points));
  auto coord = [&](int axis, int k) {
    return n == 1 ? 0.5 * (box.lo[axis] + box.hi[axis])
                  : box.lo[axis] + (box.hi[axis] - box.lo[axis]) * k / (n - 1);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          pts.push_back({coord(0, a), coord(1, b), coord(2, c), coord(3, d)});
  std::mt19937_64 rng(grid.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < grid.random_points; ++k) {
    Point4 x;
    for (int i = 0; i < 4; ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * u(rng);
    pts.push_back(x);
  }
  return pts;
}

Mat4 standard_j() {
  Mat4 J = Mat4::Zero();
  J(1, 0) = 1.0;
  J(0, 1) = -1.0;
  J(3, 2) = 1.0;
  J(2, 3) = -1.0;
  return J;
}

// ---------------------------------------------------------------------------
// AlmostComplexStructure

struct AlmostComplexStructure::Tapes {
  ExprTape value;
  std::array<std::once_flag, 4> once;
  std::array<ExprTape, 4> deriv;
};

AlmostComplexStructure::AlmostComplexStructure(std::array<FieldExpr, 16> entries, Box box)
    : entries_(std::move(entries)), box_(box), tapes_(std::make_shared<Tapes>()) {
  tapes_->value = ExprTape(entries_);
}

AlmostComplexStructure AlmostComplexStructure::standard(const Box& box) {
  return conjugated(Mat4::Identity(), box);
}

AlmostComplexStructure AlmostComplexStructure::conjugated(const Mat4& P, const Box& box) {
  const Mat4 J = P * standard_j() * P.inverse();
  std::array<FieldExpr, 16> e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) e[static_cast<std::size_t>(4 * i + j)] = FieldExpr(J(i, j));
  return AlmostComplexStructure(std::move(e), box);
}

Mat4 AlmostComplexStructure::at(const Point4& x) const {
  std::array<double, 16> v;
  tapes_->value.eval(x, v.data());
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = v[static_cast<std::size_t>(4 * i + j)];
  return m;
}

Mat4 AlmostComplexStructure::derivative(const Point4& x, int var) const {
  const std::size_t s = static_cast<std::size_t>(var);
  std::call_once(tapes_->once[s], [&] {
    std::array<FieldExpr, 16> d;
    for (std::size_t i = 0; i < 16; ++i) d[i] = entries_[i].diff(var);
    tapes_->deriv[s] = ExprTape(d);
  });
  std::array<double, 16> v;
  tapes_->deriv[s].eval(x, v.data());
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = v[static_cast<std::size_t>(4 * i + j)];
  return m;
}

GridCheck AlmostComplexStructure::square_residual(const GridSpec& grid) const {
  return max_over(box_, grid, [&](const Point4& x) {
    const Mat4 J = at(x);
    return (J * J + Mat4::Identity()).cwiseAbs().maxCoeff();
  });
}

void AlmostComplexStructure::validate(const GridSpec& grid, double tol) const {
  const GridCheck c = square_residual(grid);
  if (!(c.max_residual <= tol)) {
    std::ostringstream os;
    os << "J^2 + I residual " << c.max_residual << " exceeds " << tol << " at " << describe(c.worst);
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------
// TwoForm

struct TwoForm::Tapes {
  std::once_flag value_once;
  ExprTape value;
  std::array<std::once_flag, 4> once;
  std::array<ExprTape, 4> deriv;
};

TwoForm::TwoForm(std::array<FieldExpr, 6> coefficients, Box box)
    : c_(std::move(coefficients)), box_(box), tapes_(std::make_shared<Tapes>()) {}

const TwoForm::Tapes& TwoForm::tapes() const {
  if (!tapes_) {
    static const std::shared_ptr<Tapes> zero = [] {
      auto t = std::make_shared<Tapes>();
      t->value = ExprTape(std::array<FieldExpr, 6>{});
      return t;
    }();
    return *zero;
  }
  std::call_once(tapes_->value_once, [&] { tapes_->value = ExprTape(c_); });
  return *tapes_;
}

int TwoForm::slot(int i, int j) {
  for (int k = 0; k < 6; ++k)
    if (kPairs[static_cast<std::size_t>(k)].first == i && kPairs[static_cast<std::size_t>(k)].second == j) return k;
  return -1;
}

TwoForm TwoForm::constant(const Mat4& m, const Box& box) {
  std::array<FieldExpr, 6> c;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kPairs[static_cast<std::size_t>(k)];
    c[static_cast<std::size_t>(k)] = FieldExpr(m(i, j));
  }
  return TwoForm(std::move(c), box);
}

TwoForm TwoForm::basis(int i, int j, double c, const Box& box) {
  if (i < 1 || i > 4 || j < 1 || j > 4 || i == j) throw ValidationError("TwoForm::basis: need distinct indices in 1..4");
  Mat4 m = Mat4::Zero();
  m(i - 1, j - 1) = c;
  m(j - 1, i - 1) = -c;
  return constant(m, box);
}

FieldExpr TwoForm::coefficient(int i, int j) const {
  if (i == j) return FieldExpr(0.0);
  if (i < j) return c_[static_cast<std::size_t>(slot(i, j))];
  return -c_[static_cast<std::size_t>(slot(j, i))];
}

Mat4 TwoForm::at(const Point4& x) const {
  std::array<double, 6> vals;
  tapes().value.eval(x, vals.data());
  Mat4 m = Mat4::Zero();
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kPairs[static_cast<std::size_t>(k)];
    const double v = vals[static_cast<std::size_t>(k)];
    m(i, j) = v;
    m(j, i) = -v;
  }
  return m;
}

Mat4 TwoForm::derivative(const Point4& x, int var) const {
  Mat4 m = Mat4::Zero();
  if (!tapes_) return m;
  const std::size_t s = static_cast<std::size_t>(var);
  std::call_once(tapes_->once[s], [&] {
    std::array<FieldExpr, 6> d;
    for (std::size_t i = 0; i < 6; ++i) d[i] = c_[i].diff(var);
    tapes_->deriv[s] = ExprTape(d);
  });
  std::array<double, 6> vals;
  tapes_->deriv[s].eval(x, vals.data());
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kPairs[static_cast<std::size_t>(k)];
    const double v = vals[static_cast<std::size_t>(k)];
    m(i, j) = v;
    m(j, i) = -v;
  }
  return m;
}

TwoForm TwoForm::operator+(const TwoForm& o) const {
  std::array<FieldExpr, 6> c;
  for (std::size_t k = 0; k < 6; ++k) c[k] = c_[k] + o.c_[k];
  return TwoForm(std::move(c), box_);
}

TwoForm TwoForm::operator-(const TwoForm& o) const {
  std::array<FieldExpr, 6> c;
  for (std::size_t k = 0; k < 6; ++k) c[k] = c_[k] - o.c_[k];
  return TwoForm(std::move(c), box_);
}

TwoForm TwoForm::operator*(const FieldExpr& s) const {
  std::array<FieldExpr, 6> c;
  for (std::size_t k = 0; k < 6; ++k) c[k] = c_[k] * s;
  return TwoForm(std::move(c), box_);
}

// ---------------------------------------------------------------------------
// Metric

namespace {
constexpr std::array<std::pair<int, int>, 10> kSymPairs{
    {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};
}

Metric::Metric(std::array<FieldExpr, 10> entries, Box box) : e_(std::move(entries)), box_(box) {}

Metric Metric::euclidean(const Box& box) {
  std::array<FieldExpr, 10> e;
  for (std::size_t k = 0; k < 10; ++k)
    e[k] = FieldExpr(kSymPairs[k].first == kSymPairs[k].second ? 1.0 : 0.0);
  return Metric(std::move(e), box);
}

Mat4 Metric::at(const Point4& x) const {
  Mat4 g;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto [i, j] = kSymPairs[k];
    g(i, j) = g(j, i) = e_[k](x);
  }
  return g;
}

GridCheck Metric::min_eigenvalue(const GridSpec& grid) const {
  GridCheck out;
  out.max_residual = std::numeric_limits<double>::infinity();
  for (const Point4& x : validation_points(box_, grid)) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(at(x), Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues()(0);
    if (!(lam >= out.max_residual)) {
      out.max_residual = lam;
      out.worst = x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise algebra

Mat4 pullback_matrix(const Mat4& alpha, const Mat4& J) { return J.transpose() * alpha * J; }

Mat4 j_anti_matrix(const Mat4& beta, const Mat4& J) { return J.transpose() * beta; }

double form_norm(const Mat4& alpha) {
  double s = 0.0;
  for (const auto& [i, j] : kPairs) s += alpha(i, j) * alpha(i, j);
  return std::sqrt(0.5 * s);
}

double pfaffian(const Mat4& a) { return a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2); }

Mat4 hodge_star(const Mat4& alpha, const Mat4& g) {
  const Mat4 ginv = g.inverse();
  const Mat4 raised = ginv * alpha * ginv.transpose();  // alpha^{kl}
  const double vol = std::sqrt(g.determinant());
  // (*alpha)_{ij} = 1/2 sqrt|g| sum_{kl} alpha^{kl} eps_{klij}
  auto eps = [](int a, int b, int c, int d) -> double {
    if (a == b || a == c || a == d || b == c || b == d || c == d) return 0.0;
    int p[4] = {a, b, c, d};
    int sign = 1;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (p[i] > p[j]) sign = -sign;
    return sign;
  };
  Mat4 out = Mat4::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) s += raised(k, l) * eps(k, l, i, j);
      out(i, j) = 0.5 * vol * s;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Field-level operations

Mat4 pullback_by_J(const TwoForm& alpha, const AlmostComplexStructure& J, const Point4& x) {
  if (!J.box().contains(x) || !alpha.box().contains(x))
    throw ValidationError("point " + describe(x) + " outside the domain box");
  return pullback_matrix(alpha.at(x), J.at(x));
}

TwoForm pullback_form(const TwoForm& alpha, const AlmostComplexStructure& J) {
  // (J^T alpha J)_{ij} = sum_{k,l} J_{ki} alpha_{kl} J_{lj}
  std::array<FieldExpr, 6> c;
  for (int s = 0; s < 6; ++s) {
    const auto [i, j] = kPairs[static_cast<std::size_t>(s)];
    FieldExpr acc(0.0);
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        if (k == l) continue;
        const FieldExpr& jki = J.entry(k, i);
        const FieldExpr& jlj = J.entry(l, j);
        if ((jki.is_constant() && jki.constant_value() == 0.0) ||
            (jlj.is_constant() && jlj.constant_value() == 0.0))
          continue;
        acc += jki * alpha.coefficient(k, l) * jlj;
      }
    c[static_cast<std::size_t>(s)] = acc;
  }
  return TwoForm(std::move(c), alpha.box());
}

FormSplit split_form(const TwoForm& alpha, const AlmostComplexStructure& J) {
  const TwoForm pulled = pullback_form(alpha, J);
  return {(alpha + pulled) * FieldExpr(0.5), (alpha - pulled) * FieldExpr(0.5)};
}

GridCheck anti_invariance_residual(const TwoForm& beta, const AlmostComplexStructure& J,
                                   const GridSpec& grid) {
  return max_over(beta.box(), grid, [&](const Point4& x) {
    const Mat4 b = beta.at(x);
    return skew_max(pullback_matrix(b, J.at(x)) + b);
  });
}

TwoForm apply_J_anti(const TwoForm& beta, const AlmostComplexStructure& J, const GridSpec& grid,
                     double tol) {
  const GridCheck c = anti_invariance_residual(beta, J, grid);
  if (!(c.max_residual <= tol)) {
    std::ostringstream os;
    os << "form is not J-anti-invariant: residual " << c.max_residual << " at " << describe(c.worst);
    throw ValidationError(os.str());
  }
  // (J^T beta)_{ij} = sum_k J_{ki} beta_{kj}
  std::array<FieldExpr, 6> out;
  for (int s = 0; s < 6; ++s) {
    const auto [i, j] = kPairs[static_cast<std::size_t>(s)];
    FieldExpr acc(0.0);
    for (int k = 0; k < 4; ++k) {
      const FieldExpr& jki = J.entry(k, i);
      if (jki.is_constant() && jki.constant_value() == 0.0) continue;
      acc += jki * beta.coefficient(k, j);
    }
    out[static_cast<std::size_t>(s)] = acc;
  }
  return TwoForm(std::move(out), beta.box());
}

Metric compatible_metric(const AlmostComplexStructure& J, const TwoForm& omega, const GridSpec& grid,
                         double tol) {
  // g_{ij} = Omega(e_i, J e_j) = sum_k Omega_{ik} J_{kj}
  auto g_entry = [&](int i, int j) {
    FieldExpr acc(0.0);
    for (int k = 0; k < 4; ++k) {
      const FieldExpr& jkj = J.entry(k, j);
      if (k == i || (jkj.is_constant() && jkj.constant_value() == 0.0)) continue;
      acc += omega.coefficient(i, k) * jkj;
    }
    return acc;
  };
  std::array<FieldExpr, 16> full;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) full[static_cast<std::size_t>(4 * i + j)] = g_entry(i, j);

  const GridCheck asym = max_over(omega.box(), grid, [&](const Point4& x) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        worst = std::max(worst, std::abs(full[static_cast<std::size_t>(4 * i + j)](x) -
                                         full[static_cast<std::size_t>(4 * j + i)](x)));
    return worst;
  });
  if (!(asym.max_residual <= tol)) {
    std::ostringstream os;
    os << "J is not compatible with Omega: g asymmetric by " << asym.max_residual << " at "
       << describe(asym.worst);
    throw ValidationError(os.str());
  }
  std::array<FieldExpr, 10> e;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto [i, j] = kSymPairs[k];
    e[k] = full[static_cast<std::size_t>(4 * i + j)];
  }
  Metric g(std::move(e), omega.box());
  const GridCheck pd = g.min_eigenvalue(grid);
  if (!(pd.max_residual > tol)) {
    std::ostringstream os;
    os << "J is not compatible with Omega: smallest eigenvalue of g is " << pd.max_residual << " at "
       << describe(pd.worst);
    throw ValidationError(os.str());
  }
  return g;
}

Mat4 hodge_star(const TwoForm& alpha, const Metric& g, const Point4& x) {
  return hodge_star(alpha.at(x), g.at(x));
}

ThreeForm exterior_derivative(const TwoForm& alpha) {
  // (d alpha)_{ijk} = d_i a_jk - d_j a_ik + d_k a_ij
  auto c = [&](int i, int j, int k) {
    return alpha.coefficient(j, k).diff(i) - alpha.coefficient(i, k).diff(j) +
           alpha.coefficient(i, j).diff(k);
  };
  return {c(0, 1, 2), c(0, 1, 3), c(0, 2, 3), c(1, 2, 3)};
}

GridCheck closedness_residual(const TwoForm& alpha, const GridSpec& grid) {
  const ThreeForm d = exterior_derivative(alpha);
  const ExprTape tape(d);
  return max_over(alpha.box(), grid, [&](const Point4& x) {
    std::array<double, 4> v;
    tape.eval(x, v.data());
    double worst = 0.0;
    for (double e : v) worst = std::max(worst, std::abs(e));
    return worst;
  });
}

bool degeneracy_check(const TwoForm& alpha, const Point4& x, double tol) {
  return std::sqrt(std::abs(pfaffian(alpha.at(x)))) <= tol;
}

bool vanishes_at(const TwoForm& alpha, const Point4& x, double tol) { return form_norm(alpha.at(x)) <= tol; }

TwoForm re_holomorphic_form(const ComplexExpr& h, const Box& box) {
  // dw0 ^ dw1 = (dx13 - dx24) + i (dx14 + dx23)
  std::array<FieldExpr, 6> c;
  c[1] = h.re;     // 13
  c[4] = -h.re;    // 24
  c[2] = -h.im;    // 14
  c[3] = -h.im;    // 23
  return TwoForm(std::move(c), box);
}

} // namespace jhol
