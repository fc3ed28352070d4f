#pragma once

#include "jhol/expr.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace jhol {

using cplx = std::complex<double>;

// Disk {|p - center| <= radius} in the plane.
struct Disk2 {
  cplx center{0.0, 0.0};
  double radius = 1.0;
};

// Map of the closed unit ball B^N into R^N with its Jacobian. When the
// Jacobian is not supplied it is taken by central differences.
template <int N>
struct BallMap {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> jac;

  Vec operator()(const Vec& p) const { return f(p); }
  Mat jacobian(const Vec& p) const;
};

using PlanarMap = BallMap<2>;

// u(x, y) = (e1, e2) with x, y the first two expression variables.
PlanarMap planar_from_exprs(const FieldExpr& u1, const FieldExpr& u2);
// Parses "u1" and "u2" over the variables x and y.
PlanarMap planar_from_text(std::string_view u1, std::string_view u2);
PlanarMap planar_from_complex(std::function<cplx(cplx)> f);

// Finite sum of c_ab z^a conj(z)^b.
struct ZZbarPolynomial {
  struct Term {
    int a = 0;
    int b = 0;
    cplx c;
  };
  std::vector<Term> terms;

  cplx operator()(cplx z) const;
  // (du/dz, du/dzbar)
  std::pair<cplx, cplx> wirtinger(cplx z) const;
  ZZbarPolynomial conjugate() const;
  PlanarMap map() const;
  int total_degree() const;
};

// Random polynomial with every term of total degree <= max_degree, complex
// normal coefficients.
ZZbarPolynomial random_zzbar_polynomial(std::uint64_t seed, int max_degree = 3);

// Real Jacobian of a map with Wirtinger derivatives (p, q).
Eigen::Matrix2d wirtinger_jacobian(cplx p, cplx q);

// p -> u(center + radius * p): the restriction of u to a subdisk, rescaled
// onto the unit disk.
PlanarMap restrict_to(const PlanarMap& u, const Disk2& d);
// z -> u(z^k).
PlanarMap compose_power(const PlanarMap& u, int k);
// z -> u(e^{i angle} z).
PlanarMap compose_rotation(const PlanarMap& u, double angle);
// (1 - t) u0 + t u1.
PlanarMap blend(const PlanarMap& u0, const PlanarMap& u1, double t);
PlanarMap conjugate_map(const PlanarMap& u);

// prod (z - a_j) or prod conj(z - a_j) per factor: orientation +1 gives a
// holomorphic factor, -1 an antiholomorphic one.
PlanarMap factor_map(const std::vector<std::pair<cplx, int>>& factors);

struct Admissibility {
  bool admissible = false;
  double margin = 0.0;     // certified min |u| on the boundary
  double min_sampled = 0.0;
  double lipschitz = 0.0;  // sampled difference quotient times 2
};

// Boundary check on the unit sphere of R^N. For N = 2 the circle is sampled
// at n points; for N = 3 a latitude/longitude grid with n latitudes is used.
template <int N>
Admissibility check_admissible(const BallMap<N>& u, int n_boundary_samples = 1024);

Admissibility is_admissible(const PlanarMap& u, int n_boundary_samples = 1024);

struct WindingResult {
  int degree = 0;
  double raw = 0.0;          // total argument change / 2 pi
  std::size_t samples = 0;
  Admissibility admissibility;
};

struct WindingOptions {
  int initial_samples = 256;
  int boundary_samples = 1024;
  std::size_t sample_cap = std::size_t{1} << 22;
};

// Boundary winding number of u on the unit circle. Throws ValidationError
// when u is not admissible and NumericalError when the refinement cap is hit.
WindingResult winding_degree(const PlanarMap& u, const WindingOptions& opt = {});

template <int N>
struct SignedZero {
  Eigen::Matrix<double, N, 1> location;
  int sign = 0;
  double det = 0.0;
};

template <int N>
struct SignCount {
  int degree = 0;
  std::vector<SignedZero<N>> zeros;
  double margin = 0.0;
  double delta = 0.0;
  int attempts = 0;
  std::uint64_t seed_used = 0;
};

struct CountOptions {
  int grid = 0;            // cells per axis; 0 picks 256 for N = 2 and 48 for N = 3
  int refine_levels = 3;   // bisection depth inside flagged cells
  int newton_iterations = 25;
  double newton_tol = 1e-12;
  double zero_tol = 1e-9;
  double merge_distance = 1e-6;
  double det_floor = 1e-12;
  int max_attempts = 5;
  int boundary_samples = 1024;
};

// Zeros of u inside the open unit ball, found by grid scan and Newton
// polishing, merged and sorted by coordinates. Zeros with |det| <= det_floor
// carry sign 0.
template <int N>
std::vector<SignedZero<N>> locate_zeros(const BallMap<N>& u, const CountOptions& opt = {});

// Signed zero count of u + delta (c + B p), delta = margin / 10, with |c| +
// |B| <= 1. Retries with a new seed when a zero is degenerate.
template <int N>
SignCount<N> degree_ball_n(const BallMap<N>& u, std::uint64_t seed, const CountOptions& opt = {});

SignCount<2> perturb_sign_count(const PlanarMap& u, std::uint64_t seed, const CountOptions& opt = {});

// Five-property battery.

struct AxiomCheck {
  int axiom = 0;
  std::string name;
  bool hypothesis_ok = true;
  bool passed = false;
  std::string detail;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  int instances(int axiom) const;
  int failures(int axiom) const;
  int skips(int axiom) const;
  int total_failures() const;
};

// I(u) = 0 when u has no zero on the closed disk.
AxiomCheck check_nonvanishing(const PlanarMap& u, const std::string& name);
// I(u0) = I(u1) along the straight-line homotopy, whose admissibility is
// checked at `steps` + 1 times with the Lipschitz-corrected margin.
AxiomCheck check_homotopy(const PlanarMap& u0, const PlanarMap& u1, const std::string& name,
                          int steps = 32);
// I(u o theta) = k I(u) for theta(z) = z^k.
AxiomCheck check_composition(const PlanarMap& u, int k, const std::string& name);
// I(u) = sum I(u on subdisk) for disjoint subdisks covering the zeros.
AxiomCheck check_additivity(const PlanarMap& u, const std::vector<Disk2>& subdisks,
                            const std::string& name);
// I((z - a)^k) = k.
AxiomCheck check_normalization(int k, cplx a, const std::string& name);

struct AxiomBattery {
  std::vector<std::pair<std::string, PlanarMap>> nonvanishing;
  std::vector<std::tuple<std::string, PlanarMap, PlanarMap>> homotopy;
  std::vector<std::tuple<std::string, PlanarMap, int>> composition;
  std::vector<std::tuple<std::string, PlanarMap, std::vector<Disk2>>> additivity;
  std::vector<std::tuple<std::string, int, cplx>> normalization;
};

AxiomBattery default_axiom_battery(std::uint64_t seed, int per_axiom = 20);
AxiomReport axiom_suite(const AxiomBattery& battery);

} // namespace jhol
