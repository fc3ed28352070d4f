#pragma once

#include "jhol/degree.hpp"
#include "jhol/forms.hpp"
#include "jhol/jdisks.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace jhol {

// Test disk sigma : closed unit disk -> R^4.
struct TestDisk {
  std::string name;
  std::function<Vec4(cplx)> map;
  bool j_holomorphic = false;

  Vec4 operator()(cplx zeta) const { return map(zeta); }
};

// zeta -> center + radius * zeta * (kappa0, kappa1) in complex coordinates.
TestDisk flat_disk(const Point4& center, const std::array<cplx, 2>& kappa, double radius, std::string name = "flat");
// zeta -> d(d.rho * zeta).
TestDisk from_solved_disk(const Disk& d, std::string name = "disk");
// zeta -> sigma(zeta^k).
TestDisk precompose_power(const TestDisk& sigma, int k);
// zeta -> sigma(center + radius * zeta).
TestDisk restrict_disk(const TestDisk& sigma, const Disk2& sub);
// zeta -> sigma(zeta) + offset.
TestDisk translate_disk(const TestDisk& sigma, const Vec4& offset);

// Coefficients (f, g) of alpha = f psi + g J psi for a frame psi of the
// anti-invariant bundle. psi is the anti-invariant part of one of the constant
// forms w0, phi0, psi0; (psi, J psi) has the same orientation for each choice.
class AntiInvariantFrame {
 public:
  AntiInvariantFrame(const TwoForm& alpha, const AlmostComplexStructure& J);

  // Member of the spanning set with the largest norm at x.
  int best_index(const Point4& x) const;
  Eigen::Vector2d coefficients(const Point4& x, int index) const;
  Eigen::Vector2d coefficients(const Point4& x) const { return coefficients(x, best_index(x)); }
  // 2 x 4 Jacobian of the coefficients by central differences.
  Eigen::Matrix<double, 2, 4> jacobian(const Point4& x, int index, double h = 1e-6) const;
  double frame_norm(const Point4& x, int index) const;
  double alpha_norm(const Point4& x) const;

 private:
  TwoForm alpha_;
  std::array<TwoForm, 3> psi_;
  std::array<TwoForm, 3> jpsi_;
};

struct IndexedZero {
  cplx location;     // in the unit disk
  int multiplicity = 0;  // local winding, signed
};

struct IntersectionReport {
  std::string disk;
  int frame_index = 0;
  double frame_floor = 0.0;  // min |psi| along sigma
  Admissibility admissibility;
  int winding = 0;
  std::vector<IndexedZero> zeros;
  int perturbed_count = 0;   // signed count after a generic perturbation
  int total = 0;
};

struct IndexOptions {
  WindingOptions winding{};
  CountOptions count{64, 3, 25, 1e-12, 1e-9, 1e-6, 1e-12, 5, 1024};
  std::uint64_t seed = 0;
  double frame_floor = 1e-6;
  int max_boundary_samples = 65536;  // admissibility refinement cap
  double cluster_distance = 0.02;  // zeros closer than this are reported as one
};

// Gamma_alpha o sigma in the frame (psi, J psi) as a planar map of the unit disk.
PlanarMap section_map(const AntiInvariantFrame& frame, const TestDisk& sigma, int frame_index);

// I_alpha(sigma): boundary winding of Gamma_alpha o sigma. Zeros are listed
// with their local windings, and the total is checked against both the
// multiplicity sum and a perturbed signed count. Throws ValidationError when
// sigma is not admissible and NumericalError when the frame degenerates or
// the three counts disagree.
IntersectionReport intersection_index(const TwoForm& alpha, const AlmostComplexStructure& J, const TestDisk& sigma,
                                      const IndexOptions& opt = {});

struct PcaBattery {
  std::vector<TestDisk> nonvanishing;
  std::vector<std::pair<TestDisk, TestDisk>> homotopy;  // straight-line homotopy of the disks
  std::vector<std::pair<TestDisk, int>> composition;
  std::vector<std::pair<TestDisk, std::vector<Disk2>>> additivity;
  std::vector<TestDisk> positivity;  // J-holomorphic disks
};

AxiomReport pca_axiom_suite(const TwoForm& alpha, const AlmostComplexStructure& J, const PcaBattery& battery,
                            const IndexOptions& opt = {});

struct ZeroPoint {
  Point4 x{};
  double norm = 0.0;  // |alpha(x)|
  int segment = 0;
  int parent = -1;    // predecessor in the continuation, -1 for a seed
  Vec4 t1 = Vec4::Zero();
  Vec4 t2 = Vec4::Zero();
  bool singular = false;  // Jacobian rank below 2
};

struct ZeroSegment {
  int id = 0;
  int seed = 0;  // index of the seed point
  int size = 0;
  int branch_points = 0;
  bool truncated = false;
  std::string note;
};

struct BoxCount {
  double epsilon = 0.0;
  long long occupied = 0;
};

struct ZeroSetSample {
  Box box;
  std::vector<ZeroPoint> points;
  std::vector<ZeroSegment> segments;
  std::vector<BoxCount> counts;
  double step = 0.0;
  int seeds_tried = 0;
  int seeds_accepted = 0;
  double max_norm = 0.0;

  void write_points(std::ostream& os) const;  // x1 x2 x3 x4 |alpha| segment
  void write_counts(std::ostream& os) const;  // CSV
};

struct TraceOptions {
  int resolution = 12;             // seed grid points per axis
  std::array<int, 2> ladder{3, 7}; // epsilon = box size * 2^-k
  double zero_tol = 1e-7;
  double newton_tol = 1e-12;
  int newton_iterations = 25;
  double max_turn_deg = 30.0;
  double rank_tol = 1e-6;          // relative second singular value
  int directions = 6;
  std::size_t max_points = 4000000;
  GridSpec validation{5, 64, 0};
  double validation_tol = 1e-9;
};

std::vector<BoxCount> box_counts(const std::vector<Point4>& points, const Box& box, std::array<int, 2> ladder);

ZeroSetSample trace_zero_set(const TwoForm& alpha, const AlmostComplexStructure& J, const Box& box,
                             const TraceOptions& opt = {});

struct BoxDimension {
  double slope = 0.0;
  double measure_proxy = 0.0;  // sup N(eps) eps^2 with eps relative to the box size
};

BoxDimension box_dimension(const std::vector<BoxCount>& counts, double box_size);
BoxDimension box_dimension(const ZeroSetSample& sample);

struct EmptinessReport {
  bool empty_interior = true;
  std::vector<std::array<int, 4>> offending;
  double max_norm = 0.0;
};

// True iff no grid cell has |alpha| <= tol at all 16 corners and the center.
// Throws ValidationError when |alpha| <= 1e-6 at every grid point.
EmptinessReport interior_emptiness_check(const TwoForm& alpha, const Box& box, int grid, double tol = 1e-7);

} // namespace jhol
