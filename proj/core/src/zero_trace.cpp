#include "jhol/zero_divisor.hpp"

#include "jhol/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

namespace jhol {

namespace {

constexpr double kPi = std::numbers::pi;

using Key = std::array<long long, 4>;

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = 1469598103934665603ull;
    for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
  }
};

// Points bucketed on a grid of side `cell` for radius queries up to `cell`.
class SpatialHash {
 public:
  explicit SpatialHash(double cell) : cell_(cell) {}

  void insert(const Vec4& x, int id) { buckets_[key(x)].push_back(id); }

  bool any_within(const Vec4& x, double r, const std::vector<ZeroPoint>& pts) const {
    const Key k = key(x);
    for (int m = 0; m < 81; ++m) {
      Key n = k;
      int c = m;
      for (int i = 0; i < 4; ++i, c /= 3) n[static_cast<std::size_t>(i)] += c % 3 - 1;
      const auto it = buckets_.find(n);
      if (it == buckets_.end()) continue;
      for (int id : it->second) {
        const Point4& p = pts[static_cast<std::size_t>(id)].x;
        if ((Vec4(p[0], p[1], p[2], p[3]) - x).norm() < r) return true;
      }
    }
    return false;
  }

 private:
  Key key(const Vec4& x) const {
    Key k;
    for (int i = 0; i < 4; ++i) k[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(x(i) / cell_));
    return k;
  }

  double cell_;
  std::unordered_map<Key, std::vector<int>, KeyHash> buckets_;
};

Vec4 vec(const Point4& p) { return Vec4(p[0], p[1], p[2], p[3]); }

struct Corrected {
  bool ok = false;
  Vec4 x;
  double norm = 0.0;
  Vec4 t1, t2;
  double s0 = 0.0, s1 = 0.0;
};

class Tracer {
 public:
  Tracer(const AntiInvariantFrame& frame, const Box& box, const TraceOptions& opt)
      : frame_(frame), box_(box), opt_(opt) {}

  // Min-norm Newton on the frame coefficients, then the kernel of the Jacobian.
  Corrected correct(const Vec4& start) const {
    Corrected c;
    Vec4 x = start;
    const int l = frame_.best_index(to_point(x));
    for (int it = 0; it < opt_.newton_iterations; ++it) {
      const Point4 p = to_point(x);
      const Eigen::Vector2d g = frame_.coefficients(p, l);
      if (g.norm() <= opt_.newton_tol) break;
      const Eigen::Matrix<double, 2, 4> D = frame_.jacobian(p, l);
      const Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>> svd(D, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec4 dx = svd.solve(g);
      x -= dx;
      if (dx.norm() <= 1e-15 * (1.0 + x.norm())) break;
    }
    const Point4 p = to_point(x);
    if (!box_.contains(p, 0.0)) return c;
    c.norm = frame_.alpha_norm(p);
    if (!(c.norm <= opt_.zero_tol) || (x - start).norm() > max_shift_) return c;
    const Eigen::Matrix<double, 2, 4> D = frame_.jacobian(p, l);
    const Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>> svd(D, Eigen::ComputeFullV);
    c.s0 = svd.singularValues()(0);
    c.s1 = svd.singularValues()(1);
    // Kernel basis anchored to the coordinate axis closest to the kernel.
    const Eigen::Matrix<double, 4, 2> K = svd.matrixV().rightCols(2);
    const Eigen::Vector4d reach = K.rowwise().norm();
    int axis = 0;
    while (reach(axis) < reach.maxCoeff() - 1e-6) ++axis;
    const Eigen::Vector2d a = K.row(axis).transpose().normalized();
    c.t1 = K * a;
    c.t2 = K * Eigen::Vector2d(-a(1), a(0));
    c.x = x;
    c.ok = true;
    return c;
  }

  void set_max_shift(double s) { max_shift_ = s; }

 private:
  const AntiInvariantFrame& frame_;
  const Box& box_;
  const TraceOptions& opt_;
  double max_shift_ = std::numeric_limits<double>::infinity();
};

// Largest principal angle between span(a1, a2) and span(b1, b2), in degrees.
double plane_angle_deg(const Vec4& a1, const Vec4& a2, const Vec4& b1, const Vec4& b2) {
  Eigen::Matrix<double, 4, 2> A, B;
  A << a1, a2;
  B << b1, b2;
  const Eigen::Vector2d s = Eigen::JacobiSVD<Eigen::Matrix2d>(A.transpose() * B).singularValues();
  return std::acos(std::clamp(s(1), -1.0, 1.0)) * 180.0 / kPi;
}

} // namespace

std::vector<BoxCount> box_counts(const std::vector<Point4>& points, const Box& box, std::array<int, 2> ladder) {
  std::vector<BoxCount> out;
  const double size = box.max_side();
  for (int k = ladder[0]; k <= ladder[1]; ++k) {
    const double eps = size * std::ldexp(1.0, -k);
    std::array<long long, 4> last{};
    for (int i = 0; i < 4; ++i) {
      const double side = box.hi[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)];
      last[static_cast<std::size_t>(i)] = std::max(0LL, static_cast<long long>(std::ceil(side / eps - 1e-9)) - 1);
    }
    std::set<Key> cells;
    for (const Point4& p : points) {
      Key key;
      for (int i = 0; i < 4; ++i) {
        const auto c = static_cast<long long>(
            std::floor((p[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)]) / eps));
        key[static_cast<std::size_t>(i)] = std::clamp(c, 0LL, last[static_cast<std::size_t>(i)]);
      }
      cells.insert(key);
    }
    out.push_back({eps, static_cast<long long>(cells.size())});
  }
  return out;
}

ZeroSetSample trace_zero_set(const TwoForm& alpha, const AlmostComplexStructure& J, const Box& box,
                             const TraceOptions& opt) {
  if (opt.resolution < 2) throw ValidationError("trace_zero_set: resolution must be >= 2");
  if (opt.ladder[1] - opt.ladder[0] < 2) throw ValidationError("trace_zero_set: the ladder needs >= 3 levels");
  const GridCheck closed = closedness_residual(alpha, opt.validation);
  if (!(closed.max_residual <= opt.validation_tol)) {
    std::ostringstream os;
    os << "trace_zero_set: alpha is not closed, |d alpha| = " << closed.max_residual;
    throw ValidationError(os.str());
  }
  const GridCheck anti = anti_invariance_residual(alpha, J, opt.validation);
  if (!(anti.max_residual <= opt.validation_tol)) {
    std::ostringstream os;
    os << "trace_zero_set: alpha is not J-anti-invariant, residual " << anti.max_residual;
    throw ValidationError(os.str());
  }

  const AntiInvariantFrame frame(alpha, J);
  ZeroSetSample out;
  out.box = box;
  const double size = box.max_side();
  out.step = size * std::ldexp(1.0, -opt.ladder[1]) / 4.0;
  const double s = out.step;
  Tracer tracer(frame, box, opt);
  SpatialHash hash(s);

  // Seeds: grid nodes where |alpha| is within a Lipschitz bound of zero.
  const int n = opt.resolution;
  std::vector<Point4> nodes;
  std::vector<double> norms;
  std::array<double, 4> h{};
  for (int i = 0; i < 4; ++i)
    h[static_cast<std::size_t>(i)] =
        (box.hi[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)]) / (n - 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const Point4 p{box.lo[0] + a * h[0], box.lo[1] + b * h[1], box.lo[2] + c * h[2], box.lo[3] + d * h[3]};
          nodes.push_back(p);
          norms.push_back(frame.alpha_norm(p));
        }
  const double hmax = *std::max_element(h.begin(), h.end());
  double lip = 0.0;
  const std::array<int, 4> stride{n * n * n, n * n, n, 1};
  for (std::size_t id = 0; id < nodes.size(); ++id)
    for (int i = 0; i < 4; ++i) {
      const int coord = static_cast<int>(id / static_cast<std::size_t>(stride[static_cast<std::size_t>(i)])) % n;
      if (coord + 1 < n)
        lip = std::max(lip, std::abs(norms[id + static_cast<std::size_t>(stride[static_cast<std::size_t>(i)])] - norms[id]) /
                                h[static_cast<std::size_t>(i)]);
    }
  const double seed_threshold = 1.5 * lip * hmax;

  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (norms[id] > seed_threshold) continue;
    ++out.seeds_tried;
    tracer.set_max_shift(std::numeric_limits<double>::infinity());
    const Corrected seed = tracer.correct(vec(nodes[id]));
    if (!seed.ok || hash.any_within(seed.x, s, out.points)) continue;
    ++out.seeds_accepted;

    ZeroSegment seg;
    seg.id = static_cast<int>(out.segments.size());
    seg.seed = static_cast<int>(out.points.size());
    int failures = 0, turns = 0;
    std::deque<int> queue;
    auto add = [&](const Corrected& c, int parent) {
      ZeroPoint zp;
      zp.x = to_point(c.x);
      zp.norm = c.norm;
      zp.segment = seg.id;
      zp.parent = parent;
      zp.t1 = c.t1;
      zp.t2 = c.t2;
      zp.singular = c.s1 <= opt.rank_tol * std::max(1.0, c.s0);
      const int pid = static_cast<int>(out.points.size());
      out.points.push_back(zp);
      out.max_norm = std::max(out.max_norm, c.norm);
      hash.insert(c.x, pid);
      queue.push_back(pid);
      ++seg.size;
    };
    add(seed, -1);
    tracer.set_max_shift(s);

    while (!queue.empty()) {
      if (out.points.size() >= opt.max_points) {
        seg.truncated = true;
        seg.note = "point budget exhausted";
        break;
      }
      const int pid = queue.front();
      queue.pop_front();
      const ZeroPoint p = out.points[static_cast<std::size_t>(pid)];
      const Vec4 x = vec(p.x);
      std::vector<Vec4> dirs;
      for (int k = 0; k < opt.directions; ++k) {
        const double a = 2.0 * kPi * k / opt.directions;
        dirs.push_back(std::cos(a) * p.t1 + std::sin(a) * p.t2);
      }
      if (p.singular) {
        ++seg.branch_points;
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j)
            for (int k = 0; k < 8; ++k) {
              Vec4 d = Vec4::Zero();
              d(i) = std::cos(kPi * k / 4);
              d(j) = std::sin(kPi * k / 4);
              dirs.push_back(d);
            }
      }
      for (const Vec4& d : dirs) {
        const Vec4 pred = x + s * d;
        if (!box.contains(to_point(pred), 0.0) || hash.any_within(pred, 0.5 * s, out.points)) continue;
        const Corrected c = tracer.correct(pred);
        if (!c.ok) {
          ++failures;
          continue;
        }
        if (hash.any_within(c.x, 0.5 * s, out.points)) continue;
        if (!p.singular && c.s1 > opt.rank_tol * std::max(1.0, c.s0) &&
            plane_angle_deg(p.t1, p.t2, c.t1, c.t2) > opt.max_turn_deg) {
          ++turns;
          continue;
        }
        add(c, pid);
      }
    }
    if (failures > 0 || turns > 0) {
      std::ostringstream os;
      if (!seg.note.empty()) os << seg.note << "; ";
      os << failures << " corrector failures, " << turns << " steps rejected by the turn limit";
      seg.note = os.str();
    }
    out.segments.push_back(seg);
  }

  std::vector<Point4> pts;
  pts.reserve(out.points.size());
  for (const ZeroPoint& p : out.points) pts.push_back(p.x);
  out.counts = box_counts(pts, box, opt.ladder);
  return out;
}

BoxDimension box_dimension(const std::vector<BoxCount>& counts, double box_size) {
  if (counts.size() < 3) throw ValidationError("box_dimension: need at least 3 ladder levels");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  BoxDimension r;
  for (const BoxCount& c : counts) {
    if (c.occupied <= 0 || !(c.epsilon > 0.0)) throw ValidationError("box_dimension: empty or degenerate ladder level");
    const double x = std::log(1.0 / c.epsilon), y = std::log(static_cast<double>(c.occupied));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    const double rel = c.epsilon / box_size;
    r.measure_proxy = std::max(r.measure_proxy, static_cast<double>(c.occupied) * rel * rel);
  }
  const double m = static_cast<double>(counts.size());
  const double den = m * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw ValidationError("box_dimension: ladder has a single scale");
  r.slope = (m * sxy - sx * sy) / den;
  return r;
}

BoxDimension box_dimension(const ZeroSetSample& sample) { return box_dimension(sample.counts, sample.box.max_side()); }

void ZeroSetSample::write_points(std::ostream& os) const {
  os << "# x1 x2 x3 x4 norm segment\n" << std::setprecision(17);
  for (const ZeroPoint& p : points)
    os << p.x[0] << ' ' << p.x[1] << ' ' << p.x[2] << ' ' << p.x[3] << ' ' << p.norm << ' ' << p.segment << '\n';
}

void ZeroSetSample::write_counts(std::ostream& os) const {
  os << "epsilon,occupied\n" << std::setprecision(17);
  for (const BoxCount& c : counts) os << c.epsilon << ',' << c.occupied << '\n';
}

} // namespace jhol
