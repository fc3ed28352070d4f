#include "jhol/cli/commands.hpp"

#include "jhol/cr_solver.hpp"
#include "jhol/degree.hpp"
#include "jhol/errors.hpp"
#include "jhol/fixtures.hpp"
#include "jhol/jdisks.hpp"
#include "jhol/zero_divisor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace jhol::cli {

using json = nlohmann::json;

json measured(double value, double tol) { return json{{"value", value}, {"tol", tol}}; }

json exact(long long value) { return json{{"value", value}, {"tol", 0}}; }

namespace {

// Results and checks of one run.
struct Run {
  json results = json::object();
  json checks = json::array();
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> log;

  bool check(const std::string& name, bool passed) {
    checks.push_back({{"name", name}, {"passed", passed}});
    note(std::string(passed ? "pass " : "FAIL ") + name);
    return passed;
  }
  void note(const std::string& line) { log.push_back(line); }
};

json complex_json(cplx z, double tol) { return json{{"re", measured(z.real(), tol)}, {"im", measured(z.imag(), tol)}}; }

json point_json(const Point4& x, double tol) {
  json a = json::array();
  for (double v : x) a.push_back(measured(v, tol));
  return a;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double tol_or(const Overrides& ov, double fallback) { return ov.tol ? *ov.tol : fallback; }

Point4 read_point(const json& s, const char* key, const Point4& fallback) {
  if (!s.contains(key)) return fallback;
  const json& v = s.at(key);
  if (!v.is_array() || v.size() != 4) throw ParseError(std::string(key) + " must be 4 numbers", 0);
  Point4 p{};
  for (std::size_t i = 0; i < 4; ++i) p[i] = v[i].get<double>();
  return p;
}

cplx read_cplx(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) throw ParseError("complex numbers are [re, im]", 0);
  return {v[0].get<double>(), v[1].get<double>()};
}

std::array<cplx, 2> read_kappa(const json& s, const char* key, std::array<cplx, 2> fallback) {
  if (!s.contains(key)) return fallback;
  const json& v = s.at(key);
  if (!v.is_array() || v.size() != 2) throw ParseError(std::string(key) + " must be [[re, im], [re, im]]", 0);
  return {read_cplx(v[0]), read_cplx(v[1])};
}

PolarGrid read_polar(const json& s, double rho) {
  return {rho, s.value("nr", 64), s.value("nt", 128)};
}

// Zero multiplicity of a sampled field on the circle |z - c| = r.
int field_winding(const PlanarField& f, cplx c, double r) {
  return winding_degree(planar_from_complex([&](cplx z) { return f.eval(c + r * z); })).degree;
}

// Zeros of a holomorphic sampled field in |z| < r, each polished by Newton
// with the multiplicity from its local winding.
std::vector<std::pair<cplx, int>> holomorphic_zeros(const PlanarField& f, double r) {
  const auto raw = locate_zeros(planar_from_complex([&](cplx z) { return f.eval(r * z); }), CountOptions{64});
  std::vector<cplx> centers;
  std::vector<int> counts;
  for (const auto& z : raw) {
    const cplx p(z.location[0], z.location[1]);
    bool merged = false;
    for (std::size_t i = 0; i < centers.size(); ++i)
      if (std::abs(centers[i] / static_cast<double>(counts[i]) - p) < 0.02) {
        centers[i] += p;
        ++counts[i];
        merged = true;
        break;
      }
    if (!merged) {
      centers.push_back(p);
      counts.push_back(1);
    }
  }
  std::vector<std::pair<cplx, int>> out;
  const double h = 1e-5 * r;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    cplx z = r * centers[i] / static_cast<double>(counts[i]);
    double sep = r - std::abs(z);
    for (std::size_t k = 0; k < centers.size(); ++k)
      if (k != i) sep = std::min(sep, std::abs(z - r * centers[k] / static_cast<double>(counts[k])));
    const int m = field_winding(f, z, std::min(0.05 * r, 0.5 * sep));
    if (m == 0) continue;
    for (int it = 0; it < 50; ++it) {
      const cplx d = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
      if (std::abs(d) == 0.0) break;
      const cplx step = static_cast<double>(m) * f.eval(z) / d;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    out.emplace_back(z, m);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.first.real() != b.first.real() ? a.first.real() < b.first.real() : a.first.imag() < b.first.imag();
  });
  return out;
}

json zeros_json(const std::vector<std::pair<cplx, int>>& zeros, double tol) {
  json a = json::array();
  for (const auto& [z, m] : zeros) a.push_back({{"location", complex_json(z, tol)}, {"multiplicity", exact(m)}});
  return a;
}

void write_disk_csv(std::ostream& os, const Disk& d) {
  os << "ring,angle,r,theta,x1,x2,x3,x4\n";
  const PolarGrid& g = d.grid();
  for (int j = 0; j < g.nr; ++j)
    for (int k = 0; k < g.nt; ++k) {
      const Vec4 p = d.at(j, k);
      os << j << ',' << k << ',' << fmt(g.r(j)) << ',' << fmt(g.theta(k));
      for (int i = 0; i < 4; ++i) os << ',' << fmt(p[i]);
      os << '\n';
    }
}

json disk_json(const Disk& d, double accept) {
  return {{"center", point_json(d.center, 0)},
          {"rho", measured(d.rho, 0)},
          {"residual", measured(d.residual, accept)},
          {"iterations", exact(d.iterations)},
          {"halvings", exact(d.halvings)},
          {"injectivity", measured(d.injectivity, 0)}};
}

void cmd_validate(const Scene& sc, const Overrides& ov, Run& run) {
  const double tol = tol_or(ov, 1e-9);
  const GridCheck sq = sc.J.square_residual(sc.grid);
  run.results["J"] = {{"kind", sc.j_kind},
                      {"square_residual", measured(sq.max_residual, tol)},
                      {"worst", point_json(sq.worst, 0)}};
  run.check("J^2 = -I", sq.max_residual <= tol);
  if (!sc.alpha) return;
  const GridCheck cl = closedness_residual(*sc.alpha, sc.grid);
  const GridCheck an = anti_invariance_residual(*sc.alpha, sc.J, sc.grid);
  json a = {{"kind", sc.alpha_kind},
            {"closedness", measured(cl.max_residual, tol)},
            {"closedness_worst", point_json(cl.worst, 0)},
            {"anti_invariance", measured(an.max_residual, tol)},
            {"anti_invariance_worst", point_json(an.worst, 0)},
            {"project", sc.project}};
  run.check("alpha closed", cl.max_residual <= tol);
  if (sc.project) {
    const TwoForm p = sc.anti_invariant_alpha();
    const GridCheck pa = anti_invariance_residual(p, sc.J, sc.grid);
    const GridCheck pc = closedness_residual(p, sc.grid);
    a["projected_anti_invariance"] = measured(pa.max_residual, tol);
    a["projected_closedness"] = measured(pc.max_residual, tol);
    run.check("projected alpha anti-invariant", pa.max_residual <= tol);
  } else {
    run.check("alpha anti-invariant", an.max_residual <= tol);
  }
  run.results["alpha"] = a;
}

void cmd_split(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("split");
  const TwoForm& alpha = sc.require_alpha();
  const double sum_tol = s.value("sum_tol", 1e-12);
  const double tol = tol_or(ov, 1e-9);
  const FormSplit sp = split_form(alpha, sc.J);
  std::optional<Metric> g;
  if (s.contains("omega")) {
    const json& o = s.at("omega");
    if (!o.is_array() || o.size() != 6) throw ParseError("split.omega needs 6 coefficient strings", 0);
    std::array<FieldExpr, 6> c;
    for (std::size_t i = 0; i < 6; ++i) c[i] = parse(o[i].get<std::string>());
    g = compatible_metric(sc.J, TwoForm(c, sc.box), sc.grid, tol);
  }
  GridSpec pts = sc.grid;
  pts.per_axis = s.value("per_axis", 0);
  pts.random_points = s.value("points", 1000);
  double sum = 0.0, plus = 0.0, minus = 0.0, square = 0.0, self_dual = 0.0;
  const auto pts_list = validation_points(sc.box, pts);
  for (const Point4& x : pts_list) {
    const Mat4 J = sc.J.at(x);
    const Mat4 a = alpha.at(x);
    const Mat4 ap = sp.invariant.at(x);
    const Mat4 am = sp.anti_invariant.at(x);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    sum = std::max(sum, (ap + am - a).cwiseAbs().maxCoeff() / scale);
    plus = std::max(plus, (pullback_matrix(ap, J) - ap).cwiseAbs().maxCoeff() / scale);
    minus = std::max(minus, (pullback_matrix(am, J) + am).cwiseAbs().maxCoeff() / scale);
    square = std::max(square, (j_anti_matrix(j_anti_matrix(am, J), J) + am).cwiseAbs().maxCoeff() / scale);
    if (g) self_dual = std::max(self_dual, (hodge_star(am, g->at(x)) - am).cwiseAbs().maxCoeff() / scale);
  }
  run.results["points"] = exact(static_cast<long long>(pts_list.size()));
  run.results["sum"] = measured(sum, sum_tol);
  run.results["invariant_eigen"] = measured(plus, tol);
  run.results["anti_invariant_eigen"] = measured(minus, tol);
  run.results["j_squared_on_anti"] = measured(square, tol);
  run.check("alpha+ + alpha- = alpha", sum <= sum_tol);
  run.check("alpha+ J-invariant", plus <= tol);
  run.check("alpha- J-anti-invariant", minus <= tol);
  run.check("J^2 = -1 on anti-invariant forms", square <= tol);
  if (g) {
    run.results["anti_invariant_self_dual"] = measured(self_dual, tol);
    run.check("alpha- self-dual", self_dual <= tol);
  }
}

void cmd_degree(const Scene& sc, const Overrides&, Run& run) {
  const json& s = sc.section("degree");
  if (!s.contains("u1") || !s.contains("u2")) throw ValidationError("degree needs \"u1\" and \"u2\" over x, y");
  const PlanarMap u = planar_from_text(s.at("u1").get<std::string>(), s.at("u2").get<std::string>());
  WindingOptions wo;
  wo.boundary_samples = s.value("boundary_samples", wo.boundary_samples);
  const WindingResult w = winding_degree(u, wo);
  const SignCount<2> c = perturb_sign_count(u, sc.seed);
  json zeros = json::array();
  for (const auto& z : c.zeros)
    zeros.push_back({{"location", complex_json({z.location[0], z.location[1]}, 1e-9)}, {"sign", exact(z.sign)}});
  run.results["degree"] = exact(w.degree);
  run.results["raw"] = measured(w.raw, 0.25);
  run.results["margin"] = measured(w.admissibility.margin, 0);
  run.results["perturbed_count"] = exact(c.degree);
  run.results["perturbation"] = measured(c.delta, c.margin);
  run.results["perturbed_zeros"] = zeros;
  run.check("admissible", w.admissibility.admissible);
  run.check("winding = perturbed signed count", w.degree == c.degree);
}

void cmd_axioms(const Scene& sc, const Overrides&, Run& run) {
  const json& s = sc.section("axioms");
  const int per_axiom = s.value("per_axiom", 20);
  const AxiomReport r = axiom_suite(default_axiom_battery(sc.seed, per_axiom));
  json axioms = json::array();
  for (int a = 1; a <= 5; ++a) {
    axioms.push_back({{"axiom", a},
                      {"instances", exact(r.instances(a))},
                      {"failures", exact(r.failures(a))},
                      {"skips", exact(r.skips(a))}});
    run.check("axiom " + std::to_string(a) + ": " + std::to_string(r.instances(a)) + " instances, no failures",
              r.failures(a) == 0 && r.instances(a) >= per_axiom);
  }
  json failed = json::array();
  for (const auto& c : r.checks)
    if (c.hypothesis_ok && !c.passed) failed.push_back({{"axiom", c.axiom}, {"name", c.name}, {"detail", c.detail}});
  run.results["axioms"] = axioms;
  run.results["failed"] = failed;
}

void cmd_disk(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("disk");
  DiskOptions opt;
  opt.accept = tol_or(ov, opt.accept);
  opt.grid = read_polar(s, 1.0);
  const Point4 c = read_point(s, "center", {0, 0, 0, 0});
  const Disk d = solve_disk(sc.J, c, read_kappa(s, "kappa", {cplx(1.0), cplx(0.0)}), s.value("rho", 0.1), opt);
  run.results["disk"] = disk_json(d, opt.accept);
  run.check("disk residual", d.residual <= opt.accept);
  std::ostringstream os;
  write_disk_csv(os, d);
  run.files.emplace_back("disk.csv", os.str());
}

void cmd_foliate(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("foliate");
  FamilyOptions opt;
  opt.n_w = s.value("n_w", opt.n_w);
  opt.disk.accept = tol_or(ov, opt.disk.accept);
  opt.disk.grid = read_polar(s, 1.0);
  const Point4 o = read_point(s, "origin", {0, 0, 0, 0});
  const double rho = s.value("rho", 0.1);
  const FibreFamily f = fibre_family(sc.J, o, read_kappa(s, "kappa", {cplx(0.0), cplx(1.0)}), rho, opt);
  // Closeness bound re-evaluated off the disk grids.
  const Mat4 Ainv = f.frame.inverse();
  const Vec4 origin(o[0], o[1], o[2], o[3]);
  std::mt19937_64 rng(sc.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double ratio = 0.0;
  const int samples = s.value("closeness_samples", 400);
  for (int i = 0; i < samples; ++i) {
    cplx xi(U(rng), U(rng));
    if (std::abs(xi) > 1.0) xi /= 1.0001 * std::abs(xi) + 1e-12;
    xi *= rho;
    if (std::abs(xi) < 1e-3 * rho) continue;
    const cplx w(rho * U(rng), rho * U(rng));
    const Vec4 y = Ainv * (f.eval(xi, w) - origin);
    const Vec4 flat(xi.real(), xi.imag(), w.real(), w.imag());
    ratio = std::max(ratio, (y - flat).norm() / (rho * std::abs(xi)));
  }
  const double slack = 1e-6;
  run.results["disks"] = exact(static_cast<long long>(f.disks.size()));
  run.results["z_closeness"] = measured(f.z_closeness, 1.0);
  run.results["closeness_off_grid"] = measured(ratio, f.z_closeness + slack);
  run.results["min_jacobian"] = measured(f.min_jacobian, 0);
  run.results["max_jacobian"] = measured(f.max_jacobian, 0);
  run.results["continuity"] = measured(f.continuity, 0);
  run.results["max_residual"] = measured(f.max_residual, opt.disk.accept);
  run.check("disk residuals", f.max_residual <= opt.disk.accept);
  run.check("closeness constant below 1", f.z_closeness < 1.0);
  run.check("closeness bound off the grid", ratio <= f.z_closeness + slack);
  run.check("Q is a local diffeomorphism", f.min_jacobian > 0.0);
}

void cmd_trivialize(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("trivialize");
  const TwoForm alpha = sc.anti_invariant_alpha();
  const Point4 c = read_point(s, "center", {0, 0, 0, 0});
  FamilyOptions fo;
  fo.n_w = s.value("n_w", fo.n_w);
  fo.disk.grid = {1.0, s.value("family_nr", 32), s.value("family_nt", 64)};
  auto fam = std::make_shared<FibreFamily>(
      fibre_family(sc.J, c, read_kappa(s, "family_kappa", {cplx(0.0), cplx(1.0)}), s.value("family_rho", 0.1), fo));
  DiskOptions dopt;
  dopt.grid = read_polar(s, 1.0);
  const Disk d = solve_disk(sc.J, c, read_kappa(s, "kappa", {cplx(1.0), cplx(0.0)}), s.value("rho", 0.08), dopt);
  const NormalizedChart ch = normalize_along_disk(sc.J, d, fam);
  TrivializeOptions to;
  to.theorem_tol = tol_or(ov, to.theorem_tol);
  const TrivializedSection t = trivialize_alpha(alpha, sc.J, ch, to);
  const double loc_tol = s.value("location_tol", 1e-6);
  run.results["disk"] = disk_json(d, dopt.accept);
  run.results["chart"] = {{"transversality_deg", measured(ch.transversality_deg, 10.0)},
                          {"inversion_residual", measured(ch.inversion_residual, 1e-9)},
                          {"max_b", measured(ch.max_b, 1e-6)}};
  run.results["theorem_residual"] = measured(t.theorem_residual, to.theorem_tol);
  run.results["reconstruction"] = measured(t.reconstruction, 1e-9);
  run.results["identically_zero"] = t.identically_zero;
  run.check("CR system residual", t.theorem_residual <= to.theorem_tol);
  run.check("frame reconstruction", t.reconstruction <= 1e-9);
  if (t.identically_zero) {
    run.note("section vanishes on the whole disk");
    return;
  }
  const CarlemanResult& cr = t.carleman;
  run.results["carleman"] = {{"delta", measured(cr.delta, 0)},
                             {"sigma_residual", measured(cr.sigma_residual, to.carleman.sigma_tol)},
                             {"min_abs_phi", measured(cr.min_abs_phi, to.carleman.min_phi)}};
  run.check("F holomorphic", cr.sigma_residual <= to.carleman.sigma_tol);
  run.check("Phi nowhere zero", cr.min_abs_phi >= to.carleman.min_phi);
  const double r = 0.9 * cr.delta;
  const auto fz = holomorphic_zeros(cr.sigma, r);
  const IntersectionReport ir = intersection_index(alpha, sc.J, restrict_disk(from_solved_disk(d), {0.0, r / d.rho}));
  std::vector<std::pair<cplx, int>> az;
  for (const auto& z : ir.zeros) az.emplace_back(r * z.location, z.multiplicity);
  std::sort(az.begin(), az.end(), [](const auto& a, const auto& b) {
    return a.first.real() != b.first.real() ? a.first.real() < b.first.real() : a.first.imag() < b.first.imag();
  });
  run.results["zeros_of_F"] = zeros_json(fz, loc_tol);
  run.results["zeros_of_alpha"] = zeros_json(az, loc_tol);
  run.results["index"] = exact(ir.total);
  bool match = fz.size() == az.size();
  double worst = 0.0;
  for (std::size_t i = 0; match && i < fz.size(); ++i) {
    worst = std::max(worst, std::abs(fz[i].first - az[i].first));
    match = fz[i].second == az[i].second;
  }
  run.results["zero_distance"] = measured(worst, loc_tol);
  run.check("zeros of F match zeros of alpha: multiplicities", match);
  run.check("zeros of F match zeros of alpha: locations", match && worst <= loc_tol);
}

void cmd_carleman(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("carleman");
  const int count = s.value("count", 20);
  const PolarGrid grid = read_polar(s, 1.0);
  CarlemanOptions opt;
  opt.sigma_tol = tol_or(ov, opt.sigma_tol);
  json instances = json::array();
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = sc.seed + static_cast<std::uint64_t>(i);
    const ManufacturedCR m = manufactured_cr(seed, grid);
    const CarlemanResult r = carleman_factor(m.v, m.system, opt);
    bool ok = r.sigma_residual <= opt.sigma_tol && r.min_abs_phi >= opt.min_phi;
    json zeros = json::array();
    for (const auto& [z, mult] : m.zeros) {
      if (std::abs(z) >= 0.8 * r.delta) continue;
      double sep = 0.04;
      for (const auto& [w, k] : m.zeros)
        if (w != z) sep = std::min(sep, 0.5 * std::abs(w - z));
      const int found = field_winding(r.sigma, z, sep);
      ok = ok && found == mult;
      zeros.push_back({{"location", complex_json(z, 0)}, {"expected", exact(mult)}, {"found", exact(found)}});
    }
    if (!ok) ++failures;
    instances.push_back({{"seed", seed},
                         {"delta", measured(r.delta, 0)},
                         {"sigma_residual", measured(r.sigma_residual, opt.sigma_tol)},
                         {"min_abs_phi", measured(r.min_abs_phi, opt.min_phi)},
                         {"zeros", zeros},
                         {"passed", ok}});
  }
  run.results["instances"] = instances;
  run.results["failures"] = exact(failures);
  run.check("manufactured factorizations", failures == 0);
}

void cmd_zeroset(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("zeroset");
  const TwoForm alpha = sc.anti_invariant_alpha();
  TraceOptions opt;
  opt.resolution = ov.grid ? *ov.grid : s.value("resolution", opt.resolution);
  if (s.contains("ladder")) opt.ladder = {s.at("ladder")[0].get<int>(), s.at("ladder")[1].get<int>()};
  opt.zero_tol = tol_or(ov, opt.zero_tol);
  opt.max_points = s.value("max_points", opt.max_points);
  const double lo = s.value("slope_min", 1.8), hi = s.value("slope_max", 2.2);
  const ZeroSetSample z = trace_zero_set(alpha, sc.J, sc.box, opt);
  std::ostringstream pts, cnt;
  z.write_points(pts);
  z.write_counts(cnt);
  run.files.emplace_back("zeroset_points.txt", pts.str());
  run.files.emplace_back("boxcount.csv", cnt.str());
  json segs = json::array();
  for (const auto& g : z.segments)
    segs.push_back({{"id", g.id},
                    {"size", exact(g.size)},
                    {"branch_points", exact(g.branch_points)},
                    {"truncated", g.truncated},
                    {"note", g.note}});
  run.results["points"] = exact(static_cast<long long>(z.points.size()));
  run.results["segments"] = segs;
  run.results["step"] = measured(z.step, 0);
  run.results["max_norm"] = measured(z.max_norm, opt.zero_tol);
  run.results["seeds"] = {{"tried", exact(z.seeds_tried)}, {"accepted", exact(z.seeds_accepted)}};
  run.check("traced points vanish", z.max_norm <= opt.zero_tol);
  const EmptinessReport e = interior_emptiness_check(alpha, sc.box, s.value("emptiness_grid", 8), opt.zero_tol);
  run.results["interior_empty"] = e.empty_interior;
  run.results["offending_cells"] = exact(static_cast<long long>(e.offending.size()));
  run.check("no open set in the zero set", e.empty_interior);
  if (z.points.empty()) {
    run.note("zero set is empty in the box");
    return;
  }
  json counts = json::array();
  for (const auto& c : z.counts) counts.push_back({{"epsilon", measured(c.epsilon, 0)}, {"occupied", exact(c.occupied)}});
  run.results["box_counts"] = counts;
  const BoxDimension d = box_dimension(z);
  run.results["slope"] = {{"value", d.slope}, {"tol", 0.5 * (hi - lo)}, {"range", {lo, hi}}};
  run.results["measure_proxy"] = measured(d.measure_proxy, 0);
  run.check("box-count slope", d.slope >= lo && d.slope <= hi);
}

void cmd_index(const Scene& sc, const Overrides&, Run& run) {
  const json& s = sc.section("index");
  const TwoForm alpha = sc.anti_invariant_alpha();
  TestDisk sigma;
  std::optional<Disk> solved;
  if (s.contains("solved")) {
    const json& d = s.at("solved");
    DiskOptions dopt;
    dopt.grid = read_polar(d, 1.0);
    solved = solve_disk(sc.J, read_point(d, "center", {0, 0, 0, 0}), read_kappa(d, "kappa", {cplx(1.0), cplx(0.0)}),
                        d.value("rho", 0.1), dopt);
    sigma = from_solved_disk(*solved);
    run.results["disk"] = disk_json(*solved, dopt.accept);
  } else {
    const json& d = s.contains("disk") ? s.at("disk") : json::object();
    sigma = flat_disk(read_point(d, "center", {0, 0, 0, 0}), read_kappa(d, "kappa", {cplx(1.0), cplx(0.0)}),
                      d.value("radius", 0.1));
  }
  const int power = s.value("power", 1);
  if (power < 1) throw ValidationError("index.power must be positive");
  if (power > 1) sigma = precompose_power(sigma, power);
  IndexOptions opt;
  opt.seed = sc.seed;
  const IntersectionReport r = intersection_index(alpha, sc.J, sigma, opt);
  json zeros = json::array();
  for (const auto& z : r.zeros)
    zeros.push_back({{"location", complex_json(z.location, 1e-6)}, {"multiplicity", exact(z.multiplicity)}});
  run.results["index"] = exact(r.total);
  run.results["winding"] = exact(r.winding);
  run.results["perturbed_count"] = exact(r.perturbed_count);
  run.results["frame_index"] = exact(r.frame_index);
  run.results["frame_floor"] = measured(r.frame_floor, opt.frame_floor);
  run.results["margin"] = measured(r.admissibility.margin, 0);
  run.results["zeros"] = zeros;
  int sum = 0;
  for (const auto& z : r.zeros) sum += z.multiplicity;
  run.check("winding = sum of local multiplicities = perturbed count",
            r.winding == sum && r.winding == r.perturbed_count);
  if (solved) run.check("J-holomorphic disk has nonnegative index", r.total >= 0);
}

void cmd_hartogs(const Scene& sc, const Overrides& ov, Run& run) {
  const json& s = sc.section("hartogs");
  if (!s.contains("gamma")) throw ValidationError("hartogs needs \"gamma\" over w0 = xi and w1 = w");
  const ComplexExpr g = parse_complex(s.at("gamma").get<std::string>());
  const auto gamma = [&](cplx xi, cplx w) {
    const Point4 p{xi.real(), xi.imag(), w.real(), w.imag()};
    return cplx(g.re(p), g.im(p));
  };
  HartogsOptions opt;
  opt.slice_radius = s.value("slice_radius", opt.slice_radius);
  opt.w_radius = s.value("w_radius", opt.w_radius);
  opt.negative_tol = tol_or(ov, opt.negative_tol);
  const HartogsReport r = hartogs_analyze(gamma, opt);
  run.results["extendable"] = r.extendable;
  run.results["reason"] = r.reason;
  run.results["max_negative"] = measured(r.max_negative, opt.negative_tol);
  run.results["max_holomorphy_residual"] = measured(r.max_holomorphy_residual, opt.holomorphy_tol);
  json values = json::array();
  for (std::size_t i = 0; i < r.w_samples.size(); ++i) {
    const auto& c = r.coefficients[i];
    values.push_back({{"w", complex_json(r.w_samples[i], 0)},
                      {"value_at_zero", complex_json(c[static_cast<std::size_t>(-opt.jmin)], 1e-6)}});
  }
  run.results["samples"] = values;
  if (s.contains("expected")) {
    const ComplexExpr e = parse_complex(s.at("expected").get<std::string>());
    double worst = 0.0;
    for (std::size_t i = 0; i < r.w_samples.size(); ++i) {
      const cplx w = r.w_samples[i];
      const Point4 p{0.0, 0.0, w.real(), w.imag()};
      worst = std::max(worst, std::abs(r.coefficients[i][static_cast<std::size_t>(-opt.jmin)] - cplx(e.re(p), e.im(p))));
    }
    run.results["value_error"] = measured(worst, 1e-6);
    run.check("extension value", worst <= 1e-6);
  }
  if (!r.extendable) throw ValidationError("gamma does not extend across xi = 0: " + r.reason);
  run.check("negative Laurent coefficients vanish", r.max_negative <= opt.negative_tol);
}

using Handler = std::function<void(const Scene&, const Overrides&, Run&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"validate", cmd_validate}, {"split", cmd_split},   {"degree", cmd_degree},         {"axioms", cmd_axioms},
      {"disk", cmd_disk},         {"foliate", cmd_foliate}, {"trivialize", cmd_trivialize}, {"carleman", cmd_carleman},
      {"zeroset", cmd_zeroset},   {"index", cmd_index},   {"hartogs", cmd_hartogs}};
  return h;
}

json header(const std::string& name, std::uint64_t seed) {
  return {{"schema", "v1"}, {"subcommand", name}, {"seed", seed}};
}

RunResult failure(const std::string& name, std::uint64_t seed, int code, const std::string& kind,
                  const std::string& message, Run& run) {
  RunResult out;
  out.exit_code = code;
  out.report = header(name, seed);
  out.report["status"] = "error";
  out.report["error"] = {{"class", kind}, {"message", message}};
  out.report["results"] = run.results;
  out.report["checks"] = run.checks;
  out.log = std::move(run.log);
  out.log.push_back(kind + " error: " + message);
  return out;
}

} // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"validate", "split",    "degree",  "axioms", "disk",   "foliate",
                                              "trivialize", "carleman", "zeroset", "index",  "hartogs"};
  return names;
}

RunResult run_command(const std::string& name, const Scene& scene, const Overrides& overrides) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) {
    RunResult out;
    out.exit_code = kUsage;
    out.report = header(name, scene.seed);
    out.report["status"] = "error";
    out.report["error"] = {{"class", "usage"}, {"message", "unknown subcommand " + name}};
    return out;
  }
  Run run;
  run.note("subcommand " + name + ", seed " + std::to_string(scene.seed));
  try {
    it->second(scene, overrides, run);
  } catch (const ParseError& e) {
    return failure(name, scene.seed, kParse, "parse", e.what(), run);
  } catch (const ValidationError& e) {
    return failure(name, scene.seed, kValidation, "validation", e.what(), run);
  } catch (const NumericalError& e) {
    return failure(name, scene.seed, kNumerical, "numerical", e.what(), run);
  } catch (const nlohmann::json::exception& e) {
    return failure(name, scene.seed, kParse, "parse", e.what(), run);
  } catch (const std::exception& e) {
    return failure(name, scene.seed, kNumerical, "numerical", e.what(), run);
  }
  RunResult out;
  bool ok = true;
  for (const auto& c : run.checks) ok = ok && c.at("passed").get<bool>();
  out.exit_code = ok ? kOk : kCheckFailed;
  out.report = header(name, scene.seed);
  out.report["status"] = ok ? "passed" : "failed";
  out.report["results"] = std::move(run.results);
  out.report["checks"] = std::move(run.checks);
  out.files = std::move(run.files);
  out.log = std::move(run.log);
  out.log.push_back(ok ? "all checks passed" : "some checks failed");
  return out;
}

RunResult run_scene_file(const std::string& name, const std::string& scene_path, const Overrides& overrides) {
  Scene scene;
  try {
    scene = load_scene(scene_path, overrides);
  } catch (const ParseError& e) {
    Run run;
    return failure(name, overrides.seed.value_or(0), kParse, "parse", e.what(), run);
  } catch (const ValidationError& e) {
    Run run;
    return failure(name, overrides.seed.value_or(0), kValidation, "validation", e.what(), run);
  }
  return run_command(name, scene, overrides);
}

} // namespace jhol::cli
