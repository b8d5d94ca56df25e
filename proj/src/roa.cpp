#include "roa/roa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

#include "roa/error.hpp"

namespace roa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kDedupTolerance = 1e-9;

double cross(const Vector2& o, const Vector2& a, const Vector2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

[[noreturn]] void degenerate(const std::string& what) {
  throw Error(ErrorKind::DegenerateInput, "hull: " + what);
}

std::vector<Vector2> stable_positions(std::span<const LabeledPoint> labeled) {
  std::vector<Vector2> pts;
  for (const auto& p : labeled) {
    if (p.stable) pts.push_back(p.position);
  }
  return pts;
}

Vector2 vertex_centroid(const RoaPolygon& poly) {
  Vector2 c = Vector2::Zero();
  for (const auto& v : poly.vertices) c += v;
  return c / static_cast<double>(poly.vertices.size());
}

nlohmann::json vec2(const Vector2& v) { return nlohmann::json::array({v.x(), v.y()}); }

nlohmann::json matrix_rows(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_rows(const nlohmann::json& rows) {
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      m(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

}  // namespace

const char* to_string(RoaMethod method) noexcept {
  switch (method) {
    case RoaMethod::GraphicalNominal: return "graphical_nominal";
    case RoaMethod::GraphicalLearned: return "graphical_learned";
    case RoaMethod::LyapunovLevelSet: return "lyapunov_level_set_sampled";
  }
  return "unknown";
}

RoaMethod roa_method_from_string(const std::string& name) {
  for (RoaMethod m : {RoaMethod::GraphicalNominal, RoaMethod::GraphicalLearned,
                      RoaMethod::LyapunovLevelSet}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorKind::InvalidConfiguration, "unknown ROA method '" + name + "'");
}

double shoelace_area(std::span<const Vector2> vertices) {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vector2& a = vertices[i];
    const Vector2& b = vertices[(i + 1) % vertices.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

RoaPolygon convex_hull(std::span<const Vector2> points, RoaMethod method) {
  std::vector<Vector2> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (!p.allFinite()) degenerate("non-finite input point");
  }
  std::sort(pts.begin(), pts.end(), [](const Vector2& a, const Vector2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::vector<Vector2> unique;
  for (const auto& p : pts) {
    if (unique.empty() || (p - unique.back()).cwiseAbs().maxCoeff() > kDedupTolerance) {
      unique.push_back(p);
    }
  }
  if (unique.size() < 3) degenerate("need at least 3 distinct points");

  std::vector<Vector2> hull(2 * unique.size());
  std::size_t k = 0;
  for (const auto& p : unique) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = unique.size() - 1, lower = k + 1; i-- > 0;) {
    const Vector2& p = unique[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) degenerate("all points are collinear");

  RoaPolygon poly;
  poly.vertices = std::move(hull);
  poly.area = shoelace_area(poly.vertices);
  poly.method = method;
  return poly;
}

bool polygon_contains(const RoaPolygon& poly, const Vector2& p, double tol) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vector2& a = v[i];
    const Vector2& b = v[(i + 1) % v.size()];
    if (cross(a, b, p) < -tol * std::max(1.0, (b - a).norm())) return false;
  }
  return true;
}

double distance_to_boundary(const RoaPolygon& poly, const Vector2& p) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vector2& a = v[i];
    const Vector2& b = v[(i + 1) % v.size()];
    const Vector2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + t * ab - p).norm());
  }
  return best;
}

double circumradius(const RoaPolygon& poly) {
  const Vector2 c = vertex_centroid(poly);
  double r = 0.0;
  for (const auto& v : poly.vertices) r = std::max(r, (v - c).norm());
  return r;
}

RoaPolygon graphical_roa(std::span<const LabeledPoint> labeled, RoaMethod method) {
  const std::vector<Vector2> pts = stable_positions(labeled);
  return convex_hull(pts, method);
}

std::vector<State> refine_boundary(std::span<const LabeledPoint> labeled, std::size_t count,
                                   std::uint64_t seed) {
  if (count == 0) return {};
  const RoaPolygon hull = graphical_roa(labeled, RoaMethod::GraphicalNominal);
  const Vector2 centroid = vertex_centroid(hull);
  const double radius = circumradius(hull);

  const auto& v = hull.vertices;
  std::vector<double> cumulative(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    cumulative[i + 1] = cumulative[i] + (v[(i + 1) % v.size()] - v[i]).norm();
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> along(0.0, cumulative.back());
  std::uniform_real_distribution<double> offset(-kRefineBand, kRefineBand);

  std::vector<State> proposals;
  proposals.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double s = along(rng);
    const double f = offset(rng);
    const auto edge = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin() + 1, cumulative.end() - 1, s) - cumulative.begin() - 1);
    const Vector2& a = v[edge];
    const Vector2& b = v[(edge + 1) % v.size()];
    const double len = cumulative[edge + 1] - cumulative[edge];
    const Vector2 on_edge = a + (len > 0.0 ? (s - cumulative[edge]) / len : 0.0) * (b - a);
    const Vector2 ray = (on_edge - centroid).normalized();
    const Vector2 q = on_edge + f * radius * ray;
    proposals.push_back(State::at_position(q.x(), q.y()));
  }
  return proposals;
}

std::size_t unstable_inside(const RoaPolygon& poly, std::span<const LabeledPoint> labeled) {
  return static_cast<std::size_t>(std::count_if(labeled.begin(), labeled.end(), [&](const auto& p) {
    return !p.stable && polygon_contains(poly, p.position);
  }));
}

double lyapunov_value(const MatrixXd& s, const VectorXd& x) { return x.dot(s * x); }

double lyapunov_rate(const MatrixXd& s, const VectorXd& x, const VectorField& f) {
  return 2.0 * x.dot(s * f(x));
}

VectorField quadrotor_closed_loop(const PlantConfig& cfg, const LqrSolution& sol,
                                  const ControlInput& u_eq, bool with_disturbance) {
  return [cfg, sol, u_eq, with_disturbance](const VectorXd& x) -> VectorXd {
    const State s{Vector6(x)};
    const ControlInput u = lqr_control(sol, s, State::origin(), u_eq);
    return with_disturbance ? true_plant_dynamics(s, u, cfg) : nominal_dynamics(s, u, cfg);
  };
}

LevelSetSampler::LevelSetSampler(const MatrixXd& s, std::size_t n_samples, std::uint64_t seed)
    : s_(s) {
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidConfiguration, "level set: S must be positive definite");
  }
  const Eigen::Index n = s.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  directions_.resize(n, static_cast<Eigen::Index>(n_samples));
  VectorXd z(n);
  for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
    do {
      for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    } while (z.norm() == 0.0);
    // L' d = z / |z|  gives  d' S d = 1.
    directions_.col(k) = llt.matrixU().solve(z / z.norm());
  }
}

LevelCheck LevelSetSampler::check(double c, const VectorField& f, double margin) const {
  LevelCheck out{true, -std::numeric_limits<double>::infinity()};
  const double scale = std::sqrt(c);
  for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
    const VectorXd x = scale * directions_.col(k);
    const double rate = lyapunov_rate(s_, x, f);
    out.max_rate = std::max(out.max_rate, std::isfinite(rate) ? rate
                                                               : std::numeric_limits<double>::infinity());
    if (!(rate < -margin * c)) {
      out.certified = false;
      return out;
    }
  }
  return out;
}

LevelSetResult certify_level_set(const MatrixXd& s, const VectorField& f, const CertifyOptions& opts) {
  if (!(opts.c_hi > 0.0) || !std::isfinite(opts.c_hi)) {
    throw Error(ErrorKind::InvalidConfiguration, "level set: c_hi must be > 0");
  }
  if (opts.n_samples == 0) {
    throw Error(ErrorKind::InvalidConfiguration, "level set: n_samples must be > 0");
  }
  const LevelSetSampler sampler(s, opts.n_samples, opts.seed);
  std::size_t checked = 0;
  auto check = [&](double c) {
    ++checked;
    return sampler.check(c, f, opts.margin).certified;
  };

  double c_star = opts.c_hi;
  if (!check(opts.c_hi)) {
    double lo = opts.c_hi * opts.c_lo_fraction;
    double hi = opts.c_hi;
    if (!check(lo)) {
      throw Error(ErrorKind::NoCertifiableLevel,
                  "level set: rate is not negative even at c = " + std::to_string(lo));
    }
    while (hi / lo > 1.0 + opts.rel_tol) {
      const double mid = std::sqrt(lo * hi);
      if (check(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    c_star = lo;
  }

  LevelSetResult result;
  result.c_star = c_star;
  result.s_matrix = s;
  result.samples_checked = checked * opts.n_samples;
  result.min_margin = sampler.check(c_star, f, opts.margin).max_rate;
  result.slice_area = s.rows() >= 3 ? slice_area(s, c_star) : 0.0;
  return result;
}

double slice_area(const MatrixXd& s, double c) {
  Eigen::Matrix2d sub;
  sub << s(0, 0), s(0, 2), s(2, 0), s(2, 2);
  return std::numbers::pi * c / std::sqrt(sub.determinant());
}

std::vector<Vector2> slice_ellipse(const MatrixXd& s, double c, int segments) {
  Eigen::Matrix2d sub;
  sub << s(0, 0), s(0, 2), s(2, 0), s(2, 2);
  // p = sqrt(c) L^-T (cos t, sin t) with sub = L L'.
  const Eigen::Matrix2d lt = Eigen::LLT<Eigen::Matrix2d>(sub).matrixU();
  std::vector<Vector2> out;
  out.reserve(static_cast<std::size_t>(segments));
  for (int i = 0; i < segments; ++i) {
    const double t = 2.0 * std::numbers::pi * i / segments;
    out.push_back(std::sqrt(c) * lt.triangularView<Eigen::Upper>().solve(Vector2(std::cos(t), std::sin(t))));
  }
  if (shoelace_area(out) < 0.0) std::reverse(out.begin(), out.end());
  return out;
}

std::size_t RoaResult::stable_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const auto& p) { return p.stable; }));
}

nlohmann::json to_json(const RoaPolygon& poly) {
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : poly.vertices) verts.push_back(vec2(v));
  return {{"method", to_string(poly.method)}, {"area", poly.area}, {"vertices", verts}};
}

nlohmann::json to_json(const RoaResult& result) {
  nlohmann::json j;
  j["method"] = to_string(result.method);
  j["area"] = result.area();
  j["config_hash"] = result.config_hash;
  j["seed"] = result.seed;
  j["polygon"] = to_json(result.polygon);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : result.points) {
    pts.push_back({{"x", p.position.x()}, {"y", p.position.y()}, {"stable", p.stable}});
  }
  j["points"] = pts;
  j["stable_count"] = result.stable_count();
  j["total_count"] = result.points.size();
  if (!result.points.empty()) {
    j["unstable_inside_hull"] = unstable_inside(result.polygon, result.points);
  }
  if (result.level_set) {
    const auto& ls = *result.level_set;
    j["level_set"] = {{"c_star", ls.c_star},
                      {"s_matrix", matrix_rows(ls.s_matrix)},
                      {"slice_area", ls.slice_area},
                      {"samples_checked", ls.samples_checked},
                      {"min_margin", ls.min_margin},
                      {"certification", "sampled level-set shells (numerical, not an SOS proof)"}};
  }
  return j;
}

RoaResult roa_result_from_json(const nlohmann::json& j) {
  try {
    RoaResult r;
    r.method = roa_method_from_string(j.at("method").get<std::string>());
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& poly = j.at("polygon");
    r.polygon.method = r.method;
    r.polygon.area = poly.at("area").get<double>();
    for (const auto& v : poly.at("vertices")) {
      r.polygon.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    for (const auto& p : j.at("points")) {
      r.points.push_back(
          {Vector2(p.at("x").get<double>(), p.at("y").get<double>()), p.at("stable").get<bool>()});
    }
    if (j.contains("level_set")) {
      const auto& ls = j.at("level_set");
      LevelSetResult level;
      level.c_star = ls.at("c_star").get<double>();
      level.s_matrix = matrix_from_rows(ls.at("s_matrix"));
      level.slice_area = ls.at("slice_area").get<double>();
      level.samples_checked = ls.at("samples_checked").get<std::size_t>();
      level.min_margin = ls.at("min_margin").get<double>();
      r.level_set = level;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfiguration, std::string("roa result: ") + e.what());
  }
}

void write_roa_result(const RoaResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << to_json(result).dump(2) << '\n';
}

RoaResult read_roa_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "missing ROA result " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfiguration, path + ": " + e.what());
  }
  return roa_result_from_json(j);
}

void write_polygon_csv(const RoaPolygon& poly, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "x,y\n" << std::setprecision(17);
  for (const auto& v : poly.vertices) out << v.x() << ',' << v.y() << '\n';
}

void write_svg(const std::string& path, std::span<const LabeledPoint> points, const RoaPolygon* hull,
               std::span<const Vector2> ellipse) {
  Eigen::AlignedBox2d box;
  for (const auto& p : points) box.extend(p.position);
  if (hull) {
    for (const auto& v : hull->vertices) box.extend(v);
  }
  for (const auto& v : ellipse) box.extend(v);
  if (box.isEmpty()) box.extend(Vector2(-1, -1)).extend(Vector2(1, 1));
  const double span = std::max(box.sizes().maxCoeff(), 1e-9) * 1.1;
  const Vector2 mid = box.center();

  constexpr double kSize = 800.0;
  auto px = [&](const Vector2& p) {
    return Vector2((p.x() - mid.x()) / span * kSize + kSize / 2,
                   kSize / 2 - (p.y() - mid.y()) / span * kSize);
  };
  auto path_of = [&](std::span<const Vector2> vs) {
    std::string d;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const Vector2 q = px(vs[i]);
      d += (i == 0 ? "M" : " L") + std::to_string(q.x()) + "," + std::to_string(q.y());
    }
    return d + " Z";
  };

  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"8\" y=\"16\" font-size=\"12\">x-y plane, m; span " << span << " m</text>\n";
  if (hull) {
    out << "<path d=\"" << path_of(hull->vertices) << "\" fill=\"none\" stroke=\"red\"/>\n";
  }
  if (!ellipse.empty()) {
    out << "<path d=\"" << path_of(ellipse) << "\" fill=\"none\" stroke=\"blue\"/>\n";
  }
  for (const auto& p : points) {
    const Vector2 q = px(p.position);
    out << "<circle cx=\"" << q.x() << "\" cy=\"" << q.y() << "\" r=\"3\" fill=\""
        << (p.stable ? "green" : "black") << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace roa
