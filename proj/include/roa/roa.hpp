#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "roa/dynamics.hpp"
#include "roa/lqr.hpp"

namespace roa {

struct LabeledPoint {
  Vector2 position;
  bool stable = false;
};

enum class RoaMethod { GraphicalNominal, GraphicalLearned, LyapunovLevelSet };

const char* to_string(RoaMethod method) noexcept;
RoaMethod roa_method_from_string(const std::string& name);

// Convex polygon with counterclockwise vertices and no three collinear.
struct RoaPolygon {
  std::vector<Vector2> vertices;
  double area = 0.0;
  RoaMethod method = RoaMethod::GraphicalNominal;
};

// Signed shoelace area; positive for counterclockwise order.
double shoelace_area(std::span<const Vector2> vertices);

// Monotone chain. Points closer than 1e-9 m are merged and collinear boundary
// points dropped. Throws Error(DegenerateInput) for fewer than 3 distinct or
// all-collinear points.
RoaPolygon convex_hull(std::span<const Vector2> points, RoaMethod method = RoaMethod::GraphicalNominal);

// Boundary counts as inside, up to `tol` in cross-product units.
bool polygon_contains(const RoaPolygon& poly, const Vector2& p, double tol = 1e-9);

// Euclidean distance from p to the polygon boundary.
double distance_to_boundary(const RoaPolygon& poly, const Vector2& p);

// Max distance from the polygon's vertex centroid to a vertex.
double circumradius(const RoaPolygon& poly);

// Hull of the stable subset.
RoaPolygon graphical_roa(std::span<const LabeledPoint> labeled, RoaMethod method);

// Fraction of the circumradius used as the refinement band half-width.
inline constexpr double kRefineBand = 0.2;

// `count` new hover-at-rest states near the current hull boundary: a uniform
// point on the perimeter pushed along the centroid ray by a uniform offset in
// [-band, band] * circumradius.
std::vector<State> refine_boundary(std::span<const LabeledPoint> labeled, std::size_t count,
                                   std::uint64_t seed);

// Number of unstable points lying inside (or on) the polygon.
std::size_t unstable_inside(const RoaPolygon& poly, std::span<const LabeledPoint> labeled);

// --- Quadratic Lyapunov level sets -----------------------------------------

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

double lyapunov_value(const Eigen::MatrixXd& s, const Eigen::VectorXd& x);

// 2 x' S f(x)
double lyapunov_rate(const Eigen::MatrixXd& s, const Eigen::VectorXd& x, const VectorField& f);

// Closed-loop nominal vector field with the controller in the loop. Uses the
// plant config as given (callers pick trig mode); the disturbance is added
// only when `with_disturbance` is set.
VectorField quadrotor_closed_loop(const PlantConfig& cfg, const LqrSolution& sol,
                                  const ControlInput& u_eq, bool with_disturbance);

struct CertifyOptions {
  std::size_t n_samples = 20000;
  std::uint64_t seed = 0;
  double c_hi = 0.0;           // upper end of the search, > 0
  double margin = 1e-6;        // require Vdot < -margin * c
  double rel_tol = 1e-3;       // on c_star
  double c_lo_fraction = 1e-12;
};

struct LevelSetResult {
  double c_star = 0.0;
  Eigen::MatrixXd s_matrix;
  double slice_area = 0.0;  // zero when S has fewer than 3 rows
  std::size_t samples_checked = 0;
  double min_margin = 0.0;  // largest sampled Vdot at c_star
};

// Result of checking one level: accepted and the largest sampled Vdot.
struct LevelCheck {
  bool certified = false;
  double max_rate = 0.0;
};

// Checks Vdot < -margin * c on every fixed sample direction scaled to {V = c}.
class LevelSetSampler {
 public:
  LevelSetSampler(const Eigen::MatrixXd& s, std::size_t n_samples, std::uint64_t seed);

  LevelCheck check(double c, const VectorField& f, double margin) const;
  const Eigen::MatrixXd& directions() const { return directions_; }  // columns, V(d) = 1

 private:
  Eigen::MatrixXd s_;
  Eigen::MatrixXd directions_;
};

// Sampling substitute for an SOS certificate: bisection (geometric) over
// (0, c_hi] for the largest level whose shell has negative rate everywhere it
// was sampled. Throws Error(NoCertifiableLevel) if even c_hi * c_lo_fraction
// fails.
LevelSetResult certify_level_set(const Eigen::MatrixXd& s, const VectorField& f,
                                 const CertifyOptions& opts);

// Area of {(x, y) : V(x, 0, y, 0, 0, 0) <= c}.
double slice_area(const Eigen::MatrixXd& s, double c);

// --- Results and export ------------------------------------------------------

struct RoaResult {
  RoaMethod method = RoaMethod::GraphicalNominal;
  std::vector<LabeledPoint> points;  // empty for the level-set method
  RoaPolygon polygon;                // ellipse slice polygonized for the level-set method
  std::optional<LevelSetResult> level_set;
  std::string config_hash;
  std::uint64_t seed = 0;

  double area() const { return level_set ? level_set->slice_area : polygon.area; }
  std::size_t stable_count() const;
};

// Vertices of the slice ellipse, counterclockwise.
std::vector<Vector2> slice_ellipse(const Eigen::MatrixXd& s, double c, int segments = 128);

nlohmann::json to_json(const RoaPolygon& poly);
nlohmann::json to_json(const RoaResult& result);
RoaResult roa_result_from_json(const nlohmann::json& j);

void write_roa_result(const RoaResult& result, const std::string& path);
RoaResult read_roa_result(const std::string& path);

// x,y vertex table.
void write_polygon_csv(const RoaPolygon& poly, const std::string& path);

// Scatter of labeled points, hull outline and an optional ellipse overlay.
void write_svg(const std::string& path, std::span<const LabeledPoint> points,
               const RoaPolygon* hull, std::span<const Vector2> ellipse);

}  // namespace roa
