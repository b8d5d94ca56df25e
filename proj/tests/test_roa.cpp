#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"
#include "roa/error.hpp"
#include "roa/roa.hpp"

using namespace roa;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<Vector2> disc_points(std::size_t n, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vector2> pts;
  while (pts.size() < n) {
    const Vector2 p(u(rng), u(rng));
    if (p.norm() <= radius) pts.push_back(p);
  }
  return pts;
}

std::vector<LabeledPoint> labeled(const std::vector<Vector2>& pts, bool stable) {
  std::vector<LabeledPoint> out;
  for (const auto& p : pts) out.push_back({p, stable});
  return out;
}

std::set<std::pair<double, double>> vertex_set(const std::vector<Vector2>& v) {
  std::set<std::pair<double, double>> s;
  for (const auto& p : v) s.insert({p.x(), p.y()});
  return s;
}

// 6x6 SPD matrix whose (x, y) block is `sub`.
MatrixXd with_slice(const Eigen::Matrix2d& sub) {
  MatrixXd s = MatrixXd::Identity(6, 6);
  s(0, 0) = sub(0, 0);
  s(0, 2) = s(2, 0) = sub(0, 1);
  s(2, 2) = sub(1, 1);
  return s;
}

}  // namespace

TEST_CASE("convex hull basics") {
  const std::vector<Vector2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const RoaPolygon sq = convex_hull(square);
  CHECK(sq.vertices.size() == 4);
  CHECK(sq.area == doctest::Approx(1.0));
  CHECK(shoelace_area(sq.vertices) > 0.0);

  const std::vector<Vector2> tri{{0, 0}, {2, 0}, {0, 2}};
  CHECK(convex_hull(tri).area == doctest::Approx(2.0));

  SUBCASE("collinear boundary points and duplicates are dropped") {
    const std::vector<Vector2> pts{{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}, {1, 1 + 1e-12}, {0, 0.5}};
    CHECK(convex_hull(pts).vertices.size() == 4);
  }
  SUBCASE("degenerate input") {
    auto kind_of = [](const std::vector<Vector2>& pts) {
      try {
        convex_hull(pts);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::Io;
    };
    CHECK(kind_of({{0, 0}, {1, 1}}) == ErrorKind::DegenerateInput);
    CHECK(kind_of({{0, 0}, {1, 1}, {2, 2}, {3, 3}}) == ErrorKind::DegenerateInput);
    CHECK(kind_of({{0, 0}, {0, 0}, {1e-12, 0}, {1, 1}}) == ErrorKind::DegenerateInput);
  }
}

TEST_CASE("convex hull against the brute-force oracle") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = disc_points(200, 100.0, rng);
    const RoaPolygon hull = convex_hull(pts);
    const auto ref = oracle::brute_force_hull(pts);
    CHECK(std::abs(hull.area - oracle::polygon_area(ref)) <= 1e-9 * hull.area);
    CHECK(vertex_set(hull.vertices) == vertex_set(ref));
    for (const auto& p : pts) CHECK(polygon_contains(hull, p));
  }
}

TEST_CASE("convex hull properties") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = disc_points(60, 10.0, rng);
    const RoaPolygon hull = convex_hull(pts);

    // Strict convexity and counterclockwise order.
    const auto& v = hull.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vector2 a = v[(i + 1) % v.size()] - v[i];
      const Vector2 b = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
      CHECK(a.x() * b.y() - a.y() * b.x() > 0.0);
    }
    CHECK(std::abs(hull.area - shoelace_area(v)) <= 1e-9 * hull.area);

    // An interior point changes nothing.
    Vector2 c = Vector2::Zero();
    for (const auto& p : v) c += p / static_cast<double>(v.size());
    pts.push_back(c);
    const RoaPolygon again = convex_hull(pts);
    CHECK(vertex_set(again.vertices) == vertex_set(v));
    CHECK(again.area == hull.area);

    // Rigid rotation preserves the area.
    const double t = 0.1 + trial;
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(t).toRotationMatrix();
    std::vector<Vector2> turned;
    for (const auto& p : pts) turned.push_back(rot * p + Vector2(3, -7));
    CHECK(std::abs(convex_hull(turned).area - hull.area) <= 1e-9 * hull.area);
  }
}

TEST_CASE("graphical region") {
  const std::vector<Vector2> corners{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto pts = labeled(corners, true);
  CHECK(graphical_roa(pts, RoaMethod::GraphicalNominal).area == doctest::Approx(1.0));
  pts.push_back({{1000, 1000}, false});
  pts.push_back({{0.5, 0.5}, false});
  const RoaPolygon poly = graphical_roa(pts, RoaMethod::GraphicalLearned);
  CHECK(poly.area == doctest::Approx(1.0));
  CHECK(poly.method == RoaMethod::GraphicalLearned);
  CHECK(unstable_inside(poly, pts) == 1);

  CHECK_THROWS_AS(graphical_roa(labeled(corners, false), RoaMethod::GraphicalNominal), Error);
}

TEST_CASE("boundary refinement") {
  const auto square = labeled({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true);
  CHECK(refine_boundary(square, 0, 1).empty());

  const RoaPolygon hull = convex_hull(std::vector<Vector2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const double band = kRefineBand * circumradius(hull);
  CHECK(circumradius(hull) == doctest::Approx(std::sqrt(0.5)));
  const auto a = refine_boundary(square, 200, 3);
  REQUIRE(a.size() == 200);
  for (const State& s : a) {
    CHECK(distance_to_boundary(hull, s.position()) <= band + 1e-12);
    CHECK(s.vx() == 0.0);
    CHECK(s.theta() == 0.0);
  }
  const auto b = refine_boundary(square, 200, 4);
  CHECK(!(a == b));
  CHECK(refine_boundary(square, 200, 3) == a);

  CHECK_THROWS_AS(refine_boundary(labeled({{0, 0}, {1, 1}}, true), 5, 1), Error);
}

TEST_CASE("quadratic Lyapunov function") {
  const PlantConfig plant;
  const LqrSolution sol = solve_care(nominal_state_space(plant), LqrWeights{});
  PlantConfig taylor = plant;
  taylor.trig_mode = TrigMode::Taylor3;
  const VectorField f = quadrotor_closed_loop(taylor, sol, hover_thrust(plant, false), false);

  const VectorXd zero = VectorXd::Zero(6);
  CHECK(lyapunov_value(sol.s_matrix, zero) == 0.0);
  CHECK(std::abs(lyapunov_rate(sol.s_matrix, zero, f)) < 1e-12);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  const StateSpace ss = nominal_state_space(plant);
  const Matrix6 acl = ss.a_matrix - ss.b_matrix * sol.k_gain;
  const Matrix6 lin = acl.transpose() * sol.s_matrix + sol.s_matrix * acl;
  for (int i = 0; i < 50; ++i) {
    VectorXd x(6);
    for (auto& v : x) v = n(rng);
    CHECK(lyapunov_value(sol.s_matrix, 3.0 * x) == doctest::Approx(9.0 * lyapunov_value(sol.s_matrix, x)));
    const VectorXd tiny = 1e-4 * x / x.norm();
    const double expected = tiny.dot(lin * tiny);
    CHECK(std::abs(lyapunov_rate(sol.s_matrix, tiny, f) - expected) <= 1e-3 * std::abs(expected));
  }
}

TEST_CASE("level-set certification") {
  SUBCASE("scalar cubic") {
    const MatrixXd s = MatrixXd::Ones(1, 1);
    const VectorField f = [](const VectorXd& x) -> VectorXd { return -x + x.cwiseProduct(x).cwiseProduct(x); };
    CertifyOptions opts;
    opts.n_samples = 1000;
    opts.c_hi = 4.0;
    const LevelSetResult r = certify_level_set(s, f, opts);
    CHECK(r.c_star >= 0.9);
    CHECK(r.c_star <= 1.0);
    CHECK(r.min_margin < 0.0);
  }

  SUBCASE("stable linear loop certifies everywhere") {
    const PlantConfig plant;
    const StateSpace ss = nominal_state_space(plant);
    const LqrSolution sol = solve_care(ss, LqrWeights{});
    const MatrixXd acl = ss.a_matrix - ss.b_matrix * sol.k_gain;
    const VectorField f = [acl](const VectorXd& x) -> VectorXd { return acl * x; };
    CertifyOptions opts;
    opts.n_samples = 2000;
    opts.c_hi = 1e6;
    const LevelSetResult r = certify_level_set(sol.s_matrix, f, opts);
    CHECK(r.c_star == opts.c_hi);
    CHECK(r.min_margin < 0.0);
    CHECK(r.slice_area == doctest::Approx(slice_area(sol.s_matrix, 1e6)));
  }

  SUBCASE("unstable loop has no certifiable level") {
    const VectorField f = [](const VectorXd& x) -> VectorXd { return x; };
    CertifyOptions opts;
    opts.c_hi = 1.0;
    try {
      certify_level_set(MatrixXd::Identity(2, 2), f, opts);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoCertifiableLevel);
    }
  }

  SUBCASE("nesting with shared directions") {
    const MatrixXd s = MatrixXd::Identity(2, 2);
    const VectorField f = [](const VectorXd& x) -> VectorXd {
      return -x + x.squaredNorm() * x;  // unit-ball region of attraction
    };
    const LevelSetSampler sampler(s, 500, 9);
    for (double c : {0.9, 0.5, 0.1, 1e-3}) CHECK(sampler.check(c, f, 1e-6).certified);
    CHECK(!sampler.check(1.1, f, 1e-6).certified);
    for (Eigen::Index k = 0; k < sampler.directions().cols(); ++k) {
      CHECK(lyapunov_value(s, sampler.directions().col(k)) == doctest::Approx(1.0));
    }
  }

  SUBCASE("quadrotor nominal loop") {
    const PlantConfig plant;
    PlantConfig taylor = plant;
    taylor.trig_mode = TrigMode::Taylor3;
    const LqrSolution sol = solve_care(nominal_state_space(plant), LqrWeights{});
    const VectorField f = quadrotor_closed_loop(taylor, sol, hover_thrust(plant, false), false);
    CertifyOptions opts;
    opts.n_samples = 5000;
    opts.seed = 3;
    opts.c_hi = lyapunov_value(sol.s_matrix, State::at_position(250, 250).vector());
    const LevelSetResult r = certify_level_set(sol.s_matrix, f, opts);
    CHECK(r.c_star > 0.0);
    CHECK(r.c_star < opts.c_hi);
    CHECK(r.min_margin < 0.0);
    CHECK(r.slice_area > 0.0);
  }
}

TEST_CASE("slice area") {
  CHECK(slice_area(with_slice(Eigen::Matrix2d::Identity()), 1.0) == doctest::Approx(std::numbers::pi));
  CHECK(slice_area(with_slice(Eigen::Vector2d(4, 9).asDiagonal()), 1.0) ==
        doctest::Approx(std::numbers::pi / 6));

  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::Matrix2d l;
    l << n(rng), n(rng), n(rng), n(rng);
    const Eigen::Matrix2d sub = l * l.transpose() + 0.2 * Eigen::Matrix2d::Identity();
    const double c = 2.5;
    const double mc = oracle::monte_carlo_ellipse_area(sub, c, 1000000, 10 + trial);
    const double exact = slice_area(with_slice(sub), c);
    CHECK(std::abs(mc - exact) <= 0.01 * exact);
    CHECK(slice_area(with_slice(sub), 3 * c) == doctest::Approx(3 * exact));

    const auto ellipse = slice_ellipse(with_slice(sub), c, 512);
    CHECK(shoelace_area(ellipse) == doctest::Approx(exact).epsilon(1e-3));
    for (const auto& p : ellipse) CHECK(p.dot(sub * p) == doctest::Approx(c));
  }
}

TEST_CASE("result serialization") {
  RoaResult r;
  r.method = RoaMethod::GraphicalLearned;
  r.points = {{{0, 0}, true}, {{1, 0}, true}, {{0, 1}, true}, {{5, 5}, false}};
  r.polygon = graphical_roa(r.points, r.method);
  r.config_hash = "00ff00ff00ff00ff";
  r.seed = 12;

  const std::string path = "test_roa_result.json";
  write_roa_result(r, path);
  const RoaResult back = read_roa_result(path);
  std::remove(path.c_str());
  CHECK(back.method == r.method);
  CHECK(back.config_hash == r.config_hash);
  CHECK(back.seed == r.seed);
  CHECK(back.area() == r.area());
  CHECK(back.stable_count() == 3);
  REQUIRE(back.points.size() == r.points.size());
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    CHECK(back.points[i].position == r.points[i].position);
    CHECK(back.points[i].stable == r.points[i].stable);
  }

  for (RoaMethod m : {RoaMethod::GraphicalNominal, RoaMethod::GraphicalLearned, RoaMethod::LyapunovLevelSet}) {
    CHECK(roa_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(roa_method_from_string("sos"), Error);
  CHECK_THROWS_AS(read_roa_result("missing.json"), Error);
}
