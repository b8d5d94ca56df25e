#pragma once

#include <Eigen/Dense>

namespace roa {

using Vector2 = Eigen::Vector2d;
using Vector6 = Eigen::Matrix<double, 6, 1>;

// Planar quadrotor state (x, vx, y, vy, theta, omega). Positions in m,
// velocities in m/s, attitude in rad measured from the world x-axis.
class State {
 public:
  State() : v_(Vector6::Zero()) {}
  explicit State(const Vector6& v) : v_(v) {}
  State(double x, double vx, double y, double vy, double theta, double omega) {
    v_ << x, vx, y, vy, theta, omega;
  }

  static State origin() { return State(); }
  static State at_position(double x, double y) { return State(x, 0, y, 0, 0, 0); }

  double x() const { return v_(0); }
  double vx() const { return v_(1); }
  double y() const { return v_(2); }
  double vy() const { return v_(3); }
  double theta() const { return v_(4); }
  double omega() const { return v_(5); }

  Vector2 position() const { return {v_(0), v_(2)}; }
  Vector2 velocity() const { return {v_(1), v_(3)}; }

  const Vector6& vector() const { return v_; }
  bool is_finite() const { return v_.allFinite(); }

  friend bool operator==(const State& a, const State& b) { return a.v_ == b.v_; }

 private:
  Vector6 v_;
};

// Rotor thrusts (u1, u2) in N.
class ControlInput {
 public:
  ControlInput() : v_(Vector2::Zero()) {}
  explicit ControlInput(const Vector2& v) : v_(v) {}
  ControlInput(double u1, double u2) : v_(u1, u2) {}

  double u1() const { return v_(0); }
  double u2() const { return v_(1); }
  double total() const { return v_(0) + v_(1); }

  const Vector2& vector() const { return v_; }

  friend bool operator==(const ControlInput& a, const ControlInput& b) { return a.v_ == b.v_; }

 private:
  Vector2 v_;
};

// Time derivative of a State, same slot layout.
using Derivative = Vector6;

enum class TrigMode { Exact, Taylor3 };

struct PlantConfig {
  double mass = 0.486;
  double arm = 0.25;
  double inertia = 0.00383;
  double gravity = 9.81;
  double delta_mass = 0.05;
  Vector2 rotor_drag{0.2, 0.4};
  double fuselage_drag = 0.3;
  TrigMode trig_mode = TrigMode::Exact;
  // Floors each rotor thrust at zero before it reaches the plant.
  bool clamp_thrust = false;

  double total_mass() const { return mass + delta_mass; }

  // Throws Error(InvalidConfiguration) naming the first violated constraint.
  void validate() const;
};

// sin/cos under the configured approximation.
double plant_sin(double theta, TrigMode mode);
double plant_cos(double theta, TrigMode mode);

// Rigid-body vector field with no disturbance.
Derivative nominal_dynamics(const State& s, const ControlInput& u, const PlantConfig& cfg);

// R(theta)^T (vx, vy).
Vector2 body_velocity(const State& s);

// World-frame acceleration perturbation (pi1, pi2) from the payload mass
// change, rotor drag and fuselage drag. The three terms are summed in the body
// frame and rotated to the world frame.
Vector2 disturbance(const State& s, const ControlInput& u, const PlantConfig& cfg);

// nominal_dynamics with the disturbance injected into the vx and vy rates.
Derivative true_plant_dynamics(const State& s, const ControlInput& u, const PlantConfig& cfg);

// Thrust per rotor that holds the plant at hover. With `disturbance_aware`
// the payload mass is included (m_T g / 2), otherwise only the nominal mass.
ControlInput hover_thrust(const PlantConfig& cfg, bool disturbance_aware);

}  // namespace roa
