#include "roa/dynamics.hpp"

#include <cmath>
#include <string>

#include "roa/error.hpp"

namespace roa {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidConfiguration, "plant: " + what);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void PlantConfig::validate() const {
  require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
  require(std::isfinite(inertia) && inertia > 0.0, "inertia must be > 0");
  require(std::isfinite(arm) && arm > 0.0, "arm must be > 0");
  require(std::isfinite(gravity) && gravity > 0.0, "gravity must be > 0");
  require(std::isfinite(delta_mass) && total_mass() > 0.0, "mass + delta_mass must be > 0");
  require(rotor_drag.allFinite() && (rotor_drag.array() >= 0.0).all(),
          "rotor_drag entries must be >= 0");
  require(std::isfinite(fuselage_drag) && fuselage_drag >= 0.0, "fuselage_drag must be >= 0");
}

double plant_sin(double theta, TrigMode mode) {
  if (mode == TrigMode::Taylor3) return theta - theta * theta * theta / 6.0;
  return std::sin(theta);
}

double plant_cos(double theta, TrigMode mode) {
  if (mode == TrigMode::Taylor3) return 1.0 - theta * theta / 2.0;
  return std::cos(theta);
}

Derivative nominal_dynamics(const State& s, const ControlInput& u, const PlantConfig& cfg) {
  const double thrust = u.total();
  const double st = plant_sin(s.theta(), cfg.trig_mode);
  const double ct = plant_cos(s.theta(), cfg.trig_mode);
  Derivative d;
  d << s.vx(),
       -thrust * st / cfg.mass,
       s.vy(),
       thrust * ct / cfg.mass - cfg.gravity,
       s.omega(),
       cfg.arm * (u.u1() - u.u2()) / cfg.inertia;
  return d;
}

Vector2 body_velocity(const State& s) {
  const double c = std::cos(s.theta());
  const double sn = std::sin(s.theta());
  return {c * s.vx() + sn * s.vy(), -sn * s.vx() + c * s.vy()};
}

Vector2 disturbance(const State& s, const ControlInput& u, const PlantConfig& cfg) {
  const double m_total = cfg.total_mass();
  if (!(m_total > 0.0)) {
    throw Error(ErrorKind::InvalidConfiguration, "plant: mass + delta_mass must be > 0");
  }
  const Vector2 bv = body_velocity(s);

  // Thrust acts along body y only.
  const Vector2 mass_term(0.0, -u.total() * cfg.delta_mass / (cfg.mass * m_total));
  const Vector2 rotor_term = -cfg.rotor_drag.cwiseProduct(bv) / m_total;
  const Vector2 fuselage_term(-cfg.fuselage_drag * sign(bv(0)) * bv(0) * bv(0) / m_total,
                              -cfg.fuselage_drag * sign(bv(1)) * bv(1) * bv(1) / m_total);
  const Vector2 body = mass_term + rotor_term + fuselage_term;

  const double c = std::cos(s.theta());
  const double sn = std::sin(s.theta());
  return {c * body(0) - sn * body(1), sn * body(0) + c * body(1)};
}

Derivative true_plant_dynamics(const State& s, const ControlInput& u, const PlantConfig& cfg) {
  Derivative d = nominal_dynamics(s, u, cfg);
  const Vector2 pi = disturbance(s, u, cfg);
  d(1) += pi(0);
  d(3) += pi(1);
  return d;
}

ControlInput hover_thrust(const PlantConfig& cfg, bool disturbance_aware) {
  const double m = disturbance_aware ? cfg.total_mass() : cfg.mass;
  return {m * cfg.gravity / 2.0, m * cfg.gravity / 2.0};
}

}  // namespace roa
