#include "roa/simulation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "roa/error.hpp"

namespace roa {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidConfiguration, "sim: " + what);
}

Vector6 rate(const Vector6& v, const ControlInput& u, const PlantConfig& cfg) {
  return true_plant_dynamics(State(v), u, cfg);
}

void record(Trajectory& traj, double t, const State& s, const ControlInput& u,
            const PlantConfig& cfg) {
  traj.times.push_back(t);
  traj.states.push_back(s);
  traj.inputs.push_back(u);
  traj.disturbances.push_back(
      s.is_finite() ? disturbance(s, u, cfg)
                    : Vector2::Constant(std::numeric_limits<double>::quiet_NaN()));
}

}  // namespace

void SimConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(horizon) && horizon >= dt, "horizon must be >= dt");
  require(converge_pos_tol > 0.0 && converge_vel_tol > 0.0 && converge_att_tol > 0.0,
          "convergence tolerances must be > 0");
  require(diverge_radius > converge_pos_tol && diverge_radius > converge_vel_tol &&
              diverge_radius > converge_att_tol,
          "diverge_radius must exceed the convergence tolerances");
}

const char* to_string(TrajectoryLabel label) noexcept {
  switch (label) {
    case TrajectoryLabel::Stable: return "stable";
    case TrajectoryLabel::Diverged: return "diverged";
    case TrajectoryLabel::Timeout: return "timeout";
  }
  return "unknown";
}

State step(const State& s, const ControlInput& u, double dt, const PlantConfig& cfg,
           Integrator integrator) {
  const Vector6& x = s.vector();
  if (integrator == Integrator::Euler) return State(x + dt * rate(x, u, cfg));
  const Vector6 k1 = rate(x, u, cfg);
  const Vector6 k2 = rate(x + 0.5 * dt * k1, u, cfg);
  const Vector6 k3 = rate(x + 0.5 * dt * k2, u, cfg);
  const Vector6 k4 = rate(x + dt * k3, u, cfg);
  return State(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

bool converged(const State& s, const SimConfig& sim) {
  return s.position().norm() < sim.converge_pos_tol && s.velocity().norm() < sim.converge_vel_tol &&
         std::abs(s.theta()) < sim.converge_att_tol;
}

Trajectory run_closed_loop(const State& x0, const Controller& controller, const PlantConfig& cfg,
                           const SimConfig& sim, Recording recording) {
  const auto max_steps = static_cast<long>(std::llround(sim.horizon / sim.dt));
  Trajectory traj;
  if (recording == Recording::Full) {
    const auto expected = static_cast<std::size_t>(std::min<long>(max_steps, 1L << 16) + 1);
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.inputs.reserve(expected);
    traj.disturbances.reserve(expected);
  }

  State s = x0;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * sim.dt;
    ControlInput u = controller(s);
    if (cfg.clamp_thrust) u = ControlInput(u.vector().cwiseMax(0.0));

    const bool diverged = !s.is_finite() || s.vector().norm() > sim.diverge_radius;
    const bool done = diverged || converged(s, sim) || k >= max_steps;
    if (recording == Recording::Full || k == 0 || done) record(traj, t, s, u, cfg);
    if (diverged) {
      traj.label = TrajectoryLabel::Diverged;
      break;
    }
    if (converged(s, sim)) {
      traj.label = TrajectoryLabel::Stable;
      break;
    }
    if (k >= max_steps) {
      traj.label = TrajectoryLabel::Timeout;
      break;
    }
    s = step(s, u, sim.dt, cfg, sim.integrator);
  }
  // Endpoints recording of a trajectory that ends at step 0 holds one record.
  return traj;
}

std::vector<Trajectory> sweep(std::span<const State> points, const Controller& controller,
                              const PlantConfig& cfg, const SimConfig& sim, Recording recording) {
  std::vector<Trajectory> out;
  out.reserve(points.size());
  for (const State& x0 : points) out.push_back(run_closed_loop(x0, controller, cfg, sim, recording));
  return out;
}

std::vector<Sample> extract_training_data(std::span<const Trajectory> trajs) {
  std::vector<Sample> data;
  bool any_stable = false;
  for (const Trajectory& traj : trajs) {
    if (!traj.stable()) continue;
    any_stable = true;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      data.push_back({network_input(traj.states[k], traj.inputs[k]), traj.disturbances[k]});
    }
  }
  if (!any_stable) throw Error(ErrorKind::EmptyOutput, "no stable trajectories to extract");
  return data;
}

std::vector<State> sample_initial_states(std::size_t count, double half_width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  std::vector<State> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = dist(rng);
    const double y = dist(rng);
    points.push_back(State::at_position(x, y));
  }
  return points;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "t,x,vx,y,vy,theta,omega,u1,u2,pi1,pi2,label\n" << std::setprecision(12);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Vector6& s = traj.states[k].vector();
    out << traj.times[k];
    for (int i = 0; i < 6; ++i) out << ',' << s(i);
    out << ',' << traj.inputs[k].u1() << ',' << traj.inputs[k].u2() << ','
        << traj.disturbances[k](0) << ',' << traj.disturbances[k](1) << ','
        << to_string(traj.label) << '\n';
  }
}

void write_dataset_csv(std::span<const Sample> data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "bvx,bvy,theta,u1,u2,pi1,pi2\n" << std::setprecision(17);
  for (const Sample& s : data) {
    for (int i = 0; i < 5; ++i) out << s.input(i) << ',';
    out << s.target(0) << ',' << s.target(1) << '\n';
  }
}

std::vector<Sample> read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("bvx,bvy,theta,u1,u2,pi1,pi2", 0) != 0) {
    throw Error(ErrorKind::InvalidConfiguration, path + ":1: expected dataset header");
  }
  std::vector<Sample> data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    double v[7];
    int n = 0;
    while (n < 7 && std::getline(fields, cell, ',')) {
      try {
        v[n++] = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidConfiguration,
                    path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (n != 7) {
      throw Error(ErrorKind::InvalidConfiguration,
                  path + ":" + std::to_string(line_no) + ": expected 7 columns");
    }
    Sample s;
    s.input << v[0], v[1], v[2], v[3], v[4];
    s.target << v[5], v[6];
    data.push_back(s);
  }
  return data;
}

}  // namespace roa
