#pragma once

#include <span>
#include <string>
#include <vector>

#include "roa/dynamics.hpp"
#include "roa/lqr.hpp"
#include "roa/mlp.hpp"

namespace roa {

enum class Integrator { RK4, Euler };

struct SimConfig {
  double dt = 0.01;
  double horizon = 300.0;
  double converge_pos_tol = 0.5;
  double converge_vel_tol = 0.1;
  double converge_att_tol = 0.1;
  double diverge_radius = 1e4;
  Integrator integrator = Integrator::RK4;

  void validate() const;
};

enum class TrajectoryLabel { Stable, Diverged, Timeout };

const char* to_string(TrajectoryLabel label) noexcept;

// One closed-loop run. states, inputs and disturbances have equal length:
// entry k holds the state at times[k], the input computed from it and the
// true disturbance it produces. The last input is computed but never applied.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<ControlInput> inputs;
  std::vector<Vector2> disturbances;
  TrajectoryLabel label = TrajectoryLabel::Timeout;

  bool stable() const { return label == TrajectoryLabel::Stable; }
};

// State feedback about the origin with a fixed feedforward thrust.
struct Controller {
  LqrSolution solution;
  ControlInput equilibrium;

  ControlInput operator()(const State& s) const {
    return lqr_control(solution, s, State::origin(), equilibrium);
  }
};

// One explicit step of true_plant_dynamics with u held over the step.
State step(const State& s, const ControlInput& u, double dt, const PlantConfig& cfg,
           Integrator integrator);

// True when s meets all three convergence tolerances.
bool converged(const State& s, const SimConfig& sim);

// Endpoints keeps only the initial and final records, which is all a
// stability sweep needs.
enum class Recording { Full, Endpoints };

Trajectory run_closed_loop(const State& x0, const Controller& controller, const PlantConfig& cfg,
                           const SimConfig& sim, Recording recording = Recording::Full);

// Results in input order.
std::vector<Trajectory> sweep(std::span<const State> points, const Controller& controller,
                              const PlantConfig& cfg, const SimConfig& sim,
                              Recording recording = Recording::Full);

// ((bvx, bvy, theta, u1, u2), (pi1, pi2)) for every recorded step of every
// stable trajectory. Throws Error(EmptyOutput) when none is stable.
std::vector<Sample> extract_training_data(std::span<const Trajectory> trajs);

// Positions uniform in [-half_width, half_width]^2, other states zero.
std::vector<State> sample_initial_states(std::size_t count, double half_width, std::uint64_t seed);

// t,x,vx,y,vy,theta,omega,u1,u2,pi1,pi2,label
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// bvx,bvy,theta,u1,u2,pi1,pi2
void write_dataset_csv(std::span<const Sample> data, const std::string& path);
std::vector<Sample> read_dataset_csv(const std::string& path);

}  // namespace roa
