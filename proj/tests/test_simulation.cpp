#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "roa/error.hpp"
#include "roa/simulation.hpp"

using namespace roa;

namespace {

Controller paper_controller(const PlantConfig& plant, bool payload_aware = true) {
  return {solve_care(nominal_state_space(plant), LqrWeights{}), hover_thrust(plant, payload_aware)};
}

}  // namespace

TEST_CASE("single steps") {
  SUBCASE("hover is a fixed point") {
    const PlantConfig plant;
    for (Integrator integ : {Integrator::RK4, Integrator::Euler}) {
      const State s = step(State::origin(), hover_thrust(plant, true), 0.01, plant, integ);
      CHECK(s.vector().cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("free fall is exact under RK4") {
    PlantConfig plant;
    plant.delta_mass = 0.0;
    plant.rotor_drag.setZero();
    plant.fuselage_drag = 0.0;
    State s;
    const double dt = 0.01;
    const int n = 500;
    for (int k = 0; k < n; ++k) s = step(s, {0, 0}, dt, plant, Integrator::RK4);
    const double t = n * dt;
    CHECK(std::abs(s.vy() + plant.gravity * t) < 1e-9);
    CHECK(std::abs(s.y() + 0.5 * plant.gravity * t * t) < 1e-9);
    CHECK(s.x() == 0.0);
  }
}

TEST_CASE("RK4 is fourth order on the closed loop") {
  const PlantConfig plant;
  const Controller ctl = paper_controller(plant);
  // Offsets large enough that the discretization error sits well above rounding.
  for (const State& x0 : {State(5, 0, -3, 0, 0, 0), State(20, 0, 20, 0, 0, 0)}) {
    const double ratio = oracle::rk4_error_ratio(x0, ctl, plant, 0.01, 4.0);
    CAPTURE(ratio);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("closed loop runs") {
  const PlantConfig plant;
  const Controller ctl = paper_controller(plant);
  const SimConfig sim;

  SUBCASE("origin is stable at step 0") {
    const Trajectory t = run_closed_loop(State::origin(), ctl, plant, sim);
    CHECK(t.label == TrajectoryLabel::Stable);
    CHECK(t.states.size() == 1);
  }

  SUBCASE("small offset converges without payload") {
    PlantConfig no_payload = plant;
    no_payload.delta_mass = 0.0;
    const Controller c = paper_controller(no_payload);
    CHECK(closed_loop_spectral_abscissa(nominal_state_space(no_payload), c.solution.k_gain) < 0.0);
    const Trajectory t = run_closed_loop(State(1, 0, 1, 0, 0, 0), c, no_payload, sim);
    CHECK(t.label == TrajectoryLabel::Stable);
  }

  SUBCASE("far start diverges immediately") {
    const Trajectory t = run_closed_loop(State::at_position(10 * sim.diverge_radius, 0), ctl, plant, sim);
    CHECK(t.label == TrajectoryLabel::Diverged);
    CHECK(t.states.size() == 1);
  }

  SUBCASE("non-finite start is classified as diverged") {
    const Trajectory t = run_closed_loop(State(std::nan(""), 0, 0, 0, 0, 0), ctl, plant, sim);
    CHECK(t.label == TrajectoryLabel::Diverged);
  }

  SUBCASE("record invariants") {
    const Trajectory t = run_closed_loop(State(20, 0, -15, 0, 0, 0), ctl, plant, sim);
    REQUIRE(t.label == TrajectoryLabel::Stable);
    CHECK(t.times.size() == t.states.size());
    CHECK(t.inputs.size() == t.states.size());
    CHECK(t.disturbances.size() == t.states.size());
    for (std::size_t k = 1; k < t.times.size(); ++k) {
      CHECK(std::abs(t.times[k] - t.times[k - 1] - sim.dt) < 1e-9);
    }
    CHECK(converged(t.states.back(), sim));
    const State& last = t.states.back();
    CHECK(last.position().norm() < sim.converge_pos_tol);
    CHECK(last.velocity().norm() < sim.converge_vel_tol);
    CHECK(std::abs(last.theta()) < sim.converge_att_tol);
    // Zero-order hold: recorded inputs are the control law on recorded states.
    for (std::size_t k = 0; k < t.states.size(); k += 37) CHECK(t.inputs[k] == ctl(t.states[k]));
    for (std::size_t k = 0; k < t.states.size(); k += 41) {
      CHECK(t.disturbances[k] == disturbance(t.states[k], t.inputs[k], plant));
    }
    for (std::size_t k = 0; k + 1 < t.states.size(); k += 53) {
      CHECK(step(t.states[k], t.inputs[k], sim.dt, plant, sim.integrator) == t.states[k + 1]);
    }
  }

  SUBCASE("endpoint recording agrees with full recording") {
    const State x0(-30, 0, 40, 0, 0, 0);
    const Trajectory full = run_closed_loop(x0, ctl, plant, sim, Recording::Full);
    const Trajectory ends = run_closed_loop(x0, ctl, plant, sim, Recording::Endpoints);
    CHECK(ends.label == full.label);
    REQUIRE(ends.states.size() == 2);
    CHECK(ends.states.front() == full.states.front());
    CHECK(ends.states.back() == full.states.back());
    CHECK(ends.times.back() == full.times.back());
  }

  SUBCASE("deterministic") {
    const State x0(100, 0, -80, 0, 0, 0);
    const Trajectory a = run_closed_loop(x0, ctl, plant, sim);
    const Trajectory b = run_closed_loop(x0, ctl, plant, sim);
    CHECK(a.label == b.label);
    CHECK(a.states == b.states);
  }

  SUBCASE("thrust clamp floors rotor commands") {
    PlantConfig clamped = plant;
    clamped.clamp_thrust = true;
    const Trajectory t = run_closed_loop(State(200, 0, 200, 0, 0, 0), ctl, clamped, sim);
    bool negative_before_clamp = false;
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      CHECK(t.inputs[k].u1() >= 0.0);
      CHECK(t.inputs[k].u2() >= 0.0);
      const ControlInput raw = ctl(t.states[k]);
      negative_before_clamp = negative_before_clamp || raw.u1() < 0.0 || raw.u2() < 0.0;
    }
    CHECK(negative_before_clamp);
  }
}

TEST_CASE("drag alone never speeds the vehicle up") {
  // Level attitude with thrust balancing gravity leaves drag as the only force.
  PlantConfig plant;
  plant.delta_mass = 0.0;
  const ControlInput hover = hover_thrust(plant, false);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> v(-20.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    State s(0, v(rng), 0, v(rng), 0, 0);
    for (int k = 0; k < 20; ++k) {
      const State next = step(s, hover, 0.01, plant, Integrator::RK4);
      REQUIRE(next.velocity().norm() <= s.velocity().norm() + 1e-12);
      s = next;
    }
  }
}

TEST_CASE("sweeps") {
  const PlantConfig plant;
  const Controller ctl = paper_controller(plant);
  const SimConfig sim;

  const std::vector<State> origin{State::origin()};
  const auto one = sweep(origin, ctl, plant, sim);
  REQUIRE(one.size() == 1);
  CHECK(one[0].stable());

  const auto points = sample_initial_states(12, 250.0, 3);
  for (const State& p : points) {
    CHECK(std::abs(p.x()) <= 250.0);
    CHECK(std::abs(p.y()) <= 250.0);
    CHECK(p.vx() == 0.0);
    CHECK(p.theta() == 0.0);
  }
  CHECK(sample_initial_states(12, 250.0, 3)[5] == points[5]);
  CHECK(!(sample_initial_states(12, 250.0, 4)[5] == points[5]));

  const std::span<const State> all(points);
  const auto whole = sweep(all, ctl, plant, sim, Recording::Endpoints);
  auto first = sweep(all.first(5), ctl, plant, sim, Recording::Endpoints);
  const auto rest = sweep(all.subspan(5), ctl, plant, sim, Recording::Endpoints);
  first.insert(first.end(), rest.begin(), rest.end());
  REQUIRE(first.size() == whole.size());
  for (std::size_t i = 0; i < whole.size(); ++i) {
    CHECK(first[i].label == whole[i].label);
    CHECK(first[i].states == whole[i].states);
  }

  SUBCASE("default sampling square gives both outcomes") {
    const auto pts = sample_initial_states(150, 250.0, 8);
    const auto trajs = sweep(pts, ctl, plant, sim, Recording::Endpoints);
    const auto stable = std::count_if(trajs.begin(), trajs.end(), [](const Trajectory& t) { return t.stable(); });
    CHECK(stable > 0);
    CHECK(stable < 150);
  }
}

TEST_CASE("training data extraction") {
  const PlantConfig plant;
  const Controller ctl = paper_controller(plant);
  const SimConfig sim;

  const Trajectory stable = run_closed_loop(State(3, 0, 4, 0, 0, 0), ctl, plant, sim);
  REQUIRE(stable.stable());
  Trajectory unstable = stable;
  unstable.label = TrajectoryLabel::Timeout;

  const std::vector<Trajectory> mixed{stable, unstable};
  const auto data = extract_training_data(mixed);
  CHECK(data.size() == stable.states.size());
  CHECK(data[7].input == network_input(stable.states[7], stable.inputs[7]));
  CHECK(data[7].target == stable.disturbances[7]);

  const std::vector<Trajectory> none{unstable};
  try {
    extract_training_data(none);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyOutput);
  }

  PlantConfig no_payload = plant;
  no_payload.delta_mass = 0.0;
  const std::vector<Trajectory> hold{run_closed_loop(State::origin(), paper_controller(no_payload), no_payload, sim)};
  for (const Sample& s : extract_training_data(hold)) CHECK(s.target == Vector2::Zero());

  SUBCASE("dataset csv round trip") {
    const std::string path = "test_sim_dataset.csv";
    write_dataset_csv(data, path);
    const auto back = read_dataset_csv(path);
    REQUIRE(back.size() == data.size());
    CHECK(back[11].input == data[11].input);
    CHECK(back[11].target == data[11].target);
    {
      std::ofstream f(path, std::ios::app);
      f << "1,2,3\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(path), Error);
    std::remove(path.c_str());
  }
}

TEST_CASE("sim config validation") {
  SimConfig sim;
  CHECK_NOTHROW(sim.validate());
  sim.dt = 0.0;
  CHECK_THROWS_AS(sim.validate(), Error);
  sim = SimConfig{};
  sim.horizon = 0.001;
  CHECK_THROWS_AS(sim.validate(), Error);
  sim = SimConfig{};
  sim.diverge_radius = 0.2;
  CHECK_THROWS_AS(sim.validate(), Error);
}
