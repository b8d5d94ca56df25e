#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "roa/dynamics.hpp"
#include "roa/lqr.hpp"
#include "roa/mlp.hpp"
#include "roa/roa.hpp"
#include "roa/simulation.hpp"

namespace roa {

struct LyapunovConfig {
  std::size_t n_samples = 20000;
  // Certify against the disturbed plant instead of the nominal model.
  bool with_disturbance = false;
};

struct ExperimentConfig {
  PlantConfig plant;
  LqrWeights weights;
  SimConfig sim;
  TrainConfig train;  // seed unused, see train_config()
  LyapunovConfig lyapunov;
  std::size_t n_initial_points = 150;
  std::size_t n_refine_points = 50;
  std::size_t n_dataset_trajectories = 50;
  double position_range = 250.0;
  std::uint64_t master_seed = 7;
  bool recompute_gain_after_update = true;
  // Feedforward hover thrust uses m + delta_m rather than m.
  bool disturbance_aware_equilibrium = true;

  void validate() const;

  // Per-stage seeds derived from master_seed by fixed offsets.
  std::uint64_t points_seed() const { return master_seed + 1; }
  std::uint64_t refine_seed() const { return master_seed + 2; }
  std::uint64_t train_seed() const { return master_seed + 3; }
  std::uint64_t lyapunov_seed() const { return master_seed + 4; }

  // `train` with its seed set to train_seed().
  TrainConfig train_config() const {
    TrainConfig t = train;
    t.seed = train_seed();
    return t;
  }
};

// Unknown keys and type mismatches are reported with their dotted path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Parses a JSON config file; syntax errors carry line and column.
nlohmann::json load_config_json(const std::string& path);
ExperimentConfig load_config(const std::string& path);

// Applies "dotted.path=value" overrides (value parsed as JSON, falling back
// to a string).
void apply_override(nlohmann::json& j, const std::string& assignment);

// 16 hex digits of FNV-1a over the canonical JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

nlohmann::json to_json(const LqrSolution& sol);

// The controller synthesized from the nominal linear model.
Controller nominal_controller(const ExperimentConfig& cfg);

// Controller after injecting the learned sensitivities at hover. Keeps the
// nominal gain when recompute_gain_after_update is off.
Controller learned_controller(const ExperimentConfig& cfg, const MlpModel& model);

struct PointSet {
  std::vector<State> initial;
  std::vector<State> refinement;

  std::vector<State> all() const;
};

// Initial square sample plus boundary refinement around the nominal hull of
// the initial sweep, clamped to the sampling square.
PointSet build_point_set(const ExperimentConfig& cfg);

std::vector<LabeledPoint> label(std::span<const State> points, std::span<const Trajectory> trajs);

struct GeneratedData {
  std::vector<Trajectory> trajectories;  // the selected stable runs, fully recorded
  std::vector<Sample> samples;
  std::size_t stable_count = 0;
  std::size_t total_count = 0;
};

// Sweeps the initial points with the nominal controller and keeps the first
// n_dataset_trajectories stable runs by index.
GeneratedData generate_data(const ExperimentConfig& cfg);

RoaResult graphical_roa_nominal(const ExperimentConfig& cfg, const PointSet& points);
RoaResult graphical_roa_learned(const ExperimentConfig& cfg, const PointSet& points,
                                const MlpModel& model);

// Level-set estimate for the cost-to-go of the nominal gain on the Taylor3
// nominal closed loop. The search starts at V of the sampling-square corner.
RoaResult lyapunov_roa(const ExperimentConfig& cfg);

struct ComparisonRow {
  std::string technique;
  double area = 0.0;
  std::size_t stable_count = 0;
  std::size_t total_count = 0;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // learned, nominal, Lyapunov
  std::string config_hash;
  std::uint64_t seed = 0;
  // Learned stable set contains the nominal stable set on the shared points.
  bool learned_superset = false;
  std::size_t newly_stable = 0;
  std::size_t newly_unstable = 0;

  std::string to_csv() const;
  std::string to_text() const;

  friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

// Rejects results whose config hashes differ or whose graphical point lists
// are not identical.
ComparisonReport compare(const RoaResult& nominal, const RoaResult& learned,
                         const RoaResult& lyapunov);

}  // namespace roa
