#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "roa/dynamics.hpp"
#include "roa/lqr.hpp"

namespace roa {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix25 = Eigen::Matrix<double, 2, 5>;

inline constexpr int kNetInputs = 5;
inline constexpr int kNetOutputs = 2;
inline constexpr std::array<int, 4> kLayerWidths{kNetInputs, 30, 15, kNetOutputs};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;
};

// Disturbance regressor: (bvx, bvy, theta, u1, u2) -> (pi1, pi2).
// Inputs are standardized with (input - mean) / scale before the first layer;
// hidden layers use tanh, the output layer is affine.
struct MlpModel {
  std::array<DenseLayer, 3> layers;
  Vector5 input_mean = Vector5::Zero();
  Vector5 input_scale = Vector5::Ones();

  // All weights and biases zero, identity normalization.
  static MlpModel zeros();

  std::size_t parameter_count() const;
  void validate() const;
};

struct TrainConfig {
  enum class Optimizer { Adam, LevenbergMarquardt };

  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  bool resample_validation_each_epoch = false;
  Optimizer optimizer = Optimizer::Adam;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  double final_val_loss = 0.0;
};

struct Sample {
  Vector5 input;
  Vector2 target;
};

// Network features for a state/input pair: (bvx, bvy, theta, u1, u2).
Vector5 network_input(const State& s, const ControlInput& u);

Vector2 nn_forward(const MlpModel& model, const Vector5& input);

// d(pi1, pi2) / d(bvx, bvy, theta, u1, u2), including the normalization.
Matrix25 nn_input_jacobian(const MlpModel& model, const Vector5& input);

// Mean squared error over both outputs.
double mean_squared_error(const MlpModel& model, std::span<const Sample> data);

std::pair<MlpModel, TrainReport> train(std::span<const Sample> dataset, const TrainConfig& cfg);

// Adds the learned sensitivities to the vx and vy rows of (A, B), linearized
// at (s0, u0). Rows for x, y, theta and omega are untouched.
StateSpace updated_state_space(const StateSpace& ss, const MlpModel& model, const State& s0,
                               const ControlInput& u0, const PlantConfig& cfg);

nlohmann::json to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);

void write_model(const MlpModel& model, const std::string& path);
MlpModel read_model(const std::string& path);

// epoch,train_loss,val_loss
void write_train_report_csv(const TrainReport& report, const std::string& path);

}  // namespace roa
