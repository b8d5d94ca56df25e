#include "roa/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>

#include "roa/error.hpp"

namespace roa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kScaleFloor = 1e-8;
constexpr int kFormatVersion = 1;

// Flat parameter vector <-> layers. Order: W0, b0, W1, b1, W2, b2 with the
// weights in Eigen's column-major storage order.
VectorXd flatten(const MlpModel& model) {
  VectorXd p(static_cast<Eigen::Index>(model.parameter_count()));
  Eigen::Index at = 0;
  for (const auto& layer : model.layers) {
    p.segment(at, layer.weights.size()) =
        Eigen::Map<const VectorXd>(layer.weights.data(), layer.weights.size());
    at += layer.weights.size();
    p.segment(at, layer.biases.size()) = layer.biases;
    at += layer.biases.size();
  }
  return p;
}

void unflatten(const VectorXd& p, MlpModel& model) {
  Eigen::Index at = 0;
  for (auto& layer : model.layers) {
    Eigen::Map<VectorXd>(layer.weights.data(), layer.weights.size()) =
        p.segment(at, layer.weights.size());
    at += layer.weights.size();
    layer.biases = p.segment(at, layer.biases.size());
    at += layer.biases.size();
  }
}

// Activations for a batch of column inputs.
struct BatchPass {
  MatrixXd z;   // normalized inputs, 5 x n
  MatrixXd h1;  // 30 x n
  MatrixXd h2;  // 15 x n
  MatrixXd y;   // 2 x n
};

BatchPass forward_batch(const MlpModel& model, const MatrixXd& raw_inputs) {
  BatchPass pass;
  pass.z = (raw_inputs.colwise() - model.input_mean).array().colwise() / model.input_scale.array();
  pass.h1 = ((model.layers[0].weights * pass.z).colwise() + model.layers[0].biases).array().tanh();
  pass.h2 = ((model.layers[1].weights * pass.h1).colwise() + model.layers[1].biases).array().tanh();
  pass.y = (model.layers[2].weights * pass.h2).colwise() + model.layers[2].biases;
  return pass;
}

// Gradient of 0.5/n * sum ||y - t||^2, i.e. of the per-output MSE.
VectorXd gradient_batch(const MlpModel& model, const BatchPass& pass, const MatrixXd& targets) {
  const double n = static_cast<double>(targets.cols());
  const MatrixXd dy = (pass.y - targets) / n;
  const MatrixXd d2 =
      (model.layers[2].weights.transpose() * dy).array() * (1.0 - pass.h2.array().square());
  const MatrixXd d1 =
      (model.layers[1].weights.transpose() * d2).array() * (1.0 - pass.h1.array().square());

  MlpModel grad = model;
  grad.layers[0].weights = d1 * pass.z.transpose();
  grad.layers[0].biases = d1.rowwise().sum();
  grad.layers[1].weights = d2 * pass.h1.transpose();
  grad.layers[1].biases = d2.rowwise().sum();
  grad.layers[2].weights = dy * pass.h2.transpose();
  grad.layers[2].biases = dy.rowwise().sum();
  return flatten(grad);
}

struct Columns {
  MatrixXd inputs;   // 5 x n
  MatrixXd targets;  // 2 x n
};

Columns gather(std::span<const Sample> data, const std::vector<std::size_t>& idx) {
  Columns c{MatrixXd(kNetInputs, static_cast<Eigen::Index>(idx.size())),
            MatrixXd(kNetOutputs, static_cast<Eigen::Index>(idx.size()))};
  for (std::size_t i = 0; i < idx.size(); ++i) {
    c.inputs.col(static_cast<Eigen::Index>(i)) = data[idx[i]].input;
    c.targets.col(static_cast<Eigen::Index>(i)) = data[idx[i]].target;
  }
  return c;
}

double mse(const MlpModel& model, const Columns& c) {
  if (c.inputs.cols() == 0) return 0.0;
  constexpr Eigen::Index kChunk = 4096;
  double sum = 0.0;
  for (Eigen::Index at = 0; at < c.inputs.cols(); at += kChunk) {
    const Eigen::Index len = std::min(kChunk, c.inputs.cols() - at);
    const BatchPass pass = forward_batch(model, c.inputs.middleCols(at, len));
    sum += (pass.y - c.targets.middleCols(at, len)).squaredNorm();
  }
  return sum / static_cast<double>(c.targets.size());
}

// Training runs on standardized targets; the affine output layer absorbs the
// scaling afterwards.
struct TargetScaling {
  Eigen::Vector2d mean;
  Eigen::Vector2d scale;
};

TargetScaling target_scaling(const Columns& c) {
  TargetScaling ts;
  ts.mean = c.targets.rowwise().mean();
  const MatrixXd centered = c.targets.colwise() - ts.mean;
  const double denom = static_cast<double>(std::max<Eigen::Index>(1, centered.cols() - 1));
  ts.scale = (centered.array().square().rowwise().sum() / denom).sqrt().max(kScaleFloor);
  return ts;
}

Columns standardized(Columns c, const TargetScaling& ts) {
  c.targets = (c.targets.colwise() - ts.mean).array().colwise() / ts.scale.array();
  return c;
}

MlpModel unscaled(MlpModel model, const TargetScaling& ts) {
  auto& out = model.layers[2];
  out.weights = ts.scale.asDiagonal() * out.weights;
  out.biases = ts.scale.cwiseProduct(out.biases) + ts.mean;
  return model;
}

MlpModel initial_model(std::mt19937_64& rng) {
  MlpModel model = MlpModel::zeros();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const double limit = std::sqrt(3.0 / kLayerWidths[l]);
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto& w = model.layers[l].weights;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
    }
  }
  return model;
}

void check_finite(double loss, int epoch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorKind::NonFiniteLoss,
                "train: loss became non-finite at epoch " + std::to_string(epoch + 1));
  }
}

// Splits indices into (train, validation) with a seeded shuffle.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split(std::size_t n, double fraction,
                                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  return {tr, val};
}

// Learning rate decays along a half cosine from cfg.learning_rate to zero
// over the whole run.
struct AdamState {
  VectorXd m, v;
  long step = 0;
  long total_steps = 1;
};

void adam_epoch(MlpModel& model, VectorXd& params, AdamState& state, const Columns& train_cols,
                const TrainConfig& cfg, std::mt19937_64& rng) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const auto n = static_cast<std::size_t>(train_cols.inputs.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  MatrixXd xb(kNetInputs, static_cast<Eigen::Index>(batch));
  MatrixXd tb(kNetOutputs, static_cast<Eigen::Index>(batch));
  for (std::size_t at = 0; at < n; at += batch) {
    const auto len = static_cast<Eigen::Index>(std::min(batch, n - at));
    xb.resize(kNetInputs, len);
    tb.resize(kNetOutputs, len);
    for (Eigen::Index i = 0; i < len; ++i) {
      const auto src = static_cast<Eigen::Index>(order[at + static_cast<std::size_t>(i)]);
      xb.col(i) = train_cols.inputs.col(src);
      tb.col(i) = train_cols.targets.col(src);
    }
    const BatchPass pass = forward_batch(model, xb);
    const VectorXd g = gradient_batch(model, pass, tb);

    ++state.step;
    state.m = kBeta1 * state.m + (1.0 - kBeta1) * g;
    state.v = kBeta2 * state.v + (1.0 - kBeta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    const double progress = static_cast<double>(state.step - 1) / static_cast<double>(state.total_steps);
    const double lr = cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, progress)));
    params.array() -= lr * (state.m.array() / c1) /
                      ((state.v.array() / c2).sqrt() + kEps);
    unflatten(params, model);
  }
}

// Jacobian of the stacked residual vector (y0_0, y1_0, y0_1, ...) with
// respect to the flat parameters, for a batch.
MatrixXd parameter_jacobian(const MlpModel& model, const BatchPass& pass) {
  const Eigen::Index n = pass.z.cols();
  MatrixXd jac(kNetOutputs * n, static_cast<Eigen::Index>(model.parameter_count()));
  const Eigen::Index w0 = model.layers[0].weights.size();
  const Eigen::Index b0 = model.layers[0].biases.size();
  const Eigen::Index w1 = model.layers[1].weights.size();
  const Eigen::Index b1 = model.layers[1].biases.size();
  const Eigen::Index w2 = model.layers[2].weights.size();
  const Eigen::Index n1 = model.layers[0].biases.size();
  const Eigen::Index n2 = model.layers[1].biases.size();

  for (Eigen::Index s = 0; s < n; ++s) {
    const VectorXd dh2 = 1.0 - pass.h2.col(s).array().square();
    const VectorXd dh1 = 1.0 - pass.h1.col(s).array().square();
    for (int k = 0; k < kNetOutputs; ++k) {
      auto row = jac.row(kNetOutputs * s + k);
      row.setZero();
      const VectorXd d2 = model.layers[2].weights.row(k).transpose().cwiseProduct(dh2);
      const VectorXd d1 = (model.layers[1].weights.transpose() * d2).cwiseProduct(dh1);
      // Column-major weight storage: W(r, c) lives at r + c * rows.
      for (Eigen::Index c = 0; c < kNetInputs; ++c) {
        row.segment(c * n1, n1) = d1 * pass.z(c, s);
      }
      row.segment(w0, b0) = d1;
      for (Eigen::Index c = 0; c < n1; ++c) {
        row.segment(w0 + b0 + c * n2, n2) = d2 * pass.h1(c, s);
      }
      row.segment(w0 + b0 + w1, b1) = d2;
      for (Eigen::Index c = 0; c < n2; ++c) {
        row(w0 + b0 + w1 + b1 + c * kNetOutputs + k) = pass.h2(c, s);
      }
      row(w0 + b0 + w1 + b1 + w2 + k) = 1.0;
    }
  }
  return jac;
}

// One damped Gauss-Newton step over the full training split.
void levenberg_marquardt_epoch(MlpModel& model, VectorXd& params, double& damping,
                               const Columns& train_cols) {
  constexpr Eigen::Index kChunk = 256;
  const auto p = static_cast<Eigen::Index>(params.size());
  MatrixXd normal = MatrixXd::Zero(p, p);
  VectorXd grad = VectorXd::Zero(p);
  for (Eigen::Index at = 0; at < train_cols.inputs.cols(); at += kChunk) {
    const Eigen::Index len = std::min(kChunk, train_cols.inputs.cols() - at);
    const BatchPass pass = forward_batch(model, train_cols.inputs.middleCols(at, len));
    const MatrixXd jac = parameter_jacobian(model, pass);
    const MatrixXd err = pass.y - train_cols.targets.middleCols(at, len);
    const Eigen::Map<const VectorXd> r(err.data(), err.size());
    normal.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
    grad.noalias() += jac.transpose() * r;
  }
  normal = normal.selfadjointView<Eigen::Lower>();

  const double before = mse(model, train_cols);
  const VectorXd diag = normal.diagonal().cwiseMax(1e-12);
  MlpModel trial = model;
  for (int attempt = 0; attempt < 12; ++attempt) {
    MatrixXd system = normal;
    system.diagonal() += damping * diag;
    const VectorXd delta = system.ldlt().solve(-grad);
    const VectorXd candidate = params + delta;
    unflatten(candidate, trial);
    const double after = mse(trial, train_cols);
    if (std::isfinite(after) && after < before) {
      params = candidate;
      model = trial;
      damping = std::max(damping / 3.0, 1e-12);
      return;
    }
    damping = std::min(damping * 4.0, 1e12);
  }
}

}  // namespace

MlpModel MlpModel::zeros() {
  MlpModel model;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    model.layers[l].weights = MatrixXd::Zero(kLayerWidths[l + 1], kLayerWidths[l]);
    model.layers[l].biases = VectorXd::Zero(kLayerWidths[l + 1]);
  }
  return model;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.biases.size());
  }
  return n;
}

void MlpModel::validate() const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weights.rows() != kLayerWidths[l + 1] || layer.weights.cols() != kLayerWidths[l] ||
        layer.biases.size() != kLayerWidths[l + 1]) {
      throw Error(ErrorKind::InvalidConfiguration,
                  "model: layer " + std::to_string(l) + " has the wrong shape");
    }
    if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
      throw Error(ErrorKind::InvalidConfiguration,
                  "model: layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
  if (!input_mean.allFinite() || !input_scale.allFinite() || (input_scale.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidConfiguration, "model: input normalization must be finite, scale > 0");
  }
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorKind::InvalidConfiguration, "train: " + what);
  };
  if (epochs < 1) bad("epochs must be >= 1");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    bad("validation_fraction must lie in (0, 1)");
  }
}

Vector5 network_input(const State& s, const ControlInput& u) {
  const Vector2 bv = body_velocity(s);
  Vector5 in;
  in << bv(0), bv(1), s.theta(), u.u1(), u.u2();
  return in;
}

Vector2 nn_forward(const MlpModel& model, const Vector5& input) {
  const Vector5 z = (input - model.input_mean).cwiseQuotient(model.input_scale);
  const VectorXd h1 = (model.layers[0].weights * z + model.layers[0].biases).array().tanh();
  const VectorXd h2 = (model.layers[1].weights * h1 + model.layers[1].biases).array().tanh();
  return model.layers[2].weights * h2 + model.layers[2].biases;
}

Matrix25 nn_input_jacobian(const MlpModel& model, const Vector5& input) {
  const Vector5 z = (input - model.input_mean).cwiseQuotient(model.input_scale);
  const VectorXd h1 = (model.layers[0].weights * z + model.layers[0].biases).array().tanh();
  const VectorXd h2 = (model.layers[1].weights * h1 + model.layers[1].biases).array().tanh();
  const MatrixXd d1 = (1.0 - h1.array().square()).matrix().asDiagonal() * model.layers[0].weights;
  const MatrixXd d2 = (1.0 - h2.array().square()).matrix().asDiagonal() * model.layers[1].weights;
  const MatrixXd dz = model.layers[2].weights * d2 * d1;
  return dz * model.input_scale.cwiseInverse().asDiagonal();
}

double mean_squared_error(const MlpModel& model, std::span<const Sample> data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return mse(model, gather(data, idx));
}

std::pair<MlpModel, TrainReport> train(std::span<const Sample> dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.size() < 2) {
    throw Error(ErrorKind::EmptyDataset, "train: need at least 2 samples, got " +
                                             std::to_string(dataset.size()));
  }

  std::mt19937_64 rng(cfg.seed);
  auto [train_idx, val_idx] = split(dataset.size(), cfg.validation_fraction, rng);
  Columns train_cols = gather(dataset, train_idx);
  Columns val_cols = gather(dataset, val_idx);
  const TargetScaling ts = target_scaling(train_cols);
  Columns fit_cols = standardized(train_cols, ts);

  MlpModel model = initial_model(rng);
  model.input_mean = train_cols.inputs.rowwise().mean();
  const MatrixXd centered = train_cols.inputs.colwise() - model.input_mean;
  const double denom = static_cast<double>(std::max<Eigen::Index>(1, centered.cols() - 1));
  model.input_scale = (centered.array().square().rowwise().sum() / denom).sqrt().max(kScaleFloor);

  VectorXd params = flatten(model);
  const auto batches = (train_cols.inputs.cols() + cfg.batch_size - 1) / cfg.batch_size;
  AdamState adam{VectorXd::Zero(params.size()), VectorXd::Zero(params.size()), 0,
                 std::max<long>(1, static_cast<long>(batches) * cfg.epochs)};
  double damping = 1e-3;

  TrainReport report;
  report.train_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  report.val_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.resample_validation_each_epoch && epoch > 0) {
      // Normalization stays fixed at the first split's statistics.
      std::tie(train_idx, val_idx) = split(dataset.size(), cfg.validation_fraction, rng);
      train_cols = gather(dataset, train_idx);
      val_cols = gather(dataset, val_idx);
      fit_cols = standardized(train_cols, ts);
    }
    if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
      adam_epoch(model, params, adam, fit_cols, cfg, rng);
    } else {
      levenberg_marquardt_epoch(model, params, damping, fit_cols);
    }
    const MlpModel fitted = unscaled(model, ts);
    const double train_loss = mse(fitted, train_cols);
    const double val_loss = mse(fitted, val_cols);
    check_finite(train_loss, epoch);
    check_finite(val_loss, epoch);
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
  }
  report.final_val_loss = report.val_loss.back();
  return {unscaled(model, ts), report};
}

StateSpace updated_state_space(const StateSpace& ss, const MlpModel& model, const State& s0,
                               const ControlInput& u0, const PlantConfig& cfg) {
  (void)cfg;
  const Matrix25 jac = nn_input_jacobian(model, network_input(s0, u0));

  // Chain rule through (vx, vy, theta) -> (bvx, bvy, theta).
  const double c = std::cos(s0.theta());
  const double sn = std::sin(s0.theta());
  const Vector2 bv = body_velocity(s0);
  Eigen::Matrix<double, 3, 6> feature_by_state = Eigen::Matrix<double, 3, 6>::Zero();
  feature_by_state(0, 1) = c;
  feature_by_state(0, 3) = sn;
  feature_by_state(0, 4) = bv(1);   // d bvx / d theta = -sin vx + cos vy
  feature_by_state(1, 1) = -sn;
  feature_by_state(1, 3) = c;
  feature_by_state(1, 4) = -bv(0);  // d bvy / d theta = -cos vx - sin vy
  feature_by_state(2, 4) = 1.0;

  const Eigen::Matrix<double, 2, 6> d_state = jac.leftCols<3>() * feature_by_state;
  const Eigen::Matrix2d d_input = jac.rightCols<2>();

  StateSpace out = ss;
  out.a_matrix.row(1) += d_state.row(0);
  out.a_matrix.row(3) += d_state.row(1);
  out.b_matrix.row(1) += d_input.row(0);
  out.b_matrix.row(3) += d_input.row(1);
  return out;
}

nlohmann::json to_json(const MlpModel& model) {
  auto matrix_rows = [](const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  auto vec = [](const auto& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };

  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["activation"] = "tanh";
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    j["layers"].push_back({{"shape", {layer.weights.rows(), layer.weights.cols()}},
                           {"weights", matrix_rows(layer.weights)},
                           {"biases", vec(layer.biases)}});
  }
  j["input_mean"] = vec(model.input_mean);
  j["input_scale"] = vec(model.input_scale);
  return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& what) -> Error {
    return Error(ErrorKind::InvalidConfiguration, "model: " + what);
  };
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) throw bad("unsupported format_version");
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != 3) throw bad("expected 3 layers");

    MlpModel model = MlpModel::zeros();
    for (std::size_t l = 0; l < 3; ++l) {
      const auto& w = layers[l].at("weights");
      const auto& b = layers[l].at("biases");
      auto& layer = model.layers[l];
      if (w.size() != static_cast<std::size_t>(layer.weights.rows()) ||
          b.size() != static_cast<std::size_t>(layer.biases.size())) {
        throw bad("layer " + std::to_string(l) + " has the wrong shape");
      }
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        const auto& row = w[static_cast<std::size_t>(r)];
        if (row.size() != static_cast<std::size_t>(layer.weights.cols())) {
          throw bad("layer " + std::to_string(l) + " has the wrong shape");
        }
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
          layer.weights(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        layer.biases(r) = b[static_cast<std::size_t>(r)].get<double>();
      }
    }
    const auto& mean = j.at("input_mean");
    const auto& scale = j.at("input_scale");
    if (mean.size() != 5 || scale.size() != 5) throw bad("normalization vectors must have 5 entries");
    for (int i = 0; i < 5; ++i) {
      model.input_mean(i) = mean[static_cast<std::size_t>(i)].get<double>();
      model.input_scale(i) = scale[static_cast<std::size_t>(i)].get<double>();
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
}

void write_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << std::setprecision(17) << to_json(model).dump(2) << '\n';
}

MlpModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open model file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfiguration, path + ": " + e.what());
  }
  return model_from_json(j);
}

void write_train_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "epoch,train_loss,val_loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.train_loss.size(); ++i) {
    out << i + 1 << ',' << report.train_loss[i] << ',' << report.val_loss[i] << '\n';
  }
}

}  // namespace roa
