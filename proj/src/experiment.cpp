#include "roa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "roa/error.hpp"

namespace roa {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidConfiguration, "config." + path + ": " + what);
}

// Typed field access with dotted-path diagnostics.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void known(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : node_.items()) {
      if (!allowed.contains(item.key())) config_error(at(item.key()), "unknown field");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  Reader child(const char* key) const { return Reader(node_.at(key), at(key)); }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) config_error(at(key), "expected a number");
    out = v.get<double>();
  }

  template <typename Int>
  void count(const char* key, Int& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      config_error(at(key), "expected a non-negative integer");
    }
    out = static_cast<Int>(v.get<unsigned long long>());
  }

  void integer(const char* key, int& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) config_error(at(key), "expected an integer");
    out = v.get<int>();
  }

  void flag(const char* key, bool& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_boolean()) config_error(at(key), "expected true or false");
    out = v.get<bool>();
  }

  template <int N>
  void vector(const char* key, Eigen::Matrix<double, N, 1>& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      config_error(at(key), "expected an array of " + std::to_string(N) + " numbers");
    }
    for (int i = 0; i < N; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        config_error(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
  }

  template <typename Enum>
  void choice(const char* key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> options) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    std::string names;
    if (v.is_string()) {
      for (const auto& [name, value] : options) {
        if (v.get<std::string>() == name) {
          out = value;
          return;
        }
      }
    }
    for (const auto& [name, value] : options) names += std::string(names.empty() ? "" : "|") + name;
    config_error(at(key), "expected one of " + names);
  }

 private:
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
};

const std::initializer_list<std::pair<const char*, TrigMode>> kTrigModes{
    {"exact", TrigMode::Exact}, {"taylor3", TrigMode::Taylor3}};
const std::initializer_list<std::pair<const char*, Integrator>> kIntegrators{
    {"rk4", Integrator::RK4}, {"euler", Integrator::Euler}};
const std::initializer_list<std::pair<const char*, TrainConfig::Optimizer>> kOptimizers{
    {"adam", TrainConfig::Optimizer::Adam},
    {"levenberg_marquardt", TrainConfig::Optimizer::LevenbergMarquardt}};

template <typename Enum>
std::string name_of(Enum value, std::initializer_list<std::pair<const char*, Enum>> options) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "unknown";
}

template <typename Vec>
json array_of(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Vector6 corner_state(double range) { return State::at_position(range, range).vector(); }

}  // namespace

void ExperimentConfig::validate() const {
  plant.validate();
  weights.validate();
  sim.validate();
  train.validate();
  if (!(position_range > 0.0) || !std::isfinite(position_range)) {
    config_error("position_range", "must be > 0");
  }
  if (lyapunov.n_samples == 0) config_error("lyapunov.n_samples", "must be > 0");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  const Reader root(j, "");
  root.known({"plant", "weights", "sim", "train", "lyapunov", "n_initial_points", "n_refine_points",
              "n_dataset_trajectories", "position_range", "master_seed",
              "recompute_gain_after_update", "disturbance_aware_equilibrium"});

  if (root.has("plant")) {
    const Reader r = root.child("plant");
    r.known({"mass", "arm", "inertia", "gravity", "delta_mass", "rotor_drag", "fuselage_drag",
             "trig_mode", "clamp_thrust"});
    r.number("mass", cfg.plant.mass);
    r.number("arm", cfg.plant.arm);
    r.number("inertia", cfg.plant.inertia);
    r.number("gravity", cfg.plant.gravity);
    r.number("delta_mass", cfg.plant.delta_mass);
    r.vector<2>("rotor_drag", cfg.plant.rotor_drag);
    r.number("fuselage_drag", cfg.plant.fuselage_drag);
    r.choice("trig_mode", cfg.plant.trig_mode, kTrigModes);
    r.flag("clamp_thrust", cfg.plant.clamp_thrust);
  }
  if (root.has("weights")) {
    const Reader r = root.child("weights");
    r.known({"q_diag", "r_diag"});
    r.vector<6>("q_diag", cfg.weights.q_diag);
    r.vector<2>("r_diag", cfg.weights.r_diag);
  }
  if (root.has("sim")) {
    const Reader r = root.child("sim");
    r.known({"dt", "horizon", "converge_pos_tol", "converge_vel_tol", "converge_att_tol",
             "diverge_radius", "integrator"});
    r.number("dt", cfg.sim.dt);
    r.number("horizon", cfg.sim.horizon);
    r.number("converge_pos_tol", cfg.sim.converge_pos_tol);
    r.number("converge_vel_tol", cfg.sim.converge_vel_tol);
    r.number("converge_att_tol", cfg.sim.converge_att_tol);
    r.number("diverge_radius", cfg.sim.diverge_radius);
    r.choice("integrator", cfg.sim.integrator, kIntegrators);
  }
  if (root.has("train")) {
    const Reader r = root.child("train");
    r.known({"epochs", "batch_size", "learning_rate", "validation_fraction", "resample_validation_each_epoch",
             "optimizer"});
    r.integer("epochs", cfg.train.epochs);
    r.integer("batch_size", cfg.train.batch_size);
    r.number("learning_rate", cfg.train.learning_rate);
    r.number("validation_fraction", cfg.train.validation_fraction);
    r.flag("resample_validation_each_epoch", cfg.train.resample_validation_each_epoch);
    r.choice("optimizer", cfg.train.optimizer, kOptimizers);
  }
  if (root.has("lyapunov")) {
    const Reader r = root.child("lyapunov");
    r.known({"n_samples", "with_disturbance"});
    r.count("n_samples", cfg.lyapunov.n_samples);
    r.flag("with_disturbance", cfg.lyapunov.with_disturbance);
  }
  root.count("n_initial_points", cfg.n_initial_points);
  root.count("n_refine_points", cfg.n_refine_points);
  root.count("n_dataset_trajectories", cfg.n_dataset_trajectories);
  root.number("position_range", cfg.position_range);
  root.count("master_seed", cfg.master_seed);
  root.flag("recompute_gain_after_update", cfg.recompute_gain_after_update);
  root.flag("disturbance_aware_equilibrium", cfg.disturbance_aware_equilibrium);
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["plant"] = {{"mass", cfg.plant.mass},
                {"arm", cfg.plant.arm},
                {"inertia", cfg.plant.inertia},
                {"gravity", cfg.plant.gravity},
                {"delta_mass", cfg.plant.delta_mass},
                {"rotor_drag", array_of(cfg.plant.rotor_drag)},
                {"fuselage_drag", cfg.plant.fuselage_drag},
                {"trig_mode", name_of(cfg.plant.trig_mode, kTrigModes)},
                {"clamp_thrust", cfg.plant.clamp_thrust}};
  j["weights"] = {{"q_diag", array_of(cfg.weights.q_diag)}, {"r_diag", array_of(cfg.weights.r_diag)}};
  j["sim"] = {{"dt", cfg.sim.dt},
              {"horizon", cfg.sim.horizon},
              {"converge_pos_tol", cfg.sim.converge_pos_tol},
              {"converge_vel_tol", cfg.sim.converge_vel_tol},
              {"converge_att_tol", cfg.sim.converge_att_tol},
              {"diverge_radius", cfg.sim.diverge_radius},
              {"integrator", name_of(cfg.sim.integrator, kIntegrators)}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"validation_fraction", cfg.train.validation_fraction},
                {"resample_validation_each_epoch", cfg.train.resample_validation_each_epoch},
                {"optimizer", name_of(cfg.train.optimizer, kOptimizers)}};
  j["lyapunov"] = {{"n_samples", cfg.lyapunov.n_samples},
                   {"with_disturbance", cfg.lyapunov.with_disturbance}};
  j["n_initial_points"] = cfg.n_initial_points;
  j["n_refine_points"] = cfg.n_refine_points;
  j["n_dataset_trajectories"] = cfg.n_dataset_trajectories;
  j["position_range"] = cfg.position_range;
  j["master_seed"] = cfg.master_seed;
  j["recompute_gain_after_update"] = cfg.recompute_gain_after_update;
  j["disturbance_aware_equilibrium"] = cfg.disturbance_aware_equilibrium;
  return j;
}

json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfiguration, "cannot open config file " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::InvalidConfiguration,
                path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  return j;
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(load_config_json(path)); }

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::InvalidConfiguration, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  std::string pointer = "/" + key;
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  try {
    j[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfiguration, "override '" + assignment + "': " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canonical = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const LqrSolution& sol) {
  return {{"k_gain", matrix_rows(sol.k_gain)}, {"s_matrix", matrix_rows(sol.s_matrix)}};
}

Controller nominal_controller(const ExperimentConfig& cfg) {
  return {solve_care(nominal_state_space(cfg.plant), cfg.weights),
          hover_thrust(cfg.plant, cfg.disturbance_aware_equilibrium)};
}

Controller learned_controller(const ExperimentConfig& cfg, const MlpModel& model) {
  Controller ctl = nominal_controller(cfg);
  if (!cfg.recompute_gain_after_update) return ctl;
  const StateSpace updated =
      updated_state_space(nominal_state_space(cfg.plant), model, State::origin(), ctl.equilibrium, cfg.plant);
  ctl.solution = solve_care(updated, cfg.weights);
  return ctl;
}

std::vector<State> PointSet::all() const {
  std::vector<State> out = initial;
  out.insert(out.end(), refinement.begin(), refinement.end());
  return out;
}

std::vector<LabeledPoint> label(std::span<const State> points, std::span<const Trajectory> trajs) {
  std::vector<LabeledPoint> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back({points[i].position(), trajs[i].stable()});
  return out;
}

PointSet build_point_set(const ExperimentConfig& cfg) {
  PointSet set;
  set.initial = sample_initial_states(cfg.n_initial_points, cfg.position_range, cfg.points_seed());
  if (cfg.n_refine_points == 0) return set;

  const auto trajs = sweep(set.initial, nominal_controller(cfg), cfg.plant, cfg.sim, Recording::Endpoints);
  const auto labeled = label(set.initial, trajs);
  set.refinement = refine_boundary(labeled, cfg.n_refine_points, cfg.refine_seed());
  for (State& s : set.refinement) {
    const double r = cfg.position_range;
    s = State::at_position(std::clamp(s.x(), -r, r), std::clamp(s.y(), -r, r));
  }
  return set;
}

GeneratedData generate_data(const ExperimentConfig& cfg) {
  const Controller ctl = nominal_controller(cfg);
  const auto points = sample_initial_states(cfg.n_initial_points, cfg.position_range, cfg.points_seed());
  const auto labels = sweep(points, ctl, cfg.plant, cfg.sim, Recording::Endpoints);

  GeneratedData out;
  out.total_count = points.size();
  std::vector<State> selected;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!labels[i].stable()) continue;
    ++out.stable_count;
    if (selected.size() < cfg.n_dataset_trajectories) selected.push_back(points[i]);
  }
  if (selected.empty()) throw Error(ErrorKind::EmptyOutput, "gen-data: no stable trajectories");
  out.trajectories = sweep(selected, ctl, cfg.plant, cfg.sim, Recording::Full);
  out.samples = extract_training_data(out.trajectories);
  return out;
}

namespace {

RoaResult graphical(const ExperimentConfig& cfg, const PointSet& points, const Controller& ctl,
                    RoaMethod method) {
  const std::vector<State> all = points.all();
  const auto trajs = sweep(all, ctl, cfg.plant, cfg.sim, Recording::Endpoints);
  RoaResult result;
  result.method = method;
  result.points = label(all, trajs);
  result.polygon = graphical_roa(result.points, method);
  result.config_hash = config_hash(cfg);
  result.seed = cfg.master_seed;
  return result;
}

}  // namespace

RoaResult graphical_roa_nominal(const ExperimentConfig& cfg, const PointSet& points) {
  return graphical(cfg, points, nominal_controller(cfg), RoaMethod::GraphicalNominal);
}

RoaResult graphical_roa_learned(const ExperimentConfig& cfg, const PointSet& points,
                                const MlpModel& model) {
  return graphical(cfg, points, learned_controller(cfg, model), RoaMethod::GraphicalLearned);
}

RoaResult lyapunov_roa(const ExperimentConfig& cfg) {
  const LqrSolution sol = solve_care(nominal_state_space(cfg.plant), cfg.weights);

  PlantConfig model = cfg.plant;
  model.trig_mode = TrigMode::Taylor3;
  const bool disturbed = cfg.lyapunov.with_disturbance;
  // The origin must be an equilibrium of whichever vector field is certified.
  const VectorField f = quadrotor_closed_loop(model, sol, hover_thrust(model, disturbed), disturbed);

  CertifyOptions opts;
  opts.n_samples = cfg.lyapunov.n_samples;
  opts.seed = cfg.lyapunov_seed();
  const Vector6 corner = corner_state(cfg.position_range);
  opts.c_hi = lyapunov_value(sol.s_matrix, corner);

  RoaResult result;
  result.method = RoaMethod::LyapunovLevelSet;
  result.level_set = certify_level_set(sol.s_matrix, f, opts);
  result.polygon.vertices = slice_ellipse(sol.s_matrix, result.level_set->c_star);
  result.polygon.area = result.level_set->slice_area;
  result.polygon.method = RoaMethod::LyapunovLevelSet;
  result.config_hash = config_hash(cfg);
  result.seed = cfg.master_seed;
  return result;
}

ComparisonReport compare(const RoaResult& nominal, const RoaResult& learned, const RoaResult& lyapunov) {
  auto expect = [](const RoaResult& r, RoaMethod m) {
    if (r.method != m) {
      throw Error(ErrorKind::InvalidConfiguration, std::string("compare: expected a ") + to_string(m) +
                                                       " result, got " + to_string(r.method));
    }
  };
  expect(nominal, RoaMethod::GraphicalNominal);
  expect(learned, RoaMethod::GraphicalLearned);
  expect(lyapunov, RoaMethod::LyapunovLevelSet);
  if (nominal.config_hash != learned.config_hash || nominal.config_hash != lyapunov.config_hash) {
    throw Error(ErrorKind::InvalidConfiguration,
                "compare: config hashes differ (" + nominal.config_hash + ", " + learned.config_hash +
                    ", " + lyapunov.config_hash + ")");
  }
  if (nominal.points.size() != learned.points.size()) {
    throw Error(ErrorKind::InvalidConfiguration, "compare: graphical runs used different point sets");
  }

  ComparisonReport report;
  report.config_hash = nominal.config_hash;
  report.seed = nominal.seed;
  report.learned_superset = true;
  for (std::size_t i = 0; i < nominal.points.size(); ++i) {
    const auto& a = nominal.points[i];
    const auto& b = learned.points[i];
    if (a.position != b.position) {
      throw Error(ErrorKind::InvalidConfiguration,
                  "compare: graphical runs differ at point " + std::to_string(i));
    }
    if (a.stable && !b.stable) {
      report.learned_superset = false;
      ++report.newly_unstable;
    }
    if (!a.stable && b.stable) ++report.newly_stable;
  }

  report.rows = {
      {"Graphical method with disturbance estimation", learned.area(), learned.stable_count(),
       learned.points.size()},
      {"Graphical method without disturbance estimation", nominal.area(), nominal.stable_count(),
       nominal.points.size()},
      {"Lyapunov analysis (sampled level set)", lyapunov.area(), 0, 0},
  };
  return report;
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "technique,area_m2,stable_points,total_points,config_hash,seed\n";
  for (const auto& row : rows) {
    out << '"' << row.technique << "\"," << row.area << ',';
    if (row.total_count > 0) out << row.stable_count << ',' << row.total_count;
    else out << ',';
    out << ',' << config_hash << ',' << seed << '\n';
  }
  return out.str();
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(50) << "ROA computation technique" << std::right << std::setw(16)
      << "Area (m^2)" << std::setw(16) << "Stable/Total" << '\n';
  out << std::string(82, '-') << '\n';
  for (const auto& row : rows) {
    std::ostringstream counts;
    if (row.total_count > 0) counts << row.stable_count << '/' << row.total_count;
    else counts << '-';
    out << std::left << std::setw(50) << row.technique << std::right << std::setw(16) << std::fixed
        << std::setprecision(3) << row.area << std::setw(16) << counts.str() << '\n';
  }
  out << "config hash " << config_hash << ", seed " << seed << '\n';
  out << "learned stable set contains nominal stable set: " << (learned_superset ? "yes" : "no")
      << " (newly stable " << newly_stable << ", newly unstable " << newly_unstable << ")\n";
  return out.str();
}

}  // namespace roa
