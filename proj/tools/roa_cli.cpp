#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roa/error.hpp"
#include "roa/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roa;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "run";
  std::vector<std::string> overrides;
};

struct Context {
  ExperimentConfig cfg;
  std::string hash;
  fs::path out;

  std::string path(const std::string& name) const { return (out / name).string(); }
};

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  f << j.dump(2) << '\n';
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  f << text;
}

Context prepare(const Globals& g) {
  json raw = g.config_path.empty() ? json::object() : load_config_json(g.config_path);
  for (const auto& assignment : g.overrides) apply_override(raw, assignment);
  if (g.seed) raw["master_seed"] = *g.seed;

  Context ctx{config_from_json(raw), "", g.out_dir};
  ctx.hash = config_hash(ctx.cfg);
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + ctx.out.string() + ": " + ec.message());
  json snapshot = to_json(ctx.cfg);
  snapshot["config_hash"] = ctx.hash;
  write_json(snapshot, ctx.path("config.json"));
  return ctx;
}

void synth_lqr(const Context& ctx) {
  const LqrSolution sol = nominal_controller(ctx.cfg).solution;
  json j = to_json(sol);
  j["config_hash"] = ctx.hash;
  write_json(j, ctx.path("lqr.json"));
  std::cout << j.dump(2) << '\n';
}

void gen_data(const Context& ctx) {
  const GeneratedData data = generate_data(ctx.cfg);
  const fs::path traj_dir = ctx.out / "trajectories";
  fs::create_directories(traj_dir);
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%03zu.csv", i);
    write_trajectory_csv(data.trajectories[i], (traj_dir / name).string());
  }
  write_dataset_csv(data.samples, ctx.path("dataset.csv"));
  std::cout << "stable " << data.stable_count << ", unstable " << data.total_count - data.stable_count
            << " of " << data.total_count << "; dataset " << data.samples.size() << " rows from "
            << data.trajectories.size() << " trajectories\n";
}

void train_model(const Context& ctx, std::string dataset_path) {
  if (dataset_path.empty()) dataset_path = ctx.path("dataset.csv");
  const auto data = read_dataset_csv(dataset_path);
  const auto [model, report] = train(data, ctx.cfg.train_config());
  json j = to_json(model);
  j["config_hash"] = ctx.hash;
  write_json(j, ctx.path("model.json"));
  write_train_report_csv(report, ctx.path("train_loss.csv"));
  std::cout << "trained on " << data.size() << " samples; final validation MSE " << std::scientific
            << std::setprecision(4) << report.final_val_loss << '\n';
}

void export_roa(const Context& ctx, const RoaResult& result) {
  const std::string base = std::string("roa_") + (result.method == RoaMethod::GraphicalNominal ? "nominal"
                                                  : result.method == RoaMethod::GraphicalLearned ? "learned"
                                                                                                 : "lyapunov");
  write_roa_result(result, ctx.path(base + ".json"));
  write_polygon_csv(result.polygon, ctx.path(base + "_polygon.csv"));
  if (result.level_set) {
    write_svg(ctx.path(base + ".svg"), {}, nullptr, result.polygon.vertices);
    std::cout << base << ": c* " << result.level_set->c_star << ", slice area " << result.area()
              << " m^2\n";
  } else {
    write_svg(ctx.path(base + ".svg"), result.points, &result.polygon, {});
    std::cout << base << ": " << result.stable_count() << "/" << result.points.size()
              << " stable, hull area " << std::fixed << std::setprecision(3) << result.area()
              << " m^2\n";
  }
}

RoaResult compute_roa(const Context& ctx, const std::string& mode, std::string model_path) {
  if (mode == "lyapunov") return lyapunov_roa(ctx.cfg);
  const PointSet points = build_point_set(ctx.cfg);
  if (mode == "nominal") return graphical_roa_nominal(ctx.cfg, points);
  if (model_path.empty()) model_path = ctx.path("model.json");
  if (!fs::exists(model_path)) throw Error(ErrorKind::MissingInput, "learned mode needs a model: " + model_path);
  return graphical_roa_learned(ctx.cfg, points, read_model(model_path));
}

RoaResult load_result(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingInput, "missing result file " + path);
  return read_roa_result(path);
}

void report(const Context& ctx, const ComparisonReport& rep) {
  write_text(rep.to_csv(), ctx.path("comparison.csv"));
  write_text(rep.to_text(), ctx.path("comparison.txt"));
  std::cout << rep.to_text();
}

void simulate(const Context& ctx, const std::vector<double>& x0, const std::string& model_path) {
  Vector6 v = Vector6::Zero();
  if (x0.size() == 2) {
    v(0) = x0[0];
    v(2) = x0[1];
  } else if (x0.size() == 6) {
    for (int i = 0; i < 6; ++i) v(i) = x0[static_cast<std::size_t>(i)];
  } else {
    throw Error(ErrorKind::InvalidConfiguration, "--x0 takes 2 (x, y) or 6 state values");
  }
  const Controller ctl =
      model_path.empty() ? nominal_controller(ctx.cfg) : learned_controller(ctx.cfg, read_model(model_path));
  const Trajectory traj = run_closed_loop(State(v), ctl, ctx.cfg.plant, ctx.cfg.sim);
  write_trajectory_csv(traj, ctx.path("trajectory.csv"));
  std::cout << to_string(traj.label) << " after " << traj.times.back() << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-of-attraction estimation for a planar quadrotor under LQR control"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--set", g.overrides, "override a config field, e.g. sim.horizon=60");

  auto* synth = app.add_subcommand("synth-lqr", "solve the Riccati equation and print K and S");

  auto* gen = app.add_subcommand("gen-data", "sweep initial points and write the training dataset");

  std::string dataset;
  auto* trn = app.add_subcommand("train", "fit the disturbance network");
  trn->add_option("--dataset", dataset, "dataset CSV (default OUT/dataset.csv)");

  std::string mode, model;
  auto* roa_cmd = app.add_subcommand("roa", "estimate the region of attraction");
  roa_cmd->add_option("--mode", mode, "estimation method")
      ->required()
      ->check(CLI::IsMember({"nominal", "learned", "lyapunov"}));
  roa_cmd->add_option("--model", model, "trained model JSON (learned mode, default OUT/model.json)");

  std::string nominal_path, learned_path, lyapunov_path;
  auto* cmp = app.add_subcommand("compare", "tabulate the three ROA results");
  cmp->add_option("--nominal", nominal_path, "default OUT/roa_nominal.json");
  cmp->add_option("--learned", learned_path, "default OUT/roa_learned.json");
  cmp->add_option("--lyapunov", lyapunov_path, "default OUT/roa_lyapunov.json");

  std::vector<double> x0;
  std::string sim_model;
  auto* sim = app.add_subcommand("simulate", "run one closed-loop trajectory");
  sim->add_option("--x0", x0, "x,y or the full state x,vx,y,vy,theta,omega")->delimiter(',')->required();
  sim->add_option("--model", sim_model, "use the controller updated with this model");

  auto* pipe = app.add_subcommand("pipeline", "run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Context ctx = prepare(g);
    std::cout << "config hash " << ctx.hash << ", output " << ctx.out.string() << '\n';
    if (*synth) {
      synth_lqr(ctx);
    } else if (*gen) {
      gen_data(ctx);
    } else if (*trn) {
      train_model(ctx, dataset);
    } else if (*roa_cmd) {
      export_roa(ctx, compute_roa(ctx, mode, model));
    } else if (*cmp) {
      const auto pick = [&](const std::string& p, const char* name) {
        return load_result(p.empty() ? ctx.path(name) : p);
      };
      report(ctx, compare(pick(nominal_path, "roa_nominal.json"), pick(learned_path, "roa_learned.json"),
                          pick(lyapunov_path, "roa_lyapunov.json")));
    } else if (*sim) {
      simulate(ctx, x0, sim_model);
    } else if (*pipe) {
      synth_lqr(ctx);
      gen_data(ctx);
      train_model(ctx, "");
      const RoaResult nominal = compute_roa(ctx, "nominal", "");
      export_roa(ctx, nominal);
      const RoaResult learned = compute_roa(ctx, "learned", "");
      export_roa(ctx, learned);
      const RoaResult lyapunov = compute_roa(ctx, "lyapunov", "");
      export_roa(ctx, lyapunov);
      report(ctx, compare(nominal, learned, lyapunov));
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
