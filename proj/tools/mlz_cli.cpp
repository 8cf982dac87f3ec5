#include <CLI11.hpp>
#include <fstream>
#include <future>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mlz/scenario.hpp"

namespace {

using mlz::harness::Format;
using mlz::harness::Json;
using mlz::harness::Scenario;
using mlz::harness::TaskKind;

Json parse_json_or_file(const std::string& arg) {
  // inline JSON first, then a file path
  if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) {
    try {
      return Json::parse(arg);
    } catch (const nlohmann::json::exception& e) {
      mlz::fail(mlz::errc::validation, std::string("cannot parse inline JSON: ") + e.what());
    }
  }
  std::ifstream file(arg);
  mlz::require(file.good(), mlz::errc::io, "cannot open " + arg);
  try {
    return Json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    mlz::fail(mlz::errc::validation, "cannot parse " + arg + ": " + e.what());
  }
}

struct GlobalOptions {
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 0;
  int threads = 0;

  Format parsed_format() const {
    if (format == "json") return Format::Json;
    if (format == "csv") return Format::Csv;
    mlz::fail(mlz::errc::unsupported_format, "unsupported format '" + format + "'");
  }
};

int finish(const mlz::harness::ScenarioReport& report, const GlobalOptions& global) {
  mlz::harness::write_report(report, {global.out, global.parsed_format()});
  // exit 3 when any task reports a tolerance breach
  for (const auto& [task, result] : report.doc().at("results").items()) {
    (void)task;
    if (result.contains("ok") && result["ok"].is_boolean() && !result["ok"].get<bool>()) return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistate Landau-Zener models: commuting families, spectra, propagation"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--out", global.out, "output path (default: stdout)");
  app.add_option("--format", global.format, "output format: json | csv");
  app.add_option("--seed", global.seed, "seed for verification u-samples");
  app.add_option("--threads", global.threads, "worker threads (0 = hardware)");

  std::string model_arg;
  std::vector<std::string> config_paths;
  double horizon = 200.0, rel_tol = 1e-10, abs_tol = 1e-12;
  bool no_strip = false, extrapolate = false, do_degauge = false, emit_family = false;
  std::vector<double> horizons;
  double u_min = -3.0, u_max = 3.0;
  int points = 61, states = 5;
  std::vector<int> cutoffs;

  auto add_model_option = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_arg, "model spec: inline JSON or a path")->required();
  };
  auto add_propagation_options = [&](CLI::App* cmd) {
    cmd->add_option("--horizon", horizon, "integrate from -T to +T");
    cmd->add_option("--rel-tol", rel_tol, "relative tolerance");
    cmd->add_option("--abs-tol", abs_tol, "absolute tolerance");
    cmd->add_flag("--no-phase-stripping", no_strip, "integrate raw amplitudes");
  };

  CLI::App* cmd_model = app.add_subcommand("model", "build a model pencil and emit it as JSON");
  add_model_option(cmd_model);
  cmd_model->add_flag("--degauge", do_degauge, "strip coupling phases (bordered models)");
  cmd_model->add_flag("--family", emit_family,
                      "also emit the commuting family (equal slope / bow-tie / gbt)");

  CLI::App* cmd_verify =
      app.add_subcommand("verify", "verify commuting-family structure for a model");
  add_model_option(cmd_verify);

  CLI::App* cmd_spectrum = app.add_subcommand("spectrum", "secular roots over a u grid");
  add_model_option(cmd_spectrum);
  cmd_spectrum->add_option("--u-min", u_min, "grid start");
  cmd_spectrum->add_option("--u-max", u_max, "grid end");
  cmd_spectrum->add_option("--points", points, "grid points");

  CLI::App* cmd_propagate =
      app.add_subcommand("propagate", "numeric asymptotic transition matrix");
  add_model_option(cmd_propagate);
  add_propagation_options(cmd_propagate);
  cmd_propagate->add_flag("--extrapolate", extrapolate, "Richardson-extrapolate in 1/T");
  cmd_propagate->add_option("--horizons", horizons, "horizons for extrapolation");

  CLI::App* cmd_compare =
      app.add_subcommand("compare", "closed-form vs numeric transition probabilities");
  add_model_option(cmd_compare);
  add_propagation_options(cmd_compare);
  cmd_compare->add_option("--states", states, "number of low states probed");

  CLI::App* cmd_convergence = app.add_subcommand("convergence", "cutoff convergence study");
  add_model_option(cmd_convergence);
  add_propagation_options(cmd_convergence);
  cmd_convergence->add_option("--cutoffs", cutoffs, "increasing truncation cutoffs");

  CLI::App* cmd_report = app.add_subcommand("report", "run scenarios from config files");
  cmd_report->add_option("--config", config_paths, "scenario JSON (repeatable; batch runs concurrently)")
      ->required();

  // allow the global flags to appear after the subcommand
  for (CLI::App* sub : {cmd_model, cmd_verify, cmd_spectrum, cmd_propagate, cmd_compare,
                        cmd_convergence, cmd_report})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario scenario;
    scenario.seed = global.seed;
    scenario.propagation.horizon = horizon;
    scenario.propagation.rel_tol = rel_tol;
    scenario.propagation.abs_tol = abs_tol;
    scenario.propagation.phase_stripping = !no_strip;
    scenario.propagation.threads = global.threads;
    scenario.spectrum = {u_min, u_max, points};
    scenario.extrapolate = extrapolate;
    scenario.horizons = horizons;
    scenario.compare_states = states;
    scenario.convergence.cutoffs = cutoffs;

    if (cmd_model->parsed()) {
      const auto spec = mlz::harness::model_spec_from_json(parse_json_or_file(model_arg));
      const mlz::MatrixPencil pencil = mlz::models::build_pencil(spec);
      Json out;
      out["model"] = mlz::harness::model_spec_to_json(spec);
      out["pencil"] = mlz::harness::pencil_to_json(pencil);
      if (do_degauge) {
        const auto [real_pencil, phases] = mlz::models::degauge(pencil, spec.kind);
        out["degauged"] = mlz::harness::pencil_to_json(real_pencil);
        Json theta = Json::array();
        for (Eigen::Index i = 0; i < phases.theta.size(); ++i) theta.push_back(phases.theta[i]);
        out["phases"] = std::move(theta);
      }
      if (emit_family) {
        using mlz::models::ModelKind;
        if (spec.kind == ModelKind::EqualSlope) {
          const auto embedding = mlz::commutant::embed_equal_slope(spec.p, spec.a);
          const auto& params = embedding.params_per_root.front();
          out["family"] = mlz::harness::family_to_json(
              mlz::commutant::maximal_linear_family(params));
          auto vec = [](const Eigen::VectorXd& v) {
            Json arr = Json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
            return arr;
          };
          out["family"]["params"] = {
              {"gamma", vec(params.gamma)}, {"xi", vec(params.xi)}, {"x", params.x}};
        } else if (spec.kind == ModelKind::BowTie) {
          out["family"] =
              mlz::harness::family_to_json(mlz::commutant::bowtie_quadratic_family(spec.p, spec.r));
        } else if (spec.kind == ModelKind::GeneralizedBowTie) {
          out["family"] = mlz::harness::family_to_json(
              mlz::commutant::gbt_minimal_family(spec.p, spec.r, spec.epsilon));
        } else {
          mlz::fail(mlz::errc::validation,
                    "--family applies to equal slope, bow-tie, and generalized bow-tie models");
        }
      }
      const std::string text = out.dump(2) + "\n";
      if (global.out.empty()) {
        std::cout << text;
      } else {
        std::ofstream file(global.out, std::ios::binary);
        mlz::require(file.good(), mlz::errc::io, "cannot open " + global.out);
        file << text;
      }
      return 0;
    }

    if (cmd_report->parsed()) {
      std::vector<Scenario> scenarios;
      for (const auto& path : config_paths) {
        Scenario s = mlz::harness::scenario_from_json(parse_json_or_file(path));
        if (global.threads > 0) s.propagation.threads = global.threads;
        if (!global.out.empty()) s.output.path = global.out;
        if (app.count("--format") > 0) s.output.format = global.parsed_format();
        s.validate();
        scenarios.push_back(std::move(s));
      }
      if (scenarios.size() > 1) {
        mlz::require(global.out.empty(), mlz::errc::validation,
                     "--out conflicts with a batch of configs; set per-scenario output paths");
        for (const auto& s : scenarios)
          mlz::require(!s.output.path.empty(), mlz::errc::validation,
                       "batch reports need per-scenario output paths");
      }
      // scenarios in a batch run concurrently; reports are written per config
      std::vector<std::future<mlz::harness::ScenarioReport>> futures;
      for (const auto& s : scenarios)
        futures.push_back(std::async(scenarios.size() > 1 ? std::launch::async
                                                          : std::launch::deferred,
                                     [&s] { return mlz::harness::run_scenario(s); }));
      int exit_code = 0;
      for (size_t i = 0; i < scenarios.size(); ++i) {
        const auto report = futures[i].get();
        mlz::harness::write_report(report, scenarios[i].output);
        for (const auto& [task, result] : report.doc().at("results").items()) {
          (void)task;
          if (result.contains("ok") && result["ok"].is_boolean() && !result["ok"].get<bool>())
            exit_code = 3;
        }
      }
      return exit_code;
    }

    scenario.model = mlz::harness::model_spec_from_json(parse_json_or_file(model_arg));
    if (cmd_verify->parsed()) scenario.tasks = {TaskKind::VerifyCommutant};
    if (cmd_spectrum->parsed()) scenario.tasks = {TaskKind::Spectrum};
    if (cmd_propagate->parsed()) scenario.tasks = {TaskKind::Propagate};
    if (cmd_compare->parsed()) scenario.tasks = {TaskKind::CompareClosedForm};
    if (cmd_convergence->parsed()) scenario.tasks = {TaskKind::ConvergenceStudy};
    return finish(mlz::harness::run_scenario(scenario), global);
  } catch (const mlz::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mlz::harness::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
