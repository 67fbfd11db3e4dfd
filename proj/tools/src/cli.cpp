#include "tirefit_cli/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <mutex>

#include <spdlog/sinks/base_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "settings.hpp"
#include "tirefit/errors.hpp"
#include "tirefit/version.hpp"

namespace tirefit::cli {

namespace {

// One JSON object per log record on stderr.
class JsonStderrSink : public spdlog::sinks::base_sink<std::mutex> {
 protected:
  void sink_it_(const spdlog::details::log_msg& msg) override {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(msg.time.time_since_epoch());
    json j{{"time_ms", ms.count()},
           {"level", std::string(spdlog::level::to_string_view(msg.level).data(),
                                 spdlog::level::to_string_view(msg.level).size())},
           {"message", std::string(msg.payload.data(), msg.payload.size())}};
    std::fputs((j.dump() + "\n").c_str(), stderr);
  }
  void flush_() override { std::fflush(stderr); }
};

void configure_logging(bool quiet, bool json_logs) {
  spdlog::sink_ptr sink;
  if (json_logs) {
    sink = std::make_shared<JsonStderrSink>();
  } else {
    sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    sink->set_pattern("[%l] %v");
  }
  auto logger = std::make_shared<spdlog::logger>("tirefit", sink);
  logger->set_level(quiet ? spdlog::level::err : spdlog::level::info);
  spdlog::set_default_logger(logger);
}

void report_error(std::ostream& err, std::string_view kind, int code, const std::string& message) {
  err << json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << "\n";
}

// Flag values are layered over the config file only when given.
struct Overlay {
  json& target;

  template <typename T>
  void set(const CLI::Option* opt, const char* key, const T& value) {
    if (opt->count() > 0) target[key] = value;
  }
  template <typename T>
  void set_nested(const CLI::Option* opt, const char* group, const char* key, const T& value) {
    if (opt->count() == 0) return;
    if (!target.contains(group) || !target[group].is_object()) target[group] = json::object();
    target[group][key] = value;
  }
};

json base_settings(const std::string& config_path, const std::string& command) {
  if (config_path.empty()) return json::object();
  return load_config(config_path, command);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magic Formula tire parameter estimation", "tirefit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  bool quiet = false;
  bool json_logs = false;
  app.add_flag("--quiet", quiet, "Only log errors");
  app.add_flag("--json-logs", json_logs, "Log records as JSON lines on stderr");

  std::string config_path;
  std::string out_dir;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON settings; flags override its values")
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "Output directory")->required();
  };

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Telemetry log to per-axle tire datasets");
  std::string log_path, vehicle_path;
  double rate = 0.0, thinning = 0.0, blanking = 0.0;
  common(pre);
  auto* o_log = pre->add_option("log,--log", log_path, "Sensor log CSV");
  auto* o_vehicle = pre->add_option("--vehicle", vehicle_path, "Vehicle parameter JSON");
  auto* o_rate = pre->add_option("--rate", rate, "Resampling rate [Hz]");
  auto* o_thin = pre->add_option("--thinning", thinning, "Thinning radius, <= 0 disables");
  auto* o_blank = pre->add_option("--gear-blanking", blanking, "Gear shift blanking [s]");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit Magic Formula coefficients to a dataset");
  std::string data_path, method, bounds_path, shifts_path;
  double fixed_c = 0.0, lr = 0.0;
  std::uint64_t fit_seed = 0;
  int steps = 0, mc = 0, n_draws = 0;
  bool slip_percent = false, no_trace = false;
  common(fit);
  auto* o_data = fit->add_option("data,--data", data_path, "Dataset CSV (excitation, force_coeff[, weight])");
  auto* o_method = fit->add_option("--method", method, "svi or nelder-mead")
                       ->check(CLI::IsMember({"svi", "nelder-mead"}));
  auto* o_bounds = fit->add_option("--bounds", bounds_path, "Parameter bounds JSON");
  auto* o_seed = fit->add_option("--seed", fit_seed, "Random seed");
  auto* o_fixed = fit->add_option("--fixed-c", fixed_c, "Pin the shape factor C");
  auto* o_pct = fit->add_flag("--slip-percent", slip_percent, "Excitation column is in percent");
  auto* o_shifts = fit->add_option("--shifts", shifts_path, "Sh/Sv JSON (default: <data>.shifts.json if present)");
  auto* o_steps = fit->add_option("--steps", steps, "SVI steps");
  auto* o_mc = fit->add_option("--mc-samples", mc, "SVI Monte-Carlo draws per step");
  auto* o_lr = fit->add_option("--learning-rate", lr, "SVI initial step size");
  auto* o_draws = fit->add_option("--posterior-samples", n_draws, "Posterior draws written for SVI");
  auto* o_notrace = fit->add_flag("--no-trace", no_trace, "Omit the objective trace from result.json");

  // study
  auto* study = app.add_subcommand("study", "Synthetic excitation-level study");
  std::vector<double> levels;
  std::vector<std::string> methods;
  std::uint64_t study_seed = 0;
  int n_points = 0, study_steps = 0;
  double noise_slip = 0.0, noise_force = 0.0;
  common(study);
  auto* o_levels = study->add_option("--levels", levels, "Excitation levels")->delimiter(',');
  auto* o_sseed = study->add_option("--seed", study_seed, "Random seed");
  auto* o_points = study->add_option("--points", n_points, "Samples per level");
  auto* o_nslip = study->add_option("--noise-slip", noise_slip, "Excitation noise std");
  auto* o_nforce = study->add_option("--noise-force", noise_force, "Force coefficient noise std");
  auto* o_ssteps = study->add_option("--steps", study_steps, "SVI steps");
  auto* o_methods = study->add_option("--methods", methods, "Fit methods")->delimiter(',')
                        ->check(CLI::IsMember({"svi", "nelder-mead"}));

  // sobol
  auto* sobol = app.add_subcommand("sobol", "Total Sobol indices over slip");
  std::string center_path;
  double perturbation = 0.0;
  std::vector<double> grid;
  int grid_points = 0;
  std::size_t samples = 0;
  std::uint64_t sobol_seed = 0;
  common(sobol);
  auto* o_center = sobol->add_option("--center", center_path, "Center parameter JSON");
  auto* o_pert = sobol->add_option("--perturbation", perturbation, "Relative half-width of the box");
  auto* o_grid = sobol->add_option("--grid", grid, "Slip values")->delimiter(',');
  auto* o_gpts = sobol->add_option("--grid-points", grid_points, "Log-spaced grid size on [1e-3, 1]");
  auto* o_samples = sobol->add_option("--samples", samples, "Base sample count");
  auto* o_soseed = sobol->add_option("--seed", sobol_seed, "Random seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", 2, e.what());
    return 2;
  }

  configure_logging(quiet, json_logs);
  try {
    if (pre->parsed()) {
      json j = base_settings(config_path, "preprocess");
      Overlay ov{j};
      ov.set(o_log, "log", log_path);
      ov.set(o_vehicle, "vehicle", vehicle_path);
      ov.set(o_rate, "target_rate_hz", rate);
      ov.set(o_thin, "thinning_radius", thinning);
      ov.set(o_blank, "gear_blanking", blanking);
      cmd_preprocess(PreprocessSettings::from_json(j), out_dir, out);
    } else if (fit->parsed()) {
      json j = base_settings(config_path, "fit");
      Overlay ov{j};
      ov.set(o_data, "data", data_path);
      ov.set(o_method, "method", method);
      ov.set(o_bounds, "bounds", bounds_path);
      ov.set(o_seed, "seed", fit_seed);
      ov.set(o_fixed, "fixed_c", fixed_c);
      ov.set(o_pct, "slip_percent", slip_percent);
      ov.set(o_shifts, "shifts", shifts_path);
      ov.set_nested(o_steps, "svi", "steps", steps);
      ov.set_nested(o_mc, "svi", "mc_samples", mc);
      ov.set_nested(o_lr, "svi", "learning_rate", lr);
      ov.set(o_draws, "posterior_samples", n_draws);
      if (o_notrace->count() > 0) j["trace"] = !no_trace;
      if (!j.contains("shifts") && j.contains("data") && j["data"].is_string()) {
        const auto sidecar = shifts_sidecar(j["data"].get<std::string>());
        if (fs::is_regular_file(sidecar)) {
          spdlog::info("using shifts from {}", sidecar.string());
          j["shifts"] = fs::absolute(sidecar).string();
        }
      }
      cmd_fit(FitSettings::from_json(j), out_dir, out);
    } else if (study->parsed()) {
      json j = base_settings(config_path, "study");
      Overlay ov{j};
      ov.set(o_levels, "levels", levels);
      ov.set(o_sseed, "seed", study_seed);
      ov.set(o_points, "n_points", n_points);
      ov.set(o_nslip, "noise_slip", noise_slip);
      ov.set(o_nforce, "noise_force", noise_force);
      ov.set_nested(o_ssteps, "svi", "steps", study_steps);
      ov.set(o_methods, "methods", methods);
      cmd_study(StudySettings::from_json(j), out_dir, out);
    } else if (sobol->parsed()) {
      json j = base_settings(config_path, "sobol");
      Overlay ov{j};
      ov.set(o_center, "center", center_path);
      ov.set(o_pert, "perturbation", perturbation);
      if (o_grid->count() > 0 || o_gpts->count() > 0) {
        j.erase("grid");
        j.erase("grid_points");
      }
      ov.set(o_grid, "grid", grid);
      ov.set(o_gpts, "grid_points", grid_points);
      ov.set(o_samples, "samples", samples);
      ov.set(o_soseed, "seed", sobol_seed);
      cmd_sobol(SobolSettings::from_json(j), out_dir, out);
    }
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    report_error(err, to_string(e.kind()), code, e.what());
    return code;
  } catch (const json::exception& e) {
    report_error(err, "Schema", 2, e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(err, "Internal", 1, e.what());
    return 1;
  }
  return 0;
}

}  // namespace tirefit::cli
