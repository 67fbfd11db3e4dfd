#include "commands.hpp"

#include <random>

#include <spdlog/spdlog.h>

#include "tirefit/errors.hpp"
#include "tirefit/io.hpp"
#include "tirefit/parallel.hpp"
#include "tirefit/sensitivity.hpp"

namespace tirefit::cli {

namespace {

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

void write_echo(const fs::path& dir, const json& settings, const std::string& command) {
  write_json(dir / kEchoFile, tag_echo(settings, command));
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw Error(ErrorKind::Io, std::string(what) + " not found: " + p.string());
}

}  // namespace

fs::path shifts_sidecar(const fs::path& dataset) {
  return dataset.parent_path() / (dataset.stem().string() + ".shifts.json");
}

void cmd_preprocess(const PreprocessSettings& s, const fs::path& out_dir, std::ostream& summary) {
  require_file(s.log, "log");
  prepare_dir(out_dir);
  const SensorLog log = io::read_sensor_log_csv(s.log);
  const PreprocessOutput result = run_preprocess(log, s.vehicle, s.config);

  json datasets = json::object();
  std::size_t written = 0;
  for (const auto& [key, prepared] : result.datasets) {
    const std::string name = dataset_name(key);
    json entry{{"samples", prepared.dataset.size()},
               {"samples_before_thinning", prepared.samples_before_thinning}};
    if (prepared.shifts) entry["shifts"] = io::to_json(*prepared.shifts);
    if (!prepared.shift_error.empty()) entry["shift_error"] = prepared.shift_error;
    datasets[name] = entry;
    if (prepared.dataset.empty()) {
      spdlog::warn("{}: no samples left, dataset not written", name);
      continue;
    }
    io::write_text_atomic(out_dir / (name + ".csv"), io::dataset_to_csv(prepared.dataset));
    if (prepared.shifts) write_json(out_dir / (name + ".shifts.json"), io::to_json(*prepared.shifts));
    ++written;
  }
  const auto& st = result.stats;
  json report{{"offsets", io::to_json(result.offsets)},
              {"gear_channel_present", result.gear_channel_present},
              {"frames",
               {{"total", st.frames},
                {"dropped_gear_shift", st.dropped_gear_shift},
                {"dropped_low_speed", st.dropped_low_speed},
                {"dropped_nonpositive_load", st.dropped_nonpositive_load},
                {"dropped_steering", st.dropped_steering},
                {"dropped_sanity", st.dropped_sanity}}},
              {"datasets", datasets}};
  write_json(out_dir / "report.json", report);
  if (written == 0) throw Error(ErrorKind::EmptyDataset, "no dataset has samples after preprocessing");
  write_echo(out_dir, s.to_json(), "preprocess");
  summary << "preprocess: " << written << " datasets from " << st.frames << " frames -> "
          << out_dir.string() << "\n";
}

void cmd_fit(const FitSettings& s, const fs::path& out_dir, std::ostream& summary) {
  require_file(s.data, "dataset");
  prepare_dir(out_dir);
  const AxleDataset dataset = io::read_dataset_csv(s.data, s.slip_percent);
  const Shifts shifts = s.shifts.value_or(Shifts{});

  FitResult result;
  if (s.method == FitMethod::NelderMead) {
    NelderMeadFitConfig config;
    config.bounds = s.bounds;
    config.fixed_c = s.fixed_c;
    config.Sh = shifts.Sh;
    config.Sv = shifts.Sv;
    result = fit_nelder_mead(dataset, config);
  } else {
    SviConfig config = s.svi;
    config.bounds = s.bounds;
    config.fixed_c = s.fixed_c;
    config.seed = s.seed;
    config.record_trace = s.trace;
    result = fit_svi(dataset, config, shifts.Sh, shifts.Sv);
  }
  json result_json = io::to_json(result, s.trace);
  result_json["config"] = tag_echo(s.to_json(), "fit");
  write_json(out_dir / "result.json", result_json);
  if (result.method == FitMethod::Svi) {
    std::mt19937_64 rng(derive_seed(s.seed, 1));
    const auto draws = posterior_samples(result, static_cast<std::size_t>(s.posterior_samples), rng);
    io::write_text_atomic(out_dir / "posterior_samples.csv", io::params_to_csv(draws));
  }
  write_echo(out_dir, s.to_json(), "fit");
  const auto p = result.params();
  summary << "fit (" << to_string(result.method) << "): B=" << io::format_double(p.B)
          << " C=" << io::format_double(p.C) << " D=" << io::format_double(p.D)
          << " E=" << io::format_double(p.E) << " -> " << out_dir.string() << "\n";
}

void cmd_study(const StudySettings& s, const fs::path& out_dir, std::ostream& summary) {
  prepare_dir(out_dir);
  const StudyOutput result = run_study(s.study);
  io::write_text_atomic(out_dir / "study.csv", io::study_rows_to_csv(result.rows));
  io::write_text_atomic(out_dir / "curves.csv", io::curves_to_csv(result.curves));
  write_echo(out_dir, s.to_json(), "study");
  std::size_t failed = 0;
  for (const auto& row : result.rows) {
    if (row.failed()) {
      ++failed;
      spdlog::warn("level {} ({}): {}", row.level, to_string(row.method), row.error);
    }
  }
  summary << "study: " << result.rows.size() << " rows, " << failed << " failed -> "
          << out_dir.string() << "\n";
}

void cmd_sobol(const SobolSettings& s, const fs::path& out_dir, std::ostream& summary) {
  prepare_dir(out_dir);
  const SobolResult result = sobol_indices(s.center, s.perturbation, s.grid, s.samples, s.seed);
  io::write_text_atomic(out_dir / "sobol.csv", io::sobol_to_csv(result));
  write_echo(out_dir, s.to_json(), "sobol");
  std::size_t flagged = 0;
  for (bool z : result.zero_variance) flagged += z ? 1 : 0;
  summary << "sobol: " << result.slip_grid.size() << " grid points, " << flagged
          << " zero-variance -> " << out_dir.string() << "\n";
}

}  // namespace tirefit::cli
