#include "settings.hpp"

#include <algorithm>

#include "tirefit/errors.hpp"
#include "tirefit/io.hpp"
#include "tirefit/version.hpp"

namespace tirefit::cli {

namespace {

constexpr const char* kVersionKey = "tirefit_version";
constexpr const char* kCommandKey = "command";

fs::path absolute_path(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal(); }

// A value that is either an inline object or a path to a JSON file.
json inline_or_file(const io::Fields& f, const std::string& key) {
  const json& v = f.raw(key);
  if (v.is_string()) return io::read_json(absolute_path(v.get<std::string>()));
  if (!v.is_object()) throw Error(ErrorKind::Schema, f.path_of(key) + ": expected an object or a file path");
  return v;
}

std::uint64_t seed_value(const io::Fields& f, const std::string& key, std::uint64_t fallback) {
  if (!f.has(key)) return fallback;
  const json& v = f.raw(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw Error(ErrorKind::Schema, f.path_of(key) + ": expected a non-negative integer");
}

int positive_int(const io::Fields& f, const std::string& key, int fallback) {
  const long long v = f.integer_or(key, fallback);
  if (v < 1 || v > 1'000'000'000) throw Error(ErrorKind::Schema, f.path_of(key) + ": expected a positive integer");
  return static_cast<int>(v);
}

void reject_unknown_with_tags(const io::Fields& f, std::initializer_list<std::string_view> keys) {
  std::vector<std::string_view> all(keys);
  all.push_back(kVersionKey);
  all.push_back(kCommandKey);
  for (const auto& [k, v] : f.raw_object().items()) {
    if (std::find(all.begin(), all.end(), k) == all.end()) {
      throw Error(ErrorKind::Schema, f.path_of(k) + ": unknown key");
    }
  }
}

json svi_json(const SviConfig& c) {
  json j = io::svi_settings_to_json(c);
  j.erase("seed");  // the top-level seed drives the fit
  return j;
}

void read_svi(const io::Fields& f, SviConfig& c) {
  if (!f.has("svi")) return;
  json svi = f.raw("svi");
  if (!svi.is_object()) throw Error(ErrorKind::Schema, f.path_of("svi") + ": expected an object");
  if (svi.contains("seed")) throw Error(ErrorKind::Schema, f.path_of("svi") + ".seed: use the top-level seed");
  io::svi_settings_from_json(svi, c, f.path_of("svi"));
}

}  // namespace

// ---------------------------------------------------------------------------

PreprocessSettings PreprocessSettings::from_json(const json& j) {
  io::Fields f(j, "config");
  reject_unknown_with_tags(f, {"log", "vehicle", "filters", "target_rate_hz", "calibration",
                               "gear_blanking", "v_min", "thinning_radius",
                               "linear_cut_slip_ratio", "linear_cut_slip_angle"});
  PreprocessSettings s;
  s.log = absolute_path(f.string("log"));
  if (!f.has("vehicle")) throw Error(ErrorKind::Schema, f.path_of("vehicle") + ": required");
  s.vehicle = io::vehicle_params_from_json(inline_or_file(f, "vehicle"), f.path_of("vehicle"));

  auto& c = s.config;
  if (f.has("filters")) {
    const auto ff = f.object("filters");
    ff.reject_unknown({"correvit", "imu", "can"});
    for (const char* group : {"correvit", "imu", "can"}) {
      if (ff.has(group)) c.filters[group] = io::filter_spec_from_json(ff.raw(group), ff.path_of(group));
    }
  }
  c.target_rate_hz = f.number_or("target_rate_hz", c.target_rate_hz);
  if (!(c.target_rate_hz > 0.0)) throw Error(ErrorKind::Schema, f.path_of("target_rate_hz") + ": must be positive");
  if (f.has("calibration")) {
    const auto cf = f.object("calibration");
    cf.reject_unknown({"max_abs_ay", "max_abs_yaw_rate", "min_vx", "min_duration"});
    c.calibration.max_abs_ay = cf.number_or("max_abs_ay", c.calibration.max_abs_ay);
    c.calibration.max_abs_yaw_rate = cf.number_or("max_abs_yaw_rate", c.calibration.max_abs_yaw_rate);
    c.calibration.min_vx = cf.number_or("min_vx", c.calibration.min_vx);
    c.calibration.min_duration = cf.number_or("min_duration", c.calibration.min_duration);
  }
  c.gear_blanking = f.number_or("gear_blanking", c.gear_blanking);
  c.v_min = f.number_or("v_min", c.v_min);
  c.thinning_radius = f.number_or("thinning_radius", c.thinning_radius);
  c.linear_cut_slip_ratio = f.number_or("linear_cut_slip_ratio", c.linear_cut_slip_ratio);
  c.linear_cut_slip_angle = f.number_or("linear_cut_slip_angle", c.linear_cut_slip_angle);
  return s;
}

json PreprocessSettings::to_json() const {
  json filters = json::object();
  for (const auto& [group, spec] : config.filters) filters[group] = io::to_json(spec);
  return json{{"log", log.string()},
              {"vehicle", io::to_json(vehicle)},
              {"filters", filters},
              {"target_rate_hz", config.target_rate_hz},
              {"calibration",
               {{"max_abs_ay", config.calibration.max_abs_ay},
                {"max_abs_yaw_rate", config.calibration.max_abs_yaw_rate},
                {"min_vx", config.calibration.min_vx},
                {"min_duration", config.calibration.min_duration}}},
              {"gear_blanking", config.gear_blanking},
              {"v_min", config.v_min},
              {"thinning_radius", config.thinning_radius},
              {"linear_cut_slip_ratio", config.linear_cut_slip_ratio},
              {"linear_cut_slip_angle", config.linear_cut_slip_angle}};
}

// ---------------------------------------------------------------------------

FitSettings FitSettings::from_json(const json& j) {
  io::Fields f(j, "config");
  reject_unknown_with_tags(f, {"data", "method", "bounds", "fixed_c", "seed", "slip_percent",
                               "shifts", "svi", "posterior_samples", "trace"});
  FitSettings s;
  s.data = absolute_path(f.string("data"));
  if (f.has("method")) {
    try {
      s.method = fit_method_from_string(f.string("method"));
    } catch (const Error& e) {
      throw Error(ErrorKind::Schema, f.path_of("method") + ": " + e.what());
    }
  }
  if (f.has("bounds")) s.bounds = io::bounds_from_json(inline_or_file(f, "bounds"), f.path_of("bounds"));
  if (f.has("fixed_c") && !f.raw("fixed_c").is_null()) {
    s.fixed_c = f.number("fixed_c");
    if (!s.bounds[kC].contains(*s.fixed_c)) {
      throw Error(ErrorKind::Schema, f.path_of("fixed_c") + ": outside the C bounds");
    }
  }
  s.seed = seed_value(f, "seed", s.seed);
  s.slip_percent = f.boolean_or("slip_percent", s.slip_percent);
  if (f.has("shifts") && !f.raw("shifts").is_null()) {
    const json sj = inline_or_file(f, "shifts");
    io::Fields sf(sj, f.path_of("shifts"));
    s.shifts = Shifts{sf.number_or("Sh", 0.0), sf.number_or("Sv", 0.0)};
  }
  read_svi(f, s.svi);
  s.posterior_samples = positive_int(f, "posterior_samples", s.posterior_samples);
  s.trace = f.boolean_or("trace", s.trace);
  return s;
}

json FitSettings::to_json() const {
  return json{{"data", data.string()},
              {"method", std::string(tirefit::to_string(method))},
              {"bounds", io::to_json(bounds)},
              {"fixed_c", fixed_c ? json(*fixed_c) : json(nullptr)},
              {"seed", seed},
              {"slip_percent", slip_percent},
              {"shifts", shifts ? json{{"Sh", shifts->Sh}, {"Sv", shifts->Sv}} : json(nullptr)},
              {"svi", svi_json(svi)},
              {"posterior_samples", posterior_samples},
              {"trace", trace}};
}

// ---------------------------------------------------------------------------

StudySettings StudySettings::from_json(const json& j) {
  io::Fields f(j, "config");
  reject_unknown_with_tags(f, {"truth", "levels", "n_points", "noise_slip", "noise_force", "seed",
                               "svi", "bounds", "highlight_levels", "reference_points",
                               "curve_points", "band_draws", "methods"});
  StudySettings s;
  auto& c = s.study;
  if (f.has("truth")) c.truth = io::tire_params_from_json(inline_or_file(f, "truth"), f.path_of("truth"));
  if (f.has("levels")) c.excitation_levels = f.numbers("levels");
  c.n_points = positive_int(f, "n_points", c.n_points);
  c.noise_slip = f.number_or("noise_slip", c.noise_slip);
  c.noise_force = f.number_or("noise_force", c.noise_force);
  if (c.noise_slip < 0.0 || c.noise_force < 0.0) {
    throw Error(ErrorKind::Schema, f.path() + ": noise levels must be non-negative");
  }
  c.seed = seed_value(f, "seed", c.seed);
  read_svi(f, c.svi);
  if (f.has("bounds")) c.bounds = io::bounds_from_json(inline_or_file(f, "bounds"), f.path_of("bounds"));
  if (f.has("highlight_levels")) c.highlight_levels = f.numbers("highlight_levels");
  c.reference_points = positive_int(f, "reference_points", c.reference_points);
  c.curve_points = positive_int(f, "curve_points", c.curve_points);
  c.band_draws = positive_int(f, "band_draws", c.band_draws);
  if (f.has("methods")) {
    const json& m = f.raw("methods");
    if (!m.is_array() || m.empty()) throw Error(ErrorKind::Schema, f.path_of("methods") + ": expected a non-empty list");
    c.run_nelder_mead = c.run_svi = false;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string where = f.path_of("methods") + "[" + std::to_string(i) + "]";
      if (!m[i].is_string()) throw Error(ErrorKind::Schema, where + ": expected a string");
      try {
        (fit_method_from_string(m[i].get<std::string>()) == FitMethod::Svi ? c.run_svi : c.run_nelder_mead) = true;
      } catch (const Error& e) {
        throw Error(ErrorKind::Schema, where + ": " + e.what());
      }
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, f.path() + ": " + e.what());
  }
  return s;
}

json StudySettings::to_json() const {
  const auto& c = study;
  json methods = json::array();
  if (c.run_nelder_mead) methods.push_back(std::string(tirefit::to_string(FitMethod::NelderMead)));
  if (c.run_svi) methods.push_back(std::string(tirefit::to_string(FitMethod::Svi)));
  return json{{"truth", io::to_json(c.truth)},
              {"levels", c.excitation_levels},
              {"n_points", c.n_points},
              {"noise_slip", c.noise_slip},
              {"noise_force", c.noise_force},
              {"seed", c.seed},
              {"svi", svi_json(c.svi)},
              {"bounds", io::to_json(c.bounds)},
              {"highlight_levels", c.highlight_levels},
              {"reference_points", c.reference_points},
              {"curve_points", c.curve_points},
              {"band_draws", c.band_draws},
              {"methods", methods}};
}

// ---------------------------------------------------------------------------

SobolSettings SobolSettings::from_json(const json& j) {
  io::Fields f(j, "config");
  reject_unknown_with_tags(f, {"center", "perturbation", "grid", "grid_points", "samples", "seed"});
  SobolSettings s;
  if (f.has("center")) s.center = io::tire_params_from_json(inline_or_file(f, "center"), f.path_of("center"));
  s.perturbation = f.number_or("perturbation", s.perturbation);
  if (!(s.perturbation > 0.0 && s.perturbation <= 0.5)) {
    throw Error(ErrorKind::Schema, f.path_of("perturbation") + ": must lie in (0, 0.5]");
  }
  if (f.has("grid") && f.has("grid_points")) {
    throw Error(ErrorKind::Schema, f.path() + ": give either grid or grid_points");
  }
  if (f.has("grid")) {
    s.grid = f.numbers("grid");
    if (s.grid.empty()) throw Error(ErrorKind::Schema, f.path_of("grid") + ": empty");
  }
  if (f.has("grid_points")) {
    const int n = positive_int(f, "grid_points", 200);
    if (n < 2) throw Error(ErrorKind::Schema, f.path_of("grid_points") + ": needs at least 2 points");
    s.grid = default_slip_grid(static_cast<std::size_t>(n));
  }
  const long long n = f.integer_or("samples", static_cast<long long>(s.samples));
  if (n < static_cast<long long>(kMinSobolSamples)) {
    throw Error(ErrorKind::Schema, f.path_of("samples") + ": at least " + std::to_string(kMinSobolSamples) + " required");
  }
  s.samples = static_cast<std::size_t>(n);
  s.seed = seed_value(f, "seed", s.seed);
  return s;
}

json SobolSettings::to_json() const {
  return json{{"center", io::to_json(center)},
              {"perturbation", perturbation},
              {"grid", grid},
              {"samples", samples},
              {"seed", seed}};
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& path_keys(const std::string& command) {
  static const std::vector<std::string> preprocess{"log", "vehicle"};
  static const std::vector<std::string> fit{"data", "bounds", "shifts"};
  static const std::vector<std::string> study{"truth", "bounds"};
  static const std::vector<std::string> sobol{"center"};
  static const std::vector<std::string> none;
  if (command == "preprocess") return preprocess;
  if (command == "fit") return fit;
  if (command == "study") return study;
  if (command == "sobol") return sobol;
  return none;
}

json load_config(const fs::path& path, const std::string& command) {
  json j = io::read_json(path);
  if (!j.is_object()) throw Error(ErrorKind::Schema, "config: expected a JSON object");
  if (j.contains(kCommandKey)) {
    if (!j[kCommandKey].is_string() || j[kCommandKey].get<std::string>() != command) {
      throw Error(ErrorKind::Schema, std::string("config.") + kCommandKey + ": expected \"" + command + "\"");
    }
  }
  const fs::path base = fs::absolute(path).parent_path();
  for (const auto& key : path_keys(command)) {
    if (j.contains(key) && j[key].is_string()) {
      const fs::path p(j[key].get<std::string>());
      j[key] = (p.is_absolute() ? p : base / p).lexically_normal().string();
    }
  }
  return j;
}

json tag_echo(json settings, const std::string& command) {
  settings[kVersionKey] = kVersion;
  settings[kCommandKey] = command;
  return settings;
}

}  // namespace tirefit::cli
