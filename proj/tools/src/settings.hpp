#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tirefit/fitting.hpp"
#include "tirefit/preprocess.hpp"
#include "tirefit/sensitivity.hpp"
#include "tirefit/study.hpp"
#include "tirefit/tire_model.hpp"
#include "tirefit/vehicle_dynamics.hpp"

// Effective settings of each subcommand. Every struct reads the same JSON it
// writes, so a config echo can be fed back through --config.
namespace tirefit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

struct PreprocessSettings {
  fs::path log;
  VehicleParams vehicle;
  PreprocessConfig config;

  static PreprocessSettings from_json(const json& j);
  json to_json() const;
};

struct Shifts {
  double Sh = 0.0;
  double Sv = 0.0;
};

struct FitSettings {
  fs::path data;
  FitMethod method = FitMethod::Svi;
  ParamBounds bounds;
  std::optional<double> fixed_c;
  std::uint64_t seed = 0;
  bool slip_percent = false;
  std::optional<Shifts> shifts;
  SviConfig svi;  ///< steps, mc_samples, learning_rate, moment_samples
  int posterior_samples = 1000;
  bool trace = true;

  static FitSettings from_json(const json& j);
  json to_json() const;
};

struct StudySettings {
  StudyConfig study;

  static StudySettings from_json(const json& j);
  json to_json() const;
};

struct SobolSettings {
  TireParams center{15.0, 2.0, 1.5, 0.8, 0.0, 0.0};
  double perturbation = 0.1;
  std::vector<double> grid = default_slip_grid();
  std::size_t samples = 100000;
  std::uint64_t seed = 0;

  static SobolSettings from_json(const json& j);
  json to_json() const;
};

// Keys holding file paths, per subcommand. Relative paths inside a config
// file are resolved against the file's directory.
const std::vector<std::string>& path_keys(const std::string& command);

// Reads a config file, checks its command tag and anchors relative paths.
json load_config(const fs::path& path, const std::string& command);

// Adds the version and command tags used by the echo.
json tag_echo(json settings, const std::string& command);

}  // namespace tirefit::cli
