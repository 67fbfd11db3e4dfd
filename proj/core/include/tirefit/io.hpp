#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tirefit/dataset.hpp"
#include "tirefit/filters.hpp"
#include "tirefit/fitting.hpp"
#include "tirefit/preprocess.hpp"
#include "tirefit/sensitivity.hpp"
#include "tirefit/sensor_log.hpp"
#include "tirefit/study.hpp"
#include "tirefit/tire_model.hpp"
#include "tirefit/vehicle_dynamics.hpp"

namespace tirefit::io {

using nlohmann::json;

// Shortest representation that round-trips, '.' decimal separator in every
// locale. NaN and infinities are written as nan / inf / -inf.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// CSV (RFC 4180: comma separated, CRLF or LF accepted on input, LF written,
// fields quoted when they contain a comma, quote or line break).

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column_index(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
std::string to_csv(const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over the target.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

json read_json(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Strict JSON field access. Errors are Schema with the dotted field path.

class Fields {
 public:
  Fields(const json& object, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  Fields object(const std::string& key) const;
  const json& raw(const std::string& key) const;
  std::string path_of(const std::string& key) const;
  const std::string& path() const { return path_; }
  const json& raw_object() const { return object_; }

  // Throws Schema naming the first key not in `allowed`.
  void reject_unknown(std::initializer_list<std::string_view> allowed) const;

 private:
  const json& object_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Domain types.

json to_json(const TireParams& p);
TireParams tire_params_from_json(const json& j, const std::string& path = "params");

json to_json(const ParamBounds& b);
ParamBounds bounds_from_json(const json& j, const std::string& path = "bounds");

json to_json(const VehicleParams& vp);
VehicleParams vehicle_params_from_json(const json& j, const std::string& path = "vehicle");
VehicleParams read_vehicle_params(const std::filesystem::path& path);

json to_json(const FilterSpec& f);
FilterSpec filter_spec_from_json(const json& j, const std::string& path);

// steps, mc_samples, learning_rate, seed, moment_samples.
json svi_settings_to_json(const SviConfig& c);
void svi_settings_from_json(const json& j, SviConfig& c, const std::string& path);

json to_json(const OffsetReport& r);
json to_json(const ShiftEstimate& s);

// FitResult with covariance as 16 row-major values; trace only when asked.
json to_json(const FitResult& r, bool include_trace);
FitResult fit_result_from_json(const json& j, const std::string& path = "result");

// ---------------------------------------------------------------------------
// Tables.

// Columns excitation, force_coeff, weight (weight optional on input, default
// 1). With slip_percent the excitation column is divided by 100.
AxleDataset read_dataset_csv(const std::filesystem::path& path, bool slip_percent = false);
AxleDataset dataset_from_csv(const CsvTable& table, bool slip_percent = false);
std::string dataset_to_csv(const AxleDataset& d);

// Required columns per required_log_columns(). Empty cells mean "not
// sampled at this timestamp", which is how channels with different rates
// share one file. Missing columns raise Schema naming the column.
SensorLog sensor_log_from_csv(const CsvTable& table);
SensorLog read_sensor_log_csv(const std::filesystem::path& path);

// slip, st_b, st_c, st_d, st_e, flag_zero_variance
std::string sobol_to_csv(const SobolResult& r);

// level, method, b_mean, c_mean, d_mean, e_mean, b_std, c_std, d_std, e_std, mse, error_flag
std::string study_rows_to_csv(const std::vector<StudyRow>& rows);
// level, method, slip, truth, fit, lower, upper
std::string curves_to_csv(const std::vector<CurvePoint>& points);

// B, C, D, E, Sh, Sv per draw.
std::string params_to_csv(const std::vector<TireParams>& draws);

}  // namespace tirefit::io
