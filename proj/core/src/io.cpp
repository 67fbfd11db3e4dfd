#include "tirefit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "tirefit/errors.hpp"

namespace tirefit::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error(ErrorKind::Io, "number formatting failed");
  return {buf, end};
}

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

int CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw Error(ErrorKind::Schema, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw Error(ErrorKind::Schema, "CSV has no header row");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw Error(ErrorKind::Schema, "CSV row " + std::to_string(r + 1) + " has " +
                                         std::to_string(records[r].size()) + " fields, header has " +
                                         std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += quote_if_needed(fields[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorKind::Io, "cannot move output into place: " + path.string());
  }
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, path.string() + ": invalid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Fields

Fields::Fields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw Error(ErrorKind::Schema, path_ + ": expected an object");
}

std::string Fields::path_of(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool Fields::has(const std::string& key) const {
  return object_.contains(key) && !object_.at(key).is_null();
}

const json& Fields::raw(const std::string& key) const {
  if (!object_.contains(key)) throw Error(ErrorKind::Schema, path_of(key) + ": missing");
  return object_.at(key);
}

double Fields::number(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_number()) throw Error(ErrorKind::Schema, path_of(key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorKind::Schema, path_of(key) + ": must be finite");
  return d;
}

double Fields::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long long Fields::integer(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_number_integer()) throw Error(ErrorKind::Schema, path_of(key) + ": expected an integer");
  return v.get<long long>();
}

long long Fields::integer_or(const std::string& key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Fields::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = raw(key);
  if (!v.is_boolean()) throw Error(ErrorKind::Schema, path_of(key) + ": expected true/false");
  return v.get<bool>();
}

std::string Fields::string(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_string()) throw Error(ErrorKind::Schema, path_of(key) + ": expected a string");
  return v.get<std::string>();
}

std::string Fields::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Fields::numbers(const std::string& key) const {
  const auto& v = raw(key);
  if (!v.is_array()) throw Error(ErrorKind::Schema, path_of(key) + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw Error(ErrorKind::Schema, path_of(key) + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

Fields Fields::object(const std::string& key) const { return Fields(raw(key), path_of(key)); }

void Fields::reject_unknown(std::initializer_list<std::string_view> allowed) const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error(ErrorKind::Schema, path_of(it.key()) + ": unknown key");
  }
}

// ---------------------------------------------------------------------------
// Domain types

json to_json(const TireParams& p) {
  return json{{"B", p.B}, {"C", p.C}, {"D", p.D}, {"E", p.E}, {"Sh", p.Sh}, {"Sv", p.Sv}};
}

TireParams tire_params_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  f.reject_unknown({"B", "C", "D", "E", "Sh", "Sv"});
  TireParams p;
  p.B = f.number("B");
  p.C = f.number("C");
  p.D = f.number("D");
  p.E = f.number("E");
  p.Sh = f.number_or("Sh", 0.0);
  p.Sv = f.number_or("Sv", 0.0);
  return p;
}

json to_json(const ParamBounds& b) {
  json j = json::object();
  for (int i = 0; i < kNumCoefficients; ++i) j[kCoefficientNames[i]] = {b[i].min, b[i].max};
  return j;
}

ParamBounds bounds_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  f.reject_unknown({"B", "C", "D", "E"});
  ParamBounds b;
  for (int i = 0; i < kNumCoefficients; ++i) {
    const std::string key = kCoefficientNames[i];
    if (!f.has(key)) continue;
    const auto v = f.numbers(key);
    if (v.size() != 2) throw Error(ErrorKind::Schema, f.path_of(key) + ": expected [min, max]");
    b[i] = {v[0], v[1]};
  }
  try {
    b.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, path + ": " + e.what());
  }
  return b;
}

namespace {

json to_json(const TireGeometry& t) {
  return json{{"r_i", t.r_i}, {"d_r", t.d_r}, {"c_tire", t.c_tire}};
}

TireGeometry tire_geometry_from_json(const Fields& parent, const std::string& key) {
  Fields f = parent.object(key);
  f.reject_unknown({"r_i", "d_r", "c_tire"});
  TireGeometry t;
  t.r_i = f.number("r_i");
  t.d_r = f.number_or("d_r", 0.0);
  t.c_tire = f.number("c_tire");
  return t;
}

}  // namespace

json to_json(const VehicleParams& vp) {
  return json{{"m", vp.m},
              {"l", vp.l},
              {"lr", vp.lr},
              {"h_cog", vp.h_cog},
              {"izz", vp.izz},
              {"c_drag", vp.c_drag},
              {"c_lift_f", vp.c_lift_f},
              {"c_lift_r", vp.c_lift_r},
              {"f_roll", vp.f_roll},
              {"front_tire", to_json(vp.front_tire)},
              {"rear_tire", to_json(vp.rear_tire)},
              {"lsd",
               {{"preload", vp.lsd.preload},
                {"coast_coeff", vp.lsd.coast_coeff},
                {"drive_coeff", vp.lsd.drive_coeff}}},
              {"engine_brake_torque_max", vp.engine_brake_torque_max},
              {"driveline_ratio", vp.driveline_ratio}};
}

VehicleParams vehicle_params_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  f.reject_unknown({"m", "l", "lr", "h_cog", "izz", "c_drag", "c_lift_f", "c_lift_r", "f_roll",
                    "front_tire", "rear_tire", "lsd", "engine_brake_torque_max",
                    "driveline_ratio"});
  VehicleParams vp;
  vp.m = f.number("m");
  vp.l = f.number("l");
  vp.lr = f.number("lr");
  vp.h_cog = f.number("h_cog");
  vp.izz = f.number("izz");
  vp.c_drag = f.number_or("c_drag", 0.0);
  vp.c_lift_f = f.number_or("c_lift_f", 0.0);
  vp.c_lift_r = f.number_or("c_lift_r", 0.0);
  vp.f_roll = f.number_or("f_roll", 0.0);
  vp.front_tire = tire_geometry_from_json(f, "front_tire");
  vp.rear_tire = tire_geometry_from_json(f, "rear_tire");
  if (f.has("lsd")) {
    Fields lsd = f.object("lsd");
    lsd.reject_unknown({"preload", "coast_coeff", "drive_coeff"});
    vp.lsd.preload = lsd.number_or("preload", 0.0);
    vp.lsd.coast_coeff = lsd.number_or("coast_coeff", 0.0);
    vp.lsd.drive_coeff = lsd.number_or("drive_coeff", 0.0);
  }
  vp.engine_brake_torque_max = f.number_or("engine_brake_torque_max", 0.0);
  vp.driveline_ratio = f.number_or("driveline_ratio", 1.0);
  try {
    vp.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, path + ": " + e.what());
  }
  return vp;
}

VehicleParams read_vehicle_params(const std::filesystem::path& path) {
  return vehicle_params_from_json(read_json(path), "vehicle");
}

json to_json(const FilterSpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind))}, {"window", spec.window}};
  if (spec.kind == FilterKind::SavitzkyGolay) j["order"] = spec.order;
  if (spec.kind == FilterKind::Gaussian) j["sigma"] = spec.sigma;
  return j;
}

FilterSpec filter_spec_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  f.reject_unknown({"kind", "window", "order", "sigma"});
  FilterSpec spec;
  spec.kind = filter_kind_from_string(f.string("kind"));
  spec.window = static_cast<int>(f.integer("window"));
  spec.order = static_cast<int>(f.integer_or("order", 3));
  spec.sigma = f.number_or("sigma", 0.0);
  try {
    spec.normalized().validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, path + ": " + e.what());
  }
  return spec;
}

json svi_settings_to_json(const SviConfig& c) {
  return json{{"steps", c.steps},
              {"mc_samples", c.mc_samples},
              {"learning_rate", c.learning_rate},
              {"seed", c.seed},
              {"moment_samples", c.moment_samples}};
}

void svi_settings_from_json(const json& j, SviConfig& c, const std::string& path) {
  Fields f(j, path);
  f.reject_unknown({"steps", "mc_samples", "learning_rate", "seed", "moment_samples"});
  c.steps = static_cast<int>(f.integer_or("steps", c.steps));
  c.mc_samples = static_cast<int>(f.integer_or("mc_samples", c.mc_samples));
  c.learning_rate = f.number_or("learning_rate", c.learning_rate);
  if (f.has("seed")) {
    const auto& v = f.raw("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw Error(ErrorKind::Schema, f.path_of("seed") + ": expected a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  }
  c.moment_samples = static_cast<int>(f.integer_or("moment_samples", c.moment_samples));
  try {
    SviConfig probe = c;
    probe.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, path + ": " + e.what());
  }
}

json to_json(const OffsetReport& r) {
  return json{{"ay_mps2", r.ay},
              {"yaw_rate_radps", r.yaw_rate},
              {"vy_mps", r.vy},
              {"steer_angle_rad", r.steer},
              {"calibration_duration_s", r.calibration_duration},
              {"calibration_samples", r.calibration_samples}};
}

json to_json(const ShiftEstimate& s) {
  return json{{"Sh", s.Sh},
              {"Sv", s.Sv},
              {"slope", s.slope},
              {"intercept", s.intercept},
              {"samples_used", s.samples_used}};
}

json to_json(const FitResult& r, bool include_trace) {
  json mean = json::object();
  json sd = json::object();
  const auto s = r.stddev();
  for (int i = 0; i < kNumCoefficients; ++i) {
    mean[kCoefficientNames[i]] = r.mean[i];
    sd[kCoefficientNames[i]] = s[i];
  }
  json cov = json::array();
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) cov.push_back(r.covariance(a, b));
  }
  json j{{"method", std::string(to_string(r.method))},
         {"mean", mean},
         {"std", sd},
         {"covariance", cov},
         {"sigma_noise", r.sigma_noise},
         {"bounds", to_json(r.bounds)},
         {"Sh", r.Sh},
         {"Sv", r.Sv},
         {"fixed_c", r.fixed_c ? json(*r.fixed_c) : json(nullptr)},
         {"iterations", r.iterations},
         {"converged", r.converged}};
  if (r.guide) {
    const BoxBijection bij(r.bounds, r.fixed_c);
    json free = json::array();
    for (int idx : bij.free_coefficients()) free.push_back(kCoefficientNames[idx]);
    json loc = json::array();
    json tril = json::array();
    const auto& g = *r.guide;
    for (Eigen::Index a = 0; a < g.loc.size(); ++a) {
      loc.push_back(g.loc(a));
      for (Eigen::Index b = 0; b < g.loc.size(); ++b) tril.push_back(g.scale_tril(a, b));
    }
    j["guide"] = {{"free", free}, {"loc", loc}, {"scale_tril", tril}};
  }
  if (include_trace) j["trace"] = r.trace;
  return j;
}

FitResult fit_result_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  FitResult r;
  r.method = fit_method_from_string(f.string("method"));
  Fields mean = f.object("mean");
  for (int i = 0; i < kNumCoefficients; ++i) r.mean[i] = mean.number(kCoefficientNames[i]);
  const auto cov = f.numbers("covariance");
  if (cov.size() != 16) throw Error(ErrorKind::Schema, f.path_of("covariance") + ": need 16 values");
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) r.covariance(a, b) = cov[static_cast<std::size_t>(4 * a + b)];
  }
  r.sigma_noise = f.number("sigma_noise");
  r.bounds = bounds_from_json(f.raw("bounds"), f.path_of("bounds"));
  r.Sh = f.number_or("Sh", 0.0);
  r.Sv = f.number_or("Sv", 0.0);
  if (f.has("fixed_c")) r.fixed_c = f.number("fixed_c");
  r.iterations = static_cast<int>(f.integer_or("iterations", 0));
  r.converged = f.boolean_or("converged", false);
  if (f.has("guide")) {
    Fields g = f.object("guide");
    const auto loc = g.numbers("loc");
    const auto tril = g.numbers("scale_tril");
    const auto k = static_cast<Eigen::Index>(loc.size());
    if (static_cast<Eigen::Index>(tril.size()) != k * k) {
      throw Error(ErrorKind::Schema, g.path_of("scale_tril") + ": size mismatch");
    }
    Guide guide{Eigen::VectorXd(k), Eigen::MatrixXd(k, k)};
    for (Eigen::Index a = 0; a < k; ++a) {
      guide.loc(a) = loc[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < k; ++b) {
        guide.scale_tril(a, b) = tril[static_cast<std::size_t>(a * k + b)];
      }
    }
    r.guide = std::move(guide);
  }
  if (f.has("trace")) r.trace = f.numbers("trace");
  return r;
}

// ---------------------------------------------------------------------------
// Tables

AxleDataset dataset_from_csv(const CsvTable& table, bool slip_percent) {
  const int ix = table.column_index("excitation");
  const int iy = table.column_index("force_coeff");
  const int iw = table.column_index("weight");
  if (ix < 0) throw Error(ErrorKind::Schema, "dataset: missing column excitation");
  if (iy < 0) throw Error(ErrorKind::Schema, "dataset: missing column force_coeff");
  AxleDataset d;
  d.samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Sample s;
    const bool ok = parse_double(row[static_cast<std::size_t>(ix)], s.excitation) &&
                    parse_double(row[static_cast<std::size_t>(iy)], s.force_coeff) &&
                    (iw < 0 || parse_double(row[static_cast<std::size_t>(iw)], s.weight));
    if (!ok) {
      throw Error(ErrorKind::Schema, "dataset row " + std::to_string(r + 2) + ": not a number");
    }
    if (slip_percent) s.excitation /= 100.0;
    d.samples.push_back(s);
  }
  d.validate();
  return d;
}

AxleDataset read_dataset_csv(const std::filesystem::path& path, bool slip_percent) {
  return dataset_from_csv(read_csv(path), slip_percent);
}

std::string dataset_to_csv(const AxleDataset& d) {
  std::string out = "excitation,force_coeff,weight\n";
  for (const auto& s : d.samples) {
    out += format_double(s.excitation) + ',' + format_double(s.force_coeff) + ',' +
           format_double(s.weight) + '\n';
  }
  return out;
}

SensorLog sensor_log_from_csv(const CsvTable& table) {
  const auto& required = required_log_columns();
  for (const auto& name : required) {
    if (table.column_index(name) < 0) throw Error(ErrorKind::Schema, "log: missing column " + name);
  }
  const auto it = static_cast<std::size_t>(table.column_index(columns::kTime));
  SensorLog log;
  for (const auto& name : required) {
    if (name == columns::kTime) continue;
    const auto ic = static_cast<std::size_t>(table.column_index(name));
    Channel ch;
    ch.categorical = name == columns::kGear;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& cell = table.rows[r][ic];
      if (cell.empty()) continue;
      double t = 0.0, v = 0.0;
      if (!parse_double(table.rows[r][it], t) || !parse_double(cell, v)) {
        throw Error(ErrorKind::Schema,
                    "log row " + std::to_string(r + 2) + ", column " + name + ": not a number");
      }
      ch.time.push_back(t);
      ch.values.push_back(v);
    }
    if (ch.time.empty()) {
      if (ch.categorical) continue;  // gear may be absent entirely
      throw Error(ErrorKind::Schema, "log: column " + name + " has no samples");
    }
    ch.validate(name);
    log.channels.emplace(name, std::move(ch));
  }
  return log;
}

SensorLog read_sensor_log_csv(const std::filesystem::path& path) {
  return sensor_log_from_csv(read_csv(path));
}

std::string sobol_to_csv(const SobolResult& r) {
  std::string out = "slip,st_b,st_c,st_d,st_e,flag_zero_variance\n";
  for (std::size_t k = 0; k < r.slip_grid.size(); ++k) {
    out += format_double(r.slip_grid[k]);
    for (int i = 0; i < kNumCoefficients; ++i) {
      out += ',' + format_double(r.total[static_cast<std::size_t>(i)][k]);
    }
    out += r.zero_variance[k] ? ",1\n" : ",0\n";
  }
  return out;
}

std::string study_rows_to_csv(const std::vector<StudyRow>& rows) {
  std::string out = "level,method,b_mean,c_mean,d_mean,e_mean,b_std,c_std,d_std,e_std,mse,error_flag\n";
  for (const auto& r : rows) {
    out += format_double(r.level) + ',' + std::string(to_string(r.method));
    for (int i = 0; i < kNumCoefficients; ++i) {
      out += ',';
      if (!r.failed()) out += format_double(r.mean[i]);
    }
    for (int i = 0; i < kNumCoefficients; ++i) {
      out += ',';
      if (!r.failed() && r.stddev) out += format_double((*r.stddev)[i]);
    }
    out += ',';
    if (!r.failed()) out += format_double(r.mse);
    out += r.failed() ? ",1\n" : ",0\n";
  }
  return out;
}

std::string curves_to_csv(const std::vector<CurvePoint>& points) {
  std::string out = "level,method,slip,truth,fit,lower,upper\n";
  for (const auto& p : points) {
    out += format_double(p.level) + ',' + std::string(to_string(p.method)) + ',' +
           format_double(p.slip) + ',' + format_double(p.truth) + ',' + format_double(p.fit) + ',' +
           format_double(p.lower) + ',' + format_double(p.upper) + '\n';
  }
  return out;
}

std::string params_to_csv(const std::vector<TireParams>& draws) {
  std::string out = "B,C,D,E,Sh,Sv\n";
  for (const auto& p : draws) {
    out += format_double(p.B) + ',' + format_double(p.C) + ',' + format_double(p.D) + ',' +
           format_double(p.E) + ',' + format_double(p.Sh) + ',' + format_double(p.Sv) + '\n';
  }
  return out;
}

}  // namespace tirefit::io
