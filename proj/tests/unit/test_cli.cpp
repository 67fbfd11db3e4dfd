#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/track_sim.hpp"
#include "tirefit/io.hpp"
#include "tirefit_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tirefit;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("TIREFIT_TEST_TMP");
  fs::path dir = (env ? fs::path(env) : fs::temp_directory_path() / "tirefit_cli_test") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  args.insert(args.begin(), "--quiet");
  const int code = tirefit::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json error_line(const Run& r) { return json::parse(r.err.substr(0, r.err.find('\n'))); }

std::string slurp(const fs::path& p) { return tirefit::io::read_text(p); }

// Short closed-loop track log plus a vehicle file.
struct Fixture {
  fs::path dir;
  fs::path log;
  fs::path vehicle;

  explicit Fixture(const std::string& name, testing::TrackSimConfig cfg = {}) : dir(scratch(name)) {
    if (cfg.manoeuvre_time == testing::TrackSimConfig{}.manoeuvre_time) cfg.manoeuvre_time = 20.0;
    log = dir / "log.csv";
    vehicle = dir / "vehicle.json";
    io::write_text_atomic(log, testing::sensor_log_to_csv(testing::simulate_track(cfg)));
    io::write_text_atomic(vehicle, io::to_json(testing::sim_vehicle()).dump(2));
  }
};

}  // namespace

TEST_CASE("usage errors") {
  auto r = run({"fit"});
  CHECK(r.code == 2);
  CHECK(error_line(r)["error"] == "Usage");
  r = run({"frobnicate", "-o", "x"});
  CHECK(r.code == 2);
  std::ostringstream out, err;
  CHECK(tirefit::cli::run({"--version"}, out, err) == 0);
  CHECK_FALSE(out.str().empty());
}

TEST_CASE("preprocess then fit") {
  Fixture fx("pipeline");
  const auto pre = fx.dir / "pre";
  auto r = run({"preprocess", fx.log.string(), "--vehicle", fx.vehicle.string(), "-o", pre.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(pre / "front_lateral.csv"));
  CHECK(fs::exists(pre / "front_lateral.shifts.json"));
  CHECK(fs::exists(pre / "report.json"));
  const auto report = json::parse(slurp(pre / "report.json"));
  CHECK(report["gear_channel_present"] == true);
  const auto echo = json::parse(slurp(pre / "config.json"));
  CHECK(echo["command"] == "preprocess");

  SUBCASE("simplex fit picks up the shift sidecar") {
    const auto out = fx.dir / "fit_nm";
    r = run({"fit", (pre / "front_lateral.csv").string(), "--method", "nelder-mead", "-o", out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto res = json::parse(slurp(out / "result.json"));
    const auto shifts = json::parse(slurp(pre / "front_lateral.shifts.json"));
    CHECK(res["Sh"] == shifts["Sh"]);
    CHECK(res["mean"]["D"].get<double>() == doctest::Approx(1.3).epsilon(0.05));
    CHECK_FALSE(fs::exists(out / "posterior_samples.csv"));
  }
  SUBCASE("preprocess is deterministic") {
    const auto again = fx.dir / "pre2";
    r = run({"preprocess", "--config", (pre / "config.json").string(), "-o", again.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(slurp(again / "front_lateral.csv") == slurp(pre / "front_lateral.csv"));
    CHECK(slurp(again / "report.json") == slurp(pre / "report.json"));
  }
}

TEST_CASE("input errors map to exit codes") {
  SUBCASE("missing lateral velocity column") {
    Fixture fx("missing_vy");
    auto table = io::read_csv(fx.log);
    const auto idx = static_cast<std::size_t>(table.column_index(columns::kVy));
    table.header.erase(table.header.begin() + static_cast<long>(idx));
    for (auto& row : table.rows) row.erase(row.begin() + static_cast<long>(idx));
    io::write_text_atomic(fx.log, io::to_csv(table));
    const auto r = run({"preprocess", fx.log.string(), "--vehicle", fx.vehicle.string(), "-o",
                        (fx.dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(error_line(r)["message"].get<std::string>().find(columns::kVy) != std::string::npos);
  }
  SUBCASE("log without a straight-line window") {
    testing::TrackSimConfig cfg;
    cfg.straight_time = 0.0;
    Fixture fx("no_straight", cfg);
    const auto r = run({"preprocess", fx.log.string(), "--vehicle", fx.vehicle.string(), "-o",
                        (fx.dir / "out").string()});
    CHECK(r.code == 3);
    CHECK(error_line(r)["error"] == "InsufficientCalibrationData");
  }
  SUBCASE("malformed config names the field") {
    const auto dir = scratch("bad_config");
    io::write_text_atomic(dir / "study.json", R"({"n_points": "many"})");
    const auto r = run({"study", "--config", (dir / "study.json").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(error_line(r)["message"].get<std::string>().find("config.n_points") != std::string::npos);
  }
  SUBCASE("unknown config key") {
    const auto dir = scratch("unknown_key");
    io::write_text_atomic(dir / "sobol.json", R"({"sampels": 5000})");
    const auto r = run({"sobol", "--config", (dir / "sobol.json").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(error_line(r)["message"].get<std::string>().find("config.sampels") != std::string::npos);
  }
  SUBCASE("config written for another command") {
    const auto dir = scratch("wrong_command");
    io::write_text_atomic(dir / "c.json", R"({"command": "fit"})");
    const auto r = run({"sobol", "--config", (dir / "c.json").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 2);
  }
  SUBCASE("missing dataset file") {
    const auto dir = scratch("missing_data");
    const auto r = run({"fit", (dir / "nope.csv").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(error_line(r)["error"] == "Io");
  }
}

TEST_CASE("fit determinism and config echo") {
  const auto dir = scratch("fit_echo");
  std::mt19937_64 rng(5);
  const auto data = generate_synthetic(TireParams{}, 0.5, 200, 0.002, 0.02, rng);
  io::write_text_atomic(dir / "data.csv", io::dataset_to_csv(data));
  const std::vector<std::string> base = {"fit", (dir / "data.csv").string(), "--seed", "11",
                                         "--steps", "300", "--posterior-samples", "50"};
  auto with_out = [&](const std::string& name) {
    auto args = base;
    args.push_back("-o");
    args.push_back((dir / name).string());
    return args;
  };
  auto r = run(with_out("a"));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  r = run(with_out("b"));
  REQUIRE(r.code == 0);
  for (const char* f : {"result.json", "posterior_samples.csv", "config.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  r = run({"fit", "--config", (dir / "a" / "config.json").string(), "-o", (dir / "c").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(dir / "a" / "result.json") == slurp(dir / "c" / "result.json"));
  CHECK(slurp(dir / "a" / "posterior_samples.csv") == slurp(dir / "c" / "posterior_samples.csv"));

  SUBCASE("flags override the config") {
    r = run({"fit", "--config", (dir / "a" / "config.json").string(), "--seed", "12", "--fixed-c",
             "1.8", "--no-trace", "-o", (dir / "d").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto echo = json::parse(slurp(dir / "d" / "config.json"));
    CHECK(echo["seed"] == 12);
    CHECK(echo["svi"]["steps"] == 300);
    const auto res = json::parse(slurp(dir / "d" / "result.json"));
    CHECK(res["mean"]["C"] == 1.8);
    CHECK(res["fixed_c"] == 1.8);
    CHECK_FALSE(res.contains("trace"));
    CHECK(io::read_csv(dir / "d" / "posterior_samples.csv").rows.size() == 50);
  }
  SUBCASE("fixed C outside its bounds is rejected") {
    r = run({"fit", (dir / "data.csv").string(), "--fixed-c", "5", "-o", (dir / "e").string()});
    CHECK(r.code == 2);
  }
}

TEST_CASE("sobol command") {
  const auto dir = scratch("sobol");
  auto r = run({"sobol", "--grid", "0,0.01,0.09", "--samples", "4096", "--seed", "3", "-o",
                (dir / "a").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto t = io::read_csv(dir / "a" / "sobol.csv");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].back() == "1");
  CHECK(t.rows[1].back() == "0");
  r = run({"sobol", "--config", (dir / "a" / "config.json").string(), "-o", (dir / "b").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "a" / "sobol.csv") == slurp(dir / "b" / "sobol.csv"));
  r = run({"sobol", "--samples", "10", "-o", (dir / "c").string()});
  CHECK(r.code == 2);
}

TEST_CASE("study command") {
  const auto dir = scratch("study");
  const auto r = run({"study", "--levels", "0.3,0.75", "--points", "100", "--steps", "200",
                      "--methods", "nelder-mead", "-o", (dir / "a").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto t = io::read_csv(dir / "a" / "study.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "nelder-mead");
  CHECK(fs::exists(dir / "a" / "curves.csv"));
  const auto echo = json::parse(slurp(dir / "a" / "config.json"));
  CHECK(echo["levels"] == json::array({0.3, 0.75}));
}
