#pragma once

#include <filesystem>
#include <ostream>

#include "settings.hpp"

namespace tirefit::cli {

// Each command writes its artifacts into out_dir, then the config echo
// (config.json). A one-line summary goes to `summary`.
void cmd_preprocess(const PreprocessSettings& s, const fs::path& out_dir, std::ostream& summary);
void cmd_fit(const FitSettings& s, const fs::path& out_dir, std::ostream& summary);
void cmd_study(const StudySettings& s, const fs::path& out_dir, std::ostream& summary);
void cmd_sobol(const SobolSettings& s, const fs::path& out_dir, std::ostream& summary);

// <dir>/<stem>.shifts.json next to a dataset file.
fs::path shifts_sidecar(const fs::path& dataset);

inline constexpr const char* kEchoFile = "config.json";

}  // namespace tirefit::cli
