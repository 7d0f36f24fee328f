#pragma once

// Result files of the command-line tool.

#include "gridtune/catalog.hpp"
#include "gridtune/grid.hpp"
#include "gridtune/orchestrator.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace gridtune::io {

/// Header "t,bus_<id>,...", one row per sample, 9 significant digits.
void write_trajectory_csv(const sim::FrequencyTrajectory& traj, const std::filesystem::path& path);

/// "%.17g": round-trips doubles.
std::string format_exact(double v);

/// <out>/<UTC timestamp>-<seed>, created (with a numeric suffix if taken).
std::filesystem::path make_run_dir(const std::filesystem::path& out, std::uint64_t seed);

/// Streams iterations.csv, params_trend.csv and scenarios.csv of one run.
class IterationLog {
public:
    IterationLog(const std::filesystem::path& dir, const std::vector<std::string>& parameter_names,
                 const std::vector<std::string>& scenario_names);

    void append(const opt::IterationRecord& rec);

private:
    std::ofstream iterations_;
    std::ofstream params_;
    std::ofstream scenarios_;
};

/// Named physical values, final objective and stop reason.
nlohmann::json final_params_json(const opt::RunResult& r, const std::vector<std::string>& names);

/// Physical parameter values from a params file: either {"params": {key: value}}
/// as written by optimize, or a plain {key: value} object. Every catalog key
/// must be present.
zo::Vector read_params_file(const std::filesystem::path& path, const ParameterCatalog& catalog);

} // namespace gridtune::io
