#pragma once

// Run configuration files: which problem to optimize, its scenarios and
// metric, the optimizer hyperparameters, seed and logging options.

#include "gridtune/grid_io.hpp"
#include "gridtune/objective.hpp"
#include "gridtune/orchestrator.hpp"
#include "gridtune/problem.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace gridtune::io {

/// Synthetic objective in place of a grid: "quadratic" (||x - target||^2) or
/// "linear" (sum of x_j), both over [0,1]^d.
struct Benchmark {
    std::string kind;
    std::size_t dimension = 0;
    zo::Vector target;       ///< quadratic only
    zo::Vector initial;      ///< empty: centre of the box

    friend bool operator==(const Benchmark&, const Benchmark&) = default;
};

struct LogOptions {
    bool objective = true;          ///< extra unperturbed evaluation per iteration
    std::size_t checkpoint_every = 1;
    bool trajectories = true;       ///< export initial/final trajectories after optimize

    friend bool operator==(const LogOptions&, const LogOptions&) = default;
};

struct RunConfig {
    std::string name;
    /// Absolute path of the grid file, or empty when the grid is inline.
    std::string grid_path;
    std::optional<GridFile> grid;
    std::optional<Benchmark> benchmark;
    objective::ScenarioSet scenarios;
    opt::MetricSettings metric;
    opt::Hyperparameters hyper;
    std::uint64_t seed = 1;
    std::size_t threads = 0;        ///< 0: all hardware threads
    LogOptions log;

    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Relative grid paths resolve against base_dir.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json config_to_json(const RunConfig& c);

RunConfig load_config(const std::filesystem::path& path);
void write_config(const RunConfig& c, const std::filesystem::path& path);

/// FNV-1a over the canonical form of everything that defines the optimization
/// trajectory. Seed, thread count, iteration budget and log options are excluded
/// so a run may be resumed with a larger budget or a different pool size.
std::string config_hash(const RunConfig& c);

nlohmann::json disturbance_to_json(const sim::Disturbance& d);
sim::Disturbance disturbance_from_json(const nlohmann::json& j, const std::string& path);

std::unique_ptr<opt::Problem> make_problem(const RunConfig& c);
/// Normalized starting point: the catalog's initial values, or the benchmark's.
zo::Vector initial_point(const RunConfig& c);

} // namespace gridtune::io
