#pragma once

#include "gridtune/problem.hpp"
#include "gridtune/zo.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gridtune::opt {

struct Hyperparameters {
    double eta1 = 0.1;
    double r1 = 0.1;
    double gamma_eta = 0.9;
    double gamma_r = 0.95;
    double eta_min = 0.001;
    double r_min = 0.001;
    std::size_t batch = 2;              ///< N
    std::size_t max_iterations = 70;    ///< K
    double tau = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.99;
    double epsilon = 1e-8;
    bool use_adam = true;

    void validate() const;
    zo::Schedules initial_schedules() const;

    friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct IterationRecord {
    std::uint64_t k = 0;
    /// f(x_k) at the unperturbed iterate; NaN when objective logging is off.
    double objective = std::numeric_limits<double>::quiet_NaN();
    zo::Vector x;            ///< normalized iterate x_k
    zo::Vector x_physical;
    double grad_norm = 0.0;
    double eta = 0.0;        ///< eta_k and r_k used in this iteration
    double r = 0.0;
    double wall_ms = 0.0;
    std::vector<double> scenario_values;
    std::size_t simulations = 0;
};

/// Optimizer state after `completed` iterations.
struct Checkpoint {
    std::string config_hash;
    std::uint64_t completed = 0;
    zo::Vector x;
    zo::AdamState adam;
    zo::Schedules schedules;
    std::string rng_state;
    bool terminated = false;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

enum class StopReason { converged, max_iterations };
const char* to_string(StopReason r);

struct RunResult {
    zo::Vector x;
    zo::Vector x_physical;
    std::vector<IterationRecord> records;
    StopReason reason = StopReason::max_iterations;
    std::uint64_t iterations = 0;
    double final_objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> final_scenario_values;
    std::size_t simulations = 0;
    Checkpoint last;
};

struct RunOptions {
    std::size_t threads = 1;
    std::string config_hash;
    std::optional<std::filesystem::path> checkpoint_dir;
    std::size_t checkpoint_every = 1;   ///< 0: only on failure
    bool log_objective = true;
    std::function<void(const IterationRecord&)> on_iteration;
};

class Optimizer {
public:
    Optimizer(const Problem& problem, Hyperparameters hp, std::uint64_t seed, RunOptions options = {});

    /// Runs from x1 (normalized, projected onto the box first).
    RunResult run(std::span<const double> x1);
    /// Continues from a checkpoint. Refuses one written under another config.
    RunResult resume(const Checkpoint& checkpoint);

    /// State before the first iteration.
    Checkpoint initial_state(std::span<const double> x1) const;

private:
    RunResult loop(Checkpoint state);
    IterationRecord iterate(Checkpoint& state, zo::Rng& rng);
    void write(const Checkpoint& c, const std::string& name) const;

    const Problem& problem_;
    Hyperparameters hp_;
    std::uint64_t seed_;
    RunOptions options_;
    WorkerPool pool_;
    zo::BoxBounds box_;
};

} // namespace gridtune::opt
