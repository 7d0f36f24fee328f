#pragma once

#include "gridtune/grid.hpp"

#include <span>
#include <string>
#include <vector>

namespace gridtune::objective {

/// Weighted transient metric over the buses in n_opt:
///   sum_i [ lambda max_{t >= t_d} |w_it - w0| + (1 - lambda) var_{t >= t_o}(w_i) ]
/// with the population variance. Frequencies and w0 share one unit (Hz).
struct MetricConfig {
    double lambda = 0.5;
    double t_d = 1.0;
    double t_o = 4.5;
    double horizon = 5.0;
    double dt = 5e-3;
    std::vector<int> n_opt;
    double omega0 = 60.0;

    void validate() const;
};

/// Sample index ranges of the deviation and oscillation windows.
struct Windows {
    std::size_t dev_begin = 0;
    std::size_t osc_begin = 0;
    std::size_t end = 0;   ///< one past the last sample
};

/// First sample at or after each window start; throws if the trajectory does
/// not match the configured grid or does not cover the windows.
Windows metric_windows(const sim::FrequencyTrajectory& traj, const MetricConfig& cfg);

/// Per-bus terms: deviation (max |w - w0| over the deviation window) and
/// variance (over the oscillation window).
struct BusTerms {
    double max_deviation = 0.0;
    double variance = 0.0;
};

BusTerms bus_terms(std::span<const double> hz, const Windows& w, double omega0);

double metric(const sim::FrequencyTrajectory& traj, const MetricConfig& cfg);

struct Scenario {
    std::string name;
    sim::Disturbance disturbance;
    double weight = 1.0;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;

    std::size_t size() const noexcept { return scenarios.size(); }
    void validate() const;
    const Scenario& find(const std::string& name) const;

    friend bool operator==(const ScenarioSet&, const ScenarioSet&) = default;
};

/// sum_s alpha_s f_s
double aggregate(std::span<const double> values, const ScenarioSet& set);

} // namespace gridtune::objective
