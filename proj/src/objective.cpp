#include "gridtune/objective.hpp"

#include "gridtune/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gridtune::objective {

void MetricConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::config, "metric: " + msg); };
    if (!(lambda >= 0.0 && lambda <= 1.0))
        fail("lambda must lie in [0, 1]");
    if (!(t_d < t_o && t_o < horizon))
        fail("windows must satisfy t_d < t_o < horizon");
    if (!(dt > 0.0))
        fail("dt must be positive");
    if (n_opt.empty())
        fail("n_opt must name at least one bus");
    if (!std::isfinite(omega0))
        fail("omega0 must be finite");
}

namespace {

std::size_t first_index_at_or_after(double t, double t_start, double dt)
{
    const double steps = (t - t_start) / dt;
    return static_cast<std::size_t>(std::max(0.0, std::ceil(steps - 1e-9)));
}

} // namespace

Windows metric_windows(const sim::FrequencyTrajectory& traj, const MetricConfig& cfg)
{
    cfg.validate();
    if (std::abs(traj.dt - cfg.dt) > 1e-12 * cfg.dt)
        throw Error(ErrorCode::config, "metric: trajectory sample step does not match dt");
    if (cfg.t_d < traj.t_start - 1e-12)
        throw Error(ErrorCode::config, "metric: trajectory starts after the disturbance");
    const std::size_t n = traj.samples();
    const std::size_t expected = sim::sample_count(traj.t_start, cfg.horizon, cfg.dt);
    if (n < expected)
        throw Error(ErrorCode::config, "metric: trajectory does not reach the horizon");

    Windows w;
    w.dev_begin = first_index_at_or_after(cfg.t_d, traj.t_start, cfg.dt);
    w.osc_begin = first_index_at_or_after(cfg.t_o, traj.t_start, cfg.dt);
    w.end = expected;
    if (w.osc_begin >= w.end || w.dev_begin >= w.end)
        throw Error(ErrorCode::config, "metric: empty evaluation window");
    return w;
}

BusTerms bus_terms(std::span<const double> hz, const Windows& w, double omega0)
{
    BusTerms t;
    for (std::size_t i = w.dev_begin; i < w.end; ++i)
        t.max_deviation = std::max(t.max_deviation, std::abs(hz[i] - omega0));

    // offsets from the first window sample keep a constant window at exactly zero
    const auto count = static_cast<double>(w.end - w.osc_begin);
    const double ref = hz[w.osc_begin];
    double mean = 0.0;
    for (std::size_t i = w.osc_begin; i < w.end; ++i)
        mean += hz[i] - ref;
    mean /= count;
    double ss = 0.0;
    for (std::size_t i = w.osc_begin; i < w.end; ++i) {
        const double e = (hz[i] - ref) - mean;
        ss += e * e;
    }
    t.variance = ss / count;
    return t;
}

double metric(const sim::FrequencyTrajectory& traj, const MetricConfig& cfg)
{
    const Windows w = metric_windows(traj, cfg);
    double total = 0.0;
    for (int id : cfg.n_opt) {
        const auto idx = traj.find_bus(id);
        if (!idx)
            throw Error(ErrorCode::config, "metric: bus " + std::to_string(id) + " is not in the trajectory");
        const BusTerms t = bus_terms(traj.hz[*idx], w, cfg.omega0);
        total += cfg.lambda * t.max_deviation + (1.0 - cfg.lambda) * t.variance;
    }
    return total;
}

void ScenarioSet::validate() const
{
    if (scenarios.empty())
        throw Error(ErrorCode::config, "scenarios: at least one scenario is required");
    std::set<std::string> names;
    for (const auto& s : scenarios) {
        if (!std::isfinite(s.weight) || s.weight < 0.0)
            throw Error(ErrorCode::config, "scenarios." + s.name + ".weight must be finite and nonnegative");
        if (!names.insert(s.name).second)
            throw Error(ErrorCode::config, "scenarios: duplicate name '" + s.name + "'");
    }
}

const Scenario& ScenarioSet::find(const std::string& name) const
{
    for (const auto& s : scenarios)
        if (s.name == name)
            return s;
    throw Error(ErrorCode::config, "no scenario named '" + name + "'");
}

double aggregate(std::span<const double> values, const ScenarioSet& set)
{
    if (values.size() != set.size()) {
        std::ostringstream os;
        os << "aggregate: " << values.size() << " values for " << set.size() << " scenarios";
        throw Error(ErrorCode::invalid_dimension, os.str());
    }
    double total = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s) {
        if (!std::isfinite(values[s]))
            throw Error(ErrorCode::oracle_failure, "aggregate: non-finite scenario value");
        total += set.scenarios[s].weight * values[s];
    }
    return total;
}

} // namespace gridtune::objective
