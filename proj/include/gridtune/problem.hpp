#pragma once

// Black-box objectives seen by the optimizer: a normalized decision vector in,
// one value per scenario out.

#include "gridtune/catalog.hpp"
#include "gridtune/grid.hpp"
#include "gridtune/objective.hpp"
#include "gridtune/worker_pool.hpp"
#include "gridtune/zo.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gridtune::opt {

class Problem {
public:
    virtual ~Problem() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::size_t scenario_count() const = 0;
    virtual double weight(std::size_t scenario) const = 0;
    /// Value of one scenario at a normalized point. Called concurrently.
    virtual double evaluate_scenario(std::span<const double> x, std::size_t scenario) const = 0;

    virtual std::vector<std::string> parameter_names() const;
    virtual std::vector<std::string> scenario_names() const;
    /// Physical parameter values for a normalized point (identity by default).
    virtual zo::Vector to_physical(std::span<const double> x) const;
};

struct Evaluation {
    double value = 0.0;
    std::vector<double> scenario_values;
};

/// Weighted sum over all scenarios, scenarios evaluated on the pool.
Evaluation evaluate(const Problem& problem, std::span<const double> x, const WorkerPool& pool);

/// Single-scenario problem backed by a plain function of the normalized point.
class FunctionProblem : public Problem {
public:
    FunctionProblem(std::size_t dimension, std::function<double(std::span<const double>)> f);

    std::size_t dimension() const override { return dimension_; }
    std::size_t scenario_count() const override { return 1; }
    double weight(std::size_t) const override { return 1.0; }
    double evaluate_scenario(std::span<const double> x, std::size_t scenario) const override;

private:
    std::size_t dimension_;
    std::function<double(std::span<const double>)> f_;
};

/// Synthetic benchmark f(x) = ||x - target||^2.
FunctionProblem quadratic_problem(zo::Vector target);
/// Synthetic benchmark f(x) = sum_j x_j, minimized over [0,1]^d at the origin.
FunctionProblem linear_sum_problem(std::size_t dimension);

/// Which buses enter the metric and how its two terms are mixed.
struct MetricSettings {
    double lambda = 0.5;
    double t_o = 4.5;
    std::vector<int> n_opt;   ///< empty: every IBR bus

    friend bool operator==(const MetricSettings&, const MetricSettings&) = default;
};

/// Transient frequency performance of the simulated grid, one value per
/// disturbance scenario. Decision slots follow the parameter catalog and are
/// normalized by its feasible intervals.
class GridProblem : public Problem {
public:
    GridProblem(sim::GridModel model, io::ParameterCatalog catalog, objective::ScenarioSet scenarios,
                MetricSettings metric);

    std::size_t dimension() const override { return catalog_.size(); }
    std::size_t scenario_count() const override { return scenarios_.size(); }
    double weight(std::size_t scenario) const override;
    double evaluate_scenario(std::span<const double> x, std::size_t scenario) const override;

    std::vector<std::string> parameter_names() const override { return catalog_.keys(); }
    std::vector<std::string> scenario_names() const override;
    zo::Vector to_physical(std::span<const double> x) const override { return scaling_.denormalize(x); }

    zo::Vector initial_point() const { return scaling_.normalize(catalog_.initial()); }
    objective::MetricConfig metric_config(std::size_t scenario) const;
    /// Model with the physical parameters of normalized point x installed.
    sim::GridModel model_at(std::span<const double> x) const;
    sim::FrequencyTrajectory trajectory(std::span<const double> x, std::size_t scenario) const;

    const sim::GridModel& model() const noexcept { return model_; }
    const io::ParameterCatalog& catalog() const noexcept { return catalog_; }
    const objective::ScenarioSet& scenarios() const noexcept { return scenarios_; }

private:
    sim::GridModel model_;
    io::ParameterCatalog catalog_;
    objective::ScenarioSet scenarios_;
    MetricSettings metric_;
    zo::AffineScaling scaling_;
};

} // namespace gridtune::opt
