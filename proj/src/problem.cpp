#include "gridtune/problem.hpp"

#include "gridtune/error.hpp"
#include "gridtune/simulator.hpp"

#include <sstream>
#include <utility>

namespace gridtune::opt {

std::vector<std::string> Problem::parameter_names() const
{
    std::vector<std::string> names;
    for (std::size_t j = 0; j < dimension(); ++j)
        names.push_back("x" + std::to_string(j));
    return names;
}

std::vector<std::string> Problem::scenario_names() const
{
    std::vector<std::string> names;
    for (std::size_t s = 0; s < scenario_count(); ++s)
        names.push_back("s" + std::to_string(s));
    return names;
}

zo::Vector Problem::to_physical(std::span<const double> x) const { return {x.begin(), x.end()}; }

Evaluation evaluate(const Problem& problem, std::span<const double> x, const WorkerPool& pool)
{
    Evaluation e;
    e.scenario_values.assign(problem.scenario_count(), 0.0);
    pool.run(problem.scenario_count(), [&](std::size_t s) { e.scenario_values[s] = problem.evaluate_scenario(x, s); });
    for (std::size_t s = 0; s < problem.scenario_count(); ++s)
        e.value += problem.weight(s) * e.scenario_values[s];
    return e;
}

FunctionProblem::FunctionProblem(std::size_t dimension, std::function<double(std::span<const double>)> f)
    : dimension_(dimension), f_(std::move(f))
{
    if (dimension_ == 0)
        throw Error(ErrorCode::invalid_dimension, "problem dimension must be at least 1");
}

double FunctionProblem::evaluate_scenario(std::span<const double> x, std::size_t) const { return f_(x); }

FunctionProblem quadratic_problem(zo::Vector target)
{
    const std::size_t d = target.size();
    return FunctionProblem(d, [target = std::move(target)](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            s += (x[j] - target[j]) * (x[j] - target[j]);
        return s;
    });
}

FunctionProblem linear_sum_problem(std::size_t dimension)
{
    return FunctionProblem(dimension, [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x)
            s += v;
        return s;
    });
}

GridProblem::GridProblem(sim::GridModel model, io::ParameterCatalog catalog, objective::ScenarioSet scenarios,
                         MetricSettings metric)
    : model_(std::move(model)),
      catalog_(std::move(catalog)),
      scenarios_(std::move(scenarios)),
      metric_(std::move(metric)),
      scaling_(catalog_.bounds())
{
    model_.validate();
    catalog_.validate(model_);
    scenarios_.validate();
    for (const auto& s : scenarios_.scenarios)
        s.disturbance.validate(model_);
    if (metric_.n_opt.empty())
        for (const auto& u : model_.ibrs)
            metric_.n_opt.push_back(u.bus);
    for (std::size_t s = 0; s < scenarios_.size(); ++s)
        metric_config(s).validate();
    for (int id : metric_.n_opt)
        if (!model_.find_bus(id))
            throw Error(ErrorCode::config, "metric.n_opt references unknown bus " + std::to_string(id));
}

double GridProblem::weight(std::size_t scenario) const { return scenarios_.scenarios.at(scenario).weight; }

std::vector<std::string> GridProblem::scenario_names() const
{
    std::vector<std::string> names;
    for (const auto& s : scenarios_.scenarios)
        names.push_back(s.name);
    return names;
}

objective::MetricConfig GridProblem::metric_config(std::size_t scenario) const
{
    objective::MetricConfig cfg;
    cfg.lambda = metric_.lambda;
    cfg.t_d = scenarios_.scenarios.at(scenario).disturbance.t_d;
    cfg.t_o = metric_.t_o;
    cfg.horizon = model_.numerics.horizon;
    cfg.dt = model_.numerics.dt_sample;
    cfg.n_opt = metric_.n_opt;
    cfg.omega0 = model_.bases.frequency_hz;
    return cfg;
}

sim::GridModel GridProblem::model_at(std::span<const double> x) const
{
    sim::GridModel m = model_;
    io::apply_parameters(m, catalog_, scaling_.denormalize(x));
    return m;
}

sim::FrequencyTrajectory GridProblem::trajectory(std::span<const double> x, std::size_t scenario) const
{
    const auto physical = scaling_.denormalize(x);
    try {
        sim::GridModel m = model_;
        io::apply_parameters(m, catalog_, physical);
        return sim::simulate(m, scenarios_.scenarios.at(scenario).disturbance,
                             sim::SimulationSettings::from(m.numerics));
    } catch (const Error& e) {
        std::ostringstream os;
        os << e.what() << " [scenario " << scenarios_.scenarios.at(scenario).name << ", parameters";
        for (std::size_t j = 0; j < physical.size(); ++j)
            os << (j ? ", " : " ") << catalog_.entries[j].key() << "=" << physical[j];
        os << "]";
        throw Error(e.code(), os.str());
    }
}

double GridProblem::evaluate_scenario(std::span<const double> x, std::size_t scenario) const
{
    return objective::metric(trajectory(x, scenario), metric_config(scenario));
}

} // namespace gridtune::opt
