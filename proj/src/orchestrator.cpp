#include "gridtune/orchestrator.hpp"

#include "gridtune/error.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gridtune::opt {

using nlohmann::json;

void Hyperparameters::validate() const
{
    initial_schedules().validate();
    if (batch < 1)
        throw Error(ErrorCode::config, "hyperparameters.N must be at least 1");
    if (max_iterations < 1)
        throw Error(ErrorCode::config, "hyperparameters.max_iterations must be at least 1");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw Error(ErrorCode::config, "hyperparameters.tau must be positive");
    zo::AdamState::zeros(1, beta1, beta2, epsilon).validate();
}

zo::Schedules Hyperparameters::initial_schedules() const
{
    return {eta1, r1, gamma_eta, gamma_r, eta_min, r_min};
}

const char* to_string(StopReason r)
{
    return r == StopReason::converged ? "converged" : "max_iterations";
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path)
{
    json j;
    j["config_hash"] = c.config_hash;
    j["completed"] = c.completed;
    j["x"] = c.x;
    j["adam"] = {{"m", c.adam.m}, {"v", c.adam.v}, {"k", c.adam.k}, {"beta1", c.adam.beta1},
                 {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}};
    const auto& s = c.schedules;
    j["schedules"] = {{"eta", s.eta}, {"r", s.r}, {"gamma_eta", s.gamma_eta}, {"gamma_r", s.gamma_r},
                      {"eta_min", s.eta_min}, {"r_min", s.r_min}};
    j["rng_state"] = c.rng_state;
    j["terminated"] = c.terminated;

    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp);
        if (!out)
            throw Error(ErrorCode::io, "cannot write checkpoint " + tmp.string());
        out << j.dump(1) << '\n';
        if (!out)
            throw Error(ErrorCode::io, "cannot write checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open checkpoint " + path.string());
    try {
        const json j = json::parse(in);
        Checkpoint c;
        c.config_hash = j.at("config_hash").get<std::string>();
        c.completed = j.at("completed").get<std::uint64_t>();
        c.x = j.at("x").get<zo::Vector>();
        const auto& a = j.at("adam");
        c.adam.m = a.at("m").get<zo::Vector>();
        c.adam.v = a.at("v").get<zo::Vector>();
        c.adam.k = a.at("k").get<std::uint64_t>();
        c.adam.beta1 = a.at("beta1").get<double>();
        c.adam.beta2 = a.at("beta2").get<double>();
        c.adam.epsilon = a.at("epsilon").get<double>();
        const auto& s = j.at("schedules");
        c.schedules = {s.at("eta").get<double>(),       s.at("r").get<double>(),
                       s.at("gamma_eta").get<double>(), s.at("gamma_r").get<double>(),
                       s.at("eta_min").get<double>(),   s.at("r_min").get<double>()};
        c.rng_state = j.at("rng_state").get<std::string>();
        c.terminated = j.at("terminated").get<bool>();
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::checkpoint_mismatch, "malformed checkpoint " + path.string() + ": " + e.what());
    }
}

Optimizer::Optimizer(const Problem& problem, Hyperparameters hp, std::uint64_t seed, RunOptions options)
    : problem_(problem),
      hp_(hp),
      seed_(seed),
      options_(std::move(options)),
      pool_(options_.threads),
      box_(zo::BoxBounds::unit(problem.dimension()))
{
    hp_.validate();
    if (problem_.scenario_count() == 0)
        throw Error(ErrorCode::config, "problem has no scenarios");
}

Checkpoint Optimizer::initial_state(std::span<const double> x1) const
{
    if (x1.size() != problem_.dimension())
        throw Error(ErrorCode::invalid_dimension, "initial point has " + std::to_string(x1.size()) +
                                                      " entries, problem has " +
                                                      std::to_string(problem_.dimension()));
    Checkpoint c;
    c.config_hash = options_.config_hash;
    c.x = zo::project_box(x1, box_);
    c.adam = zo::AdamState::zeros(c.x.size(), hp_.beta1, hp_.beta2, hp_.epsilon);
    c.schedules = hp_.initial_schedules();
    c.rng_state = zo::Rng(seed_).save_state();
    return c;
}

RunResult Optimizer::run(std::span<const double> x1) { return loop(initial_state(x1)); }

RunResult Optimizer::resume(const Checkpoint& checkpoint)
{
    if (checkpoint.config_hash != options_.config_hash)
        throw Error(ErrorCode::checkpoint_mismatch, "checkpoint was written for config " +
                                                        checkpoint.config_hash + ", current config is " +
                                                        options_.config_hash);
    if (checkpoint.x.size() != problem_.dimension() || checkpoint.adam.m.size() != problem_.dimension() ||
        checkpoint.adam.v.size() != problem_.dimension())
        throw Error(ErrorCode::checkpoint_mismatch, "checkpoint dimension does not match the problem");
    return loop(checkpoint);
}

void Optimizer::write(const Checkpoint& c, const std::string& name) const
{
    if (!options_.checkpoint_dir)
        return;
    std::filesystem::create_directories(*options_.checkpoint_dir);
    save_checkpoint(c, *options_.checkpoint_dir / name);
}

RunResult Optimizer::loop(Checkpoint state)
{
    RunResult result;
    zo::Rng rng(seed_);
    rng.load_state(state.rng_state);

    while (!state.terminated && state.completed < hp_.max_iterations) {
        const Checkpoint before = state;
        IterationRecord rec;
        try {
            rec = iterate(state, rng);
        } catch (...) {
            write(before, "failed.json");
            throw;
        }
        result.simulations += rec.simulations;
        if (options_.on_iteration)
            options_.on_iteration(rec);
        result.records.push_back(std::move(rec));

        const bool last = state.terminated || state.completed >= hp_.max_iterations;
        if (options_.checkpoint_every > 0 && (state.completed % options_.checkpoint_every == 0 || last)) {
            write(state, "ckpt_" + std::to_string(state.completed) + ".json");
            write(state, "latest.json");
        }
    }

    result.x = state.x;
    result.x_physical = problem_.to_physical(state.x);
    result.iterations = state.completed;
    result.reason = state.terminated ? StopReason::converged : StopReason::max_iterations;
    if (options_.log_objective) {
        auto e = evaluate(problem_, state.x, pool_);
        result.final_objective = e.value;
        result.final_scenario_values = std::move(e.scenario_values);
        result.simulations += problem_.scenario_count();
    }
    result.last = std::move(state);
    return result;
}

IterationRecord Optimizer::iterate(Checkpoint& state, zo::Rng& rng)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t d = problem_.dimension();
    const std::size_t S = problem_.scenario_count();
    const std::size_t N = hp_.batch;
    const std::uint64_t k = state.completed + 1;
    const double r = state.schedules.r;

    IterationRecord rec;
    rec.k = k;
    rec.x = state.x;
    rec.x_physical = problem_.to_physical(state.x);
    rec.eta = state.schedules.eta;
    rec.r = r;

    // Directions are drawn here, before any fan-out.
    std::vector<zo::Vector> dirs;
    dirs.reserve(N);
    for (std::size_t n = 0; n < N; ++n)
        dirs.push_back(zo::sample_unit_direction(d, rng));

    std::vector<zo::Vector> points(2 * N, zo::Vector(d));
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < d; ++j) {
            points[2 * n][j] = state.x[j] + r * dirs[n][j];
            points[2 * n + 1][j] = state.x[j] - r * dirs[n][j];
        }

    const std::size_t grad_tasks = 2 * N * S;
    const std::size_t tasks = grad_tasks + (options_.log_objective ? S : 0);
    std::vector<double> values(tasks, 0.0);
    pool_.run(tasks, [&](std::size_t t) {
        const std::size_t s = t % S;
        const bool logging = t >= grad_tasks;
        const std::size_t p = t / S;   // 2n + sign
        std::span<const double> at = logging ? std::span<const double>(state.x) : std::span<const double>(points[p]);
        auto where = [&] {
            std::ostringstream os;
            os << "iteration " << k;
            if (logging)
                os << ", unperturbed iterate";
            else
                os << ", direction " << p / 2 << ", sign " << (p % 2 ? '-' : '+');
            os << ", scenario " << s;
            return os.str();
        };
        double f;
        try {
            f = problem_.evaluate_scenario(at, s);
        } catch (const Error& e) {
            throw Error(e.code(), where() + ": " + e.what());
        }
        if (!std::isfinite(f))
            throw OracleFailure(zo::Vector(at.begin(), at.end()), where() + ": non-finite objective value");
        values[t] = f;
    });
    rec.simulations = tasks;

    std::vector<zo::DirectionEval> evals(N);
    for (std::size_t n = 0; n < N; ++n) {
        evals[n].u = std::move(dirs[n]);
        for (std::size_t s = 0; s < S; ++s) {
            evals[n].f_plus += problem_.weight(s) * values[(2 * n) * S + s];
            evals[n].f_minus += problem_.weight(s) * values[(2 * n + 1) * S + s];
        }
    }
    const auto g = zo::multi_point_gradient(evals, r, d);
    rec.grad_norm = g.norm();

    if (options_.log_objective) {
        rec.scenario_values.assign(values.begin() + grad_tasks, values.end());
        rec.objective = 0.0;
        for (std::size_t s = 0; s < S; ++s)
            rec.objective += problem_.weight(s) * rec.scenario_values[s];
    }

    zo::Vector step;
    if (hp_.use_adam) {
        auto a = zo::adam_update(state.adam, g);
        state.adam = std::move(a.state);
        step = std::move(a.direction);
    } else {
        step = g.g;
    }
    zo::Vector next(d);
    for (std::size_t j = 0; j < d; ++j)
        next[j] = state.x[j] - state.schedules.eta * step[j];
    next = zo::project_box(next, box_);

    state.terminated = zo::converged(state.x, next, hp_.tau);
    state.x = std::move(next);
    state.schedules = zo::decay_schedules(state.schedules);
    state.rng_state = rng.save_state();
    state.completed = k;

    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

} // namespace gridtune::opt
