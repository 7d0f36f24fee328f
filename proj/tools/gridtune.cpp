// gridtune: tune inverter control parameters against the built-in grid simulator.

#include "gridtune/config.hpp"
#include "gridtune/error.hpp"
#include "gridtune/export.hpp"
#include "gridtune/orchestrator.hpp"
#include "gridtune/simulator.hpp"
#include "gridtune/worker_pool.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace gridtune;
using nlohmann::json;
namespace fs = std::filesystem;

struct OptimizeFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool no_adam = false;
    std::optional<std::size_t> batch;
    std::optional<std::size_t> max_iter;
};

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json(const json& j, const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

const opt::GridProblem* as_grid(const opt::Problem& p) { return dynamic_cast<const opt::GridProblem*>(&p); }

/// Applies flag overrides and returns where each overridable value came from.
json apply_overrides(io::RunConfig& c, const json& raw, const OptimizeFlags& f)
{
    auto source = [&](bool flag, const char* section, const char* key) -> std::string {
        if (flag)
            return "flag";
        const json* node = section ? (raw.contains(section) ? &raw.at(section) : nullptr) : &raw;
        return node && node->contains(key) ? "file" : "default";
    };
    json o{{"seed", source(f.seed.has_value(), nullptr, "seed")},
           {"use_adam", source(f.no_adam, "hyperparameters", "use_adam")},
           {"N", source(f.batch.has_value(), "hyperparameters", "N")},
           {"max_iterations", source(f.max_iter.has_value(), "hyperparameters", "max_iterations")}};
    if (f.seed)
        c.seed = *f.seed;
    if (f.no_adam)
        c.hyper.use_adam = false;
    if (f.batch)
        c.hyper.batch = *f.batch;
    if (f.max_iter)
        c.hyper.max_iterations = *f.max_iter;
    try {
        c.hyper.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::config, std::string("command line: ") + e.what());
    }
    return o;
}

json slot_table(const io::RunConfig& c, const opt::Problem& p)
{
    json slots = json::array();
    const auto names = p.parameter_names();
    for (std::size_t j = 0; j < names.size(); ++j) {
        json s{{"slot", j}, {"key", names[j]}};
        if (c.grid) {
            s["lower"] = c.grid->catalog.entries[j].lower;
            s["upper"] = c.grid->catalog.entries[j].upper;
            s["initial"] = c.grid->catalog.entries[j].initial;
        }
        slots.push_back(s);
    }
    return slots;
}

void export_trajectories(const opt::GridProblem& g, std::span<const double> x, const std::string& tag,
                         const fs::path& dir)
{
    fs::create_directories(dir);
    for (std::size_t s = 0; s < g.scenario_count(); ++s)
        io::write_trajectory_csv(g.trajectory(x, s), dir / (tag + "_" + g.scenarios().scenarios[s].name + ".csv"));
}

int optimize(io::RunConfig c, const json& overrides, const fs::path& out,
             const std::optional<opt::Checkpoint>& from)
{
    const auto problem = io::make_problem(c);
    const std::string hash = io::config_hash(c);
    const fs::path dir = io::make_run_dir(out, c.seed);
    const std::size_t threads = opt::resolve_thread_limit(c.threads);

    json manifest{{"tool", "gridtune"},
                  {"version", GRIDTUNE_VERSION},
                  {"started_utc", utc_now()},
                  {"config", io::config_to_json(c)},
                  {"config_hash", hash},
                  {"seed", c.seed},
                  {"threads", threads},
                  {"sources", overrides},
                  {"frequency_unit", "Hz"},
                  {"parameter_slots", slot_table(c, *problem)}};
    if (from)
        manifest["resumed_from_iteration"] = from->completed;
    write_json(manifest, dir / "manifest.json");

    io::IterationLog log(dir, problem->parameter_names(), problem->scenario_names());
    opt::RunOptions options;
    options.threads = threads;
    options.config_hash = hash;
    options.checkpoint_dir = dir / "checkpoints";
    options.checkpoint_every = c.log.checkpoint_every;
    options.log_objective = c.log.objective;
    options.on_iteration = [&](const opt::IterationRecord& r) {
        log.append(r);
        std::fprintf(stderr, "k=%llu f=%.6g |g|=%.4g eta=%.4g r=%.4g (%.0f ms)\n",
                     static_cast<unsigned long long>(r.k), r.objective, r.grad_norm, r.eta, r.r, r.wall_ms);
    };

    opt::Optimizer optimizer(*problem, c.hyper, c.seed, options);
    const auto x1 = io::initial_point(c);
    const auto result = from ? optimizer.resume(*from) : optimizer.run(x1);

    const auto names = problem->parameter_names();
    write_json(io::final_params_json(result, names), dir / "final_params.json");
    if (const auto* g = as_grid(*problem); g && c.log.trajectories) {
        const auto start = from ? from->x : zo::project_box(x1, zo::BoxBounds::unit(x1.size()));
        export_trajectories(*g, start, from ? "resumed" : "initial", dir / "trajectories");
        export_trajectories(*g, result.x, "final", dir / "trajectories");
    }

    manifest["finished_utc"] = utc_now();
    manifest["iterations"] = result.iterations;
    manifest["stop_reason"] = opt::to_string(result.reason);
    manifest["simulations"] = result.simulations;
    write_json(manifest, dir / "manifest.json");

    std::printf("%s\n", dir.string().c_str());
    if (std::isfinite(result.final_objective))
        std::printf("objective %s after %llu iterations (%s)\n", io::format_exact(result.final_objective).c_str(),
                    static_cast<unsigned long long>(result.iterations), opt::to_string(result.reason));
    return 0;
}

/// Normalized point for --params: "initial" or a params file.
zo::Vector params_point(const io::RunConfig& c, const std::string& params)
{
    if (params == "initial")
        return io::initial_point(c);
    if (!c.grid)
        throw Error(ErrorCode::config, "--params files are only supported for grid configs");
    const auto physical = io::read_params_file(params, c.grid->catalog);
    return zo::AffineScaling(c.grid->catalog.bounds()).normalize(physical);
}

int main_impl(int argc, char** argv)
{
    CLI::App app{"Zeroth-order tuning of inverter control parameters"};
    app.set_version_flag("--version", GRIDTUNE_VERSION);
    app.require_subcommand(1);

    OptimizeFlags of;
    auto* optimize_cmd = app.add_subcommand("optimize", "Run the optimizer and write a run directory");
    optimize_cmd->add_option("--config", of.config, "Run configuration file")->required();
    optimize_cmd->add_option("--seed", of.seed, "Random seed (overrides the config)");
    optimize_cmd->add_option("--out", of.out, "Output directory")->required();
    optimize_cmd->add_flag("--no-adam", of.no_adam, "Plain projected ZO steps without moment estimates");
    optimize_cmd->add_option("--batch", of.batch, "Directions per iteration (N)")->check(CLI::PositiveNumber);
    optimize_cmd->add_option("--max-iter", of.max_iter, "Iteration budget (K)")->check(CLI::PositiveNumber);

    std::string sim_config, sim_params, sim_scenario, sim_out;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one scenario and export its trajectory");
    simulate_cmd->add_option("--config", sim_config, "Run configuration file")->required();
    simulate_cmd->add_option("--params", sim_params, "Parameter file or \"initial\"")->required();
    simulate_cmd->add_option("--scenario", sim_scenario, "Scenario name")->required();
    simulate_cmd->add_option("--out", sim_out, "Output directory")->required();

    std::string eval_config, eval_params;
    auto* eval_cmd = app.add_subcommand("eval", "Print the weighted objective at a parameter set");
    eval_cmd->add_option("--config", eval_config, "Run configuration file")->required();
    eval_cmd->add_option("--params", eval_params, "Parameter file or \"initial\"")->required();

    std::string res_config, res_checkpoint, res_out;
    auto* resume_cmd = app.add_subcommand("resume", "Continue an optimization from a checkpoint");
    resume_cmd->add_option("--config", res_config, "Run configuration file")->required();
    resume_cmd->add_option("--checkpoint", res_checkpoint, "Checkpoint file")->required();
    resume_cmd->add_option("--out", res_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error[usage]: %s\n", e.what());
        return 2;
    }

    if (*optimize_cmd) {
        auto c = io::load_config(of.config);
        const auto overrides = apply_overrides(c, io::read_json_file(of.config), of);
        return optimize(std::move(c), overrides, of.out, std::nullopt);
    }
    if (*resume_cmd) {
        auto c = io::load_config(res_config);
        const auto ckpt = opt::load_checkpoint(res_checkpoint);
        return optimize(std::move(c), json{{"resume", res_checkpoint}}, res_out, ckpt);
    }
    if (*simulate_cmd) {
        const auto c = io::load_config(sim_config);
        if (!c.grid)
            throw Error(ErrorCode::config, "simulate needs a grid config");
        const auto problem = io::make_problem(c);
        const auto& g = *as_grid(*problem);
        const auto& names = g.scenario_names();
        const auto it = std::find(names.begin(), names.end(), sim_scenario);
        if (it == names.end())
            throw Error(ErrorCode::config, "unknown scenario \"" + sim_scenario + "\"");
        const auto s = static_cast<std::size_t>(it - names.begin());
        const auto traj = g.trajectory(params_point(c, sim_params), s);
        fs::create_directories(sim_out);
        const auto path = fs::path(sim_out) / (sim_scenario + ".csv");
        io::write_trajectory_csv(traj, path);
        std::printf("%s\n", path.string().c_str());
        return 0;
    }
    if (*eval_cmd) {
        const auto c = io::load_config(eval_config);
        const auto problem = io::make_problem(c);
        const opt::WorkerPool pool(opt::resolve_thread_limit(c.threads));
        const auto e = opt::evaluate(*problem, params_point(c, eval_params), pool);
        std::printf("%s\n", io::format_exact(e.value).c_str());
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return main_impl(argc, argv);
    } catch (const gridtune::Error& e) {
        std::fprintf(stderr, "error[%s]: %s\n", gridtune::to_string(e.code()), e.what());
        return gridtune::exit_status(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
        return 1;
    }
}
