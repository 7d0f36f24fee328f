// Acceptance run: one PASS/FAIL line per criterion.
//
//   gridtune_acceptance [--only 3,8] [--threads N] [--strict] [--report FILE]
//
// Exit status is 0 once every selected criterion has a verdict; with --strict
// any FAIL makes it 1. A criterion that throws is reported as FAIL.

#include "CLI11.hpp"

#include "gridtune/config.hpp"
#include "gridtune/error.hpp"
#include "gridtune/grid_io.hpp"
#include "gridtune/objective.hpp"
#include "gridtune/orchestrator.hpp"
#include "gridtune/problem.hpp"
#include "gridtune/simulator.hpp"
#include "gridtune/worker_pool.hpp"
#include "gridtune/zo.hpp"
#include "oracles.hpp"
#include "test_paths.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace gridtune;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::size_t g_threads = 0;

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const zo::Vector quadratic_target = {0.3, 0.7, 0.45, 0.25, 0.6, 0.8, 0.35, 0.55, 0.2, 0.65};

opt::Hyperparameters quadratic_hyper(std::size_t batch = 4)
{
    opt::Hyperparameters h;
    h.batch = batch;
    h.max_iterations = 200;
    return h;
}

opt::RunResult run_quadratic(std::uint64_t seed, const opt::Hyperparameters& h)
{
    auto p = opt::quadratic_problem(quadratic_target);
    return opt::Optimizer(p, h, seed).run(zo::Vector(10, 0.5));
}

double sq_dist(const zo::Vector& x, const zo::Vector& y)
{
    double s = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        s += (x[j] - y[j]) * (x[j] - y[j]);
    return s;
}

Verdict estimator()
{
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> mag(1.0, 2.0);
    std::bernoulli_distribution sign(0.5);
    const std::size_t d = 5;
    zo::Vector a(d);
    for (auto& v : a)
        v = sign(gen) ? mag(gen) : -mag(gen);
    const auto f = [&](std::span<const double> x) { return std::inner_product(a.begin(), a.end(), x.begin(), 0.0); };
    const zo::Vector x(d, 0.3);

    // 10^6 draws keep the standard error near 0.3% of the smallest |a_j|
    const std::size_t draws = 1000000;
    zo::Rng rng(7);
    zo::Vector mean(d, 0.0);
    double radius_gap = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const auto u = zo::sample_unit_direction(d, rng);
        const auto g = zo::two_point_gradient(f, x, 0.1, u);
        for (std::size_t j = 0; j < d; ++j)
            mean[j] += g[j];
        if (i < 1000) {
            for (double r : {1e-3, 1.0}) {
                const auto h = zo::two_point_gradient(f, x, r, u);
                for (std::size_t j = 0; j < d; ++j)
                    radius_gap = std::max(radius_gap, std::abs(h[j] - g[j]));
            }
        }
    }
    double worst = 0;
    for (std::size_t j = 0; j < d; ++j)
        worst = std::max(worst, std::abs(mean[j] / draws - a[j]) / std::abs(a[j]));
    return {worst <= 0.02 && radius_gap <= 1e-9,
            "max relative error " + fmt("%.4f", worst) + ", radius gap " + fmt("%.2e", radius_gap)};
}

Verdict adam_algebra()
{
    std::mt19937_64 gen(202);
    std::uniform_real_distribution<double> beta(0.0, 0.999);
    std::normal_distribution<double> normal(0.0, 3.0);
    double first = 0, seq = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t d = 4;
        const double b1 = beta(gen), b2 = beta(gen);
        auto state = zo::AdamState::zeros(d, b1, b2, 1e-8);
        std::vector<zo::GradientEstimate> gs(3);
        for (auto& g : gs) {
            g.g.resize(d);
            for (auto& v : g.g)
                v = normal(gen);
        }
        const auto s1 = zo::adam_update(state, gs[0]);
        for (std::size_t j = 0; j < d; ++j) {
            const double g = gs[0].g[j];
            first = std::max(first, std::abs(s1.m_hat[j] - g) / std::abs(g));
            first = std::max(first, std::abs(s1.v_hat[j] - g * g) / (g * g));
        }
        // three steps by hand in extended precision
        std::vector<long double> m(d, 0), v(d, 0);
        auto cur = state;
        for (int k = 1; k <= 3; ++k) {
            const auto step = zo::adam_update(cur, gs[k - 1]);
            for (std::size_t j = 0; j < d; ++j) {
                const long double g = gs[k - 1].g[j];
                m[j] = b1 * m[j] + (1 - static_cast<long double>(b1)) * g;
                v[j] = b2 * v[j] + (1 - static_cast<long double>(b2)) * g * g;
                const long double mh = m[j] / (1 - std::pow(static_cast<long double>(b1), k));
                const long double vh = v[j] / (1 - std::pow(static_cast<long double>(b2), k));
                const long double dir = mh / (std::sqrt(vh) + 1e-8L);
                seq = std::max(seq, static_cast<double>(std::fabs(dir - step.direction[j])));
                seq = std::max(seq, static_cast<double>(std::fabs(mh - step.m_hat[j]) / (1 + std::fabs(mh))));
            }
            cur = step.state;
        }
    }
    return {first <= 4 * std::numeric_limits<double>::epsilon() && seq <= 1e-12,
            "first-step relative error " + fmt("%.2e", first) + ", 3-step error " + fmt("%.2e", seq)};
}

Verdict quadratic_benchmark()
{
    int hits = 0;
    std::ostringstream os;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = run_quadratic(seed, quadratic_hyper());
        double worst = 0;
        for (std::size_t j = 0; j < 10; ++j)
            worst = std::max(worst, std::abs(r.x[j] - quadratic_target[j]));
        hits += worst < 0.05;
        os << (seed > 1 ? " " : "") << fmt("%.3f", worst);
    }
    return {hits >= 8, std::to_string(hits) + "/10 seeds within 0.05 (inf-norm: " + os.str() + ")"};
}

Verdict projection()
{
    bool feasible = true;
    double worst = 0;
    auto check_run = [&](std::size_t d, std::uint64_t seed, double start, std::size_t batch) {
        auto p = opt::linear_sum_problem(d);
        auto h = quadratic_hyper(batch);
        const auto r = opt::Optimizer(p, h, seed).run(zo::Vector(d, start));
        const auto box = zo::BoxBounds::unit(d);
        for (const auto& rec : r.records)
            feasible = feasible && box.contains(rec.x);
        feasible = feasible && box.contains(r.x);
        return r;
    };
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = check_run(3, seed, 0.5, 4);
        for (double v : r.x)
            worst = std::max(worst, v);
    }
    // feasibility on the other benchmarks and from corners
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        check_run(10, seed, 0.9, 2);
        check_run(10, seed, 0.0, 4);
        const auto q = run_quadratic(seed, quadratic_hyper());
        for (const auto& rec : q.records)
            feasible = feasible && zo::BoxBounds::unit(10).contains(rec.x);
    }
    return {feasible && worst <= 0.02,
            std::string(feasible ? "all iterates feasible" : "infeasible iterate") +
                ", vertex distance " + fmt("%.4f", worst) + " (d=3, N=4, 10 seeds)"};
}

sim::GridModel shipped_grid(const char* name)
{
    return io::load_grid(source_path(name)).model;
}

sim::Disturbance quiet(const sim::GridModel& m)
{
    for (const auto& b : m.buses)
        if (b.type == sim::BusType::load)
            return {sim::LoadStep{b.id, 0.0}, 1.0};
    return {sim::LoadStep{m.buses.front().id, 0.0}, 1.0};
}

Verdict equilibrium_hold()
{
    double worst = 0, seconds39 = 0;
    for (const char* name : {"configs/toy3.json", "configs/ieee39_mod.json"}) {
        const auto m = shipped_grid(name);
        const auto start = std::chrono::steady_clock::now();
        const auto t = sim::simulate(m, quiet(m), sim::SimulationSettings::from(m.numerics));
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (std::string(name).find("39") != std::string::npos)
            seconds39 = s;
        const double f0 = m.bases.frequency_hz;
        for (const auto& bus : t.hz)
            for (double v : bus)
                worst = std::max(worst, std::abs(v - f0) / f0);
    }
    return {worst < 1e-6 && seconds39 < 60.0,
            "max deviation " + fmt("%.2e", worst) + " pu, ieee39 run " + fmt("%.3f", seconds39) + " s"};
}

Verdict droop_oracle()
{
    auto m = shipped_grid("configs/toy3.json");
    m.numerics.horizon = 20.0;
    const auto eq = sim::init_equilibrium(m);
    std::vector<oracle::DroopUnit> units;
    for (std::size_t i = 0; i < m.ibrs.size(); ++i) {
        const auto& u = m.ibrs[i];
        const bool forming = u.kind() == sim::IbrKind::gfm;
        const double d = forming ? std::get<sim::GfmParams>(u.params).d_damp : std::get<sim::GflParams>(u.params).d_droop;
        units.push_back({forming, u.rating, eq.dispatch[i] / u.rating, d});
    }
    double worst = 0;
    for (double dp : {0.05, 0.1, 0.2, -0.15}) {
        const auto t = sim::simulate(m, {sim::LoadStep{3, dp}, 1.0}, sim::SimulationSettings::from(m.numerics));
        const double f0 = m.bases.frequency_hz;
        const double expected = (oracle::settled_frequency(units, m.total_load() + dp) - 1.0) * f0;
        for (const auto& bus : t.hz)
            worst = std::max(worst, std::abs(bus.back() - f0 - expected) / std::abs(expected));
    }
    return {worst <= 0.01, "max relative error of settled deviation " + fmt("%.5f", worst)};
}

Verdict rk4_order()
{
    double worst = 0;
    const auto toy = shipped_grid("configs/toy3.json");
    const auto big = shipped_grid("configs/ieee39_mod.json");
    for (const auto& [m, d] : {std::pair{toy, sim::Disturbance{sim::LoadStep{3, 0.2}, 1.0}},
                               std::pair{big, sim::Disturbance{sim::LoadStep{26, 1.0}, 1.0}},
                               std::pair{big, sim::Disturbance{sim::LineTrip{18, 19}, 1.0}}}) {
        auto fine = m;
        fine.numerics.dt_sim = m.numerics.dt_sim / 2;
        const auto a = sim::simulate(m, d, sim::SimulationSettings::from(m.numerics));
        const auto b = sim::simulate(fine, d, sim::SimulationSettings::from(fine.numerics));
        const double f0 = m.bases.frequency_hz;
        for (std::size_t k = 0; k < a.hz.size(); ++k)
            for (std::size_t i = 0; i < a.samples(); ++i)
                worst = std::max(worst, std::abs(a.hz[k][i] - b.hz[k][i]) / f0);
    }
    return {worst < 1e-4, "sup-norm change " + fmt("%.2e", worst) + " pu"};
}

Verdict end_to_end()
{
    bool pass = true;
    std::ostringstream os;
    for (const char* name : {"configs/scenario1_loadstep.json", "configs/scenario2_linetrip.json"}) {
        auto c = io::load_config(source_path(name));
        c.hyper.max_iterations = 30;
        c.hyper.batch = 2;
        const auto p = io::make_problem(c);
        const auto x1 = io::initial_point(c);
        opt::RunOptions o;
        o.threads = opt::resolve_thread_limit(g_threads);
        o.log_objective = false;
        const double f1 = opt::evaluate(*p, x1, opt::WorkerPool(o.threads)).value;
        int hits = 0;
        os << c.scenarios.scenarios[0].name << " [";
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto r = opt::Optimizer(*p, c.hyper, seed, o).run(x1);
            const double f = opt::evaluate(*p, r.x, opt::WorkerPool(o.threads)).value;
            hits += f <= 0.70 * f1;
            os << (seed > 1 ? " " : "") << fmt("%.3f", f / f1);
        }
        os << "] " << hits << "/5; ";
        pass = pass && hits >= 4;
    }
    return {pass, "final/initial objective: " + os.str().substr(0, os.str().size() - 2)};
}

Verdict batch_ablation()
{
    double f1 = 0, f6 = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        f1 += sq_dist(run_quadratic(seed, quadratic_hyper(1)).x, quadratic_target) / 10;
        f6 += sq_dist(run_quadratic(seed, quadratic_hyper(6)).x, quadratic_target) / 10;
    }
    return {f6 <= f1, "mean final objective N=1 " + fmt("%.3e", f1) + ", N=6 " + fmt("%.3e", f6)};
}

Verdict adam_ablation()
{
    // first k with f(x_k) below the threshold; runs that never get there count K + 1
    const double threshold = 0.01;
    auto iterations_to = [&](bool adam, std::uint64_t seed) {
        auto h = quadratic_hyper();
        h.use_adam = adam;
        h.tau = 1e-300;
        const auto r = run_quadratic(seed, h);
        for (const auto& rec : r.records)
            if (rec.objective <= threshold)
                return static_cast<double>(rec.k);
        return h.max_iterations + 1.0;
    };
    double with = 0, without = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        with += iterations_to(true, seed) / 10;
        without += iterations_to(false, seed) / 10;
    }
    return {with <= without, "mean iterations to f <= " + fmt("%g", threshold) + ": Adam " + fmt("%.1f", with) +
                                 ", plain " + fmt("%.1f", without)};
}

bool same_log(const std::vector<opt::IterationRecord>& a, const std::vector<opt::IterationRecord>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i];
        const auto& y = b[i];
        if (x.k != y.k || x.objective != y.objective || x.x != y.x || x.grad_norm != y.grad_norm || x.eta != y.eta ||
            x.r != y.r || x.scenario_values != y.scenario_values)
            return false;
    }
    return true;
}

Verdict determinism()
{
    auto c = io::load_config(source_path("configs/scenario1_loadstep.json"));
    c.hyper.max_iterations = 20;
    const auto p = io::make_problem(c);
    const auto x1 = io::initial_point(c);
    const auto dir = fs::temp_directory_path() / "gridtune_acceptance_resume";
    fs::remove_all(dir);

    auto run = [&](std::size_t threads, bool checkpoints) {
        opt::RunOptions o;
        o.threads = threads;
        o.config_hash = io::config_hash(c);
        if (checkpoints)
            o.checkpoint_dir = dir;
        return opt::Optimizer(*p, c.hyper, 11, o).run(x1);
    };
    const auto a = run(1, true);
    const auto b = run(1, false);
    const auto e = run(8, false);
    const bool runs = same_log(a.records, b.records);
    const bool threads = same_log(a.records, e.records) && a.x == e.x;

    opt::RunOptions o;
    o.threads = 8;
    o.config_hash = io::config_hash(c);
    const auto resumed = opt::Optimizer(*p, c.hyper, 11, o).resume(opt::load_checkpoint(dir / "ckpt_10.json"));
    const std::vector<opt::IterationRecord> tail(a.records.begin() + 10, a.records.end());
    const bool resume = same_log(resumed.records, tail) && resumed.x == a.x;
    fs::remove_all(dir);
    return {runs && threads && resume, std::string("repeat ") + (runs ? "identical" : "differs") + ", threads 1/8 " +
                                           (threads ? "identical" : "differ") + ", resume at k=10 " +
                                           (resume ? "identical" : "differs")};
}

Verdict metric_oracle()
{
    std::mt19937_64 gen(1212);
    std::uniform_int_distribution<int> buses(1, 6), steps(20, 400);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.2);
    double worst = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        sim::FrequencyTrajectory t;
        const std::size_t n = static_cast<std::size_t>(steps(gen));
        t.dt = 0.001 * (1 + static_cast<int>(unit(gen) * 10));
        t.horizon = t.dt * static_cast<double>(n - 1);
        const int nb = buses(gen);
        for (int b = 0; b < nb; ++b) {
            t.bus_ids.push_back(b + 1);
            std::vector<double> hz(n);
            double drift = 0;
            for (auto& v : hz)
                v = 60.0 + (drift += noise(gen) * 0.1) + noise(gen);
            t.hz.push_back(hz);
        }
        objective::MetricConfig c;
        c.lambda = unit(gen);
        c.horizon = t.horizon;
        c.dt = t.dt;
        // boundaries sometimes on a sample, sometimes between samples
        const auto snap = [&](double v) { return unit(gen) < 0.5 ? std::round(v / t.dt) * t.dt : v; };
        c.t_d = snap(0.05 * t.horizon + 0.3 * t.horizon * unit(gen));
        c.t_o = snap(c.t_d + (t.horizon - c.t_d) * (0.1 + 0.6 * unit(gen)));
        if (!(c.t_d < c.t_o && c.t_o < t.horizon - t.dt))
            c.t_o = c.t_d + 0.5 * (t.horizon - c.t_d);
        c.n_opt = t.bus_ids;
        c.omega0 = 60.0;
        const double got = objective::metric(t, c);
        const double want = oracle::metric(t.hz, 0.0, t.dt, c.t_d, c.t_o, c.horizon, c.lambda, 60.0);
        worst = std::max(worst, std::abs(got - want));
    }
    return {worst <= 1e-12, "max |difference| " + fmt("%.2e", worst) + " over 1000 trajectories"};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    bool strict = false;
    std::string report_path;
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    app.add_option("--threads", g_threads, "parallelism for the grid runs (0: all cores)");
    app.add_flag("--strict", strict, "exit 1 if any criterion fails");
    app.add_option("--report", report_path, "also write the verdict lines to this file");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"estimator correctness", estimator},
        {"adam algebra", adam_algebra},
        {"optimizer benchmark", quadratic_benchmark},
        {"projection feasibility", projection},
        {"equilibrium hold", equilibrium_hold},
        {"droop steady state", droop_oracle},
        {"rk4 step halving", rk4_order},
        {"end-to-end improvement", end_to_end},
        {"batch-size ablation", batch_ablation},
        {"adam ablation", adam_ablation},
        {"determinism and resume", determinism},
        {"metric oracle", metric_oracle},
    };
    const std::set<int> selected(only.begin(), only.end());
    std::FILE* report = report_path.empty() ? nullptr : std::fopen(report_path.c_str(), "w");
    auto emit = [&](const std::string& line) {
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        if (report)
            std::fprintf(report, "%s\n", line.c_str());
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !v.pass;
        char head[160];
        std::snprintf(head, sizeof head, "criterion %2d %s: %s (%.1f s)", id, v.pass ? "PASS" : "FAIL",
                      criteria[i].first, s);
        emit(head);
        emit("    " + v.detail);
    }
    emit(std::to_string(failures) + " failed");
    if (report)
        std::fclose(report);
    return strict && failures ? 1 : 0;
}
