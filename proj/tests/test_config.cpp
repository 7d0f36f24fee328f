#include "doctest.h"

#include "gridtune/config.hpp"
#include "gridtune/error.hpp"
#include "gridtune/export.hpp"
#include "gridtune/grid_io.hpp"
#include "gridtune/problem.hpp"
#include "test_paths.hpp"

#include <fstream>
#include <sstream>

using namespace gridtune;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return std::string(to_string(e.code())) + ": " + e.what();
    }
    return "";
}

const char* shipped[] = {"configs/scenario1_loadstep.json", "configs/scenario2_linetrip.json",
                         "configs/toy3_loadstep.json", "configs/toy3_quiet.json",
                         "configs/quadratic_benchmark.json"};

fs::path write_temp(const std::string& name, const std::string& text)
{
    const auto p = fs::temp_directory_path() / ("gridtune_cfg_" + name);
    std::ofstream(p) << text;
    return p;
}

json toy3_inline()
{
    json j = json::parse(R"({"schema": 1, "scenarios": [
        {"name": "s", "disturbance": {"type": "load_step", "bus": 3, "delta_p": 0.1}}]})");
    j["grid"] = io::read_json_file(source_path("configs/toy3.json"));
    return j;
}

} // namespace

TEST_CASE("shipped configs load")
{
    for (const char* f : shipped)
        CHECK_NOTHROW(io::load_config(source_path(f)));
    CHECK_NOTHROW(io::load_grid(source_path("configs/toy3.json")));
    CHECK_NOTHROW(io::load_grid(source_path("configs/ieee39_mod.json")));

    const auto c = io::load_config(source_path("configs/scenario1_loadstep.json"));
    CHECK(c.hyper.batch == 2);
    CHECK(c.hyper.max_iterations == 70);
    CHECK(c.hyper.beta1 == 0.5);
    CHECK(c.hyper.beta2 == 0.99);
    REQUIRE(c.grid);
    CHECK(c.grid->catalog.size() == 54);
    CHECK(c.scenarios.size() == 1);
    const auto& step = std::get<sim::LoadStep>(c.scenarios.scenarios[0].disturbance.event);
    CHECK(step.bus == 26);
    CHECK(step.delta_p == 1.0);
    CHECK(c.grid->model.total_load() == doctest::Approx(6.0).epsilon(1e-12));

    const auto c2 = io::load_config(source_path("configs/scenario2_linetrip.json"));
    const auto& trip = std::get<sim::LineTrip>(c2.scenarios.scenarios[0].disturbance.event);
    CHECK(trip.from == 18);
    CHECK(trip.to == 19);
}

TEST_CASE("defaults for omitted keys")
{
    const auto c = io::load_config(source_path("configs/toy3_loadstep.json"));
    CHECK(c.hyper.eta1 == 0.1);
    CHECK(c.hyper.tau == 1e-4);
    CHECK(c.metric.lambda == 0.5);
    CHECK(c.metric.t_o == 4.5);
    CHECK(c.scenarios.scenarios[0].disturbance.t_d == 1.0);
    CHECK(c.log.objective);
}

TEST_CASE("validation errors name the key")
{
    auto j = toy3_inline();
    j["grid"]["ibrs"][0]["params"]["D"]["lower"] = 6000;
    auto msg = error_of([&] { io::config_from_json(j, "."); });
    CHECK(msg.rfind("config:", 0) == 0);
    CHECK(msg.find("grid.ibrs[0].params.D") != std::string::npos);

    j = toy3_inline();
    j["hyperparameters"] = {{"N", 0}};
    msg = error_of([&] { io::config_from_json(j, "."); });
    CHECK(msg.find("config.hyperparameters.N") != std::string::npos);

    j = toy3_inline();
    j["hyperparameters"] = {{"eta_1", 0.2}};
    msg = error_of([&] { io::config_from_json(j, "."); });
    CHECK(msg.find("config.hyperparameters.eta_1: unknown key") != std::string::npos);

    j = toy3_inline();
    j["scenarios"][0]["disturbance"]["type"] = "fault";
    msg = error_of([&] { io::config_from_json(j, "."); });
    CHECK(msg.find("config.scenarios[0].disturbance.type") != std::string::npos);

    j = toy3_inline();
    j["schema"] = 2;
    CHECK(error_of([&] { io::config_from_json(j, "."); }).find("config.schema") != std::string::npos);

    j = toy3_inline();
    j["scenarios"][0]["disturbance"] = {{"type", "line_trip"}, {"from", 1}, {"to", 9}};
    CHECK(error_of([&] { io::config_from_json(j, "."); }).rfind("config:", 0) == 0);

    j = toy3_inline();
    j["metric"] = {{"n_opt", {1, 17}}};
    CHECK(error_of([&] { io::config_from_json(j, "."); }).find("17") != std::string::npos);
}

TEST_CASE("parse errors report the position")
{
    const auto p = write_temp("broken.json", "{\n  \"schema\": 1,\n  \"seed\": ,\n}");
    const auto msg = error_of([&] { io::load_config(p); });
    CHECK(msg.rfind("config:", 0) == 0);
    CHECK(msg.find("line 3, column 11") != std::string::npos);
}

TEST_CASE("config round trip")
{
    for (const char* f : shipped) {
        const auto c = io::load_config(source_path(f));
        CHECK(io::config_from_json(io::config_to_json(c), "/") == c);
        const auto p = fs::temp_directory_path() / "gridtune_roundtrip.json";
        io::write_config(c, p);
        CHECK(io::load_config(p) == c);
    }
    auto c = io::config_from_json(toy3_inline(), ".");
    c.hyper.eta1 = 0.123456789012345678;
    c.seed = 18446744073709551615ULL;
    c.metric.n_opt = {1, 3};
    c.log.checkpoint_every = 0;
    CHECK(io::config_from_json(io::config_to_json(c), ".") == c);

    const auto g = io::load_grid(source_path("configs/ieee39_mod.json"));
    CHECK(io::grid_from_json(io::grid_to_json(g)) == g);
}

TEST_CASE("config hash")
{
    const auto base = io::load_config(source_path("configs/toy3_loadstep.json"));
    const auto h = io::config_hash(base);
    CHECK(h.size() == 16);
    auto c = base;
    c.seed = 99;
    c.threads = 3;
    c.hyper.max_iterations = 500;
    c.log.objective = false;
    CHECK(io::config_hash(c) == h);
    c = base;
    c.grid->catalog.entries[0].upper += 1;
    CHECK(io::config_hash(c) != h);
    c = base;
    c.hyper.batch = 3;
    CHECK(io::config_hash(c) != h);
    c = base;
    c.scenarios.scenarios[0].weight = 2;
    CHECK(io::config_hash(c) != h);
}

// Initial settings and feasible intervals of the ten inverters, as tabulated
// for the modified 39-bus system.
namespace table {

struct Row {
    const char* name;
    int bus;
    double p_mw, q_mvar;
    double d, m, ki_pll, kp_pll, ki_v, kp_v, ki_i, kp_i;   // 0 = not applicable
};

const Row rows[] = {
    {"IBR1-GFL1", 10, 2, 0.1, 1100, 0, 3000, 50, 0, 0, 200, 50},
    {"IBR2-GFL2", 1, 2, 0.1, 1100, 0, 3200, 50, 0, 0, 200, 50},
    {"IBR3-GFL3", 3, 2, 0.1, 1100, 0, 3200, 50, 0, 0, 100, 20},
    {"IBR4-GFL4", 4, 2, 0.1, 1100, 0, 3200, 50, 0, 0, 200, 50},
    {"IBR5-GFL5", 5, 2, 0.1, 1100, 0, 3200, 50, 0, 0, 200, 70},
    {"IBR6-GFL6", 6, 2, 0.1, 1100, 0, 3200, 50, 0, 0, 200, 50},
    {"IBR7-GFM1", 2, 3, 0, 1100, 10, 0, 0, 40, 10, 12.5, 2.5},
    {"IBR8-GFM2", 9, 3, 0, 1100, 10, 0, 0, 40, 10, 12.5, 2.5},
    {"IBR9-GFM3", 8, 4, 0, 1100, 10, 0, 0, 40, 10, 12.5, 2.5},
    {"IBR10-GFM4", 7, 5, 0, 1100, 10, 0, 0, 40, 10, 12.5, 2.5},
};

const std::map<std::string, std::pair<double, double>> gfl_bounds = {
    {"D", {1000, 5000}}, {"Ki_PLL", {2500, 4000}}, {"Kp_PLL", {30, 100}}, {"Ki_i", {20, 300}}, {"Kp_i", {20, 70}}};
const std::map<std::string, std::pair<double, double>> gfm_bounds = {
    {"D", {1000, 5000}}, {"M", {8, 30}}, {"Ki_v", {20, 60}}, {"Kp_v", {5, 40}}, {"Ki_i", {8, 20}}, {"Kp_i", {1, 5}}};

} // namespace table

TEST_CASE("ieee39_mod carries the tabulated values verbatim")
{
    const auto g = io::load_grid(source_path("configs/ieee39_mod.json"));
    const auto raw = io::read_json_file(source_path("configs/ieee39_mod.json"));
    REQUIRE(g.model.ibrs.size() == 10);
    for (const auto& row : table::rows) {
        const auto it = std::find_if(g.model.ibrs.begin(), g.model.ibrs.end(),
                                     [&](const sim::IbrUnit& u) { return u.name == row.name; });
        REQUIRE(it != g.model.ibrs.end());
        CHECK(it->bus == row.bus);
        CHECK(g.ibr_info.at(row.name).at("p_init_mw").get<double>() == row.p_mw);
        CHECK(g.ibr_info.at(row.name).at("q_init_mvar").get<double>() == row.q_mvar);

        const bool gfl = it->kind() == sim::IbrKind::gfl;
        CHECK(gfl == (std::string(row.name).find("GFL") != std::string::npos));
        std::map<std::string, double> initial;
        if (gfl)
            initial = {{"D", row.d}, {"Ki_PLL", row.ki_pll}, {"Kp_PLL", row.kp_pll}, {"Ki_i", row.ki_i}, {"Kp_i", row.kp_i}};
        else
            initial = {{"D", row.d}, {"M", row.m}, {"Ki_v", row.ki_v}, {"Kp_v", row.kp_v}, {"Ki_i", row.ki_i}, {"Kp_i", row.kp_i}};
        const auto& bounds = gfl ? table::gfl_bounds : table::gfm_bounds;

        std::size_t found = 0;
        for (const auto& e : g.catalog.entries) {
            if (e.ibr != row.name)
                continue;
            ++found;
            CHECK(e.initial == initial.at(e.name));
            CHECK(e.lower == bounds.at(e.name).first);
            CHECK(e.upper == bounds.at(e.name).second);
        }
        CHECK(found == initial.size());

        // the file itself spells the same numbers
        for (const auto& ju : raw.at("ibrs"))
            if (ju.at("name") == row.name)
                for (const auto& [name, v] : initial)
                    CHECK(ju.at("params").at(name).at("initial").get<double>() == v);
    }
    CHECK(g.catalog.keys().front() == "IBR1-GFL1.D");
}

TEST_CASE("catalog structure")
{
    auto g = io::load_grid(source_path("configs/toy3.json"));
    CHECK(io::gfl_parameter_names().size() == 5);
    CHECK(io::gfm_parameter_names().size() == 6);
    auto cat = g.catalog;
    cat.entries.pop_back();
    CHECK_THROWS_AS(cat.validate(g.model), Error);

    const auto values = io::read_parameters(g.model, g.catalog);
    CHECK(values == g.catalog.initial());
    auto doubled = values;
    for (auto& v : doubled)
        v *= 2;
    io::apply_parameters(g.model, g.catalog, doubled);
    CHECK(io::read_parameters(g.model, g.catalog) == doubled);
}

TEST_CASE("trajectory csv and params files")
{
    sim::FrequencyTrajectory t;
    t.dt = 0.005;
    t.horizon = 0.01;
    t.bus_ids = {3, 17};
    t.hz = {{60.0, 59.98765432123, 60.1}, {60.0, 60.0, 59.5}};
    const auto p = fs::temp_directory_path() / "gridtune_traj.csv";
    io::write_trajectory_csv(t, p);
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "t,bus_3,bus_17\n0,60,60\n0.005,59.9876543,60\n0.01,60.1,59.5\n");

    const auto g = io::load_grid(source_path("configs/toy3.json"));
    json params = json::object();
    for (const auto& e : g.catalog.entries)
        params[e.key()] = e.initial + 1;
    const auto pf = write_temp("params.json", json{{"params", params}}.dump());
    const auto v = io::read_params_file(pf, g.catalog);
    CHECK(v[0] == g.catalog.entries[0].initial + 1);
    const auto plain = write_temp("plain.json", params.dump());
    CHECK(io::read_params_file(plain, g.catalog) == v);
    params.erase(params.begin());
    const auto missing = write_temp("missing.json", params.dump());
    CHECK_THROWS_AS(io::read_params_file(missing, g.catalog), Error);
}

TEST_CASE("perturbations of radius r1 beyond the shipped boxes stay simulable")
{
    for (const char* f : {"configs/scenario1_loadstep.json", "configs/toy3_loadstep.json"}) {
        const auto c = io::load_config(source_path(f));
        const auto p = io::make_problem(c);
        const auto* g = dynamic_cast<const opt::GridProblem*>(p.get());
        REQUIRE(g);
        // every coordinate at once is at least as far out as any unit direction
        const zo::Vector low(g->dimension(), -c.hyper.r1);
        CHECK_NOTHROW(g->model_at(low).validate());
        const zo::Vector high(g->dimension(), 1.0 + c.hyper.r1);
        CHECK_NOTHROW(g->model_at(high).validate());
    }
    auto j = toy3_inline();
    j["grid"]["ibrs"][1]["params"]["Ki_i"]["lower"] = 0;
    CHECK(error_of([&] { io::config_from_json(j, "."); }).find("lower bound must be positive") != std::string::npos);
}
