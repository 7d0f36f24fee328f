#include "gridtune/config.hpp"

#include "gridtune/error.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace gridtune::io {

using nlohmann::json;

namespace {

constexpr std::int64_t kSchema = 1;

std::size_t to_count(std::int64_t v, const std::string& key, std::int64_t min)
{
    if (v < min)
        throw Error(ErrorCode::config, key + ": must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

zo::Vector number_array(const json& j, const char* key, const std::string& path)
{
    const auto& a = require_array(j, key, path);
    zo::Vector v;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number())
            throw Error(ErrorCode::config, path + "." + key + "[" + std::to_string(i) + "]: expected a number");
        v.push_back(a[i].get<double>());
    }
    return v;
}

opt::Hyperparameters hyper_from(const json& j, const std::string& path)
{
    opt::Hyperparameters h;
    if (j.is_null())
        return h;
    require_object(j, path);
    static const char* known[] = {"eta1", "r1", "gamma_eta", "gamma_r", "eta_min", "r_min", "N",
                                  "max_iterations", "tau", "beta1", "beta2", "epsilon", "use_adam"};
    for (const auto& [key, _] : j.items())
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw Error(ErrorCode::config, path + "." + key + ": unknown key");
    h.eta1 = opt_number(j, "eta1", path, h.eta1);
    h.r1 = opt_number(j, "r1", path, h.r1);
    h.gamma_eta = opt_number(j, "gamma_eta", path, h.gamma_eta);
    h.gamma_r = opt_number(j, "gamma_r", path, h.gamma_r);
    h.eta_min = opt_number(j, "eta_min", path, h.eta_min);
    h.r_min = opt_number(j, "r_min", path, h.r_min);
    h.batch = to_count(opt_integer(j, "N", path, static_cast<std::int64_t>(h.batch)), path + ".N", 1);
    h.max_iterations = to_count(opt_integer(j, "max_iterations", path, static_cast<std::int64_t>(h.max_iterations)),
                                path + ".max_iterations", 1);
    h.tau = opt_number(j, "tau", path, h.tau);
    h.beta1 = opt_number(j, "beta1", path, h.beta1);
    h.beta2 = opt_number(j, "beta2", path, h.beta2);
    h.epsilon = opt_number(j, "epsilon", path, h.epsilon);
    h.use_adam = opt_bool(j, "use_adam", path, h.use_adam);
    try {
        h.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::config, path + ": " + e.what());
    }
    return h;
}

json hyper_to(const opt::Hyperparameters& h)
{
    return json{{"eta1", h.eta1},       {"r1", h.r1},
                {"gamma_eta", h.gamma_eta}, {"gamma_r", h.gamma_r},
                {"eta_min", h.eta_min}, {"r_min", h.r_min},
                {"N", h.batch},         {"max_iterations", h.max_iterations},
                {"tau", h.tau},         {"beta1", h.beta1},
                {"beta2", h.beta2},     {"epsilon", h.epsilon},
                {"use_adam", h.use_adam}};
}

Benchmark benchmark_from(const json& j, const std::string& path)
{
    require_object(j, path);
    Benchmark b;
    b.kind = req_string(j, "kind", path);
    if (b.kind == "quadratic") {
        b.target = number_array(j, "target", path);
        b.dimension = b.target.size();
        if (j.contains("dimension") && to_count(req_integer(j, "dimension", path), path + ".dimension", 1) != b.dimension)
            throw Error(ErrorCode::config, path + ".dimension: does not match the length of target");
    } else if (b.kind == "linear") {
        b.dimension = to_count(req_integer(j, "dimension", path), path + ".dimension", 1);
    } else {
        throw Error(ErrorCode::config, path + ".kind: expected \"quadratic\" or \"linear\", got \"" + b.kind + "\"");
    }
    if (b.dimension == 0)
        throw Error(ErrorCode::config, path + ": dimension must be at least 1");
    if (j.contains("initial")) {
        b.initial = number_array(j, "initial", path);
        if (b.initial.size() != b.dimension)
            throw Error(ErrorCode::config, path + ".initial: expected " + std::to_string(b.dimension) + " entries");
        for (double v : b.initial)
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(ErrorCode::config, path + ".initial: entries must lie in [0, 1]");
    }
    return b;
}

json benchmark_to(const Benchmark& b)
{
    json j{{"kind", b.kind}, {"dimension", b.dimension}};
    if (b.kind == "quadratic")
        j["target"] = b.target;
    if (!b.initial.empty())
        j["initial"] = b.initial;
    return j;
}

} // namespace

json disturbance_to_json(const sim::Disturbance& d)
{
    json j;
    if (const auto* s = std::get_if<sim::LoadStep>(&d.event))
        j = {{"type", "load_step"}, {"bus", s->bus}, {"delta_p", s->delta_p}};
    else {
        const auto& t = std::get<sim::LineTrip>(d.event);
        j = {{"type", "line_trip"}, {"from", t.from}, {"to", t.to}};
    }
    j["t_d"] = d.t_d;
    return j;
}

sim::Disturbance disturbance_from_json(const json& j, const std::string& path)
{
    require_object(j, path);
    sim::Disturbance d;
    const auto type = req_string(j, "type", path);
    if (type == "load_step")
        d.event = sim::LoadStep{static_cast<int>(req_integer(j, "bus", path)), req_number(j, "delta_p", path)};
    else if (type == "line_trip")
        d.event = sim::LineTrip{static_cast<int>(req_integer(j, "from", path)),
                                static_cast<int>(req_integer(j, "to", path))};
    else
        throw Error(ErrorCode::config, path + ".type: expected \"load_step\" or \"line_trip\", got \"" + type + "\"");
    d.t_d = opt_number(j, "t_d", path, d.t_d);
    return d;
}

void RunConfig::validate() const
{
    if (grid.has_value() == benchmark.has_value())
        throw Error(ErrorCode::config, "config: exactly one of grid/grid_file and benchmark is required");
    hyper.validate();
    if (grid) {
        if (scenarios.size() == 0)
            throw Error(ErrorCode::config, "config.scenarios: at least one scenario is required");
        try {
            opt::GridProblem(grid->model, grid->catalog, scenarios, metric);
        } catch (const Error& e) {
            throw Error(ErrorCode::config, std::string("config: ") + e.what());
        }
    }
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir)
{
    const std::string root = "config";
    require_object(j, root);
    const auto schema = req_integer(j, "schema", root);
    if (schema != kSchema)
        throw Error(ErrorCode::config, "config.schema: unsupported version " + std::to_string(schema));

    RunConfig c;
    c.name = opt_string(j, "name", root, "");
    if (j.contains("grid_file") && j.contains("grid"))
        throw Error(ErrorCode::config, "config: grid_file and grid are mutually exclusive");
    if (j.contains("grid_file")) {
        auto p = std::filesystem::path(req_string(j, "grid_file", root));
        if (p.is_relative())
            p = base_dir / p;
        p = std::filesystem::absolute(p).lexically_normal();
        c.grid_path = p.string();
        c.grid = load_grid(p);
    } else if (j.contains("grid")) {
        c.grid = grid_from_json(j.at("grid"));
    }
    if (j.contains("benchmark"))
        c.benchmark = benchmark_from(j.at("benchmark"), root + ".benchmark");

    if (j.contains("scenarios")) {
        const auto& arr = require_array(j, "scenarios", root);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = root + ".scenarios[" + std::to_string(i) + "]";
            objective::Scenario s;
            s.name = req_string(arr[i], "name", p);
            s.weight = opt_number(arr[i], "weight", p, 1.0);
            if (!arr[i].contains("disturbance"))
                throw Error(ErrorCode::config, p + ".disturbance: missing");
            s.disturbance = disturbance_from_json(arr[i].at("disturbance"), p + ".disturbance");
            c.scenarios.scenarios.push_back(std::move(s));
        }
    }

    if (j.contains("metric")) {
        const auto& m = j.at("metric");
        const std::string p = root + ".metric";
        require_object(m, p);
        c.metric.lambda = opt_number(m, "lambda", p, c.metric.lambda);
        c.metric.t_o = opt_number(m, "t_o", p, c.metric.t_o);
        if (m.contains("n_opt")) {
            const auto& ids = require_array(m, "n_opt", p);
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (!ids[i].is_number_integer())
                    throw Error(ErrorCode::config, p + ".n_opt[" + std::to_string(i) + "]: expected a bus id");
                c.metric.n_opt.push_back(ids[i].get<int>());
            }
        }
    }

    c.hyper = hyper_from(j.contains("hyperparameters") ? j.at("hyperparameters") : json(), root + ".hyperparameters");
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (s.is_number_unsigned())
            c.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer())
            throw Error(ErrorCode::config, "config.seed: must be nonnegative");
        else
            throw Error(ErrorCode::config, "config.seed: expected an integer");
    }
    c.threads = to_count(opt_integer(j, "threads", root, 0), "config.threads", 0);

    if (j.contains("log")) {
        const auto& l = j.at("log");
        const std::string p = root + ".log";
        require_object(l, p);
        c.log.objective = opt_bool(l, "objective", p, c.log.objective);
        c.log.checkpoint_every = to_count(opt_integer(l, "checkpoint_every", p, 1), p + ".checkpoint_every", 0);
        c.log.trajectories = opt_bool(l, "trajectories", p, c.log.trajectories);
    }
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c)
{
    json j;
    j["schema"] = kSchema;
    j["name"] = c.name;
    if (c.grid) {
        if (!c.grid_path.empty())
            j["grid_file"] = c.grid_path;
        else
            j["grid"] = grid_to_json(*c.grid);
    }
    if (c.benchmark)
        j["benchmark"] = benchmark_to(*c.benchmark);
    j["scenarios"] = json::array();
    for (const auto& s : c.scenarios.scenarios)
        j["scenarios"].push_back({{"name", s.name}, {"weight", s.weight}, {"disturbance", disturbance_to_json(s.disturbance)}});
    j["metric"] = {{"lambda", c.metric.lambda}, {"t_o", c.metric.t_o}, {"n_opt", c.metric.n_opt}};
    j["hyperparameters"] = hyper_to(c.hyper);
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["log"] = {{"objective", c.log.objective},
                {"checkpoint_every", c.log.checkpoint_every},
                {"trajectories", c.log.trajectories}};
    return j;
}

RunConfig load_config(const std::filesystem::path& path)
{
    return config_from_json(read_json_file(path), path.parent_path());
}

void write_config(const RunConfig& c, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::io, "cannot write " + path.string());
    out << config_to_json(c).dump(2) << '\n';
}

std::string config_hash(const RunConfig& c)
{
    json j = config_to_json(c);
    j.erase("seed");
    j.erase("threads");
    j.erase("log");
    j.erase("name");
    j["hyperparameters"].erase("max_iterations");
    // hash the grid content, not where it lives
    if (j.contains("grid_file")) {
        j.erase("grid_file");
        j["grid"] = grid_to_json(*c.grid);
    }
    const std::string s = j.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::unique_ptr<opt::Problem> make_problem(const RunConfig& c)
{
    if (c.benchmark) {
        const auto& b = *c.benchmark;
        if (b.kind == "quadratic")
            return std::make_unique<opt::FunctionProblem>(opt::quadratic_problem(b.target));
        return std::make_unique<opt::FunctionProblem>(opt::linear_sum_problem(b.dimension));
    }
    if (!c.grid)
        throw Error(ErrorCode::config, "config has neither a grid nor a benchmark");
    return std::make_unique<opt::GridProblem>(c.grid->model, c.grid->catalog, c.scenarios, c.metric);
}

zo::Vector initial_point(const RunConfig& c)
{
    if (c.benchmark)
        return c.benchmark->initial.empty() ? zo::Vector(c.benchmark->dimension, 0.5) : c.benchmark->initial;
    return zo::AffineScaling(c.grid->catalog.bounds()).normalize(c.grid->catalog.initial());
}

} // namespace gridtune::io
