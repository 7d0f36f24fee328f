#include "gridtune/export.hpp"

#include "gridtune/error.hpp"
#include "gridtune/grid_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

namespace gridtune::io {

using nlohmann::json;

std::string format_exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(const sim::FrequencyTrajectory& traj, const std::filesystem::path& path)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw Error(ErrorCode::io, "cannot write " + path.string());
    std::fputs("t", f);
    for (int id : traj.bus_ids)
        std::fprintf(f, ",bus_%d", id);
    std::fputc('\n', f);
    for (std::size_t i = 0; i < traj.samples(); ++i) {
        std::fprintf(f, "%.9g", traj.time(i));
        for (const auto& bus : traj.hz)
            std::fprintf(f, ",%.9g", bus[i]);
        std::fputc('\n', f);
    }
    const bool failed = std::ferror(f) != 0;
    std::fclose(f);
    if (failed)
        throw Error(ErrorCode::io, "error writing " + path.string());
}

std::filesystem::path make_run_dir(const std::filesystem::path& out, std::uint64_t seed)
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    const std::string base = std::string(stamp) + "-" + std::to_string(seed);
    std::filesystem::create_directories(out);
    auto dir = out / base;
    for (int n = 1; !std::filesystem::create_directory(dir); ++n)
        dir = out / (base + "." + std::to_string(n));
    return dir;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f)
        throw Error(ErrorCode::io, "cannot write " + path.string());
    return f;
}

} // namespace

IterationLog::IterationLog(const std::filesystem::path& dir, const std::vector<std::string>& parameter_names,
                           const std::vector<std::string>& scenario_names)
    : iterations_(open_csv(dir / "iterations.csv")),
      params_(open_csv(dir / "params_trend.csv")),
      scenarios_(open_csv(dir / "scenarios.csv"))
{
    iterations_ << "k,f,grad_norm,eta,r,wall_ms\n";
    params_ << "k";
    for (const auto& n : parameter_names)
        params_ << ',' << n;
    params_ << '\n';
    scenarios_ << "k";
    for (const auto& n : scenario_names)
        scenarios_ << ',' << n;
    scenarios_ << '\n';
}

void IterationLog::append(const opt::IterationRecord& rec)
{
    iterations_ << rec.k << ',' << format_exact(rec.objective) << ',' << format_exact(rec.grad_norm) << ','
                << format_exact(rec.eta) << ',' << format_exact(rec.r) << ',' << format_exact(rec.wall_ms) << '\n';
    params_ << rec.k;
    for (double v : rec.x_physical)
        params_ << ',' << format_exact(v);
    params_ << '\n';
    if (!rec.scenario_values.empty()) {
        scenarios_ << rec.k;
        for (double v : rec.scenario_values)
            scenarios_ << ',' << format_exact(v);
        scenarios_ << '\n';
    }
    iterations_.flush();
    params_.flush();
    scenarios_.flush();
}

json final_params_json(const opt::RunResult& r, const std::vector<std::string>& names)
{
    json params = json::object();
    for (std::size_t j = 0; j < names.size(); ++j)
        params[names[j]] = r.x_physical[j];
    json out{{"params", params},
             {"normalized", r.x},
             {"iterations", r.iterations},
             {"stop_reason", opt::to_string(r.reason)},
             {"simulations", r.simulations}};
    out["objective"] = std::isfinite(r.final_objective) ? json(r.final_objective) : json();
    if (!r.final_scenario_values.empty())
        out["scenario_values"] = r.final_scenario_values;
    return out;
}

zo::Vector read_params_file(const std::filesystem::path& path, const ParameterCatalog& catalog)
{
    const json j = read_json_file(path);
    const json& params = j.contains("params") ? j.at("params") : j;
    if (!params.is_object())
        throw Error(ErrorCode::config, path.string() + ": expected an object of parameter values");
    zo::Vector v;
    for (const auto& e : catalog.entries) {
        const auto key = e.key();
        if (!params.contains(key) || !params.at(key).is_number())
            throw Error(ErrorCode::config, path.string() + ": missing numeric value for " + key);
        v.push_back(params.at(key).get<double>());
    }
    if (params.size() != catalog.size())
        throw Error(ErrorCode::config, path.string() + ": contains keys that are not tunable parameters");
    return v;
}

} // namespace gridtune::io
