#include "gridtune/grid.hpp"

#include "gridtune/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace gridtune::sim {

const char* to_string(BusType t)
{
    switch (t) {
    case BusType::passive: return "passive";
    case BusType::load: return "load";
    case BusType::gfl: return "gfl";
    case BusType::gfm: return "gfm";
    }
    return "passive";
}

BusType bus_type_from_string(const std::string& s)
{
    if (s == "passive") return BusType::passive;
    if (s == "load") return BusType::load;
    if (s == "gfl") return BusType::gfl;
    if (s == "gfm") return BusType::gfm;
    throw Error(ErrorCode::config, "unknown bus type '" + s + "'");
}

namespace {

void require_positive(double v, const std::string& owner, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << owner << ": parameter " << name << " must be strictly positive (got " << v << ")";
        throw Error(ErrorCode::invalid_parameter, os.str());
    }
}

/// Loop integral gains are carried but unused by the first-order lags, so
/// any finite value is harmless.
void require_finite(double v, const std::string& owner, const char* name)
{
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << owner << ": parameter " << name << " must be finite (got " << v << ")";
        throw Error(ErrorCode::invalid_parameter, os.str());
    }
}

} // namespace

void GflParams::validate(const std::string& owner) const
{
    require_positive(kp_pll, owner, "K_p,PLL");
    require_positive(ki_pll, owner, "K_i,PLL");
    require_positive(d_droop, owner, "D");
    require_positive(kp_i, owner, "K_p,i");
    require_finite(ki_i, owner, "K_i,i");
}

void GfmParams::validate(const std::string& owner) const
{
    require_positive(m_inertia, owner, "M");
    require_positive(d_damp, owner, "D");
    require_positive(kp_v, owner, "K_p,v");
    require_finite(ki_v, owner, "K_i,v");
    require_positive(kp_i, owner, "K_p,i");
    require_finite(ki_i, owner, "K_i,i");
}

double Bases::omega0_rad() const noexcept { return 2.0 * std::numbers::pi * frequency_hz; }

void Numerics::validate() const
{
    auto check = [](bool ok, const char* msg) {
        if (!ok)
            throw Error(ErrorCode::config, msg);
    };
    check(dt_sim > 0.0, "numerics.dt_sim must be positive");
    check(dt_sample >= dt_sim, "numerics.dt_sample must be at least dt_sim");
    const double ratio = dt_sample / dt_sim;
    check(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio, "numerics.dt_sample must be an integer multiple of dt_sim");
    check(horizon > 0.0, "numerics.horizon must be positive");
    check(pmeas_filter > 0.0, "numerics.pmeas_filter must be positive");
    check(bus_freq_filter > 0.0, "numerics.bus_freq_filter must be positive");
    check(loop_constant_gfl > 0.0 && loop_constant_gfm > 0.0, "numerics loop constants must be positive");
    check(gfl_power_limit > 0.0, "numerics.gfl_power_limit must be positive");
}

std::optional<std::size_t> GridModel::find_bus(int id) const
{
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id)
            return i;
    return std::nullopt;
}

std::size_t GridModel::bus_index(int id) const
{
    if (auto i = find_bus(id))
        return *i;
    throw Error(ErrorCode::topology, "unknown bus " + std::to_string(id));
}

std::optional<std::size_t> GridModel::find_line(int from, int to) const
{
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        if ((l.from == from && l.to == to) || (l.from == to && l.to == from))
            return i;
    }
    return std::nullopt;
}

double GridModel::total_load() const
{
    return std::accumulate(loads.begin(), loads.end(), 0.0, [](double s, const Load& l) { return s + l.p; });
}

bool is_connected(const GridModel& model, const std::vector<bool>& line_closed)
{
    const std::size_t n = model.buses.size();
    if (n == 0)
        return false;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    std::size_t components = n;
    for (std::size_t k = 0; k < model.lines.size(); ++k) {
        if (!line_closed[k])
            continue;
        const auto a = find(model.bus_index(model.lines[k].from));
        const auto b = find(model.bus_index(model.lines[k].to));
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

void GridModel::validate() const
{
    if (buses.empty())
        throw Error(ErrorCode::config, "grid has no buses");
    std::set<int> ids;
    for (const auto& b : buses)
        if (!ids.insert(b.id).second)
            throw Error(ErrorCode::config, "duplicate bus id " + std::to_string(b.id));

    for (const auto& l : lines) {
        bus_index(l.from);
        bus_index(l.to);
        if (l.from == l.to)
            throw Error(ErrorCode::topology, "line connects bus " + std::to_string(l.from) + " to itself");
        if (!(l.x > 0.0))
            throw Error(ErrorCode::config, "line " + std::to_string(l.from) + "-" + std::to_string(l.to)
                                               + " must have positive reactance");
    }
    for (const auto& ld : loads) {
        bus_index(ld.bus);
        if (!std::isfinite(ld.p))
            throw Error(ErrorCode::config, "non-finite load at bus " + std::to_string(ld.bus));
    }

    std::set<int> ibr_buses;
    std::size_t gfm_count = 0;
    for (const auto& u : ibrs) {
        const auto bi = bus_index(u.bus);
        if (!ibr_buses.insert(u.bus).second)
            throw Error(ErrorCode::config, "more than one IBR at bus " + std::to_string(u.bus));
        const BusType expected = u.kind() == IbrKind::gfl ? BusType::gfl : BusType::gfm;
        if (buses[bi].type != expected)
            throw Error(ErrorCode::config, u.name + ": bus " + std::to_string(u.bus) + " is declared as "
                                               + to_string(buses[bi].type));
        if (!(u.rating > 0.0))
            throw Error(ErrorCode::config, u.name + ": rating must be positive");
        if (u.kind() == IbrKind::gfl) {
            std::get<GflParams>(u.params).validate(u.name);
        } else {
            std::get<GfmParams>(u.params).validate(u.name);
            ++gfm_count;
        }
    }
    for (const auto& b : buses) {
        if ((b.type == BusType::gfl || b.type == BusType::gfm) && !ibr_buses.contains(b.id))
            throw Error(ErrorCode::config, "bus " + std::to_string(b.id) + " is typed as an IBR bus but has no IBR");
    }
    if (gfm_count == 0)
        throw Error(ErrorCode::config, "grid needs at least one grid-forming unit");

    std::vector<bool> closed(lines.size());
    for (std::size_t k = 0; k < lines.size(); ++k)
        closed[k] = lines[k].closed;
    if (!is_connected(*this, closed))
        throw Error(ErrorCode::topology, "closed-line graph is not connected");

    numerics.validate();
    if (!(bases.power_mva > 0.0) || !(bases.frequency_hz > 0.0))
        throw Error(ErrorCode::config, "bases must be positive");
}

void Disturbance::validate(const GridModel& model) const
{
    if (!(t_d >= 0.0) || !std::isfinite(t_d))
        throw Error(ErrorCode::config, "disturbance time must be nonnegative");
    if (const auto* step = std::get_if<LoadStep>(&event)) {
        if (!model.find_bus(step->bus))
            throw Error(ErrorCode::config, "load step references unknown bus " + std::to_string(step->bus));
        if (!std::isfinite(step->delta_p))
            throw Error(ErrorCode::config, "load step magnitude must be finite");
        return;
    }
    const auto& trip = std::get<LineTrip>(event);
    const auto k = model.find_line(trip.from, trip.to);
    if (!k)
        throw Error(ErrorCode::config, "line trip references unknown line " + std::to_string(trip.from) + "-"
                                           + std::to_string(trip.to));
    std::vector<bool> closed(model.lines.size());
    for (std::size_t i = 0; i < model.lines.size(); ++i)
        closed[i] = model.lines[i].closed;
    if (!closed[*k])
        throw Error(ErrorCode::config, "line trip targets a line that is already open");
    closed[*k] = false;
    if (!is_connected(model, closed))
        throw Error(ErrorCode::topology, "tripping line " + std::to_string(trip.from) + "-" + std::to_string(trip.to)
                                             + " would disconnect the network");
}

const std::vector<double>& FrequencyTrajectory::bus(int id) const
{
    if (auto i = find_bus(id))
        return hz[*i];
    throw Error(ErrorCode::config, "trajectory has no bus " + std::to_string(id));
}

std::optional<std::size_t> FrequencyTrajectory::find_bus(int id) const
{
    for (std::size_t i = 0; i < bus_ids.size(); ++i)
        if (bus_ids[i] == id)
            return i;
    return std::nullopt;
}

std::size_t sample_count(double t_start, double horizon, double dt)
{
    const double steps = (horizon - t_start) / dt;
    return static_cast<std::size_t>(std::floor(steps + 1e-9)) + 1;
}

} // namespace gridtune::sim
