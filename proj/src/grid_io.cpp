#include "gridtune/grid_io.hpp"

#include "gridtune/error.hpp"
#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace gridtune::io {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::config, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << path.string() << ": parse error at byte " << e.byte << ": " << e.what();
        throw Error(ErrorCode::config, os.str());
    }
}

namespace {

sim::Numerics numerics_from(const json& j, const std::string& path)
{
    sim::Numerics n;
    if (j.is_null())
        return n;
    require_object(j, path);
    n.dt_sim = opt_number(j, "dt_sim", path, n.dt_sim);
    n.dt_sample = opt_number(j, "dt_sample", path, n.dt_sample);
    n.horizon = opt_number(j, "horizon", path, n.horizon);
    n.pmeas_filter = opt_number(j, "pmeas_filter", path, n.pmeas_filter);
    n.bus_freq_filter = opt_number(j, "bus_freq_filter", path, n.bus_freq_filter);
    n.loop_constant_gfl = opt_number(j, "loop_constant_gfl", path, n.loop_constant_gfl);
    n.loop_constant_gfm = opt_number(j, "loop_constant_gfm", path, n.loop_constant_gfm);
    n.gfl_power_limit = opt_number(j, "gfl_power_limit", path, n.gfl_power_limit);
    try {
        n.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::config, path + ": " + e.what());
    }
    return n;
}

json numerics_to(const sim::Numerics& n)
{
    return json{{"dt_sim", n.dt_sim},
                {"dt_sample", n.dt_sample},
                {"horizon", n.horizon},
                {"pmeas_filter", n.pmeas_filter},
                {"bus_freq_filter", n.bus_freq_filter},
                {"loop_constant_gfl", n.loop_constant_gfl},
                {"loop_constant_gfm", n.loop_constant_gfm},
                {"gfl_power_limit", n.gfl_power_limit}};
}

} // namespace

GridFile grid_from_json(const json& j)
{
    require_object(j, "grid");
    GridFile g;
    const auto schema = opt_integer(j, "schema", "grid", 1);
    if (schema != 1)
        throw Error(ErrorCode::config, "grid.schema: unsupported version " + std::to_string(schema));
    g.name = opt_string(j, "name", "grid", "");

    auto& m = g.model;
    double impedance_mva = 0.0;
    if (j.contains("bases")) {
        const auto& b = j.at("bases");
        require_object(b, "grid.bases");
        m.bases.power_mva = opt_number(b, "power_mva", "grid.bases", m.bases.power_mva);
        m.bases.frequency_hz = opt_number(b, "frequency_hz", "grid.bases", m.bases.frequency_hz);
        impedance_mva = opt_number(b, "impedance_mva", "grid.bases", m.bases.power_mva);
    } else {
        impedance_mva = m.bases.power_mva;
    }
    if (!(m.bases.power_mva > 0.0) || !(m.bases.frequency_hz > 0.0) || !(impedance_mva > 0.0))
        throw Error(ErrorCode::config, "grid.bases: values must be positive");
    const double z_scale = m.bases.power_mva / impedance_mva;
    m.numerics = numerics_from(j.value("numerics", json()), "grid.numerics");

    const auto& buses = require_array(j, "buses", "grid");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const std::string p = "grid.buses[" + std::to_string(i) + "]";
        require_object(buses[i], p);
        sim::Bus b;
        b.id = static_cast<int>(req_integer(buses[i], "id", p));
        try {
            b.type = sim::bus_type_from_string(opt_string(buses[i], "type", p, "passive"));
        } catch (const Error& e) {
            throw Error(ErrorCode::config, p + ".type: " + e.what());
        }
        m.buses.push_back(b);
    }

    const auto& lines = require_array(j, "lines", "grid");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string p = "grid.lines[" + std::to_string(i) + "]";
        require_object(lines[i], p);
        sim::Line l;
        l.from = static_cast<int>(req_integer(lines[i], "from", p));
        l.to = static_cast<int>(req_integer(lines[i], "to", p));
        l.x = req_number(lines[i], "x", p) * z_scale;
        l.r = opt_number(lines[i], "r", p, 0.0) * z_scale;
        l.closed = opt_bool(lines[i], "closed", p, true);
        if (!(l.x > 0.0))
            throw Error(ErrorCode::config, p + ".x: reactance must be positive");
        m.lines.push_back(l);
    }

    if (j.contains("loads")) {
        const auto& loads = j.at("loads");
        require_object(loads, "grid.loads");
        const auto& items = require_array(loads, "items", "grid.loads");
        for (std::size_t i = 0; i < items.size(); ++i) {
            const std::string p = "grid.loads.items[" + std::to_string(i) + "]";
            require_object(items[i], p);
            sim::Load ld;
            ld.bus = static_cast<int>(req_integer(items[i], "bus", p));
            if (items[i].contains("p_mw"))
                ld.p = req_number(items[i], "p_mw", p) / m.bases.power_mva;
            else
                ld.p = req_number(items[i], "p", p);
            m.loads.push_back(ld);
        }
        if (loads.contains("total_pu")) {
            const double target = req_number(loads, "total_pu", "grid.loads");
            const double total = m.total_load();
            if (!(total > 0.0))
                throw Error(ErrorCode::config, "grid.loads.total_pu: cannot rescale a zero total load");
            for (auto& ld : m.loads)
                ld.p *= target / total;
        }
    }

    const auto& ibrs = require_array(j, "ibrs", "grid");
    for (std::size_t i = 0; i < ibrs.size(); ++i) {
        const std::string p = "grid.ibrs[" + std::to_string(i) + "]";
        const auto& ju = ibrs[i];
        require_object(ju, p);
        sim::IbrUnit u;
        u.name = req_string(ju, "name", p);
        u.bus = static_cast<int>(req_integer(ju, "bus", p));
        u.rating = req_number(ju, "rating", p);
        u.p_ref = req_number(ju, "p_ref", p);
        u.q_ref = opt_number(ju, "q_ref", p, 0.0);
        const std::string kind = req_string(ju, "kind", p);
        const std::vector<std::string>* names = nullptr;
        if (kind == "gfl") {
            u.params = sim::GflParams{};
            names = &gfl_parameter_names();
        } else if (kind == "gfm") {
            u.params = sim::GfmParams{};
            names = &gfm_parameter_names();
        } else {
            throw Error(ErrorCode::config, p + ".kind: expected \"gfl\" or \"gfm\"");
        }
        if (ju.contains("info"))
            g.ibr_info[u.name] = ju.at("info");

        const std::string pp = p + ".params";
        if (!ju.contains("params") || !ju.at("params").is_object())
            throw Error(ErrorCode::config, pp + ": missing object");
        const auto& jp = ju.at("params");
        for (const auto& [key, _] : jp.items()) {
            if (std::find(names->begin(), names->end(), key) == names->end())
                throw Error(ErrorCode::config, pp + "." + key + ": not a " + kind + " control parameter");
        }
        for (const auto& name : *names) {
            const std::string ep = pp + "." + name;
            if (!jp.contains(name))
                throw Error(ErrorCode::config, ep + ": missing");
            const auto& je = jp.at(name);
            require_object(je, ep);
            ParameterEntry e;
            e.ibr = u.name;
            e.name = name;
            e.initial = req_number(je, "initial", ep);
            e.lower = req_number(je, "lower", ep);
            e.upper = req_number(je, "upper", ep);
            if (!(e.lower < e.upper)) {
                std::ostringstream os;
                os << ep << ": lower bound " << e.lower << " is not below upper bound " << e.upper;
                throw Error(ErrorCode::config, os.str());
            }
            g.catalog.entries.push_back(e);
        }
        m.ibrs.push_back(u);
    }

    g.catalog.validate(m);
    apply_parameters(m, g.catalog, g.catalog.initial());
    m.validate();
    return g;
}

json grid_to_json(const GridFile& g)
{
    const auto& m = g.model;
    json j;
    j["schema"] = 1;
    j["name"] = g.name;
    j["bases"] = {{"power_mva", m.bases.power_mva},
                  {"frequency_hz", m.bases.frequency_hz},
                  {"impedance_mva", m.bases.power_mva}};
    j["numerics"] = numerics_to(m.numerics);
    j["buses"] = json::array();
    for (const auto& b : m.buses)
        j["buses"].push_back({{"id", b.id}, {"type", sim::to_string(b.type)}});
    j["lines"] = json::array();
    for (const auto& l : m.lines)
        j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"x", l.x}, {"r", l.r}, {"closed", l.closed}});
    json items = json::array();
    for (const auto& ld : m.loads)
        items.push_back({{"bus", ld.bus}, {"p", ld.p}});
    j["loads"] = {{"items", items}};
    j["ibrs"] = json::array();
    for (const auto& u : m.ibrs) {
        json ju{{"name", u.name},
                {"kind", u.kind() == sim::IbrKind::gfl ? "gfl" : "gfm"},
                {"bus", u.bus},
                {"rating", u.rating},
                {"p_ref", u.p_ref},
                {"q_ref", u.q_ref}};
        if (auto it = g.ibr_info.find(u.name); it != g.ibr_info.end())
            ju["info"] = it->second;
        json params = json::object();
        for (const auto& e : g.catalog.entries)
            if (e.ibr == u.name)
                params[e.name] = {{"initial", e.initial}, {"lower", e.lower}, {"upper", e.upper}};
        ju["params"] = params;
        j["ibrs"].push_back(ju);
    }
    return j;
}

GridFile load_grid(const std::filesystem::path& path)
{
    const json j = read_json_file(path);
    try {
        return grid_from_json(j);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config)
            throw Error(ErrorCode::config, path.string() + ": " + e.what());
        throw;
    }
}

} // namespace gridtune::io
