#include "gridtune/catalog.hpp"

#include "gridtune/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <type_traits>
#include <variant>

namespace gridtune::io {

const std::vector<std::string>& gfl_parameter_names()
{
    static const std::vector<std::string> names{"D", "Ki_PLL", "Kp_PLL", "Ki_i", "Kp_i"};
    return names;
}

const std::vector<std::string>& gfm_parameter_names()
{
    static const std::vector<std::string> names{"D", "M", "Ki_v", "Kp_v", "Ki_i", "Kp_i"};
    return names;
}

namespace {

double* gfl_slot(sim::GflParams& p, const std::string& name)
{
    if (name == "D") return &p.d_droop;
    if (name == "Ki_PLL") return &p.ki_pll;
    if (name == "Kp_PLL") return &p.kp_pll;
    if (name == "Ki_i") return &p.ki_i;
    if (name == "Kp_i") return &p.kp_i;
    return nullptr;
}

double* gfm_slot(sim::GfmParams& p, const std::string& name)
{
    if (name == "D") return &p.d_damp;
    if (name == "M") return &p.m_inertia;
    if (name == "Ki_v") return &p.ki_v;
    if (name == "Kp_v") return &p.kp_v;
    if (name == "Ki_i") return &p.ki_i;
    if (name == "Kp_i") return &p.kp_i;
    return nullptr;
}

sim::IbrUnit& find_ibr(sim::GridModel& model, const std::string& name)
{
    for (auto& u : model.ibrs)
        if (u.name == name)
            return u;
    throw Error(ErrorCode::config, "parameter references unknown IBR '" + name + "'");
}

double* slot(sim::IbrUnit& u, const std::string& name)
{
    double* p = std::visit(
        [&](auto& params) -> double* {
            if constexpr (std::is_same_v<std::decay_t<decltype(params)>, sim::GflParams>)
                return gfl_slot(params, name);
            else
                return gfm_slot(params, name);
        },
        u.params);
    if (!p)
        throw Error(ErrorCode::config, u.name + ": unknown control parameter '" + name + "'");
    return p;
}

} // namespace

std::vector<std::string> ParameterCatalog::keys() const
{
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
        out.push_back(e.key());
    return out;
}

zo::Vector ParameterCatalog::initial() const
{
    zo::Vector out;
    out.reserve(entries.size());
    for (const auto& e : entries)
        out.push_back(e.initial);
    return out;
}

zo::BoxBounds ParameterCatalog::bounds() const
{
    zo::BoxBounds b;
    for (const auto& e : entries) {
        b.lower.push_back(e.lower);
        b.upper.push_back(e.upper);
    }
    return b;
}

void ParameterCatalog::validate(const sim::GridModel& model) const
{
    if (entries.empty())
        throw Error(ErrorCode::config, "parameter catalog is empty");
    std::map<std::string, std::set<std::string>> seen;
    for (const auto& e : entries) {
        const std::string path = "ibrs." + e.ibr + ".params." + e.name;
        if (!std::isfinite(e.lower) || !std::isfinite(e.upper) || !(e.lower < e.upper))
            throw Error(ErrorCode::config, path + ": lower bound must be below upper bound");
        if (!(e.lower > 0.0))
            throw Error(ErrorCode::config, path + ": lower bound must be positive");
        if (!(e.initial >= e.lower && e.initial <= e.upper))
            throw Error(ErrorCode::config, path + ": initial value lies outside [lower, upper]");
        if (!seen[e.ibr].insert(e.name).second)
            throw Error(ErrorCode::config, path + ": duplicate parameter");
    }
    for (const auto& u : model.ibrs) {
        const auto& expected = u.kind() == sim::IbrKind::gfl ? gfl_parameter_names() : gfm_parameter_names();
        const auto it = seen.find(u.name);
        if (it == seen.end())
            continue;   // an IBR may be left out of the tuning entirely
        const std::set<std::string> want(expected.begin(), expected.end());
        if (it->second != want)
            throw Error(ErrorCode::config, "ibrs." + u.name + ".params: expected exactly the "
                                               + (u.kind() == sim::IbrKind::gfl ? "GFL" : "GFM")
                                               + " parameter set");
    }
    for (const auto& [ibr, names] : seen) {
        const bool known = std::any_of(model.ibrs.begin(), model.ibrs.end(),
                                       [&](const sim::IbrUnit& u) { return u.name == ibr; });
        if (!known)
            throw Error(ErrorCode::config, "parameter catalog references unknown IBR '" + ibr + "'");
    }
}

zo::Vector read_parameters(const sim::GridModel& model, const ParameterCatalog& catalog)
{
    sim::GridModel copy = model;
    zo::Vector out;
    out.reserve(catalog.size());
    for (const auto& e : catalog.entries)
        out.push_back(*slot(find_ibr(copy, e.ibr), e.name));
    return out;
}

void apply_parameters(sim::GridModel& model, const ParameterCatalog& catalog, std::span<const double> values)
{
    if (values.size() != catalog.size())
        throw Error(ErrorCode::invalid_dimension, "parameter vector does not match the catalog");
    for (std::size_t j = 0; j < values.size(); ++j) {
        const auto& e = catalog.entries[j];
        *slot(find_ibr(model, e.ibr), e.name) = values[j];
    }
}

} // namespace gridtune::io
