#pragma once

#include "gridtune/grid.hpp"
#include "gridtune/zo.hpp"

#include <span>
#include <string>
#include <vector>

namespace gridtune::io {

/// One tunable control parameter of one IBR, in physical units.
struct ParameterEntry {
    std::string ibr;
    std::string name;
    double initial = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    /// "<ibr>.<name>", the column label used in logs.
    std::string key() const { return ibr + "." + name; }

    friend bool operator==(const ParameterEntry&, const ParameterEntry&) = default;
};

/// Parameter names exposed by each control type, in catalog order.
const std::vector<std::string>& gfl_parameter_names();
const std::vector<std::string>& gfm_parameter_names();

/// Ordered list of tunable parameters. The position of an entry is its slot in
/// the decision vector.
struct ParameterCatalog {
    std::vector<ParameterEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    std::vector<std::string> keys() const;
    zo::Vector initial() const;
    zo::BoxBounds bounds() const;

    /// Intervals non-empty, initial values inside, and each IBR exposes
    /// exactly the names of its control type.
    void validate(const sim::GridModel& model) const;

    friend bool operator==(const ParameterCatalog&, const ParameterCatalog&) = default;
};

/// Reads the current parameter values of the model's IBRs into catalog order.
zo::Vector read_parameters(const sim::GridModel& model, const ParameterCatalog& catalog);

/// Writes physical parameter values into the model's IBR control blocks.
void apply_parameters(sim::GridModel& model, const ParameterCatalog& catalog, std::span<const double> values);

} // namespace gridtune::io
