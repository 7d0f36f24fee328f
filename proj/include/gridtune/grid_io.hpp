#pragma once

// Grid description files: JSON with sections bases, numerics, buses, lines,
// loads and ibrs. See docs/grid_format.md.

#include "gridtune/catalog.hpp"
#include "gridtune/grid.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace gridtune::io {

struct GridFile {
    std::string name;
    sim::GridModel model;        ///< control parameters set to the catalog's initial values
    ParameterCatalog catalog;
    /// Free-form per-IBR records carried through unchanged (e.g. source table values).
    std::map<std::string, nlohmann::json> ibr_info;

    friend bool operator==(const GridFile&, const GridFile&) = default;
};

GridFile grid_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const GridFile& g);
GridFile load_grid(const std::filesystem::path& path);

/// Parses a JSON file; parse errors become config errors carrying the position.
nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace gridtune::io
