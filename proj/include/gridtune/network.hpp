#pragma once

// Lossless DC-style phasor network: P_ij = (theta_i - theta_j) / x_ij with 1 pu
// voltage magnitudes. Grid-forming terminals fix their bus angles; every other
// bus has a known injection and its angle follows algebraically.

#include "gridtune/grid.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace gridtune::sim {

/// Weighted Laplacian B with B_ij = -1/x_ij and B_ii = sum_j 1/x_ij over closed lines.
Eigen::MatrixXd susceptance_matrix(const GridModel& model, const std::vector<bool>& line_closed);

/// Angles for given net injections with the angle of `reference_bus` pinned to 0.
/// Injections must sum to zero.
Eigen::VectorXd dc_power_flow(const GridModel& model, const std::vector<bool>& line_closed,
                              std::span<const double> injections, std::size_t reference_bus);

class Network {
public:
    Network(const GridModel& model, const std::vector<bool>& line_closed);

    std::size_t bus_count() const noexcept { return n_bus_; }
    const Eigen::MatrixXd& susceptance() const noexcept { return b_; }
    /// Bus indices of the grid-forming terminals, in IBR order.
    const std::vector<std::size_t>& forming_buses() const noexcept { return forming_; }

    /// Fills `bus_angle` (all buses) and `forming_power` (per forming terminal,
    /// system pu) from the forming angles and the injections at the other buses.
    /// Entries of `injection` at forming buses are ignored.
    void solve(std::span<const double> forming_angle, std::span<const double> injection,
               std::span<double> bus_angle, std::span<double> forming_power) const;

private:
    std::size_t n_bus_ = 0;
    Eigen::MatrixXd b_;
    std::vector<std::size_t> forming_;
    std::vector<std::size_t> free_;
    Eigen::MatrixXd free_inverse_;   ///< B_ff^{-1}
    Eigen::MatrixXd free_coupling_;  ///< -B_ff^{-1} B_fg
    Eigen::MatrixXd forming_rows_;   ///< [B_gg  B_gf] applied to (theta_g, theta_f)
    mutable Eigen::VectorXd scratch_free_;
    mutable Eigen::VectorXd scratch_angles_;
};

} // namespace gridtune::sim
