#pragma once

#include "gridtune/dynamics.hpp"
#include "gridtune/grid.hpp"
#include "gridtune/network.hpp"

#include <memory>
#include <span>
#include <vector>

namespace gridtune::sim {

struct SimulationSettings {
    double horizon = 5.0;
    double dt_sim = 1e-3;
    double dt_sample = 5e-3;

    static SimulationSettings from(const Numerics& n) { return {n.horizon, n.dt_sim, n.dt_sample}; }
    void validate() const;
};

/// Steady operating point: DC power flow with the grid-forming units sharing the
/// residual load in proportion to their p_ref weights.
struct Equilibrium {
    std::vector<double> bus_angle;      ///< rad, first forming bus at 0
    std::vector<double> dispatch;       ///< per IBR, system pu
    std::vector<double> state;          ///< full dynamic state vector
};

Equilibrium init_equilibrium(const GridModel& model);

/// One fixed RK4 step of dx/dt = f(x); `f(x, dx)` writes the derivative.
template <class F>
void rk4_step(F&& f, std::span<double> x, double dt, std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4, std::vector<double>& tmp, bool k1_ready = false)
{
    const std::size_t n = x.size();
    k1.resize(n), k2.resize(n), k3.resize(n), k4.resize(n), tmp.resize(n);
    if (!k1_ready)
        f(std::span<const double>(x.data(), n), std::span<double>(k1));
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    f(std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    f(std::span<const double>(tmp), std::span<double>(k3));
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = x[i] + dt * k3[i];
    f(std::span<const double>(tmp), std::span<double>(k4));
    for (std::size_t i = 0; i < n; ++i)
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Time-domain model of one grid: owns its state, network and work buffers.
/// Not thread-safe; give each concurrent run its own instance.
class Simulator {
public:
    explicit Simulator(GridModel model);

    const GridModel& model() const noexcept { return model_; }
    double time() const noexcept { return time_; }
    const std::vector<double>& state() const noexcept { return state_; }
    void set_state(std::span<const double> x);
    std::size_t state_size() const noexcept { return state_.size(); }

    /// Applies the event immediately (load change or line opening).
    void apply(const Disturbance& d);

    /// Advances by one RK4 step; throws DivergenceError if the new state is invalid.
    void step(double dt);

    /// Derivative of the composite state at `x` under the current loads/topology.
    void derivatives(std::span<const double> x, std::span<double> dx) const;

    /// Per-bus frequency at the current state, Hz, in model bus order.
    std::vector<double> frequencies_hz() const;

    GflState gfl_state(std::size_t ibr) const;
    GfmState gfm_state(std::size_t ibr) const;
    /// Bus angles from the last network solution at the current state.
    std::vector<double> bus_angles() const;

    const Network& network() const noexcept { return *network_; }
    const Equilibrium& equilibrium() const noexcept { return equilibrium_; }

private:
    struct Aux {
        std::vector<double> bus_angle;
        std::vector<double> forming_power;
        std::vector<double> injection;
        std::vector<double> gfl_slip;
    };
    void evaluate(std::span<const double> x, std::span<double> dx, Aux& aux) const;
    void check_valid() const;

    GridModel model_;
    Equilibrium equilibrium_;
    std::unique_ptr<Network> network_;
    std::vector<bool> line_closed_;
    std::vector<double> bus_load_;       ///< system pu per bus
    std::vector<std::size_t> offset_;    ///< state offset per IBR
    std::vector<std::size_t> ibr_bus_;   ///< bus index per IBR
    std::vector<std::size_t> forming_ibr_;
    std::vector<std::size_t> filter_bus_;   ///< buses with a washout frequency state
    std::size_t filter_offset_ = 0;
    std::vector<double> p_ref_device_;
    double omega0_rad_ = 0.0;

    double time_ = 0.0;
    std::vector<double> state_;
    mutable Aux aux_;
    mutable std::vector<double> forming_angle_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
    bool k1_ready_ = false;
};

/// Runs from equilibrium to the horizon, applying the disturbance at its
/// time, and samples every bus frequency.
FrequencyTrajectory simulate(const GridModel& model, const Disturbance& disturbance,
                             const SimulationSettings& settings);

} // namespace gridtune::sim
