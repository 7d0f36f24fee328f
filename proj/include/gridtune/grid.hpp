#pragma once

// Network, device and disturbance descriptions for the reduced-order
// multi-inverter simulator. Electrical quantities are per-unit on the system
// power base unless a field says otherwise; device controls work on the
// device's own rating.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gridtune::sim {

enum class BusType { passive, load, gfl, gfm };

const char* to_string(BusType t);
BusType bus_type_from_string(const std::string& s);

struct Bus {
    int id = 0;
    BusType type = BusType::passive;

    friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
    int from = 0;
    int to = 0;
    double x = 0.0;   ///< series reactance, system per-unit
    double r = 0.0;   ///< series resistance, system per-unit (ignored by the lossless network)
    bool closed = true;

    friend bool operator==(const Line&, const Line&) = default;
};

struct Load {
    int bus = 0;
    double p = 0.0;

    friend bool operator==(const Load&, const Load&) = default;
};

/// Grid-following control: PLL, frequency droop, reduced current loop.
struct GflParams {
    double kp_pll = 50.0;
    double ki_pll = 3000.0;
    double d_droop = 1100.0;
    double kp_i = 50.0;
    double ki_i = 200.0;

    void validate(const std::string& owner) const;

    friend bool operator==(const GflParams&, const GflParams&) = default;
};

/// Grid-forming virtual synchronous generator with reduced voltage/current loops.
struct GfmParams {
    double m_inertia = 10.0;
    double d_damp = 1100.0;
    double kp_v = 10.0;
    double ki_v = 40.0;
    double kp_i = 2.5;
    double ki_i = 12.5;

    void validate(const std::string& owner) const;

    friend bool operator==(const GfmParams&, const GfmParams&) = default;
};

enum class IbrKind { gfl, gfm };

struct IbrUnit {
    std::string name;
    int bus = 0;
    double p_ref = 0.0;    ///< dispatched active power, system per-unit (GFM: slack participation weight)
    double q_ref = 0.0;    ///< reactive setpoint, carried for reporting only
    double rating = 1.0;   ///< device power base, system per-unit
    std::variant<GflParams, GfmParams> params;

    IbrKind kind() const noexcept
    {
        return std::holds_alternative<GflParams>(params) ? IbrKind::gfl : IbrKind::gfm;
    }

    friend bool operator==(const IbrUnit&, const IbrUnit&) = default;
};

struct Bases {
    double power_mva = 1000.0;
    double frequency_hz = 60.0;

    double omega0_rad() const noexcept;

    friend bool operator==(const Bases&, const Bases&) = default;
};

struct Numerics {
    double dt_sim = 1e-3;
    double dt_sample = 5e-3;
    double horizon = 5.0;
    double pmeas_filter = 0.02;       ///< GFM measured-power filter time constant, s
    double bus_freq_filter = 0.02;    ///< passive-bus angle-derivative filter, s
    double loop_constant_gfl = 0.05;  ///< GFL current-loop lag = constant / kp_i
    double loop_constant_gfm = 0.05;  ///< GFM voltage and current lags = constant / kp
    double gfl_power_limit = 1.2;     ///< |P_set| clamp, multiples of the device rating

    void validate() const;

    friend bool operator==(const Numerics&, const Numerics&) = default;
};

struct GridModel {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Load> loads;
    std::vector<IbrUnit> ibrs;
    Bases bases;
    Numerics numerics;

    /// Index into `buses` for a bus id; throws a topology error if absent.
    std::size_t bus_index(int id) const;
    std::optional<std::size_t> find_bus(int id) const;
    std::optional<std::size_t> find_line(int from, int to) const;
    double total_load() const;

    /// Structural checks: ids, references, reactances, connectivity, device params.
    void validate() const;

    friend bool operator==(const GridModel&, const GridModel&) = default;
};

/// Buses reachable through closed lines form a single component.
bool is_connected(const GridModel& model, const std::vector<bool>& line_closed);

struct LoadStep {
    int bus = 0;
    double delta_p = 0.0;

    friend bool operator==(const LoadStep&, const LoadStep&) = default;
};

struct LineTrip {
    int from = 0;
    int to = 0;

    friend bool operator==(const LineTrip&, const LineTrip&) = default;
};

struct Disturbance {
    std::variant<LoadStep, LineTrip> event;
    double t_d = 1.0;

    /// Throws if the referenced bus/line is missing or a trip would split the network.
    void validate(const GridModel& model) const;

    friend bool operator==(const Disturbance&, const Disturbance&) = default;
};

/// Per-bus frequency samples on the uniform grid t_start + i dt, in Hz.
struct FrequencyTrajectory {
    double t_start = 0.0;
    double dt = 0.0;
    double horizon = 0.0;
    std::vector<int> bus_ids;
    std::vector<std::vector<double>> hz;   ///< hz[bus][sample]

    std::size_t samples() const noexcept { return hz.empty() ? 0 : hz.front().size(); }
    double time(std::size_t i) const noexcept { return t_start + static_cast<double>(i) * dt; }

    const std::vector<double>& bus(int id) const;
    std::optional<std::size_t> find_bus(int id) const;
};

/// Number of samples on [t_start, horizon] at step dt, tolerant to rounding.
std::size_t sample_count(double t_start, double horizon, double dt);

} // namespace gridtune::sim
