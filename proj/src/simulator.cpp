#include "gridtune/simulator.hpp"

#include "gridtune/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gridtune::sim {

namespace {

constexpr std::size_t gfl_width = 3;
constexpr std::size_t gfm_width = 5;

enum GflSlot : std::size_t { gfl_phi = 0, gfl_theta = 1, gfl_p = 2 };
enum GfmSlot : std::size_t { gfm_omega = 0, gfm_theta = 1, gfm_pmeas = 2, gfm_vang = 3, gfm_out = 4 };

std::vector<bool> closed_lines(const GridModel& model)
{
    std::vector<bool> closed(model.lines.size());
    for (std::size_t k = 0; k < model.lines.size(); ++k)
        closed[k] = model.lines[k].closed;
    return closed;
}

std::vector<double> loads_per_bus(const GridModel& model)
{
    std::vector<double> load(model.buses.size(), 0.0);
    for (const auto& l : model.loads)
        load[model.bus_index(l.bus)] += l.p;
    return load;
}

bool has_filter_state(BusType t) { return t == BusType::passive || t == BusType::load; }

} // namespace

void SimulationSettings::validate() const
{
    Numerics n;
    n.horizon = horizon;
    n.dt_sim = dt_sim;
    n.dt_sample = dt_sample;
    n.validate();
}

Equilibrium init_equilibrium(const GridModel& model)
{
    model.validate();
    const std::size_t nb = model.buses.size();
    const auto load = loads_per_bus(model);

    Equilibrium eq;
    eq.dispatch.assign(model.ibrs.size(), 0.0);

    double residual = model.total_load();
    double weight_sum = 0.0;
    double rating_sum = 0.0;
    for (std::size_t i = 0; i < model.ibrs.size(); ++i) {
        const auto& u = model.ibrs[i];
        if (u.kind() == IbrKind::gfl) {
            if (std::abs(u.p_ref) > u.rating)
                throw Error(ErrorCode::infeasible_dispatch, u.name + ": p_ref exceeds the unit rating");
            eq.dispatch[i] = u.p_ref;
            residual -= u.p_ref;
        } else {
            weight_sum += std::max(u.p_ref, 0.0);
            rating_sum += u.rating;
        }
    }
    for (std::size_t i = 0; i < model.ibrs.size(); ++i) {
        const auto& u = model.ibrs[i];
        if (u.kind() != IbrKind::gfm)
            continue;
        const double share = weight_sum > 0.0 ? std::max(u.p_ref, 0.0) / weight_sum : u.rating / rating_sum;
        eq.dispatch[i] = residual * share;
        if (std::abs(eq.dispatch[i]) > u.rating) {
            std::ostringstream os;
            os << u.name << ": slack share " << eq.dispatch[i] << " pu exceeds rating " << u.rating << " pu";
            throw Error(ErrorCode::infeasible_dispatch, os.str());
        }
    }

    std::vector<double> injection(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b)
        injection[b] = -load[b];
    std::size_t reference = nb;
    for (std::size_t i = 0; i < model.ibrs.size(); ++i) {
        const auto b = model.bus_index(model.ibrs[i].bus);
        injection[b] += eq.dispatch[i];
        if (reference == nb && model.ibrs[i].kind() == IbrKind::gfm)
            reference = b;
    }
    const Eigen::VectorXd theta = dc_power_flow(model, closed_lines(model), injection, reference);
    eq.bus_angle.assign(theta.data(), theta.data() + theta.size());

    for (std::size_t i = 0; i < model.ibrs.size(); ++i) {
        const auto& u = model.ibrs[i];
        const double angle = eq.bus_angle[model.bus_index(u.bus)];
        const double p_dev = eq.dispatch[i] / u.rating;
        if (u.kind() == IbrKind::gfl) {
            eq.state.insert(eq.state.end(), {0.0, angle, p_dev});
        } else {
            eq.state.insert(eq.state.end(), {1.0, angle, p_dev, angle, angle});
        }
    }
    for (std::size_t b = 0; b < nb; ++b)
        if (has_filter_state(model.buses[b].type))
            eq.state.push_back(eq.bus_angle[b]);
    return eq;
}

Simulator::Simulator(GridModel model)
    : model_(std::move(model)),
      equilibrium_(init_equilibrium(model_)),
      line_closed_(closed_lines(model_)),
      bus_load_(loads_per_bus(model_)),
      omega0_rad_(model_.bases.omega0_rad())
{
    network_ = std::make_unique<Network>(model_, line_closed_);
    std::size_t off = 0;
    for (std::size_t i = 0; i < model_.ibrs.size(); ++i) {
        const auto& u = model_.ibrs[i];
        offset_.push_back(off);
        ibr_bus_.push_back(model_.bus_index(u.bus));
        p_ref_device_.push_back(equilibrium_.dispatch[i] / u.rating);
        if (u.kind() == IbrKind::gfl) {
            off += gfl_width;
        } else {
            forming_ibr_.push_back(i);
            off += gfm_width;
        }
    }
    filter_offset_ = off;
    for (std::size_t b = 0; b < model_.buses.size(); ++b)
        if (has_filter_state(model_.buses[b].type))
            filter_bus_.push_back(b);

    const std::size_t nb = model_.buses.size();
    aux_.bus_angle.assign(nb, 0.0);
    aux_.injection.assign(nb, 0.0);
    aux_.forming_power.assign(forming_ibr_.size(), 0.0);
    aux_.gfl_slip.assign(model_.ibrs.size(), 0.0);
    forming_angle_.assign(forming_ibr_.size(), 0.0);
    state_ = equilibrium_.state;
}

void Simulator::set_state(std::span<const double> x)
{
    if (x.size() != state_.size())
        throw Error(ErrorCode::invalid_dimension, "simulator state size mismatch");
    state_.assign(x.begin(), x.end());
    k1_ready_ = false;
}

void Simulator::apply(const Disturbance& d)
{
    d.validate(model_);
    if (const auto* step = std::get_if<LoadStep>(&d.event)) {
        bus_load_[model_.bus_index(step->bus)] += step->delta_p;
    } else {
        const auto& trip = std::get<LineTrip>(d.event);
        const auto k = *model_.find_line(trip.from, trip.to);
        model_.lines[k].closed = false;
        line_closed_[k] = false;
        network_ = std::make_unique<Network>(model_, line_closed_);
    }
    k1_ready_ = false;
}

void Simulator::evaluate(std::span<const double> x, std::span<double> dx, Aux& aux) const
{
    const auto& num = model_.numerics;
    for (std::size_t b = 0; b < bus_load_.size(); ++b)
        aux.injection[b] = -bus_load_[b];
    for (std::size_t g = 0; g < forming_ibr_.size(); ++g)
        forming_angle_[g] = x[offset_[forming_ibr_[g]] + gfm_out];
    for (std::size_t i = 0; i < model_.ibrs.size(); ++i)
        if (model_.ibrs[i].kind() == IbrKind::gfl)
            aux.injection[ibr_bus_[i]] += x[offset_[i] + gfl_p] * model_.ibrs[i].rating;

    network_->solve(forming_angle_, aux.injection, aux.bus_angle, aux.forming_power);

    std::size_t g = 0;
    for (std::size_t i = 0; i < model_.ibrs.size(); ++i) {
        const auto& u = model_.ibrs[i];
        const std::size_t o = offset_[i];
        if (u.kind() == IbrKind::gfl) {
            const GflState s{x[o + gfl_phi], x[o + gfl_theta], x[o + gfl_p]};
            const GflSignals sig{omega0_rad_, 1.0, p_ref_device_[i], num.loop_constant_gfl, num.gfl_power_limit};
            const double u_cq = pll_q_voltage(aux.bus_angle[ibr_bus_[i]], s.theta);
            const auto d = gfl_derivatives(s, u_cq, std::get<GflParams>(u.params), sig);
            dx[o + gfl_phi] = d.dphi_pll;
            dx[o + gfl_theta] = d.slip_rad;
            dx[o + gfl_p] = d.dp_track;
            aux.gfl_slip[i] = d.slip_rad;
        } else {
            const GfmState s{x[o + gfm_omega], x[o + gfm_theta], x[o + gfm_pmeas], x[o + gfm_vang], x[o + gfm_out]};
            const GfmSignals sig{omega0_rad_, 1.0, p_ref_device_[i], num.pmeas_filter, num.loop_constant_gfm};
            // The network sees the unit net of any load at its own bus.
            const double p_e = (aux.forming_power[g++] + bus_load_[ibr_bus_[i]]) / u.rating;
            const auto d = gfm_derivatives(s, p_e, std::get<GfmParams>(u.params), sig);
            dx[o + gfm_omega] = d.domega;
            dx[o + gfm_theta] = d.slip_rad;
            dx[o + gfm_pmeas] = d.dp_meas;
            dx[o + gfm_vang] = d.dv_angle;
            dx[o + gfm_out] = d.dout_angle;
        }
    }
    for (std::size_t f = 0; f < filter_bus_.size(); ++f) {
        const std::size_t o = filter_offset_ + f;
        dx[o] = (aux.bus_angle[filter_bus_[f]] - x[o]) / num.bus_freq_filter;
    }
}

void Simulator::derivatives(std::span<const double> x, std::span<double> dx) const
{
    if (x.size() != state_.size() || dx.size() != state_.size())
        throw Error(ErrorCode::invalid_dimension, "derivative buffer size mismatch");
    Aux aux = aux_;
    evaluate(x, dx, aux);
}

void Simulator::check_valid() const
{
    for (std::size_t i = 0; i < model_.ibrs.size(); ++i) {
        const auto& u = model_.ibrs[i];
        const std::size_t o = offset_[i];
        const std::size_t width = u.kind() == IbrKind::gfl ? gfl_width : gfm_width;
        for (std::size_t j = 0; j < width; ++j)
            if (!std::isfinite(state_[o + j]))
                throw DivergenceError(time_, u.bus, u.name + " state " + std::to_string(j), "non-finite value");
        if (u.kind() == IbrKind::gfm) {
            const double w = state_[o + gfm_omega];
            if (w < 0.8 || w > 1.2) {
                std::ostringstream os;
                os << "VSG frequency " << w << " pu outside [0.8, 1.2]";
                throw DivergenceError(time_, u.bus, u.name + ".omega", os.str());
            }
        } else if (!std::isfinite(aux_.gfl_slip[i]) || std::abs(aux_.gfl_slip[i]) > 0.2 * omega0_rad_) {
            std::ostringstream os;
            os << "PLL frequency deviation " << aux_.gfl_slip[i] << " rad/s exceeds 0.2 omega0";
            throw DivergenceError(time_, u.bus, u.name + ".delta_omega", os.str());
        }
    }
    for (std::size_t f = 0; f < filter_bus_.size(); ++f)
        if (!std::isfinite(state_[filter_offset_ + f]))
            throw DivergenceError(time_, model_.buses[filter_bus_[f]].id, "bus frequency filter", "non-finite value");
}

void Simulator::step(double dt)
{
    if (!(dt > 0.0))
        throw Error(ErrorCode::invalid_argument, "step size must be positive");
    auto f = [this](std::span<const double> x, std::span<double> dx) { evaluate(x, dx, aux_); };
    rk4_step(f, std::span<double>(state_), dt, k1_, k2_, k3_, k4_, tmp_, k1_ready_);
    time_ += dt;
    // Derivative at the new state: feeds the validity check and the next step's first stage.
    evaluate(state_, k1_, aux_);
    k1_ready_ = true;
    check_valid();
}

std::vector<double> Simulator::frequencies_hz() const
{
    if (!k1_ready_) {
        auto& self = const_cast<Simulator&>(*this);
        self.k1_.resize(state_.size());
        evaluate(state_, self.k1_, aux_);
        self.k1_ready_ = true;
    }
    const double f0 = model_.bases.frequency_hz;
    const double hz_per_rad = f0 / omega0_rad_;
    std::vector<double> hz(model_.buses.size(), f0);
    for (std::size_t i = 0; i < model_.ibrs.size(); ++i) {
        if (model_.ibrs[i].kind() == IbrKind::gfl)
            hz[ibr_bus_[i]] = f0 + aux_.gfl_slip[i] * hz_per_rad;
        else
            hz[ibr_bus_[i]] = f0 * state_[offset_[i] + gfm_omega];
    }
    for (std::size_t f = 0; f < filter_bus_.size(); ++f) {
        const std::size_t b = filter_bus_[f];
        const double slip = (aux_.bus_angle[b] - state_[filter_offset_ + f]) / model_.numerics.bus_freq_filter;
        hz[b] = f0 + slip * hz_per_rad;
    }
    return hz;
}

GflState Simulator::gfl_state(std::size_t ibr) const
{
    if (model_.ibrs.at(ibr).kind() != IbrKind::gfl)
        throw Error(ErrorCode::invalid_argument, "IBR is not grid-following");
    const std::size_t o = offset_[ibr];
    return {state_[o + gfl_phi], state_[o + gfl_theta], state_[o + gfl_p]};
}

GfmState Simulator::gfm_state(std::size_t ibr) const
{
    if (model_.ibrs.at(ibr).kind() != IbrKind::gfm)
        throw Error(ErrorCode::invalid_argument, "IBR is not grid-forming");
    const std::size_t o = offset_[ibr];
    return {state_[o + gfm_omega], state_[o + gfm_theta], state_[o + gfm_pmeas], state_[o + gfm_vang],
            state_[o + gfm_out]};
}

std::vector<double> Simulator::bus_angles() const
{
    frequencies_hz();
    return aux_.bus_angle;
}

FrequencyTrajectory simulate(const GridModel& model, const Disturbance& disturbance,
                             const SimulationSettings& settings)
{
    settings.validate();
    Simulator sim(model);
    disturbance.validate(sim.model());

    const auto ratio = static_cast<std::size_t>(std::llround(settings.dt_sample / settings.dt_sim));
    const std::size_t n_samples = sample_count(0.0, settings.horizon, settings.dt_sample);
    const std::size_t total_steps = (n_samples - 1) * ratio;
    const double td_steps = std::ceil(disturbance.t_d / settings.dt_sim - 1e-9);
    const auto event_step = static_cast<std::size_t>(std::max(td_steps, 0.0));

    FrequencyTrajectory traj;
    traj.t_start = 0.0;
    traj.dt = settings.dt_sample;
    traj.horizon = settings.horizon;
    for (const auto& b : model.buses)
        traj.bus_ids.push_back(b.id);
    traj.hz.assign(model.buses.size(), {});
    for (auto& h : traj.hz)
        h.reserve(n_samples);

    for (std::size_t s = 0; s <= total_steps; ++s) {
        if (s == event_step)
            sim.apply(disturbance);
        if (s % ratio == 0) {
            const auto hz = sim.frequencies_hz();
            for (std::size_t b = 0; b < hz.size(); ++b)
                traj.hz[b].push_back(hz[b]);
        }
        if (s < total_steps)
            sim.step(settings.dt_sim);
    }
    return traj;
}

} // namespace gridtune::sim
