#include "gridtune/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace gridtune::sim {

double pll_q_voltage(double bus_angle, double pll_angle) { return std::sin(bus_angle - pll_angle); }

double loop_time_constant(double loop_constant, double kp) { return loop_constant / kp; }

GflDerivatives gfl_derivatives(const GflState& state, double u_cq, const GflParams& params,
                               const GflSignals& signals)
{
    GflDerivatives d;
    d.dphi_pll = params.ki_pll * u_cq;
    d.slip_rad = params.kp_pll * u_cq + state.phi_pll;
    d.omega = 1.0 + d.slip_rad / signals.omega0_rad;
    d.p_set = params.d_droop * (signals.omega_ref - d.omega) + signals.p_ref;
    const double target = std::clamp(d.p_set, -signals.power_limit, signals.power_limit);
    d.dp_track = (target - state.p_track) / loop_time_constant(signals.loop_constant, params.kp_i);
    return d;
}

GfmDerivatives gfm_derivatives(const GfmState& state, double electrical_power, const GfmParams& params,
                               const GfmSignals& signals)
{
    GfmDerivatives d;
    d.domega = ((signals.p_ref - state.p_meas_filtered) / state.omega
                - params.d_damp * (state.omega - signals.omega_ref))
               / params.m_inertia;
    d.slip_rad = signals.omega0_rad * (state.omega - 1.0);
    d.dp_meas = (electrical_power - state.p_meas_filtered) / signals.pmeas_filter;
    d.dv_angle = (state.theta - state.v_angle) / loop_time_constant(signals.loop_constant, params.kp_v);
    d.dout_angle = (state.v_angle - state.out_angle) / loop_time_constant(signals.loop_constant, params.kp_i);
    return d;
}

} // namespace gridtune::sim
