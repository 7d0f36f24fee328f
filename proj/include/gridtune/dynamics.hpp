#pragma once

// Device-level differential equations. Angles are measured in the frame that
// rotates at the nominal frequency; the absolute rate is nominal + slip.
// Power is in per-unit of the device rating, frequency in per-unit of nominal
// unless suffixed _rad (rad/s).

#include "gridtune/grid.hpp"

namespace gridtune::sim {

struct GflState {
    double phi_pll = 0.0;   ///< PLL integrator, rad/s
    double theta = 0.0;     ///< PLL angle, rad
    double p_track = 0.0;   ///< delivered active power, device pu
};

struct GflSignals {
    double omega0_rad = 0.0;
    double omega_ref = 1.0;
    double p_ref = 0.0;        ///< device pu
    double loop_constant = 0.05;
    double power_limit = 1.2;  ///< device pu clamp on P_set
};

struct GflDerivatives {
    double dphi_pll = 0.0;
    double slip_rad = 0.0;   ///< Delta omega of the PLL, rad/s
    double dp_track = 0.0;
    double omega = 1.0;      ///< estimated frequency, pu
    double p_set = 0.0;      ///< droop setpoint before the rating clamp, device pu

    /// Absolute angle rate d(theta)/dt = omega0 + Delta omega.
    double dtheta(double omega0_rad) const noexcept { return omega0_rad + slip_rad; }
};

/// q-axis voltage seen by the PLL for a 1 pu bus voltage at `bus_angle`.
double pll_q_voltage(double bus_angle, double pll_angle);

/// PLL, droop setpoint and reduced current loop of a grid-following unit.
GflDerivatives gfl_derivatives(const GflState& state, double u_cq, const GflParams& params,
                               const GflSignals& signals);

/// Time constant of the first-order lag standing in for a PI loop with gain kp.
double loop_time_constant(double loop_constant, double kp);

struct GfmState {
    double omega = 1.0;            ///< VSG frequency, pu
    double theta = 0.0;            ///< VSG internal angle, rad
    double p_meas_filtered = 0.0;  ///< device pu
    double v_angle = 0.0;          ///< voltage-loop output angle, rad
    double out_angle = 0.0;        ///< terminal angle after the current loop, rad
};

struct GfmSignals {
    double omega0_rad = 0.0;
    double omega_ref = 1.0;
    double p_ref = 0.0;   ///< device pu
    double pmeas_filter = 0.02;
    double loop_constant = 0.05;
};

struct GfmDerivatives {
    double domega = 0.0;
    double slip_rad = 0.0;   ///< omega0 (omega - 1), rad/s
    double dp_meas = 0.0;
    double dv_angle = 0.0;
    double dout_angle = 0.0;

    double dtheta(double omega0_rad) const noexcept { return omega0_rad + slip_rad; }
};

/// Swing emulation M dw/dt = (P_ref - P_meas)/w - D (w - w_ref), the measured
/// power filter, and the voltage then current lags on the terminal angle.
GfmDerivatives gfm_derivatives(const GfmState& state, double electrical_power, const GfmParams& params,
                               const GfmSignals& signals);

} // namespace gridtune::sim
