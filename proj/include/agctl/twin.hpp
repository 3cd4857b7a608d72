#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace agctl {

/// Physical parameters of one heater element. Defaults are the bench values
/// used throughout the prompt assets.
struct TwinParams {
    double mass = 0.004;               // kg
    double heat_capacity = 500.0;      // J/(kg*K)
    double area = 1.2e-3;              // m^2
    double htc = 10.0;                 // W/(m^2*K)
    double emissivity = 0.9;
    double stefan_boltzmann = 5.67e-8; // W/(m^2*K^4)
    double ambient = 293.15;           // K

    void validate() const;
};

struct TwinState {
    double t1 = 293.15;  // K
    double t2 = 293.15;  // K
    double time = 0.0;   // s
};

inline double average_temperature(const TwinState& s) { return 0.5 * (s.t1 + s.t2); }

constexpr double kQMax = 0.3;  // W, per-heater actuation limit

/// Validated actuation; construction rejects out-of-range powers so that
/// saturation is owned by gate logic, not by the physics.
struct HeaterCommand {
    HeaterCommand() = default;
    HeaterCommand(double q1_w, double q2_w, double q_max = kQMax);
    double q1 = 0.0;  // W
    double q2 = 0.0;  // W
};

/// Constant fan blowing on one heater, modeled as a multiplier on the
/// convective coefficient while the window is active.
struct DisturbanceProfile {
    int fan_on_heater = 0;      // 0-based heater index
    double u_multiplier = 2.0;  // >= 1
    double window_start = 0.0;
    double window_end = std::numeric_limits<double>::infinity();

    bool active_at(double time) const {
        return time >= window_start && time <= window_end;
    }
    double u_eff(const TwinParams& params, int heater, double time) const {
        return (heater == fan_on_heater && active_at(time))
                   ? params.htc * u_multiplier
                   : params.htc;
    }
};

inline DisturbanceProfile no_disturbance() {
    return DisturbanceProfile{.fan_on_heater = -1};
}

struct TrajectorySample {
    TwinState state;
    HeaterCommand cmd;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.0;

    void append(const TwinState& state, const HeaterCommand& cmd);
    void write_csv(std::ostream& out) const;  // time_s,t1_K,t2_K,q1_W,q2_W
};

/// q - u_eff*A*(T-Ta) - eps*sigma*A*(T^4-Ta^4), in watts.
double net_heat_rate(double temperature, double q, const TwinParams& params,
                     double u_eff);

/// Classical RK4 advance of both independent heater ODEs
/// dT/dt = Q_net / (m*Cp).
TwinState step_rk4(const TwinState& state, const HeaterCommand& cmd, double dt,
                   const TwinParams& params, const DisturbanceProfile& disturbance);

/// Repeated step_rk4 holding cmd constant; includes the initial state, so a
/// run of duration D at step dt yields D/dt + 1 samples.
Trajectory simulate_interval(const TwinState& state, const HeaterCommand& cmd,
                             double duration, double dt, const TwinParams& params,
                             const DisturbanceProfile& disturbance);

/// The unique T >= Ta with zero net heat rate, by bisection on
/// [Ta, Ta+200] to 1e-9 W residual.
double equilibrium_temperature(double q, const TwinParams& params, double u_eff);

/// One forward-Euler step across the whole horizon, no substeps. Reproduces
/// the single finite-difference shortcut for divergence reporting against
/// the real integrator.
std::pair<double, double> naive_single_step(const TwinState& state,
                                            const HeaterCommand& cmd,
                                            double horizon,
                                            const TwinParams& params);

nlohmann::json twin_params_to_json(const TwinParams& p);
TwinParams twin_params_from_json(const nlohmann::json& j);
nlohmann::json disturbance_to_json(const DisturbanceProfile& d);
DisturbanceProfile disturbance_from_json(const nlohmann::json& j);

}  // namespace agctl
