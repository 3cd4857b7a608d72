#include "agctl/twin.hpp"

#include <cmath>
#include <fmt/format.h>

#include "agctl/errors.hpp"

namespace agctl {

void TwinParams::validate() const {
    if (mass <= 0 || heat_capacity <= 0 || area <= 0 || htc <= 0 ||
        stefan_boltzmann <= 0 || ambient <= 0)
        throw OutOfRange("twin parameters must be strictly positive");
    if (emissivity <= 0 || emissivity > 1)
        throw OutOfRange("emissivity must be in (0, 1]");
}

HeaterCommand::HeaterCommand(double q1_w, double q2_w, double q_max) : q1(q1_w), q2(q2_w) {
    if (!(q1 >= 0 && q1 <= q_max) || !(q2 >= 0 && q2 <= q_max))
        throw OutOfRange(fmt::format("heater command ({}, {}) outside [0, {}]", q1, q2, q_max));
}

void Trajectory::append(const TwinState& state, const HeaterCommand& cmd) {
    samples.push_back({state, cmd});
}

void Trajectory::write_csv(std::ostream& out) const {
    out << "time_s,t1_K,t2_K,q1_W,q2_W\n";
    for (const auto& s : samples) {
        out << fmt::format("{:.6f},{:.9f},{:.9f},{:.9f},{:.9f}\n", s.state.time,
                           s.state.t1, s.state.t2, s.cmd.q1, s.cmd.q2);
    }
}

double net_heat_rate(double temperature, double q, const TwinParams& params, double u_eff) {
    const double ta = params.ambient;
    const double conv = u_eff * params.area * (temperature - ta);
    const double rad = params.emissivity * params.stefan_boltzmann * params.area *
                       (std::pow(temperature, 4) - std::pow(ta, 4));
    return q - conv - rad;
}

namespace {

double deriv(double temperature, double q, const TwinParams& params, double u_eff) {
    return net_heat_rate(temperature, q, params, u_eff) /
           (params.mass * params.heat_capacity);
}

double rk4_heater(double t0, double q, double dt, const TwinParams& params,
                  const DisturbanceProfile& disturbance, int heater, double time) {
    const double u_a = disturbance.u_eff(params, heater, time);
    const double u_b = disturbance.u_eff(params, heater, time + 0.5 * dt);
    const double u_c = disturbance.u_eff(params, heater, time + dt);
    const double k1 = deriv(t0, q, params, u_a);
    const double k2 = deriv(t0 + 0.5 * dt * k1, q, params, u_b);
    const double k3 = deriv(t0 + 0.5 * dt * k2, q, params, u_b);
    const double k4 = deriv(t0 + dt * k3, q, params, u_c);
    return t0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

TwinState step_rk4(const TwinState& state, const HeaterCommand& cmd, double dt,
                   const TwinParams& params, const DisturbanceProfile& disturbance) {
    if (dt <= 0) throw OutOfRange("dt must be positive");
    TwinState next;
    next.t1 = rk4_heater(state.t1, cmd.q1, dt, params, disturbance, 0, state.time);
    next.t2 = rk4_heater(state.t2, cmd.q2, dt, params, disturbance, 1, state.time);
    next.time = state.time + dt;
    if (!std::isfinite(next.t1) || !std::isfinite(next.t2))
        throw NonFiniteState("integrator produced a non-finite temperature");
    return next;
}

Trajectory simulate_interval(const TwinState& state, const HeaterCommand& cmd,
                             double duration, double dt, const TwinParams& params,
                             const DisturbanceProfile& disturbance) {
    const double steps_exact = duration / dt;
    const long long steps = std::llround(steps_exact);
    if (std::abs(steps_exact - static_cast<double>(steps)) > 1e-9)
        throw OutOfRange("duration must be an integer multiple of dt");
    Trajectory traj;
    traj.dt = dt;
    TwinState cur = state;
    traj.append(cur, cmd);
    for (long long i = 0; i < steps; ++i) {
        cur = step_rk4(cur, cmd, dt, params, disturbance);
        traj.append(cur, cmd);
    }
    return traj;
}

double equilibrium_temperature(double q, const TwinParams& params, double u_eff) {
    if (q < 0) throw OutOfRange("q must be non-negative");
    double lo = params.ambient;
    double hi = params.ambient + 200.0;
    double f_lo = net_heat_rate(lo, q, params, u_eff);
    if (f_lo == 0.0) return lo;
    if (net_heat_rate(hi, q, params, u_eff) > 0 || f_lo < 0)
        throw BracketFailure("net heat rate does not change sign on [Ta, Ta+200]");
    // Losses are strictly increasing in T, so the root is unique.
    while (true) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = net_heat_rate(mid, q, params, u_eff);
        if (std::abs(f_mid) < 1e-9 || hi - lo < 1e-13) return mid;
        if (f_mid > 0)
            lo = mid;
        else
            hi = mid;
    }
}

std::pair<double, double> naive_single_step(const TwinState& state, const HeaterCommand& cmd,
                                            double horizon, const TwinParams& params) {
    if (horizon <= 0) throw OutOfRange("horizon must be positive");
    const double c = params.mass * params.heat_capacity;
    return {state.t1 + horizon * net_heat_rate(state.t1, cmd.q1, params, params.htc) / c,
            state.t2 + horizon * net_heat_rate(state.t2, cmd.q2, params, params.htc) / c};
}

nlohmann::json twin_params_to_json(const TwinParams& p) {
    return {{"m", p.mass},           {"Cp", p.heat_capacity},
            {"A", p.area},           {"U", p.htc},
            {"emissivity", p.emissivity}, {"stefan_boltzmann", p.stefan_boltzmann},
            {"Ta", p.ambient}};
}

TwinParams twin_params_from_json(const nlohmann::json& j) {
    TwinParams p;
    p.mass = j.value("m", p.mass);
    p.heat_capacity = j.value("Cp", p.heat_capacity);
    p.area = j.value("A", p.area);
    p.htc = j.value("U", p.htc);
    p.emissivity = j.value("emissivity", p.emissivity);
    p.stefan_boltzmann = j.value("stefan_boltzmann", p.stefan_boltzmann);
    p.ambient = j.value("Ta", p.ambient);
    p.validate();
    return p;
}

nlohmann::json disturbance_to_json(const DisturbanceProfile& d) {
    nlohmann::json j = {{"fan_on_heater", d.fan_on_heater},
                        {"u_multiplier", d.u_multiplier},
                        {"window_start", d.window_start}};
    if (std::isfinite(d.window_end)) j["window_end"] = d.window_end;
    return j;
}

DisturbanceProfile disturbance_from_json(const nlohmann::json& j) {
    DisturbanceProfile d;
    d.fan_on_heater = j.value("fan_on_heater", d.fan_on_heater);
    d.u_multiplier = j.value("u_multiplier", d.u_multiplier);
    d.window_start = j.value("window_start", d.window_start);
    if (j.contains("window_end")) d.window_end = j["window_end"].get<double>();
    if (d.u_multiplier < 1) throw OutOfRange("u_multiplier must be >= 1");
    if (d.window_end < d.window_start) throw OutOfRange("disturbance window ill-ordered");
    return d;
}

}  // namespace agctl
