#include "agctl/control.hpp"

#include <chrono>
#include <cmath>

#include "agctl/errors.hpp"

namespace agctl {

std::pair<double, PidState> pid_update(const PidGains& gains, const PidState& state,
                                       double error, double dt) {
    if (dt <= 0) throw OutOfRange("dt must be positive");
    PidState next = state;
    const double candidate_integral = state.integral + error * dt;
    const double derivative = state.initialized ? (error - state.prev_error) / dt : 0.0;
    double u = gains.kp * error + gains.ki * candidate_integral + gains.kd * derivative;
    const bool saturated_high = u > gains.u_max && error > 0;
    const bool saturated_low = u < gains.u_min && error < 0;
    if (saturated_high || saturated_low) {
        // Freeze the integral while the output is pinned in the error's
        // direction, and recompute with the frozen value.
        u = gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
    } else {
        next.integral = candidate_integral;
    }
    u = std::clamp(u, gains.u_min, gains.u_max);
    next.prev_error = error;
    next.initialized = true;
    return {u, next};
}

HeaterCommand split_command(double u_total, double per_heater_max) {
    if (u_total < 0 || u_total > 2 * per_heater_max)
        throw OutOfRange("total command outside [0, 2*per_heater_max]");
    const double q = std::min(0.5 * u_total, per_heater_max);
    return HeaterCommand{q, q, per_heater_max};
}

void EpisodeConfig::validate() const {
    params.validate();
    if (setpoint <= 0) throw OutOfRange("setpoint must be a positive absolute temperature");
    if (planning_interval <= 0 || control_dt <= 0 || horizon <= 0)
        throw OutOfRange("times must be positive");
    const double n_intervals = horizon / planning_interval;
    if (std::abs(n_intervals - std::round(n_intervals)) > 1e-9)
        throw OutOfRange("horizon must be a multiple of planning_interval");
    const double n_steps = planning_interval / control_dt;
    if (std::abs(n_steps - std::round(n_steps)) > 1e-9)
        throw OutOfRange("planning_interval must be a multiple of control_dt");
    if (temp_reprompt_budget < 0 || power_reprompt_budget < 0)
        throw OutOfRange("reprompt budgets must be non-negative");
}

std::optional<HeaterCommand> PidController::decide(const TwinState& state, double setpoint,
                                                   double /*interval_s*/,
                                                   const std::vector<DecisionRecord>&,
                                                   nlohmann::json* detail) {
    const double error = setpoint - average_temperature(state);
    auto [u, next] = pid_update(gains_, state_, error, last_dt_);
    state_ = next;
    if (detail) {
        (*detail)["error_K"] = error;
        (*detail)["u_total_W"] = u;
        (*detail)["integral_Ks"] = state_.integral;
    }
    return split_command(u);
}

HeaterCommand safety_fallback(const TwinState& state, const EpisodeConfig& config,
                              const std::optional<HeaterCommand>& last_valid) {
    if (average_temperature(state) > config.setpoint) return HeaterCommand{0.0, 0.0};
    if (last_valid) return *last_valid;
    return HeaterCommand{0.0, 0.0};
}

EpisodeLog run_episode(const EpisodeConfig& config, Controller& controller) {
    config.validate();
    EpisodeLog log;
    log.config = config;
    log.controller_name = controller.name();
    log.trajectory.dt = config.control_dt;

    const long long n_intervals = std::llround(config.horizon / config.planning_interval);
    const long long steps_per_interval =
        std::llround(config.planning_interval / config.control_dt);

    TwinState state = config.initial;
    std::optional<HeaterCommand> last_valid;
    std::vector<double> latencies;

    if (auto* pid = dynamic_cast<PidController*>(&controller))
        pid->set_dt(config.control_dt);

    auto query = [&](HeaterCommand& cmd, DecisionRecord& rec) {
        nlohmann::json detail = nlohmann::json::object();
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<HeaterCommand> decided;
        try {
            decided = controller.decide(state, config.setpoint, config.planning_interval,
                                        log.decisions, &detail);
        } catch (const Error& e) {
            detail["controller_error"] = e.what();
            decided.reset();
        }
        rec.latency_s +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // The HeaterCommand type already enforces bounds, so any decided
        // command is in range; failures engage the fallback.
        if (decided) {
            cmd = *decided;
            last_valid = cmd;
        } else {
            cmd = safety_fallback(state, config, last_valid);
            rec.used_fallback = true;
            detail["fallback"] = true;
        }
        if (rec.detail.is_null())
            rec.detail = detail;
        else
            rec.detail["samples"].push_back(detail);
    };

    bool first_sample = true;
    for (long long interval = 0; interval < n_intervals; ++interval) {
        DecisionRecord rec;
        rec.time = state.time;
        HeaterCommand cmd;
        query(cmd, rec);
        rec.chosen = cmd;
        if (first_sample) {
            log.trajectory.append(state, cmd);
            first_sample = false;
        }
        for (long long step = 0; step < steps_per_interval; ++step) {
            if (controller.per_sample() && step > 0) {
                rec.detail["samples"] = rec.detail.value("samples", nlohmann::json::array());
                query(cmd, rec);
            }
            state = step_rk4(state, cmd, config.control_dt, config.params, config.disturbance);
            log.trajectory.append(state, cmd);
        }
        // For fast-loop controllers the record carries the command active at
        // the interval boundary plus the accumulated inference time.
        latencies.push_back(rec.latency_s);
        log.decisions.push_back(std::move(rec));
    }

    log.metrics.tw_mae = tw_mae(log.trajectory, config.setpoint);
    log.metrics.rmse = rmse(log.trajectory, config.setpoint);
    log.metrics.latency = latency_stats(latencies);
    for (const auto& d : log.decisions) {
        log.metrics.temp_reprompts += d.detail.value("temp_reprompts", 0);
        log.metrics.power_reprompts += d.detail.value("power_reprompts", 0);
    }
    return log;
}

nlohmann::json episode_config_to_json(const EpisodeConfig& c) {
    return {{"setpoint_K", c.setpoint},
            {"planning_interval_s", c.planning_interval},
            {"control_dt_s", c.control_dt},
            {"horizon_s", c.horizon},
            {"initial", {{"t1_K", c.initial.t1}, {"t2_K", c.initial.t2}, {"time_s", c.initial.time}}},
            {"params", twin_params_to_json(c.params)},
            {"disturbance", disturbance_to_json(c.disturbance)},
            {"temp_reprompt_budget", c.temp_reprompt_budget},
            {"power_reprompt_budget", c.power_reprompt_budget}};
}

EpisodeConfig episode_config_from_json(const nlohmann::json& j) {
    EpisodeConfig c;
    c.setpoint = j.value("setpoint_K", c.setpoint);
    c.planning_interval = j.value("planning_interval_s", c.planning_interval);
    c.control_dt = j.value("control_dt_s", c.control_dt);
    c.horizon = j.value("horizon_s", c.horizon);
    if (j.contains("initial")) {
        c.initial.t1 = j["initial"].value("t1_K", c.initial.t1);
        c.initial.t2 = j["initial"].value("t2_K", c.initial.t2);
        c.initial.time = j["initial"].value("time_s", c.initial.time);
    } else {
        c.initial = TwinState{c.setpoint, c.setpoint, 0.0};
    }
    if (j.contains("params")) c.params = twin_params_from_json(j["params"]);
    if (j.contains("disturbance")) c.disturbance = disturbance_from_json(j["disturbance"]);
    c.temp_reprompt_budget = j.value("temp_reprompt_budget", c.temp_reprompt_budget);
    c.power_reprompt_budget = j.value("power_reprompt_budget", c.power_reprompt_budget);
    c.validate();
    return c;
}

nlohmann::json EpisodeLog::to_json() const {
    nlohmann::json decisions_json = nlohmann::json::array();
    for (const auto& d : decisions) {
        decisions_json.push_back({{"time_s", d.time},
                                  {"q1_W", d.chosen.q1},
                                  {"q2_W", d.chosen.q2},
                                  {"used_fallback", d.used_fallback},
                                  {"latency_s", d.latency_s},
                                  {"detail", d.detail}});
    }
    return {{"controller", controller_name},
            {"config", episode_config_to_json(config)},
            {"decisions", decisions_json},
            {"metrics", control_metrics_to_json(metrics)}};
}

}  // namespace agctl
