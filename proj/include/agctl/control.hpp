#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agctl/metrics.hpp"
#include "agctl/twin.hpp"

namespace agctl {

struct PidGains {
    // Step-response tuned against the default twin; the total-output bounds
    // cover both heaters.
    double kp = 0.5;     // W/K
    double ki = 0.005;   // W/(K*s)
    double kd = 0.0;     // W*s/K
    double u_min = 0.0;  // W
    double u_max = 0.6;  // W
};

struct PidState {
    double integral = 0.0;    // K*s
    double prev_error = 0.0;  // K
    bool initialized = false;
};

/// u = kp*e + ki*int(e) + kd*de/dt, clamped to [u_min, u_max]. Clamping
/// anti-windup: the integral is frozen while the unclamped output is
/// saturated in the direction of the error. Derivative is zero on the
/// first call.
std::pair<double, PidState> pid_update(const PidGains& gains, const PidState& state,
                                       double error, double dt);

/// Equal split of the total actuation across both heaters.
HeaterCommand split_command(double u_total, double per_heater_max = kQMax);

struct EpisodeConfig {
    double setpoint = 306.15;         // K
    double planning_interval = 30.0;  // s
    double control_dt = 1.0;          // s
    double horizon = 900.0;           // s
    // Regulation scenario: the episode starts at the setpoint and the
    // controller has to hold it against the fan.
    TwinState initial{306.15, 306.15, 0.0};
    TwinParams params;
    DisturbanceProfile disturbance;
    int temp_reprompt_budget = 5;
    int power_reprompt_budget = 5;

    void validate() const;
};

/// Audit record for one planning interval.
struct DecisionRecord {
    double time = 0.0;  // plant time when the decision was taken
    HeaterCommand chosen;
    bool used_fallback = false;
    double latency_s = 0.0;  // inference wall-clock; plant is paused
    nlohmann::json detail;   // controller-specific (gate verdicts, attempts, ...)
};

/// Controller contract: given the current plant state, setpoint, interval
/// length and decision history, return a command or declare failure
/// (nullopt). Failures hand the interval to the safety fallback.
class Controller {
public:
    virtual ~Controller() = default;
    virtual std::optional<HeaterCommand> decide(const TwinState& state, double setpoint,
                                                double interval_s,
                                                const std::vector<DecisionRecord>& history,
                                                nlohmann::json* detail) = 0;
    /// Fast-loop controllers re-decide every control_dt instead of holding
    /// one command across the planning interval.
    virtual bool per_sample() const { return false; }
    virtual std::string name() const = 0;
};

class PidController : public Controller {
public:
    explicit PidController(PidGains gains = {}) : gains_(gains) {}
    std::optional<HeaterCommand> decide(const TwinState& state, double setpoint,
                                        double interval_s,
                                        const std::vector<DecisionRecord>& history,
                                        nlohmann::json* detail) override;
    bool per_sample() const override { return true; }
    std::string name() const override { return "pid"; }
    const PidState& pid_state() const { return state_; }

private:
    PidGains gains_;
    PidState state_;
    double last_dt_ = 1.0;

public:
    void set_dt(double dt) { last_dt_ = dt; }
};

class ZeroController : public Controller {
public:
    std::optional<HeaterCommand> decide(const TwinState&, double, double,
                                        const std::vector<DecisionRecord>&,
                                        nlohmann::json*) override {
        return HeaterCommand{0.0, 0.0};
    }
    std::string name() const override { return "zero"; }
};

struct EpisodeLog {
    EpisodeConfig config;
    Trajectory trajectory;
    std::vector<DecisionRecord> decisions;
    ControlMetrics metrics;
    std::string controller_name;

    nlohmann::json to_json() const;
};

/// Conservative override: stop heating when above the setpoint, otherwise
/// repeat the last in-bounds command, otherwise stay off.
HeaterCommand safety_fallback(const TwinState& state, const EpisodeConfig& config,
                              const std::optional<HeaterCommand>& last_valid);

/// Drives a controller against the twin. Commands hold for one planning
/// interval (fast-loop controllers re-decide every control_dt); the plant
/// is paused during inference, so decision latency never advances plant
/// time. Controller failures and out-of-bounds commands engage the safety
/// fallback, which is recorded on the decision.
EpisodeLog run_episode(const EpisodeConfig& config, Controller& controller);

nlohmann::json episode_config_to_json(const EpisodeConfig& c);
EpisodeConfig episode_config_from_json(const nlohmann::json& j);

}  // namespace agctl
