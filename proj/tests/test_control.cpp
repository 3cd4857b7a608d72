#include <doctest.h>

#include <cmath>

#include <agctl/control.hpp>
#include <agctl/errors.hpp>

using namespace agctl;

TEST_CASE("pid_update reproduces a closed-form proportional-integral response") {
    PidGains g;
    g.kp = 0.05;
    g.ki = 0.002;
    g.kd = 0.0;
    g.u_min = -10.0;  // wide bounds so nothing clamps
    g.u_max = 10.0;
    PidState s;
    // constant error 1 K for 10 steps of 1 s: u = kp*1 + ki*t
    double u = 0.0;
    for (int k = 1; k <= 10; ++k) {
        std::tie(u, s) = pid_update(g, s, 1.0, 1.0);
        CHECK(u == doctest::Approx(0.05 + 0.002 * k).epsilon(1e-12));
    }
    CHECK(s.integral == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("pid derivative acts from the second sample on") {
    PidGains g;
    g.kp = 0.0;
    g.ki = 0.0;
    g.kd = 2.0;
    g.u_min = -10.0;
    g.u_max = 10.0;
    PidState s;
    auto [u1, s1] = pid_update(g, s, 3.0, 1.0);
    CHECK(u1 == 0.0);  // no previous error yet
    auto [u2, s2] = pid_update(g, s1, 5.0, 1.0);
    CHECK(u2 == doctest::Approx(4.0));  // 2 * (5-3)/1
    auto [u3, s3] = pid_update(g, s2, 5.0, 0.5);
    CHECK(u3 == 0.0);
    (void)s3;
}

TEST_CASE("clamping anti-windup freezes the integral while saturated") {
    PidGains g;  // defaults, u in [0, 0.6]
    PidState s;
    // a huge error saturates the output; the integral must not keep growing
    double u = 0.0;
    for (int k = 0; k < 100; ++k) std::tie(u, s) = pid_update(g, s, 50.0, 1.0);
    CHECK(u == g.u_max);
    // the integral never wound up during saturation
    CHECK(s.integral == 0.0);
    // a negative error would also saturate (u_min = 0), so it stays frozen
    auto [u2, s2] = pid_update(g, s, -50.0, 1.0);
    CHECK(u2 == g.u_min);
    CHECK(s2.integral == 0.0);
    // once the error is small enough to leave saturation, integration resumes
    auto [u3, s3] = pid_update(g, s2, 1.0, 1.0);
    CHECK(u3 == doctest::Approx(g.kp + g.ki));
    CHECK(s3.integral == doctest::Approx(1.0));
}

TEST_CASE("split_command halves the total and respects the per-heater cap") {
    const HeaterCommand c = split_command(0.5);
    CHECK(c.q1 == doctest::Approx(0.25));
    CHECK(c.q2 == doctest::Approx(0.25));
    const HeaterCommand full = split_command(0.6);
    CHECK(full.q1 == doctest::Approx(kQMax));
    CHECK(full.q2 == doctest::Approx(kQMax));
    CHECK_THROWS_AS(split_command(10.0), OutOfRange);
    CHECK_THROWS_AS(split_command(-1.0), OutOfRange);
}

TEST_CASE("episode config validation") {
    EpisodeConfig c;
    CHECK_NOTHROW(c.validate());
    c.planning_interval = 7.0;  // not a multiple of control_dt? it is; break horizon
    c.horizon = 100.0;          // not a multiple of 7
    CHECK_THROWS_AS(c.validate(), OutOfRange);
    c = EpisodeConfig{};
    c.control_dt = 0.0;
    CHECK_THROWS_AS(c.validate(), OutOfRange);
}

TEST_CASE("run_episode produces the expected sample and decision counts") {
    EpisodeConfig config;
    config.horizon = 120.0;
    config.disturbance = no_disturbance();
    ZeroController zero;
    const EpisodeLog log = run_episode(config, zero);
    CHECK(log.controller_name == "zero");
    // 120 s at dt=1 plus the initial sample
    CHECK(log.trajectory.samples.size() == 121);
    // one decision per 30 s planning interval
    CHECK(log.decisions.size() == 4);
    for (const auto& d : log.decisions) {
        CHECK(!d.used_fallback);
        CHECK(d.chosen.q1 == 0.0);
        CHECK(d.chosen.q2 == 0.0);
    }
    // unheated start at the setpoint decays toward ambient
    CHECK(log.trajectory.samples.back().state.t1 < config.setpoint);
    CHECK(log.metrics.tw_mae > 0.0);
    CHECK(log.metrics.latency.count == 4);
}

namespace {

class FailingController : public Controller {
public:
    std::optional<HeaterCommand> decide(const TwinState&, double, double,
                                        const std::vector<DecisionRecord>&,
                                        nlohmann::json* detail) override {
        if (detail) (*detail)["reason"] = "always fails";
        return std::nullopt;
    }
    std::string name() const override { return "failing"; }
};

}  // namespace

TEST_CASE("controller failure engages the safety fallback every interval") {
    EpisodeConfig config;
    config.horizon = 90.0;
    config.initial = TwinState{308.0, 308.0, 0.0};  // above setpoint
    config.disturbance = no_disturbance();
    FailingController bad;
    const EpisodeLog log = run_episode(config, bad);
    REQUIRE(log.decisions.size() == 3);
    for (const auto& d : log.decisions) {
        CHECK(d.used_fallback);
        // above the setpoint the fallback stops heating
        CHECK(d.chosen.q1 == 0.0);
        CHECK(d.chosen.q2 == 0.0);
        CHECK(d.detail.at("reason") == "always fails");
    }
}

TEST_CASE("safety_fallback repeats the last valid command only below setpoint") {
    EpisodeConfig config;
    const HeaterCommand last(0.2, 0.1);
    const auto above = safety_fallback(TwinState{307.0, 307.0, 0.0}, config, last);
    CHECK(above.q1 == 0.0);
    CHECK(above.q2 == 0.0);
    const auto below = safety_fallback(TwinState{300.0, 300.0, 0.0}, config, last);
    CHECK(below.q1 == doctest::Approx(0.2));
    CHECK(below.q2 == doctest::Approx(0.1));
    const auto cold_start =
        safety_fallback(TwinState{300.0, 300.0, 0.0}, config, std::nullopt);
    CHECK(cold_start.q1 == 0.0);
    CHECK(cold_start.q2 == 0.0);
}

TEST_CASE("pid episode holds the regulation setpoint against the fan") {
    EpisodeConfig config;  // defaults: fan doubles convection on heater 1
    PidController pid;
    const EpisodeLog log = run_episode(config, pid);
    CHECK(log.metrics.tw_mae < 0.6);
    const double final_avg = average_temperature(log.trajectory.samples.back().state);
    CHECK(std::abs(final_avg - config.setpoint) < 0.5);
    CHECK(log.metrics.temp_reprompts == 0);
    CHECK(log.metrics.power_reprompts == 0);
}

TEST_CASE("episode log and config serialize round-trip") {
    EpisodeConfig config;
    config.horizon = 60.0;
    config.setpoint = 305.0;
    const EpisodeConfig back = episode_config_from_json(episode_config_to_json(config));
    CHECK(back.horizon == 60.0);
    CHECK(back.setpoint == 305.0);
    CHECK(back.planning_interval == config.planning_interval);
    CHECK(back.initial.t1 == config.initial.t1);

    ZeroController zero;
    const EpisodeLog log = run_episode(config, zero);
    const auto j = log.to_json();
    CHECK(j.at("controller") == "zero");
    CHECK(j.at("metrics").contains("tw_mae_K"));
    CHECK(j.at("decisions").size() == log.decisions.size());
    CHECK(j.at("config").at("setpoint_K") == 305.0);
}
