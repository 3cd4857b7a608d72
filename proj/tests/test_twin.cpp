#include <doctest.h>

#include <cmath>
#include <sstream>

#include <agctl/errors.hpp>
#include <agctl/twin.hpp>

using namespace agctl;

namespace {

// fine-step forward Euler, written independently of the library integrator
TwinState euler_oracle(TwinState s, const HeaterCommand& cmd, double duration,
                       double dt, const TwinParams& p,
                       const DisturbanceProfile& d) {
    const long steps = static_cast<long>(std::llround(duration / dt));
    for (long k = 0; k < steps; ++k) {
        const double u1 = d.u_eff(p, 0, s.time);
        const double u2 = d.u_eff(p, 1, s.time);
        const double dT1 = net_heat_rate(s.t1, cmd.q1, p, u1) / (p.mass * p.heat_capacity);
        const double dT2 = net_heat_rate(s.t2, cmd.q2, p, u2) / (p.mass * p.heat_capacity);
        s.t1 += dt * dT1;
        s.t2 += dt * dT2;
        s.time += dt;
    }
    return s;
}

}  // namespace

TEST_CASE("net_heat_rate matches hand-computed values") {
    const TwinParams p;
    // convection 10*1.2e-3*(305.6-293.15) = 0.1494 W
    // radiation 0.9*5.67e-8*1.2e-3*(305.6^4-293.15^4) ~= 0.081881 W
    const double off = net_heat_rate(305.6, 0.0, p, p.htc);
    CHECK(off == doctest::Approx(-0.2312598).epsilon(1e-6));
    const double on = net_heat_rate(305.6, 0.3, p, p.htc);
    CHECK(on == doctest::Approx(0.0687402).epsilon(1e-5));
    // at ambient only the source term remains
    CHECK(net_heat_rate(p.ambient, 0.25, p, p.htc) == doctest::Approx(0.25));
}

TEST_CASE("rk4 at dt=1 tracks a dt=1e-3 Euler oracle within 1e-3 K over 900 s") {
    const TwinParams p;
    const DisturbanceProfile d = no_disturbance();
    const HeaterCommand cmd(0.25, 0.1);
    TwinState s{293.15, 293.15, 0.0};

    const Trajectory traj = simulate_interval(s, cmd, 900.0, 1.0, p, d);
    REQUIRE(traj.samples.size() == 901);
    const TwinState fine = euler_oracle(s, cmd, 900.0, 1e-3, p, d);
    const TwinState& coarse = traj.samples.back().state;
    CHECK(std::abs(coarse.t1 - fine.t1) < 1e-3);
    CHECK(std::abs(coarse.t2 - fine.t2) < 1e-3);
    CHECK(coarse.time == doctest::Approx(900.0));
}

TEST_CASE("rk4 keeps fourth order convergence on this ODE") {
    const TwinParams p;
    const DisturbanceProfile d = no_disturbance();
    const HeaterCommand cmd(0.3, 0.0);
    const TwinState s0{293.15, 293.15, 0.0};

    // self-convergence: at dt=0.25 the integrator is exact to ~1e-12 K here,
    // far below the dt=8/dt=16 errors being compared
    const double ref = simulate_interval(s0, cmd, 64.0, 0.25, p, d)
                           .samples.back().state.t1;
    CHECK(std::abs(euler_oracle(s0, cmd, 64.0, 1e-5, p, d).t1 - ref) < 1e-5);
    const double e1 = std::abs(simulate_interval(s0, cmd, 64.0, 8.0, p, d)
                                   .samples.back().state.t1 - ref);
    const double e2 = std::abs(simulate_interval(s0, cmd, 64.0, 16.0, p, d)
                                   .samples.back().state.t1 - ref);
    // halving dt should cut the error by roughly 2^4
    CHECK(e2 / e1 > 8.0);
}

TEST_CASE("equilibrium_temperature zeroes the heat rate and is monotone in q") {
    const TwinParams p;
    const double t0 = equilibrium_temperature(0.0, p, p.htc);
    CHECK(t0 == doctest::Approx(p.ambient).epsilon(1e-12));
    double prev = t0;
    for (double q : {0.05, 0.1, 0.2, 0.3}) {
        const double t = equilibrium_temperature(q, p, p.htc);
        CHECK(std::abs(net_heat_rate(t, q, p, p.htc)) < 1e-9);
        CHECK(t > prev);
        prev = t;
    }
    // doubling convection drops the equilibrium
    CHECK(equilibrium_temperature(0.3, p, 2.0 * p.htc) <
          equilibrium_temperature(0.3, p, p.htc));
}

TEST_CASE("trajectories stay inside the physically reachable band") {
    const TwinParams p;
    const double t_max = equilibrium_temperature(kQMax, p, p.htc);
    for (std::uint64_t k = 0; k < 10; ++k) {
        const HeaterCommand cmd(0.03 * static_cast<double>(k), 0.3 - 0.03 * static_cast<double>(k));
        const Trajectory traj =
            simulate_interval(TwinState{293.15, 293.15, 0.0}, cmd, 1200.0, 1.0, p,
                              no_disturbance());
        for (const auto& sample : traj.samples) {
            CHECK(sample.state.t1 >= p.ambient - 1e-9);
            CHECK(sample.state.t1 <= t_max + 1e-9);
            CHECK(sample.state.t2 >= p.ambient - 1e-9);
            CHECK(sample.state.t2 <= t_max + 1e-9);
        }
    }
}

TEST_CASE("an active fan window cools only the targeted heater") {
    const TwinParams p;
    DisturbanceProfile d;
    d.fan_on_heater = 0;
    d.u_multiplier = 2.0;
    d.window_start = 0.0;
    const HeaterCommand cmd(0.2, 0.2);
    const TwinState s0{300.0, 300.0, 0.0};
    const auto disturbed = simulate_interval(s0, cmd, 300.0, 1.0, p, d);
    const auto clean = simulate_interval(s0, cmd, 300.0, 1.0, p, no_disturbance());
    CHECK(disturbed.samples.back().state.t1 < clean.samples.back().state.t1);
    CHECK(disturbed.samples.back().state.t2 ==
          doctest::Approx(clean.samples.back().state.t2).epsilon(1e-12));

    // outside the window the multiplier must not apply
    DisturbanceProfile late = d;
    late.window_start = 1e6;
    CHECK(late.u_eff(p, 0, 0.0) == p.htc);
    CHECK(d.u_eff(p, 0, 0.0) == 2.0 * p.htc);
    CHECK(d.u_eff(p, 1, 0.0) == p.htc);
}

TEST_CASE("single-step shortcut diverges from the integrator as the horizon grows") {
    const TwinParams p;
    const TwinState s0{293.15, 293.15, 0.0};
    const HeaterCommand cmd(0.3, 0.3);
    double prev_gap = -1.0;
    for (double horizon : {30.0, 120.0, 480.0, 900.0}) {
        const auto [n1, n2] = naive_single_step(s0, cmd, horizon, p);
        const auto exact =
            simulate_interval(s0, cmd, horizon, 1.0, p, no_disturbance())
                .samples.back().state;
        const double gap = std::abs(n1 - exact.t1);
        CHECK(gap > prev_gap);
        prev_gap = gap;
        CHECK(n2 == doctest::Approx(n1));
    }
    CHECK(prev_gap > 1.0);  // the shortcut is badly wrong at 900 s
}

TEST_CASE("heater commands reject out-of-range powers") {
    CHECK_NOTHROW(HeaterCommand(0.0, 0.3));
    CHECK_THROWS_AS(HeaterCommand(-0.01, 0.1), OutOfRange);
    CHECK_THROWS_AS(HeaterCommand(0.1, 0.31), OutOfRange);
    CHECK_THROWS_AS(HeaterCommand(std::nan(""), 0.0), OutOfRange);
}

TEST_CASE("params validation rejects nonphysical values") {
    TwinParams p;
    CHECK_NOTHROW(p.validate());
    p.mass = 0.0;
    CHECK_THROWS_AS(p.validate(), OutOfRange);
    p = TwinParams{};
    p.emissivity = 1.5;
    CHECK_THROWS_AS(p.validate(), OutOfRange);
}

TEST_CASE("trajectory csv uses the documented header and one row per sample") {
    Trajectory traj;
    traj.dt = 1.0;
    traj.append(TwinState{293.15, 294.0, 0.0}, HeaterCommand(0.1, 0.2));
    traj.append(TwinState{293.2, 294.1, 1.0}, HeaterCommand(0.1, 0.2));
    std::ostringstream out;
    traj.write_csv(out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "time_s,t1_K,t2_K,q1_W,q2_W");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("twin params and disturbance json round-trip") {
    TwinParams p;
    p.htc = 11.5;
    const TwinParams q = twin_params_from_json(twin_params_to_json(p));
    CHECK(q.htc == p.htc);
    CHECK(q.mass == p.mass);
    CHECK(q.ambient == p.ambient);

    DisturbanceProfile d;
    d.fan_on_heater = 1;
    d.window_start = 10.0;
    d.window_end = 20.0;
    const DisturbanceProfile e = disturbance_from_json(disturbance_to_json(d));
    CHECK(e.fan_on_heater == 1);
    CHECK(e.u_multiplier == d.u_multiplier);
    CHECK(e.window_start == 10.0);
    CHECK(e.window_end == 20.0);
}
