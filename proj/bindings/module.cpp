#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include <agctl/control.hpp>
#include <agctl/fsm.hpp>
#include <agctl/metrics.hpp>
#include <agctl/parsing.hpp>
#include <agctl/pipeline.hpp>
#include <agctl/provider.hpp>
#include <agctl/suite.hpp>
#include <agctl/twin.hpp>

namespace py = pybind11;
using namespace agctl;

namespace {

// nlohmann documents round-trip through the stdlib json module; cheap and
// keeps the binding surface free of hand-written converters
py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

ScriptedProvider make_scripted(const std::vector<py::tuple>& entries) {
    std::vector<ScriptedProvider::Entry> parsed;
    for (const auto& t : entries) {
        ScriptedProvider::Entry e;
        e.match = t[0].cast<std::string>();
        e.reply = t[1].cast<std::string>();
        if (t.size() > 2) e.sticky = t[2].cast<bool>();
        parsed.push_back(std::move(e));
    }
    return ScriptedProvider(std::move(parsed));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "FSM recovery planning, thermal twin and control loop core";

    // fsm
    py::class_<Fsm>(m, "Fsm")
        .def(py::init<>())
        .def_readwrite("n_nodes", &Fsm::n_nodes)
        .def_readwrite("adjacency", &Fsm::adjacency)
        .def("edge_count", &Fsm::edge_count)
        .def("has_edge", &Fsm::has_edge);

    m.def("generate_fsm", &generate_fsm, py::arg("n_nodes"), py::arg("n_edges"),
          py::arg("seed"));
    m.def("validate_structure", &validate_structure);
    m.def("traverse", [](const Fsm& fsm, const std::vector<int>& states) {
        const TraversalReport r = traverse(fsm, PathPlan{states});
        py::dict d;
        d["valid"] = r.valid;
        d["executed_prefix"] = r.executed_prefix;
        d["first_invalid_index"] = r.first_invalid_index;
        return d;
    });
    m.def("shortest_path",
          [](const Fsm& fsm, int start, int goal) -> std::optional<std::vector<int>> {
              const auto p = shortest_path(fsm, start, goal);
              if (!p) return std::nullopt;
              return p->states;
          });
    m.def("encode_as_dict_text", &encode_as_dict_text);
    m.def("parse_dict_text", &parse_dict_text, py::arg("text"), py::arg("n_nodes") = -1);
    m.def("sample_benchmark_task", &sample_benchmark_task);
    m.def("is_reachable", &is_reachable);
    m.def("derive_seed", &derive_seed);

    // twin
    py::class_<TwinParams>(m, "TwinParams")
        .def(py::init<>())
        .def_readwrite("mass", &TwinParams::mass)
        .def_readwrite("heat_capacity", &TwinParams::heat_capacity)
        .def_readwrite("area", &TwinParams::area)
        .def_readwrite("htc", &TwinParams::htc)
        .def_readwrite("emissivity", &TwinParams::emissivity)
        .def_readwrite("stefan_boltzmann", &TwinParams::stefan_boltzmann)
        .def_readwrite("ambient", &TwinParams::ambient)
        .def("validate", &TwinParams::validate);

    py::class_<TwinState>(m, "TwinState")
        .def(py::init<>())
        .def(py::init([](double t1, double t2, double time) {
                 return TwinState{t1, t2, time};
             }),
             py::arg("t1"), py::arg("t2"), py::arg("time") = 0.0)
        .def_readwrite("t1", &TwinState::t1)
        .def_readwrite("t2", &TwinState::t2)
        .def_readwrite("time", &TwinState::time);

    py::class_<HeaterCommand>(m, "HeaterCommand")
        .def(py::init<>())
        .def(py::init<double, double, double>(), py::arg("q1"), py::arg("q2"),
             py::arg("q_max") = kQMax)
        .def_readonly("q1", &HeaterCommand::q1)
        .def_readonly("q2", &HeaterCommand::q2);

    py::class_<DisturbanceProfile>(m, "DisturbanceProfile")
        .def(py::init<>())
        .def_readwrite("fan_on_heater", &DisturbanceProfile::fan_on_heater)
        .def_readwrite("u_multiplier", &DisturbanceProfile::u_multiplier)
        .def_readwrite("window_start", &DisturbanceProfile::window_start)
        .def_readwrite("window_end", &DisturbanceProfile::window_end);
    m.def("no_disturbance", &no_disturbance);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("dt", &Trajectory::dt)
        .def("__len__", [](const Trajectory& t) { return t.samples.size(); })
        .def("rows", [](const Trajectory& t) {
            // (time, t1, t2, q1, q2) per sample, csv column order
            std::vector<std::tuple<double, double, double, double, double>> rows;
            rows.reserve(t.samples.size());
            for (const auto& s : t.samples)
                rows.emplace_back(s.state.time, s.state.t1, s.state.t2, s.cmd.q1,
                                  s.cmd.q2);
            return rows;
        });

    m.def("net_heat_rate", &net_heat_rate);
    m.def("step_rk4", &step_rk4, py::arg("state"), py::arg("cmd"), py::arg("dt"),
          py::arg("params") = TwinParams{},
          py::arg("disturbance") = no_disturbance());
    m.def("simulate_interval", &simulate_interval, py::arg("state"), py::arg("cmd"),
          py::arg("duration"), py::arg("dt"), py::arg("params") = TwinParams{},
          py::arg("disturbance") = no_disturbance());
    m.def("equilibrium_temperature", &equilibrium_temperature);
    m.def("naive_single_step", &naive_single_step);
    m.def("average_temperature", &average_temperature);

    // metrics
    m.def("tw_mae", &tw_mae);
    m.def("rmse", &rmse);
    m.def("latency_stats", [](const std::vector<double>& samples) {
        const LatencyStats s = latency_stats(samples);
        py::dict d;
        d["count"] = s.count;
        d["mean"] = s.mean;
        d["std_dev"] = s.std_dev;
        d["min"] = s.min;
        d["max"] = s.max;
        return d;
    });

    // control
    py::class_<PidGains>(m, "PidGains")
        .def(py::init<>())
        .def_readwrite("kp", &PidGains::kp)
        .def_readwrite("ki", &PidGains::ki)
        .def_readwrite("kd", &PidGains::kd)
        .def_readwrite("u_min", &PidGains::u_min)
        .def_readwrite("u_max", &PidGains::u_max);

    py::class_<EpisodeConfig>(m, "EpisodeConfig")
        .def(py::init<>())
        .def_readwrite("setpoint", &EpisodeConfig::setpoint)
        .def_readwrite("planning_interval", &EpisodeConfig::planning_interval)
        .def_readwrite("control_dt", &EpisodeConfig::control_dt)
        .def_readwrite("horizon", &EpisodeConfig::horizon)
        .def_readwrite("initial", &EpisodeConfig::initial)
        .def_readwrite("params", &EpisodeConfig::params)
        .def_readwrite("disturbance", &EpisodeConfig::disturbance)
        .def("validate", &EpisodeConfig::validate);

    py::class_<EpisodeLog>(m, "EpisodeLog")
        .def_readonly("controller_name", &EpisodeLog::controller_name)
        .def_readonly("trajectory", &EpisodeLog::trajectory)
        .def_property_readonly("tw_mae",
                               [](const EpisodeLog& l) { return l.metrics.tw_mae; })
        .def_property_readonly("rmse",
                               [](const EpisodeLog& l) { return l.metrics.rmse; })
        .def("__len__", [](const EpisodeLog& l) { return l.decisions.size(); })
        .def("to_dict", [](const EpisodeLog& l) { return json_to_py(l.to_json()); });

    m.def(
        "run_pid_episode",
        [](const EpisodeConfig& config, const PidGains& gains) {
            PidController pid(gains);
            return run_episode(config, pid);
        },
        py::arg("config") = EpisodeConfig{}, py::arg("gains") = PidGains{});
    m.def(
        "run_zero_episode",
        [](const EpisodeConfig& config) {
            ZeroController zero;
            return run_episode(config, zero);
        },
        py::arg("config") = EpisodeConfig{});

    // scripted provider + planning loop
    py::class_<ScriptedProvider>(m, "ScriptedProvider")
        .def(py::init([](const std::vector<std::string>& replies) {
                 return ScriptedProvider(replies);
             }),
             py::arg("replies"))
        .def(py::init(&make_scripted), py::arg("entries"),
             "entries are (match, reply) or (match, reply, sticky) tuples")
        .def("remaining", &ScriptedProvider::remaining);

    m.def(
        "plan_recovery_path",
        [](ScriptedProvider& provider, const Fsm& fsm, int start, int goal,
           int budget) {
            const PlanOutcome outcome = plan_recovery_path(provider, fsm, start, goal,
                                                           budget);
            return json_to_py(outcome.to_json());
        },
        py::arg("provider"), py::arg("fsm"), py::arg("start"), py::arg("goal"),
        py::arg("budget") = 5);

    m.def(
        "run_llm_episode",
        [](ScriptedProvider& provider, const EpisodeConfig& config) {
            AgentController agent(provider);
            agent.configure(DecisionConfig::from_episode(config));
            return run_episode(config, agent);
        },
        py::arg("provider"), py::arg("config") = EpisodeConfig{});

    // parsing
    m.def("parse_float_array", &parse_float_array);
    m.def("parse_state_path", &parse_state_path);
    m.def("parse_bool", &parse_bool);
}
