#include "agctl/prompts.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>

#include "agctl/errors.hpp"

namespace fs = std::filesystem;

namespace agctl {

namespace {

bool is_placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Collects placeholder names out of one field.
void scan_placeholders(const std::string& text, std::set<std::string>& out) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() && is_placeholder_char(text[j])) ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            out.insert(text.substr(i + 1, j - i - 1));
            i = j;
        }
    }
}

}  // namespace

std::string substitute_placeholders(const std::string& text, const Bindings& bindings) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < text.size() && is_placeholder_char(text[j])) ++j;
            if (j > i + 1 && j < text.size() && text[j] == '}') {
                const std::string key = text.substr(i + 1, j - i - 1);
                auto it = bindings.find(key);
                if (it == bindings.end()) throw UnboundPlaceholder(key);
                out += it->second;  // single pass: bound values are not rescanned
                i = j;
                continue;
            }
        }
        out += text[i];
    }
    return out;
}

std::vector<std::string> PromptTemplate::placeholders() const {
    std::set<std::string> names;
    for (const auto* field : {&role, &goal, &backstory, &task, &description,
                              &expected_output, &note})
        scan_placeholders(*field, names);
    return {names.begin(), names.end()};
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const Bindings& bindings) {
    auto sub = [&](const std::string& text) {
        return substitute_placeholders(text, bindings);
    };
    RenderedPrompt out;
    out.system = "Role: " + sub(tmpl.role) + "\nGoal: " + sub(tmpl.goal);
    if (!tmpl.backstory.empty()) out.system += "\nBackstory: " + sub(tmpl.backstory);
    out.user = "Task: " + sub(tmpl.task) + "\n" + sub(tmpl.description);
    if (!tmpl.note.empty()) out.user += "\nNote: " + sub(tmpl.note);
    out.user += "\nExpected output: " + sub(tmpl.expected_output);
    return out;
}

nlohmann::json PromptTemplate::to_json() const {
    return {{"name", name},
            {"role", role},
            {"goal", goal},
            {"backstory", backstory},
            {"task", task},
            {"description", description},
            {"expected_output", expected_output},
            {"note", note}};
}

PromptTemplate PromptTemplate::from_json(const nlohmann::json& j) {
    PromptTemplate t;
    t.name = j.at("name").get<std::string>();
    t.role = j.value("role", "");
    t.goal = j.value("goal", "");
    t.backstory = j.value("backstory", "");
    t.task = j.value("task", "");
    t.description = j.value("description", "");
    t.expected_output = j.value("expected_output", "");
    t.note = j.value("note", "");
    return t;
}

const PromptTemplate& TemplateStore::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error("unknown prompt template: " + name);
    return it->second;
}

void TemplateStore::put(PromptTemplate tmpl) {
    templates_[tmpl.name] = std::move(tmpl);
}

std::vector<std::string> TemplateStore::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : templates_) out.push_back(name);
    return out;
}

void TemplateStore::dump(const std::string& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, tmpl] : templates_) {
        std::ofstream out(fs::path(dir) / (name + ".json"));
        out << tmpl.to_json().dump(2) << "\n";
    }
}

TemplateStore TemplateStore::load(const std::string& dir) {
    TemplateStore store;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        store.put(PromptTemplate::from_json(nlohmann::json::parse(in)));
    }
    return store;
}

const TemplateStore& builtin_templates() {
    static const TemplateStore store = [] {
        TemplateStore s;

        s.put(PromptTemplate{
            .name = "traversal_task",
            .role = "Graph traversal expert",
            .goal = "Verify whether the final state is reachable and if so return the "
                    "best sequence of actions to achieve it.",
            .backstory =
                "The operator is a graph traversal expert who can determine the "
                "reachability of a state in a finite state machine and the sequence of "
                "states to reach it. Skills: graph traversal algorithms, finite state "
                "machines, breadth-first search, depth-first search, Dijkstra's "
                "algorithm, A* search.",
            .task = "Determine the reachability of a state in a finite state machine "
                    "and the sequence of states to reach it.",
            .description =
                "Can state {target_state} be reached from {current_state} given the "
                "adjacency list {graph}? Return a boolean value for this question and "
                "the sequence of states as a list, e.g. [0, 1, 2]. {recommendation}",
            .expected_output =
                "A boolean value indicating whether the target state can be reached "
                "from the current state given the adjacency list, and the list of "
                "states of the path.",
        });

        s.put(PromptTemplate{
            .name = "operator_task",
            .role = "Plant Operator",
            .goal = "Predict and adjust the heater outputs q1 and q2 to stabilize the "
                    "system at an average temperature of {t_avg} K while minimizing the "
                    "power used. The temperature is calculated as (t1 + t2) / 2 = "
                    "{t_avg} K.",
            .backstory =
                "You are an experienced thermal plant operator with expertise in heat "
                "transfer and thermal systems. Your role is to ensure that the system "
                "remains stable and operates at the target temperature by predicting "
                "the necessary adjustments to the heater outputs. You have worked in "
                "the industry for several years and are adept at making decisions "
                "based on system behavior over time.",
            .task = "Determine the initial power settings for heater 1 and heater 2 to "
                    "achieve an average system temperature of {t_avg} K.",
            .description =
                "Based on the current system state:\n"
                "- Current heater outputs: {q1} W and {q2} W\n"
                "- Current average temperature: {curr_t_avg} K\n"
                "- Target average temperature: {t_avg} K\n"
                "- Heater temperature readings: {t1} K, {t2} K\n"
                "Heater performance is modeled using the following characteristics:\n"
                "- Heat capacity (Cp): 500 J/kg-K.\n"
                "- Surface area (A): 1.2e-3 m^2.\n"
                "- Mass (m): 0.004 kg.\n"
                "- Overall heat transfer coefficient (U): 10 W/m^2-K.\n"
                "- Emissivity: 0.9\n"
                "- Stefan Boltzmann constant: 5.67e-8 W/m^2-K^4\n"
                "- Ambient temperature: 293.15 K\n"
                "- The full energy balance includes convection and radiation terms.\n"
                "- The heater outputs must remain within the range of 0 W to 0.3 W.\n"
                "Your task is to propose initial values for q1 and q2 that will run for "
                "30 seconds while ensuring the following:\n"
                "- Average system temperature moves closer to {t_avg} K at the end of "
                "30 seconds.\n"
                "- The power outputs remain within operational bounds: 0 W <= q1, q2 "
                "<= 0.3 W.\n"
                "- Use available data to calculate the next state and propose values "
                "that balance efficiency and safety.\n"
                "- Output the temperatures after 30 seconds (pred_t1, pred_t2) along "
                "with the initial q1 and q2.",
            .expected_output =
                "A list containing the proposed values for heater power outputs: "
                "[q1, q2, pred_t1, pred_t2]",
        });

        s.put(PromptTemplate{
            .name = "power_validation_task",
            .role = "Expert Validator",
            .goal = "Verify if heaters output less than or equal to {hi_q} and greater "
                    "than or equal to {lo_q}.",
            .backstory = "Knows how to validate the physical systems.",
            .task = "Validating agent outputs before passing it to the physical system "
                    "and strictly output only one boolean value, True if validation "
                    "tool returns True else output False.",
            .description =
                "Given the current heating outputs {q1} and {q2}, check if it is in "
                "the operating range of the system i.e. between {lo_q} and {hi_q}.",
            .expected_output =
                "Strictly output only one boolean value, True if validation tool "
                "returns True, else output False in an array.",
            .note = "Strictly output only one boolean value, True if validation tool "
                    "returns True else output False in an array, as more outputs are "
                    "costly for the LLMs.",
        });

        s.put(PromptTemplate{
            .name = "power_reprompting_task",
            .role = "Expert Fault Diagnosis Engineer",
            .goal = "You have been assigned this task because the power validation "
                    "stage has failed and there is a power limit violation.",
            .backstory = "You have worked in the industry as an expert plant operator "
                         "and have in depth knowledge of heat transfer.",
            .task = "Keep the heater power outputs within the power limits.",
            .description =
                "Here the power limit has been violated and you need to make sure the "
                "power output is within the range of ({lo_q} W, {hi_q} W), while "
                "maintaining the average system temperature to be {t_avg} K. You are "
                "tasked with adjusting the power output of two heaters individually to "
                "stabilize the system at an average temperature of {t_avg} K. The "
                "system current temperatures are {pred_t1} K and {pred_t2} K. Adjust "
                "the power output of heaters at which they would run for 30 seconds "
                "and maintain the average temperature of {t_avg} K.\n"
                "Your goal is to adjust the heater power outputs to maintain an "
                "average temperature of {t_avg} K while adhering to the following "
                "constraints:\n"
                "- Current average temperature of the system is {curr_t_avg} K.\n"
                "- Heater outputs must be between {lo_q} and {hi_q} watts.\n"
                "- Heat capacity (Cp): 500 J/kg-K.\n"
                "- Surface area (A): 1.2e-3 m^2.\n"
                "- Mass (m): 0.004 kg.\n"
                "- Overall heat transfer coefficient (U): 10 W/m^2-K.\n"
                "- Emissivity: 0.9\n"
                "- Stefan Boltzmann constant: 5.67e-8 W/m^2-K^4\n"
                "- Ambient temperature: 293.15 K\n"
                "- The full energy balance includes convection and radiation terms.\n"
                "The next heater power outputs should make sure the average "
                "temperature is moving towards {t_avg} K.",
            .expected_output =
                "An array with float values for the next heater outputs [q1, q2].",
            .note = "Give me an array with float values for the next heater outputs, "
                    "one value for q1 and q2 each. Anything other than that can cause "
                    "the system to fail.",
        });

        s.put(PromptTemplate{
            .name = "temp_reprompting_task_1",
            .role = "Intelligent Reprompter",
            .goal = "Calculate temperature of the system after 30 seconds.",
            .backstory =
                "A highly experienced troubleshooting expert in thermal systems. "
                "Skilled in proposing new strategies and adjustments when the primary "
                "optimization approach fails. You understand the physical dynamics of "
                "the system and can creatively search for solutions within the "
                "operational constraints.",
            .task = "Calculate temperature of heater 1 and heater 2 after 30 seconds.",
            .description =
                "Calculate the temperatures of heater 1 and heater 2 after 30 seconds "
                "with the {q1} W and {q2} W as power outputs and {t1} K and {t2} K as "
                "temperatures. From the current values of {q1} W and {q2} W gather "
                "information about how far the system is from the average temperature "
                "of {t_avg} K.\n"
                "System Parameters:\n"
                "- Current temperatures: {t1} K, {t2} K\n"
                "- Current average temperature: {curr_t_avg} K\n"
                "- Current heater outputs: {q1} W, {q2} W\n"
                "- Target average temperature: {t_avg} K\n"
                "- Heater output range: 0 to 0.3 watts\n"
                "Heater Specifications:\n"
                "- Heat capacity (Cp): 500 J/kg-K\n"
                "- Surface area (A): 1.2e-3 m^2\n"
                "- Mass (m): 0.004 kg\n"
                "- Overall heat transfer coefficient (U): 10 W/m^2-K\n"
                "- Emissivity: 0.9\n"
                "- Stefan Boltzmann constant: 5.67e-8 W/m^2-K^4\n"
                "- Ambient temperature: 293.15 K\n"
                "- The full energy balance includes convection and radiation terms.\n"
                "Task Details:\n"
                "- Assume the heaters will operate continuously for 30 seconds at the "
                "current outputs ({q1}, {q2}).\n"
                "- Use the heater specifications and energy balance equations to "
                "predict the resulting temperatures for heater 1 (pred_t1 K) and "
                "heater 2 (pred_t2 K) after 30 seconds.\n"
                "The aim of this task is to find the heater output temperatures. Do "
                "not forget to refer to a similar problem that you have solved "
                "previously.",
            .expected_output =
                "An array with the next heater temperatures: [pred_t1, pred_t2]",
        });

        s.put(PromptTemplate{
            .name = "temp_reprompting_task_2",
            .role = "Intelligent Reprompter - Heater 1",
            .goal = "Adjust heater output to bring the average system temperature "
                    "closer to {t_avg} K.",
            .backstory =
                "A highly experienced troubleshooting expert in thermal systems. "
                "Skilled in proposing adjustments when previous adjustments do not "
                "move towards the goal. You understand the physical dynamics of the "
                "system and can creatively search for solutions within the "
                "operational constraints.",
            .task = "Adjust the power of heater 1 {q1} W based on the {pred_t1} K and "
                    "{pred_t2} K values calculated previously.",
            .description =
                "Determine the heater 1 power output which it should run for in the "
                "next state for 30 seconds after {pred_t1} K and {pred_t2} K are "
                "reached, taking into account the following conditions:\n"
                "- Average system temperature should move towards {t_avg} K.\n"
                "- Heater power output range: 0 to 0.3 watts.\n"
                "- The score with the current heater outputs {q1} W and {q2} W is "
                "{avg_score}.\n"
                "- There is no cooling available for heaters, so the minimum power "
                "output can be 0 W.\n"
                "- Heat capacity (Cp): 500 J/kg-K.\n"
                "- Surface area (A): 1.2e-3 m^2.\n"
                "- Mass (m): 0.004 kg.\n"
                "- Overall heat transfer coefficient (U): 10 W/m^2-K.\n"
                "- Emissivity: 0.9\n"
                "- Stefan Boltzmann constant: 5.67e-8 W/m^2-K^4\n"
                "- Ambient temperature: 293.15 K\n"
                "- The full energy balance includes convection and radiation terms.\n"
                "The aim of this task is to find the heater output for heater 1. Do "
                "not forget to refer to a similar problem that you have solved "
                "previously.",
            .expected_output = "An array with the next heater 1 output: [q1]",
            .note = "The heater outputs must remain within the range of 0 to 0.3 "
                    "watts. Always ensure the system remains stable.",
        });

        s.put(PromptTemplate{
            .name = "temp_reprompting_task_3",
            .role = "Intelligent Reprompter - Heater 2",
            .goal = "Adjust heater output to bring the average system temperature "
                    "closer to {t_avg} K.",
            .backstory =
                "A highly experienced troubleshooting expert in thermal systems. "
                "Skilled in proposing adjustments when previous adjustments do not "
                "move towards the goal. You understand the physical dynamics of the "
                "system and can creatively search for solutions within the "
                "operational constraints.",
            .task = "Determine the power output of heater 2 given the fixed heater 1 "
                    "output {q1} W.",
            .description =
                "Your task is to determine the appropriate power output for heater 2 "
                "(q2) W which heater 2 would run for the next 30 seconds while "
                "ensuring the following conditions:\n"
                "- The average system temperature should move closer to the target "
                "average temperature of {t_avg} K.\n"
                "- Heater output must remain within the range of 0 to 0.3 watts.\n"
                "- Use the heater 1 output {q1} W as a fixed value.\n"
                "- The predicted temperatures are {pred_t1} K and {pred_t2} K.\n"
                "- There is no cooling available for heaters, so the minimum power "
                "output can be 0 W.\n"
                "- Heat capacity (Cp): 500 J/kg-K.\n"
                "- Surface area (A): 1.2e-3 m^2.\n"
                "- Mass (m): 0.004 kg.\n"
                "- Overall heat transfer coefficient (U): 10 W/m^2-K.\n"
                "- Emissivity: 0.9\n"
                "- Stefan Boltzmann constant: 5.67e-8 W/m^2-K^4\n"
                "- Ambient temperature: 293.15 K\n"
                "- The full energy balance includes convection and radiation terms.\n"
                "The aim of this task is to find the heater output for heater 2.",
            .expected_output =
                "An array with the next heater 2 output and new average score: "
                "[q1, q2, curr_avg_score]",
            .note = "The heater outputs must remain within the range of 0 to 0.3 "
                    "watts. Always ensure the system remains stable and provide "
                    "heating output between 0 W and 0.3 W.",
        });

        s.put(PromptTemplate{
            .name = "temp_validation",
            .role = "Thermal systems expert",
            .goal = "Only accept new heater outputs if they result in a closer "
                    "average temperature compared to the previous one.",
            .backstory =
                "You are a control system specialist trained in optimization "
                "techniques, particularly gradient-based approaches. Your expertise "
                "lies in ensuring stability and efficiency by iteratively improving "
                "system performance. You assess the current and proposed heater "
                "outputs and ensure that only adjustments leading to an improvement "
                "are accepted.",
            .task = "Validate heater outputs.",
            .description =
                "Evaluate the power outputs of the two heaters to achieve an average "
                "system temperature closer to the target of {t_avg} K. Accept new "
                "heater outputs only if they reduce the deviation from the target "
                "average temperature.\n"
                "The current system parameters are:\n"
                "- Current temperatures: {t1} K, {t2} K\n"
                "- Current heater outputs: {q1} W, {q2} W\n"
                "- Target average temperature: {t_avg} K\n"
                "- Heater output range: 0 to 0.3 watts\n"
                "Method:\n"
                "1. Calculate the average temperature of the system based on the "
                "predicted temperatures from current heater outputs ({q1} W, {q2} W).\n"
                "2. Compare the resulting average temperature with the target "
                "({t_avg} K) and the previous average temperature {avg_score}.\n"
                "3. Allow the new heater outputs only if the new average temperature "
                "is closer to the target than the previous average temperature.\n"
                "4. Provide feedback indicating whether the adjustment was accepted "
                "or rejected.\n"
                "5. If the heating outputs are 0 W and you cannot improve on the "
                "score then accept 0 W and move on.",
            .expected_output =
                "Strictly output only one boolean value, True if validation tool "
                "returns True, else output False.",
            .note = "The heater outputs must remain within the range of 0 to 0.3 "
                    "watts. Always ensure the system remains stable and provide only "
                    "a boolean response. Provide the output as True if the new heater "
                    "outputs are accepted and False if the new heater outputs are "
                    "rejected.",
        });

        return s;
    }();
    return store;
}

}  // namespace agctl
