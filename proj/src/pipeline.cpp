#include "agctl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <sstream>

#include "agctl/errors.hpp"
#include "agctl/parsing.hpp"

namespace agctl {

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    return fmt::format("{:%FT%TZ}", std::chrono::floor<std::chrono::milliseconds>(now));
}

std::string path_text(const std::vector<int>& states) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i) out << ", ";
        out << states[i];
    }
    out << "]";
    return out.str();
}

}  // namespace

void AuditLog::append(nlohmann::json entry) {
    entry["ts"] = iso_timestamp();
    std::lock_guard lock(mutex_);
    if (sink_) *sink_ << entry.dump() << "\n";
    entries_.push_back(std::move(entry));
}

namespace {

void scrub_volatile(nlohmann::json& j) {
    if (j.is_object()) {
        j.erase("ts");
        j.erase("latency_s");
        j.erase("seconds");
        for (auto& [_, value] : j.items()) scrub_volatile(value);
    } else if (j.is_array()) {
        for (auto& value : j) scrub_volatile(value);
    }
}

}  // namespace

nlohmann::json AuditLog::canonical(const nlohmann::json& entry) {
    nlohmann::json out = entry;
    scrub_volatile(out);
    return out;
}

std::vector<nlohmann::json> AuditLog::canonical_entries() const {
    std::vector<nlohmann::json> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(canonical(e));
    return out;
}

nlohmann::json PlanOutcome::to_json() const {
    nlohmann::json attempts_json = nlohmann::json::array();
    for (const auto& a : attempts) {
        nlohmann::json aj = {{"proposed", a.proposed},
                             {"valid", a.report.valid},
                             {"parse_failed", a.parse_failed},
                             {"latency_s", a.latency_s}};
        if (a.report.first_invalid_index) aj["first_invalid_index"] = *a.report.first_invalid_index;
        if (a.claimed_reachable) aj["claimed_reachable"] = *a.claimed_reachable;
        attempts_json.push_back(std::move(aj));
    }
    return {{"success", success},
            {"final_path", final_path.states},
            {"reprompts_used", reprompts_used},
            {"attempts", attempts_json}};
}

std::string build_recommendation(const std::vector<PlanAttempt>& attempts) {
    if (attempts.empty()) return "";
    std::ostringstream out;
    const auto& last = attempts.back();
    if (last.parse_failed) {
        out << "Your previous reply did not contain a bracketed list of states. "
               "Reply with the path as a list of state ids, e.g. [0, 1, 2]. ";
    } else if (last.report.first_invalid_index) {
        const int i = *last.report.first_invalid_index;
        out << "The transition " << last.proposed[i] << " -> " << last.proposed[i + 1]
            << " (position " << i << " of your path) is not a valid edge. ";
    } else {
        out << "Your previous path did not start at the current state and end at "
               "the target state. ";
    }
    out << "Avoid the previously explored paths:";
    for (const auto& a : attempts) {
        if (a.proposed.empty()) continue;
        out << " " << path_text(a.proposed) << ";";
    }
    return out.str();
}

PlanOutcome plan_recovery_path(Provider& provider, const Fsm& fsm, int start, int goal,
                               int budget, AuditLog* audit) {
    if (!validate_structure(fsm).empty()) throw Error("invalid fsm");
    if (start < 0 || start >= fsm.n_nodes || goal < 0 || goal >= fsm.n_nodes)
        throw UnknownState("start/goal out of range");

    const std::string graph = encode_as_dict_text(fsm);
    PlanOutcome outcome;

    for (int attempt_idx = 0; attempt_idx <= budget; ++attempt_idx) {
        Bindings bindings = {{"graph", graph},
                             {"current_state", std::to_string(start)},
                             {"target_state", std::to_string(goal)},
                             {"recommendation", build_recommendation(outcome.attempts)}};
        const RenderedPrompt prompt =
            render_prompt(builtin_templates().get("traversal_task"), bindings);

        CompletionResponse response;
        try {
            response = provider.complete({prompt.system, prompt.user});
        } catch (const ProviderError& e) {
            if (audit)
                audit->append({{"kind", "provider_failure"},
                               {"template", "traversal_task"},
                               {"error", e.what()}});
            outcome.reprompts_used = static_cast<int>(outcome.attempts.size()) - 1;
            throw;  // attempts so far live in the audit log
        }

        PlanAttempt attempt;
        attempt.latency_s = response.latency_s;
        attempt.claimed_reachable = try_parse_bool(response.text);
        bool in_range = true;
        try {
            attempt.proposed = parse_state_path(response.text);
            for (int s : attempt.proposed)
                if (s < 0 || s >= fsm.n_nodes) in_range = false;
            if (in_range) {
                attempt.report = traverse(fsm, PathPlan{attempt.proposed});
            } else {
                attempt.report.valid = false;
                attempt.report.first_invalid_index = 0;
            }
        } catch (const ParseFailure&) {
            attempt.parse_failed = true;
        }

        const bool endpoints_ok = !attempt.proposed.empty() &&
                                  attempt.proposed.front() == start &&
                                  attempt.proposed.back() == goal;
        const bool solved = attempt.report.valid && endpoints_ok;
        if (solved) outcome.final_path = PathPlan{attempt.proposed};
        // Endpoint mismatch invalidates the attempt even if every hop walks.
        if (!endpoints_ok) attempt.report.valid = false;

        if (audit) {
            nlohmann::json entry = {{"kind", "exchange"},
                                    {"template", "traversal_task"},
                                    {"system", prompt.system},
                                    {"user", prompt.user},
                                    {"reply", response.text},
                                    {"latency_s", response.latency_s},
                                    {"parsed_path", attempt.proposed},
                                    {"parse_failed", attempt.parse_failed},
                                    {"valid", solved}};
            audit->append(std::move(entry));
        }

        outcome.attempts.push_back(std::move(attempt));
        if (solved) {
            outcome.success = true;
            break;
        }
    }

    if (!outcome.success && !outcome.attempts.empty())
        outcome.final_path = PathPlan{outcome.attempts.back().proposed};
    outcome.reprompts_used = static_cast<int>(outcome.attempts.size()) - 1;
    return outcome;
}

nlohmann::json CandidateAction::to_json() const {
    return {{"q1_W", q1},
            {"q2_W", q2},
            {"pred_t1_K", pred_t1},
            {"pred_t2_K", pred_t2},
            {"predicted_deviation_K", predicted_deviation},
            {"temperature", temperature.to_json()},
            {"power", power.to_json()}};
}

nlohmann::json ControlDecision::to_json() const {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : candidates) cands.push_back(c.to_json());
    nlohmann::json j = {{"used_fallback", used_fallback},
                        {"pred_t1_K", pred_t1},
                        {"pred_t2_K", pred_t2},
                        {"temp_reprompts", temp_reprompts},
                        {"power_reprompts", power_reprompts},
                        {"candidates", cands}};
    if (chosen) {
        j["q1_W"] = chosen->q1;
        j["q2_W"] = chosen->q2;
    }
    return j;
}

GateVerdict temperature_gate(double prev_deviation, CandidateAction& proposed,
                             const TwinState& state, const DecisionConfig& config,
                             bool any_candidate_improved) {
    // Clamp only for the prediction; the power gate owns the bounds.
    const HeaterCommand clamped(std::clamp(proposed.q1, 0.0, kQMax),
                                std::clamp(proposed.q2, 0.0, kQMax));
    const Trajectory traj =
        simulate_interval(state, clamped, config.planning_interval, config.prediction_dt,
                          config.params, config.disturbance);
    const TwinState& final_state = traj.samples.back().state;
    proposed.pred_t1 = final_state.t1;
    proposed.pred_t2 = final_state.t2;
    proposed.predicted_deviation =
        std::abs(average_temperature(final_state) - config.setpoint);

    GateVerdict verdict;
    verdict.gate = "temperature";
    if (proposed.predicted_deviation < prev_deviation) {
        verdict.passed = true;
    } else if (proposed.q1 == 0.0 && proposed.q2 == 0.0 && !any_candidate_improved) {
        verdict.passed = true;  // zero-power escape
        verdict.detail = "accepted 0 W: no candidate improves on the current score";
    } else {
        verdict.passed = false;
        verdict.detail = fmt::format(
            "predicted deviation {} K does not improve on previous {} K",
            format_number(proposed.predicted_deviation), format_number(prev_deviation));
    }
    return verdict;
}

GateVerdict power_gate(double q1, double q2, double lo, double hi) {
    GateVerdict verdict;
    verdict.gate = "power";
    if (q1 < lo || q1 > hi) {
        verdict.detail = fmt::format("q1 = {} W outside [{}, {}]", format_number(q1),
                                     format_number(lo), format_number(hi));
    } else if (q2 < lo || q2 > hi) {
        verdict.detail = fmt::format("q2 = {} W outside [{}, {}]", format_number(q2),
                                     format_number(lo), format_number(hi));
    } else {
        verdict.passed = true;
    }
    return verdict;
}

namespace {

struct Exchange {
    std::string reply;
    bool ok = false;
};

// One provider round trip with audit bookkeeping. Failures are logged and
// reported through ok=false, never thrown.
Exchange exchange(Provider& provider, const TemplateStore& templates,
                  const std::string& template_name, const Bindings& bindings,
                  ControlDecision& decision, AuditLog* audit) {
    Exchange result;
    RenderedPrompt prompt;
    try {
        prompt = render_prompt(templates.get(template_name), bindings);
        const CompletionResponse response = provider.complete({prompt.system, prompt.user});
        result.reply = response.text;
        result.ok = true;
        decision.latencies_s.push_back(response.latency_s);
        if (audit)
            audit->append({{"kind", "exchange"},
                           {"template", template_name},
                           {"system", prompt.system},
                           {"user", prompt.user},
                           {"reply", response.text},
                           {"latency_s", response.latency_s}});
    } catch (const Error& e) {
        if (audit)
            audit->append({{"kind", "provider_failure"},
                           {"template", template_name},
                           {"error", e.what()}});
    }
    return result;
}

}  // namespace

ControlDecision decide_control_action(Provider& provider, const TwinState& state,
                                      const DecisionConfig& config,
                                      const TemplateStore& templates, AuditLog* audit) {
    ControlDecision decision;
    const double curr_avg = average_temperature(state);
    const double prev_deviation = std::abs(curr_avg - config.setpoint);
    bool any_improved = false;

    Bindings base = {{"t_avg", format_number(config.setpoint)},
                     {"curr_t_avg", format_number(curr_avg)},
                     {"t1", format_number(state.t1)},
                     {"t2", format_number(state.t2)},
                     {"lo_q", format_number(config.lo_q)},
                     {"hi_q", format_number(config.hi_q)},
                     {"q1", "0"},
                     {"q2", "0"}};

    auto add_candidate = [&](double q1, double q2) -> CandidateAction& {
        CandidateAction c;
        c.q1 = q1;
        c.q2 = q2;
        c.temperature = temperature_gate(prev_deviation, c, state, config, any_improved);
        if (c.predicted_deviation < prev_deviation) any_improved = true;
        c.power = power_gate(q1, q2, config.lo_q, config.hi_q);
        if (audit)
            audit->append({{"kind", "gate"}, {"candidate", c.to_json()}});
        decision.candidates.push_back(c);
        return decision.candidates.back();
    };

    // Stage 1: operator proposal, then the temperature loop. A full
    // calc/heater-1/heater-2 chain counts as one temperature reprompt, as
    // does any parse or provider failure on the way.
    bool temp_accepted = false;
    bool have_candidate = false;
    while (true) {
        bool cycle_ok = false;
        if (!have_candidate) {
            const Exchange ex =
                exchange(provider, templates, "operator_task", base, decision, audit);
            if (ex.ok) {
                try {
                    const auto values = parse_float_array(ex.reply, 4);
                    auto& c = add_candidate(values[0], values[1]);
                    have_candidate = true;
                    cycle_ok = true;
                    if (c.temperature.passed) temp_accepted = true;
                } catch (const ParseFailure& e) {
                    if (audit)
                        audit->append({{"kind", "parse_failure"},
                                       {"template", "operator_task"},
                                       {"raw", e.raw_text}});
                }
            }
        } else {
            // Three-stage temperature reprompting chain. The calc agent's
            // numbers feed the next prompts only; gate decisions always
            // re-predict with the twin.
            const CandidateAction& last = decision.candidates.back();
            Bindings chain = base;
            chain["q1"] = format_number(last.q1);
            chain["q2"] = format_number(last.q2);
            chain["avg_score"] = format_number(last.predicted_deviation);
            double pred_t1 = last.pred_t1, pred_t2 = last.pred_t2;

            const Exchange calc = exchange(provider, templates, "temp_reprompting_task_1",
                                           chain, decision, audit);
            if (calc.ok) {
                try {
                    const auto temps = parse_float_array(calc.reply, 2);
                    pred_t1 = temps[0];
                    pred_t2 = temps[1];
                } catch (const ParseFailure&) {
                    // keep the twin's own prediction for prompting
                }
                chain["pred_t1"] = format_number(pred_t1);
                chain["pred_t2"] = format_number(pred_t2);

                const Exchange h1 = exchange(provider, templates, "temp_reprompting_task_2",
                                             chain, decision, audit);
                if (h1.ok) {
                    try {
                        const double q1 = parse_float_array(h1.reply, 1)[0];
                        chain["q1"] = format_number(q1);
                        const Exchange h2 = exchange(provider, templates,
                                                     "temp_reprompting_task_3", chain,
                                                     decision, audit);
                        if (h2.ok) {
                            // Reply shape is [q1, q2, score] but a bare
                            // [q2] is tolerated.
                            double q2;
                            try {
                                q2 = parse_float_array(h2.reply, 3)[1];
                            } catch (const ParseFailure&) {
                                q2 = parse_float_array(h2.reply, 1)[0];
                            }
                            auto& c = add_candidate(q1, q2);
                            cycle_ok = true;
                            if (c.temperature.passed) temp_accepted = true;
                        }
                    } catch (const ParseFailure& e) {
                        if (audit)
                            audit->append({{"kind", "parse_failure"},
                                           {"template", "temperature_chain"},
                                           {"raw", e.raw_text}});
                    }
                }
            }
        }
        (void)cycle_ok;
        if (temp_accepted) break;
        if (decision.temp_reprompts >= config.temp_reprompt_budget) break;
        ++decision.temp_reprompts;
    }

    // Optional advisory LLM validator: its verdict is logged but the
    // deterministic gate stays authoritative.
    if (config.llm_validators && !decision.candidates.empty()) {
        const CandidateAction& last = decision.candidates.back();
        Bindings vb = base;
        vb["q1"] = format_number(last.q1);
        vb["q2"] = format_number(last.q2);
        vb["avg_score"] = format_number(prev_deviation);
        const Exchange ex =
            exchange(provider, templates, "temp_validation", vb, decision, audit);
        if (ex.ok && audit) {
            const auto verdict = try_parse_bool(ex.reply);
            audit->append({{"kind", "llm_validator"},
                           {"gate", "temperature"},
                           {"llm_verdict", verdict ? nlohmann::json(*verdict) : nlohmann::json()},
                           {"authoritative", last.temperature.passed},
                           {"overridden", verdict && *verdict != last.temperature.passed}});
        }
    }

    // Stage 2: power gate with its own reprompting agent.
    auto power_valid_exists = [&] {
        return std::any_of(decision.candidates.begin(), decision.candidates.end(),
                           [](const CandidateAction& c) { return c.power.passed; });
    };
    while (!power_valid_exists() && !decision.candidates.empty() &&
           decision.power_reprompts < config.power_reprompt_budget) {
        ++decision.power_reprompts;
        const CandidateAction& last = decision.candidates.back();
        Bindings pb = base;
        pb["q1"] = format_number(last.q1);
        pb["q2"] = format_number(last.q2);
        pb["pred_t1"] = format_number(last.pred_t1);
        pb["pred_t2"] = format_number(last.pred_t2);
        const Exchange ex =
            exchange(provider, templates, "power_reprompting_task", pb, decision, audit);
        if (!ex.ok) continue;
        try {
            const auto values = parse_float_array(ex.reply, 2);
            add_candidate(values[0], values[1]);
        } catch (const ParseFailure& e) {
            if (audit)
                audit->append({{"kind", "parse_failure"},
                               {"template", "power_reprompting_task"},
                               {"raw", e.raw_text}});
        }
    }

    // Best available action: minimal predicted deviation among power-valid
    // candidates, ties broken by lower total power.
    const CandidateAction* best = nullptr;
    for (const auto& c : decision.candidates) {
        if (!c.power.passed) continue;
        if (!best || c.predicted_deviation < best->predicted_deviation ||
            (c.predicted_deviation == best->predicted_deviation &&
             c.q1 + c.q2 < best->q1 + best->q2))
            best = &c;
    }
    if (best) {
        decision.chosen = HeaterCommand(best->q1, best->q2);
        decision.pred_t1 = best->pred_t1;
        decision.pred_t2 = best->pred_t2;
    } else {
        decision.used_fallback = true;
    }
    if (audit)
        audit->append({{"kind", "decision"}, {"decision", decision.to_json()}});
    return decision;
}

std::optional<HeaterCommand> AgentController::decide(const TwinState& state, double setpoint,
                                                     double interval_s,
                                                     const std::vector<DecisionRecord>&,
                                                     nlohmann::json* detail) {
    DecisionConfig config = config_.value_or(DecisionConfig{});
    config.setpoint = setpoint;
    config.planning_interval = interval_s;
    const ControlDecision decision =
        decide_control_action(provider_, state, config, templates_, audit_);
    if (detail) {
        *detail = decision.to_json();
        (*detail)["temp_reprompts"] = decision.temp_reprompts;
        (*detail)["power_reprompts"] = decision.power_reprompts;
    }
    return decision.chosen;
}

}  // namespace agctl
