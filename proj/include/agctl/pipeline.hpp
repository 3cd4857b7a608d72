#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agctl/control.hpp"
#include "agctl/fsm.hpp"
#include "agctl/prompts.hpp"
#include "agctl/provider.hpp"
#include "agctl/twin.hpp"

namespace agctl {

/// Append-only JSON-lines log of every provider exchange, parse result and
/// gate verdict. Thread-safe; entries carry a timestamp that canonical
/// comparison strips.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::ostream& sink) : sink_(&sink) {}

    void append(nlohmann::json entry);
    const std::vector<nlohmann::json>& entries() const { return entries_; }

    /// Entries with volatile fields (timestamps, latencies) removed, for
    /// determinism comparisons.
    static nlohmann::json canonical(const nlohmann::json& entry);
    std::vector<nlohmann::json> canonical_entries() const;

private:
    std::mutex mutex_;
    std::ostream* sink_ = nullptr;
    std::vector<nlohmann::json> entries_;
};

struct PlanAttempt {
    std::vector<int> proposed;  // parsed path, empty when unparseable
    std::optional<bool> claimed_reachable;
    TraversalReport report;
    bool parse_failed = false;
    double latency_s = 0.0;
};

struct PlanOutcome {
    bool success = false;
    PathPlan final_path;
    std::vector<PlanAttempt> attempts;
    int reprompts_used = 0;  // attempts - 1

    nlohmann::json to_json() const;
};

/// Action -> simulation -> validation -> reprompting loop over one FSM
/// instance. Invalid proposals are re-prompted with the first failing
/// transition and every previously explored path marked as forbidden, up to
/// `budget` refinement cycles; the last trajectory is kept either way.
PlanOutcome plan_recovery_path(Provider& provider, const Fsm& fsm, int start, int goal,
                               int budget = 5, AuditLog* audit = nullptr);

/// Builds the reprompt recommendation injected into the traversal prompt:
/// names the first invalid transition and lists all previously proposed
/// paths verbatim as forbidden.
std::string build_recommendation(const std::vector<PlanAttempt>& attempts);

struct GateVerdict {
    std::string gate;  // "temperature" | "power"
    bool passed = false;
    std::string detail;  // non-empty on failure

    nlohmann::json to_json() const {
        return {{"gate", gate}, {"passed", passed}, {"detail", detail}};
    }
};

/// Unvalidated proposal as it came out of the model, before any gate.
struct CandidateAction {
    double q1 = 0.0;
    double q2 = 0.0;
    // Twin re-prediction over one planning interval (never the model's own
    // numbers).
    double pred_t1 = 0.0;
    double pred_t2 = 0.0;
    double predicted_deviation = 0.0;  // |T_avg_pred - T_sp|
    GateVerdict temperature;
    GateVerdict power;

    nlohmann::json to_json() const;
};

struct ControlDecision {
    std::optional<HeaterCommand> chosen;
    double pred_t1 = 0.0;
    double pred_t2 = 0.0;
    std::vector<CandidateAction> candidates;
    int temp_reprompts = 0;
    int power_reprompts = 0;
    bool used_fallback = false;
    std::vector<double> latencies_s;  // one per provider exchange

    nlohmann::json to_json() const;
};

struct DecisionConfig {
    double setpoint = 306.15;
    double planning_interval = 30.0;
    double prediction_dt = 1.0;
    double lo_q = 0.0;
    double hi_q = kQMax;
    TwinParams params;
    DisturbanceProfile disturbance;
    int temp_reprompt_budget = 5;
    int power_reprompt_budget = 5;
    // Advisory LLM validator wrapping: verdicts are logged but the
    // deterministic gates stay authoritative.
    bool llm_validators = false;

    static DecisionConfig from_episode(const EpisodeConfig& e) {
        return {e.setpoint,          e.planning_interval, e.control_dt, 0.0, kQMax,
                e.params,            e.disturbance,       e.temp_reprompt_budget,
                e.power_reprompt_budget};
    }
};

/// Deterministic host-side temperature gate: simulates one planning interval
/// under the (bound-clamped) proposal and passes iff the predicted deviation
/// improves on prev_deviation, or the proposal is all-off and nothing so far
/// improved (zero-power escape). Fills the candidate's prediction fields.
GateVerdict temperature_gate(double prev_deviation, CandidateAction& proposed,
                             const TwinState& state, const DecisionConfig& config,
                             bool any_candidate_improved);

/// Inclusive bounds check on both heater powers.
GateVerdict power_gate(double q1, double q2, double lo, double hi);

/// One 30 s control decision: operator proposal, temperature gate with the
/// three-stage reprompting chain (predict, heater 1, heater 2), power gate
/// with its own reprompting agent, then best power-valid candidate by
/// predicted deviation (ties to lower total power). Provider and parse
/// failures consume a reprompt from the active budget and are logged, never
/// thrown.
ControlDecision decide_control_action(Provider& provider, const TwinState& state,
                                      const DecisionConfig& config,
                                      const TemplateStore& templates = builtin_templates(),
                                      AuditLog* audit = nullptr);

/// Adapts the decision loop to the episode runner's controller contract.
class AgentController : public Controller {
public:
    AgentController(Provider& provider, const TemplateStore& templates = builtin_templates(),
                    AuditLog* audit = nullptr)
        : provider_(provider), templates_(templates), audit_(audit) {}

    std::optional<HeaterCommand> decide(const TwinState& state, double setpoint,
                                        double interval_s,
                                        const std::vector<DecisionRecord>& history,
                                        nlohmann::json* detail) override;
    std::string name() const override { return "llm:" + provider_.name(); }

    void configure(const DecisionConfig& config) { config_ = config; }

private:
    Provider& provider_;
    const TemplateStore& templates_;
    AuditLog* audit_;
    std::optional<DecisionConfig> config_;
};

}  // namespace agctl
