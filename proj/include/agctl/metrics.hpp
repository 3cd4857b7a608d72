#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agctl/twin.hpp"

namespace agctl {

/// One planning instance, summarized for aggregation. Lengths are counted
/// in transitions, not states.
struct FsmBenchRecord {
    int n_nodes = 0;
    int n_edges = 0;
    bool first_attempt_valid = false;
    bool solved = false;
    int reprompts = 0;
    std::optional<int> found_length;    // transitions, when solved
    std::optional<int> optimal_length;  // transitions, when goal reachable
    double seconds = 0.0;
};

/// One aggregated row matching the benchmark table layout.
struct FsmCellRow {
    int n_nodes = 0;
    int n_edges = 0;
    double first_pass_accuracy = 0.0;
    double valid_path_accuracy = 0.0;
    double mean_optimal_length = 0.0;
    double mean_deviation = 0.0;        // over solved instances
    double mean_reprompts = 0.0;        // over all instances
    double mean_reprompts_solved = 0.0; // verbose alternative scope
    double mean_seconds = 0.0;
};

struct LatencyStats {
    int count = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // sample (n-1); zero for a single sample
    double min = 0.0;
    double max = 0.0;
};

struct ControlMetrics {
    double tw_mae = 0.0;  // K
    double rmse = 0.0;    // K
    int temp_reprompts = 0;
    int power_reprompts = 0;
    LatencyStats latency;
};

FsmCellRow fsm_metrics(const std::vector<FsmBenchRecord>& records);

/// Time-weighted MAE of the average temperature against the setpoint,
/// left-rectangle weights over the interval to the next sample.
double tw_mae(const Trajectory& trajectory, double setpoint);

/// Unweighted RMSE of the average temperature over all samples.
double rmse(const Trajectory& trajectory, double setpoint);

LatencyStats latency_stats(const std::vector<double>& samples);

// Table renderers; set markdown for pipe tables.
void write_fsm_table(std::ostream& out, const std::vector<FsmCellRow>& rows,
                     bool markdown = false, bool verbose = false);
void write_latency_table(std::ostream& out,
                         const std::vector<std::pair<std::string, LatencyStats>>& columns,
                         bool markdown = false);
void write_control_table(std::ostream& out,
                         const std::vector<std::pair<std::string, ControlMetrics>>& columns,
                         bool markdown = false);

nlohmann::json control_metrics_to_json(const ControlMetrics& m);
nlohmann::json latency_stats_to_json(const LatencyStats& s);
nlohmann::json fsm_cell_to_json(const FsmCellRow& row);

}  // namespace agctl
