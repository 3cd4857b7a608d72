#include "agctl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "agctl/errors.hpp"

namespace agctl {

FsmCellRow fsm_metrics(const std::vector<FsmBenchRecord>& records) {
    if (records.empty()) throw EmptyCell("no records in cell");
    FsmCellRow row;
    row.n_nodes = records.front().n_nodes;
    row.n_edges = records.front().n_edges;

    int first_pass = 0, solved = 0;
    double sum_optimal = 0.0, sum_deviation = 0.0;
    double sum_reprompts = 0.0, sum_reprompts_solved = 0.0, sum_seconds = 0.0;
    int optimal_count = 0;
    for (const auto& r : records) {
        first_pass += r.first_attempt_valid ? 1 : 0;
        sum_reprompts += r.reprompts;
        sum_seconds += r.seconds;
        if (r.optimal_length) {
            sum_optimal += *r.optimal_length;
            ++optimal_count;
        }
        if (r.solved) {
            ++solved;
            sum_reprompts_solved += r.reprompts;
            if (r.found_length && r.optimal_length)
                sum_deviation += *r.found_length - *r.optimal_length;
        }
    }
    const double n = static_cast<double>(records.size());
    row.first_pass_accuracy = first_pass / n;
    row.valid_path_accuracy = solved / n;
    row.mean_optimal_length = optimal_count ? sum_optimal / optimal_count : 0.0;
    row.mean_deviation = solved ? sum_deviation / solved : 0.0;
    row.mean_reprompts = sum_reprompts / n;
    row.mean_reprompts_solved = solved ? sum_reprompts_solved / solved : 0.0;
    row.mean_seconds = sum_seconds / n;
    return row;
}

double tw_mae(const Trajectory& trajectory, double setpoint) {
    if (trajectory.samples.size() < 2)
        throw TooFewSamples("tw_mae needs at least 2 samples");
    double weighted = 0.0, total = 0.0;
    for (std::size_t i = 0; i + 1 < trajectory.samples.size(); ++i) {
        const double dt = trajectory.samples[i + 1].state.time -
                          trajectory.samples[i].state.time;
        weighted += std::abs(average_temperature(trajectory.samples[i].state) - setpoint) * dt;
        total += dt;
    }
    return weighted / total;
}

double rmse(const Trajectory& trajectory, double setpoint) {
    if (trajectory.samples.empty()) throw TooFewSamples("rmse needs at least 1 sample");
    double sum_sq = 0.0;
    for (const auto& s : trajectory.samples) {
        const double e = average_temperature(s.state) - setpoint;
        sum_sq += e * e;
    }
    return std::sqrt(sum_sq / static_cast<double>(trajectory.samples.size()));
}

LatencyStats latency_stats(const std::vector<double>& samples) {
    if (samples.empty()) throw EmptyInput("latency_stats needs at least 1 sample");
    LatencyStats stats;
    stats.count = static_cast<int>(samples.size());
    stats.min = *std::min_element(samples.begin(), samples.end());
    stats.max = *std::max_element(samples.begin(), samples.end());
    double sum = 0.0;
    for (double s : samples) sum += s;
    stats.mean = sum / stats.count;
    if (stats.count > 1) {
        double sq = 0.0;
        for (double s : samples) sq += (s - stats.mean) * (s - stats.mean);
        stats.std_dev = std::sqrt(sq / (stats.count - 1));
    }
    return stats;
}

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells, bool markdown) {
    if (markdown) {
        out << "| ";
        for (std::size_t i = 0; i < cells.size(); ++i) out << cells[i] << (i + 1 < cells.size() ? " | " : " |");
        out << "\n";
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) out << cells[i] << (i + 1 < cells.size() ? "," : "");
        out << "\n";
    }
}

void write_header(std::ostream& out, const std::vector<std::string>& cells, bool markdown) {
    write_row(out, cells, markdown);
    if (markdown) {
        out << "|";
        for (std::size_t i = 0; i < cells.size(); ++i) out << "---|";
        out << "\n";
    }
}

std::string num(double v) { return fmt::format("{:.4f}", v); }

}  // namespace

void write_fsm_table(std::ostream& out, const std::vector<FsmCellRow>& rows,
                     bool markdown, bool verbose) {
    std::vector<std::string> header = {"Nodes", "Edges", "First pass accuracy",
                                       "Valid Path accuracy", "Optimal Path Length",
                                       "Deviation in Path Length", "Avg. Reprompts",
                                       "Avg. Time (s)"};
    if (verbose) header.push_back("Avg. Reprompts (solved)");
    write_header(out, header, markdown);
    for (const auto& r : rows) {
        std::vector<std::string> cells = {std::to_string(r.n_nodes),
                                          std::to_string(r.n_edges),
                                          num(r.first_pass_accuracy),
                                          num(r.valid_path_accuracy),
                                          num(r.mean_optimal_length),
                                          num(r.mean_deviation),
                                          num(r.mean_reprompts),
                                          num(r.mean_seconds)};
        if (verbose) cells.push_back(num(r.mean_reprompts_solved));
        write_row(out, cells, markdown);
    }
}

void write_latency_table(std::ostream& out,
                         const std::vector<std::pair<std::string, LatencyStats>>& columns,
                         bool markdown) {
    std::vector<std::string> header = {"Metric"};
    for (const auto& [name, _] : columns) header.push_back(name);
    write_header(out, header, markdown);
    auto emit = [&](const std::string& label, auto getter) {
        std::vector<std::string> cells = {label};
        for (const auto& [_, stats] : columns) cells.push_back(getter(stats));
        write_row(out, cells, markdown);
    };
    emit("Sample Count", [](const LatencyStats& s) { return std::to_string(s.count); });
    emit("Mean (s)", [](const LatencyStats& s) { return num(s.mean); });
    emit("Std. Deviation (s)", [](const LatencyStats& s) { return num(s.std_dev); });
    emit("Min/Max (s)", [](const LatencyStats& s) { return num(s.min) + " / " + num(s.max); });
}

void write_control_table(std::ostream& out,
                         const std::vector<std::pair<std::string, ControlMetrics>>& columns,
                         bool markdown) {
    std::vector<std::string> header = {"Model"};
    for (const auto& [name, _] : columns) header.push_back(name);
    write_header(out, header, markdown);
    auto emit = [&](const std::string& label, auto getter) {
        std::vector<std::string> cells = {label};
        for (const auto& [_, m] : columns) cells.push_back(getter(m));
        write_row(out, cells, markdown);
    };
    emit("TW-MAE", [](const ControlMetrics& m) { return num(m.tw_mae); });
    emit("RMSE", [](const ControlMetrics& m) { return num(m.rmse); });
    emit("Reprompts (Temp/Power)", [](const ControlMetrics& m) {
        return std::to_string(m.temp_reprompts) + "/" + std::to_string(m.power_reprompts);
    });
}

nlohmann::json latency_stats_to_json(const LatencyStats& s) {
    return {{"count", s.count}, {"mean_s", s.mean}, {"std_dev_s", s.std_dev},
            {"min_s", s.min},   {"max_s", s.max}};
}

nlohmann::json control_metrics_to_json(const ControlMetrics& m) {
    return {{"tw_mae_K", m.tw_mae},
            {"rmse_K", m.rmse},
            {"temp_reprompts", m.temp_reprompts},
            {"power_reprompts", m.power_reprompts},
            {"latency", latency_stats_to_json(m.latency)}};
}

nlohmann::json fsm_cell_to_json(const FsmCellRow& row) {
    return {{"n_nodes", row.n_nodes},
            {"n_edges", row.n_edges},
            {"first_pass_accuracy", row.first_pass_accuracy},
            {"valid_path_accuracy", row.valid_path_accuracy},
            {"mean_optimal_length", row.mean_optimal_length},
            {"mean_deviation", row.mean_deviation},
            {"mean_reprompts", row.mean_reprompts},
            {"mean_reprompts_solved", row.mean_reprompts_solved},
            {"mean_seconds", row.mean_seconds}};
}

}  // namespace agctl
