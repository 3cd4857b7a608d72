// Command-line front end: benchmark suite runs, control episodes, report
// rendering and prompt template export.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <agctl/control.hpp>
#include <agctl/errors.hpp>
#include <agctl/metrics.hpp>
#include <agctl/pipeline.hpp>
#include <agctl/prompts.hpp>
#include <agctl/provider.hpp>
#include <agctl/suite.hpp>
#include <agctl/svgplot.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw agctl::Error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

agctl::ProviderConfig provider_config_from_json(const json& j) {
    agctl::ProviderConfig c;
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.temperature = j.value("temperature", c.temperature);
    c.top_p = j.value("top_p", c.top_p);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.retries = j.value("retries", c.retries);
    return c;
}

struct ProviderOpts {
    std::string kind = "oracle";  // oracle | scripted | openai
    std::string script;
    std::string model;
    std::string config_path;
};

agctl::ProviderConfig resolve_http_config(const ProviderOpts& opts) {
    agctl::ProviderConfig pc;
    if (!opts.config_path.empty()) {
        const json j = load_json_file(opts.config_path);
        pc = provider_config_from_json(j.contains("provider") ? j.at("provider") : j);
    }
    if (!opts.model.empty()) pc.model = opts.model;
    pc.validate();
    return pc;
}

// Builds one provider per suite instance so scripted replays start fresh
// each time; the oracle needs the instance to know its graph.
agctl::ProviderFactory make_factory(const ProviderOpts& opts) {
    if (opts.kind == "oracle") {
        return [](const agctl::SuiteInstance& inst) {
            return agctl::make_oracle_provider(inst);
        };
    }
    if (opts.kind == "scripted") {
        if (opts.script.empty())
            throw agctl::Error("scripted provider requires --script");
        const std::string path = opts.script;
        return [path](const agctl::SuiteInstance&) -> std::unique_ptr<agctl::Provider> {
            return std::make_unique<agctl::ScriptedProvider>(
                agctl::ScriptedProvider::from_jsonl(path));
        };
    }
    if (opts.kind == "openai") {
        const agctl::ProviderConfig pc = resolve_http_config(opts);
        return [pc](const agctl::SuiteInstance&) -> std::unique_ptr<agctl::Provider> {
            return std::make_unique<agctl::HttpProvider>(pc);
        };
    }
    throw agctl::Error("unknown provider kind: " + opts.kind);
}

std::unique_ptr<agctl::Provider> make_single_provider(const ProviderOpts& opts) {
    if (opts.kind == "scripted") {
        if (opts.script.empty())
            throw agctl::Error("scripted provider requires --script");
        return std::make_unique<agctl::ScriptedProvider>(
            agctl::ScriptedProvider::from_jsonl(opts.script));
    }
    if (opts.kind == "openai")
        return std::make_unique<agctl::HttpProvider>(resolve_http_config(opts));
    throw agctl::Error("controller llm needs --provider scripted or openai");
}

json record_to_json(const agctl::FsmBenchRecord& r) {
    json j{{"n_nodes", r.n_nodes},
           {"n_edges", r.n_edges},
           {"first_attempt_valid", r.first_attempt_valid},
           {"solved", r.solved},
           {"reprompts", r.reprompts},
           {"seconds", r.seconds}};
    if (r.found_length) j["found_length"] = *r.found_length;
    if (r.optimal_length) j["optimal_length"] = *r.optimal_length;
    return j;
}

agctl::FsmBenchRecord record_from_json(const json& j) {
    agctl::FsmBenchRecord r;
    r.n_nodes = j.at("n_nodes").get<int>();
    r.n_edges = j.at("n_edges").get<int>();
    r.first_attempt_valid = j.at("first_attempt_valid").get<bool>();
    r.solved = j.at("solved").get<bool>();
    r.reprompts = j.at("reprompts").get<int>();
    r.seconds = j.value("seconds", 0.0);
    if (j.contains("found_length")) r.found_length = j.at("found_length").get<int>();
    if (j.contains("optimal_length")) r.optimal_length = j.at("optimal_length").get<int>();
    return r;
}

// Replays a fixed command sequence, one entry per planning interval;
// declares failure once the sequence runs out so the safety fallback takes
// over.
class ReplayController : public agctl::Controller {
public:
    explicit ReplayController(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw agctl::Error("cannot open " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            commands_.emplace_back(j.at("q1").get<double>(), j.at("q2").get<double>());
        }
    }

    std::optional<agctl::HeaterCommand> decide(const agctl::TwinState&, double, double,
                                               const std::vector<agctl::DecisionRecord>&,
                                               json*) override {
        if (next_ >= commands_.size()) return std::nullopt;
        return commands_[next_++];
    }
    std::string name() const override { return "replay"; }

private:
    std::vector<agctl::HeaterCommand> commands_;
    std::size_t next_ = 0;
};

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw agctl::Error("cannot write " + path.string());
    out << content;
}

int cmd_fsm_bench(const ProviderOpts& provider_opts, const std::string& out_dir,
                  const std::string& suite_dir, std::uint64_t seed, int parallel,
                  int budget) {
    fs::create_directories(out_dir);
    std::vector<agctl::SuiteInstance> instances;
    if (!suite_dir.empty()) {
        instances = agctl::load_suite(suite_dir);
    } else {
        instances = agctl::build_suite(agctl::default_suite(), seed);
        agctl::write_suite((fs::path(out_dir) / "suite").string(), instances, seed);
    }

    const agctl::ProviderFactory factory = make_factory(provider_opts);

    std::ofstream audit_out(fs::path(out_dir) / "audit.jsonl");
    agctl::AuditLog audit(audit_out);
    const agctl::SuiteResult result =
        agctl::run_fsm_suite(instances, factory, budget, parallel, &audit);

    {
        std::ofstream records(fs::path(out_dir) / "records.jsonl");
        for (const auto& r : result.records) records << record_to_json(r) << "\n";
    }
    {
        std::ofstream csv(fs::path(out_dir) / "results.csv");
        agctl::write_fsm_table(csv, result.rows);
    }
    json summary{{"seed", seed},
                 {"instances", instances.size()},
                 {"provider", provider_opts.kind},
                 {"budget", budget},
                 {"provider_failures", result.provider_failures},
                 {"cells", json::array()}};
    for (const auto& row : result.rows) summary["cells"].push_back(agctl::fsm_cell_to_json(row));
    write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");

    std::cout << "wrote " << result.records.size() << " records to " << out_dir << "\n";
    agctl::write_fsm_table(std::cout, result.rows);
    if (result.provider_failures >= static_cast<int>(instances.size()) &&
        !instances.empty()) {
        std::cerr << "provider failed on every instance\n";
        return kExitProvider;
    }
    return kExitOk;
}

int cmd_control_run(const std::string& controller_kind, const ProviderOpts& provider_opts,
                    const std::string& config_path, const std::string& out_dir,
                    bool plot) {
    agctl::EpisodeConfig config;
    if (!config_path.empty()) {
        const json j = load_json_file(config_path);
        config = agctl::episode_config_from_json(j.contains("episode") ? j.at("episode")
                                                                       : j);
    }
    config.validate();
    fs::create_directories(out_dir);

    std::unique_ptr<agctl::Provider> provider;
    std::unique_ptr<agctl::Controller> controller;
    std::ofstream audit_out;
    std::unique_ptr<agctl::AuditLog> audit;

    if (controller_kind == "pid") {
        controller = std::make_unique<agctl::PidController>();
    } else if (controller_kind == "zero") {
        controller = std::make_unique<agctl::ZeroController>();
    } else if (controller_kind == "scripted") {
        if (provider_opts.script.empty())
            throw agctl::Error("scripted controller requires --script");
        controller = std::make_unique<ReplayController>(provider_opts.script);
    } else if (controller_kind == "llm") {
        provider = make_single_provider(provider_opts);
        audit_out.open(fs::path(out_dir) / "audit.jsonl");
        audit = std::make_unique<agctl::AuditLog>(audit_out);
        auto agent = std::make_unique<agctl::AgentController>(
            *provider, agctl::builtin_templates(), audit.get());
        agent->configure(agctl::DecisionConfig::from_episode(config));
        controller = std::move(agent);
    } else {
        throw agctl::Error("unknown controller: " + controller_kind);
    }

    const agctl::EpisodeLog log = agctl::run_episode(config, *controller);

    write_text(fs::path(out_dir) / "episode.json", log.to_json().dump(2) + "\n");
    {
        std::ofstream csv(fs::path(out_dir) / "trajectory.csv");
        log.trajectory.write_csv(csv);
    }
    write_text(fs::path(out_dir) / "metrics.json",
               agctl::control_metrics_to_json(log.metrics).dump(2) + "\n");
    if (plot)
        write_text(fs::path(out_dir) / "episode.svg", agctl::episode_svg(log));

    agctl::write_control_table(std::cout, {{log.controller_name, log.metrics}});
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& episode_paths,
               const std::vector<std::string>& fsm_paths, const std::string& out_dir,
               bool markdown) {
    if (episode_paths.empty() && fsm_paths.empty())
        throw agctl::Error("nothing to report: pass --episode and/or --fsm inputs");
    if (!out_dir.empty()) fs::create_directories(out_dir);
    const std::string ext = markdown ? ".md" : ".csv";

    std::vector<agctl::EpisodeLog> episodes;
    std::vector<std::pair<std::string, agctl::ControlMetrics>> columns;
    for (const auto& path : episode_paths) {
        const json j = load_json_file(path);
        agctl::EpisodeLog log;
        log.controller_name = j.at("controller").get<std::string>();
        const json& m = j.at("metrics");
        log.metrics.tw_mae = m.at("tw_mae_K").get<double>();
        log.metrics.rmse = m.at("rmse_K").get<double>();
        log.metrics.temp_reprompts = m.at("temp_reprompts").get<int>();
        log.metrics.power_reprompts = m.at("power_reprompts").get<int>();
        const json& l = m.at("latency");
        log.metrics.latency = {l.at("count").get<int>(), l.at("mean_s").get<double>(),
                               l.at("std_dev_s").get<double>(), l.at("min_s").get<double>(),
                               l.at("max_s").get<double>()};
        columns.emplace_back(log.controller_name, log.metrics);
        episodes.push_back(std::move(log));
    }
    if (!columns.empty()) {
        if (out_dir.empty()) {
            agctl::write_control_table(std::cout, columns, markdown);
        } else {
            std::ofstream out(fs::path(out_dir) / ("control" + ext));
            agctl::write_control_table(out, columns, markdown);
        }
    }

    for (const auto& path : fsm_paths) {
        std::ifstream in(path);
        if (!in) throw agctl::Error("cannot open " + path);
        // aggregate per (nodes, edges) cell, first-seen order
        std::vector<agctl::FsmBenchRecord> records;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            records.push_back(record_from_json(json::parse(line)));
        }
        if (records.empty()) throw agctl::Error("no records in " + path);
        std::vector<std::pair<int, int>> order;
        std::vector<agctl::FsmCellRow> rows;
        for (const auto& r : records) {
            const std::pair<int, int> key{r.n_nodes, r.n_edges};
            if (std::find(order.begin(), order.end(), key) != order.end()) continue;
            order.push_back(key);
            std::vector<agctl::FsmBenchRecord> cell;
            for (const auto& c : records)
                if (c.n_nodes == key.first && c.n_edges == key.second) cell.push_back(c);
            rows.push_back(agctl::fsm_metrics(cell));
        }
        if (out_dir.empty()) {
            agctl::write_fsm_table(std::cout, rows, markdown);
        } else {
            std::ofstream out(fs::path(out_dir) /
                              (fs::path(path).stem().string() + ext));
            agctl::write_fsm_table(out, rows, markdown);
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FSM recovery benchmarks and thermal control episodes"};
    app.require_subcommand(1);

    ProviderOpts provider_opts;
    std::string out_dir = "out";
    std::string suite_dir;
    std::string config_path;
    std::uint64_t seed = 42;
    int parallel = 1;
    int budget = 5;

    auto* bench = app.add_subcommand("fsm-bench", "Run the planning benchmark suite");
    bench->add_option("--provider", provider_opts.kind, "oracle | scripted | openai")
        ->default_str("oracle");
    bench->add_option("--script", provider_opts.script, "JSONL script for scripted provider");
    bench->add_option("--model", provider_opts.model, "model name override");
    bench->add_option("--config", provider_opts.config_path, "provider config JSON");
    bench->add_option("--out", out_dir, "output directory");
    bench->add_option("--suite", suite_dir, "load an existing suite instead of generating");
    bench->add_option("--seed", seed, "suite seed");
    bench->add_option("--parallel", parallel, "worker count")->check(CLI::PositiveNumber);
    bench->add_option("--budget", budget, "reprompt budget")->check(CLI::NonNegativeNumber);

    std::string controller_kind = "pid";
    bool plot = false;
    auto* run = app.add_subcommand("control-run", "Run one control episode on the twin");
    run->add_option("--controller", controller_kind, "pid | llm | scripted | zero");
    run->add_option("--provider", provider_opts.kind, "scripted | openai (llm controller)");
    run->add_option("--script", provider_opts.script, "JSONL script");
    run->add_option("--model", provider_opts.model, "model name override");
    run->add_option("--config", config_path, "episode config JSON");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--plot", plot, "write an SVG plot of the episode");

    std::vector<std::string> episode_paths;
    std::vector<std::string> fsm_paths;
    bool markdown = false;
    auto* report = app.add_subcommand("report", "Render tables from saved logs");
    report->add_option("--episode", episode_paths, "episode.json files to compare");
    report->add_option("--fsm", fsm_paths, "records.jsonl files to aggregate");
    report->add_option("--out", out_dir, "output directory (stdout when omitted)")
        ->default_str("");
    report->add_flag("--markdown", markdown, "pipe tables instead of CSV");

    std::string prompts_dir = "prompts";
    auto* dump = app.add_subcommand("dump-prompts", "Write builtin agent templates as JSON");
    dump->add_option("--out", prompts_dir, "target directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed())
            return cmd_fsm_bench(provider_opts, out_dir, suite_dir, seed, parallel, budget);
        if (run->parsed()) {
            // report's --out defaults to stdout, the runner's to ./out
            return cmd_control_run(controller_kind, provider_opts, config_path, out_dir,
                                   plot);
        }
        if (report->parsed()) {
            const std::string report_out = report->count("--out") ? out_dir : "";
            return cmd_report(episode_paths, fsm_paths, report_out, markdown);
        }
        if (dump->parsed()) {
            fs::create_directories(prompts_dir);
            agctl::builtin_templates().dump(prompts_dir);
            std::cout << "wrote templates to " << prompts_dir << "\n";
            return kExitOk;
        }
    } catch (const agctl::TransportError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
