#include "agctl/suite.hpp"

#include <atomic>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "agctl/errors.hpp"

namespace fs = std::filesystem;

namespace agctl {

std::vector<SuiteCell> default_suite() {
    return {{4, 4, 20},   {4, 6, 20},   {5, 10, 20},  {6, 15, 20},  {6, 20, 20},
            {10, 45, 20}, {12, 66, 20}, {15, 105, 20}, {20, 190, 20}, {25, 300, 20}};
}

std::vector<SuiteInstance> build_suite(const std::vector<SuiteCell>& cells,
                                       std::uint64_t seed) {
    std::vector<SuiteInstance> instances;
    std::uint64_t index = 0;
    for (const auto& cell : cells) {
        for (int k = 0; k < cell.instances; ++k, ++index) {
            SuiteInstance inst;
            inst.n_nodes = cell.n_nodes;
            inst.n_edges = cell.n_edges;
            inst.seed = derive_seed(seed, index);
            inst.fsm = generate_fsm(cell.n_nodes, cell.n_edges, inst.seed);
            std::tie(inst.start, inst.goal) =
                sample_benchmark_task(inst.fsm, derive_seed(inst.seed, 1));
            instances.push_back(std::move(inst));
        }
    }
    return instances;
}

void write_suite(const std::string& dir, const std::vector<SuiteInstance>& instances,
                 std::uint64_t seed) {
    fs::create_directories(dir);
    nlohmann::json manifest = {{"suite_seed", seed},
                               {"instances", nlohmann::json::array()}};
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        const std::string filename = fmt::format("fsm_{:04}.json", i);
        std::ofstream out(fs::path(dir) / filename);
        out << fsm_to_json(inst.fsm, inst.seed).dump(2) << "\n";
        manifest["instances"].push_back({{"file", filename},
                                         {"n_nodes", inst.n_nodes},
                                         {"n_edges", inst.n_edges},
                                         {"start", inst.start},
                                         {"goal", inst.goal},
                                         {"seed", inst.seed}});
    }
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
}

std::vector<SuiteInstance> load_suite(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw Error("cannot open suite manifest in " + dir);
    const auto manifest = nlohmann::json::parse(in);
    std::vector<SuiteInstance> instances;
    for (const auto& entry : manifest.at("instances")) {
        SuiteInstance inst;
        inst.n_nodes = entry.at("n_nodes").get<int>();
        inst.n_edges = entry.at("n_edges").get<int>();
        inst.start = entry.at("start").get<int>();
        inst.goal = entry.at("goal").get<int>();
        inst.seed = entry.at("seed").get<std::uint64_t>();
        std::ifstream fsm_in(fs::path(dir) / entry.at("file").get<std::string>());
        if (!fsm_in) throw Error("missing suite file " + entry.at("file").get<std::string>());
        inst.fsm = fsm_from_json(nlohmann::json::parse(fsm_in));
        instances.push_back(std::move(inst));
    }
    return instances;
}

SuiteResult run_fsm_suite(const std::vector<SuiteInstance>& instances,
                          const ProviderFactory& make_provider, int budget,
                          int parallelism, AuditLog* audit) {
    SuiteResult result;
    result.records.resize(instances.size());
    std::vector<PlanOutcome> outcomes(instances.size());
    std::vector<int> failed(instances.size(), 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            const auto& inst = instances[i];
            auto provider = make_provider(inst);
            FsmBenchRecord record;
            record.n_nodes = inst.n_nodes;
            record.n_edges = inst.n_edges;
            if (auto optimal = shortest_path(inst.fsm, inst.start, inst.goal))
                record.optimal_length = static_cast<int>(optimal->states.size()) - 1;
            try {
                // Per-instance latency comes from the provider exchanges.
                PlanOutcome outcome =
                    plan_recovery_path(*provider, inst.fsm, inst.start, inst.goal, budget);
                record.first_attempt_valid =
                    !outcome.attempts.empty() && outcome.attempts.front().report.valid;
                record.solved = outcome.success;
                record.reprompts = outcome.reprompts_used;
                if (outcome.success)
                    record.found_length =
                        static_cast<int>(outcome.final_path.states.size()) - 1;
                for (const auto& a : outcome.attempts) record.seconds += a.latency_s;
                outcomes[i] = std::move(outcome);
            } catch (const ProviderError&) {
                failed[i] = 1;
            }
            result.records[i] = std::move(record);
        }
    };

    const int n_workers = std::max(1, std::min<int>(parallelism,
                                                    static_cast<int>(instances.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    // Single-threaded reduce in suite order keeps the audit deterministic.
    for (std::size_t i = 0; i < instances.size(); ++i) {
        result.provider_failures += failed[i];
        if (audit && !failed[i]) {
            audit->append({{"kind", "instance"},
                           {"index", i},
                           {"n_nodes", instances[i].n_nodes},
                           {"n_edges", instances[i].n_edges},
                           {"start", instances[i].start},
                           {"goal", instances[i].goal},
                           {"outcome", outcomes[i].to_json()}});
        }
    }

    std::map<std::pair<int, int>, std::vector<FsmBenchRecord>> by_cell;
    std::vector<std::pair<int, int>> cell_order;
    for (const auto& r : result.records) {
        const auto key = std::make_pair(r.n_nodes, r.n_edges);
        if (!by_cell.count(key)) cell_order.push_back(key);
        by_cell[key].push_back(r);
    }
    for (const auto& key : cell_order) result.rows.push_back(fsm_metrics(by_cell[key]));
    return result;
}

std::unique_ptr<Provider> make_oracle_provider(const SuiteInstance& instance) {
    const Fsm fsm = instance.fsm;
    const int start = instance.start;
    const int goal = instance.goal;
    return std::make_unique<FunctionProvider>([fsm, start, goal](const CompletionRequest&) {
        const auto path = shortest_path(fsm, start, goal);
        if (!path) return std::string("False");
        std::ostringstream out;
        out << "True, the path is [";
        for (std::size_t i = 0; i < path->states.size(); ++i) {
            if (i) out << ", ";
            out << path->states[i];
        }
        out << "]";
        return out.str();
    });
}

}  // namespace agctl
