#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agctl/fsm.hpp"
#include "agctl/metrics.hpp"
#include "agctl/pipeline.hpp"
#include "agctl/provider.hpp"

namespace agctl {

struct SuiteCell {
    int n_nodes = 0;
    int n_edges = 0;
    int instances = 20;
};

/// The ten benchmark cells, 20 instances each (200 total).
std::vector<SuiteCell> default_suite();

struct SuiteInstance {
    int n_nodes = 0;
    int n_edges = 0;
    std::uint64_t seed = 0;
    Fsm fsm;
    int start = 0;
    int goal = 0;
};

/// Materializes a suite deterministically: per-instance seeds derive from
/// the suite seed, tasks are sampled reachable pairs.
std::vector<SuiteInstance> build_suite(const std::vector<SuiteCell>& cells,
                                       std::uint64_t seed);

/// On-disk layout: one FSM JSON file per instance plus manifest.json naming
/// (file, start, goal, seed) per instance.
void write_suite(const std::string& dir, const std::vector<SuiteInstance>& instances,
                 std::uint64_t seed);
std::vector<SuiteInstance> load_suite(const std::string& dir);

using ProviderFactory = std::function<std::unique_ptr<Provider>(const SuiteInstance&)>;

struct SuiteResult {
    std::vector<FsmBenchRecord> records;  // one per instance, suite order
    std::vector<FsmCellRow> rows;         // aggregated per cell
    int provider_failures = 0;
};

/// Runs plan_recovery_path over every instance, fanning out across at most
/// `parallelism` workers. Records and audit entries come back in suite
/// order regardless of scheduling.
SuiteResult run_fsm_suite(const std::vector<SuiteInstance>& instances,
                          const ProviderFactory& make_provider, int budget,
                          int parallelism, AuditLog* audit = nullptr);

/// Provider that answers traversal prompts with the BFS oracle's path for
/// the instance it is bound to (closure testing: accuracy 1.0, deviation 0).
std::unique_ptr<Provider> make_oracle_provider(const SuiteInstance& instance);

}  // namespace agctl
