#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace agctl {

/// Directed graph over states 0..n_nodes-1, stored as an adjacency map with
/// every node present as a key. Successor lists keep insertion order.
struct Fsm {
    int n_nodes = 0;
    std::map<int, std::vector<int>> adjacency;

    int edge_count() const;
    bool has_edge(int from, int to) const;
};

struct PathPlan {
    std::vector<int> states;  // length >= 1; states[0] is the start
};

struct TraversalReport {
    bool valid = false;
    std::vector<int> executed_prefix;
    // index i such that states[i] -> states[i+1] is not an edge
    std::optional<int> first_invalid_index;
};

/// Random generation with the forced-connectivity cursor: while the edge
/// budget lasts, a descending cursor supplies the source node until every
/// node has been forced an outgoing edge, after which both endpoints are
/// sampled freely. Deterministic for a fixed seed.
Fsm generate_fsm(int n_nodes, int n_edges, std::uint64_t seed);

/// Total check of the Fsm invariants (no self-loops, no duplicate edges,
/// no disconnected node, ids in range). One human-readable descriptor per
/// violation; empty means valid.
std::vector<std::string> validate_structure(const Fsm& fsm);

TraversalReport traverse(const Fsm& fsm, const PathPlan& path);

/// BFS shortest path by edge count; successors expanded in ascending id
/// order so the returned path is deterministic. Absent when unreachable.
std::optional<PathPlan> shortest_path(const Fsm& fsm, int start, int goal);

/// Canonical dictionary rendering, e.g. "{0: [1, 2], 1: [2], 2: [0]}".
/// This exact text is injected into prompts.
std::string encode_as_dict_text(const Fsm& fsm);

/// Companion parser for encode_as_dict_text output. n_nodes is taken as
/// max mentioned id + 1 unless given explicitly.
Fsm parse_dict_text(const std::string& text, int n_nodes = -1);

/// Uniformly samples a distinct (start, goal) pair with goal reachable from
/// start. Resamples up to 50*N^2 times, then falls back to picking exactly
/// from the reachability closure.
std::pair<int, int> sample_benchmark_task(const Fsm& fsm, std::uint64_t seed);

bool is_reachable(const Fsm& fsm, int start, int goal);

nlohmann::json fsm_to_json(const Fsm& fsm, std::uint64_t seed);
Fsm fsm_from_json(const nlohmann::json& j);

/// splitmix64 step, used to derive per-instance seeds from a suite seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace agctl
