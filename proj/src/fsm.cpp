#include "agctl/fsm.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <random>
#include <set>
#include <sstream>

#include "agctl/errors.hpp"

namespace agctl {

int Fsm::edge_count() const {
    int n = 0;
    for (const auto& [_, succ] : adjacency) n += static_cast<int>(succ.size());
    return n;
}

bool Fsm::has_edge(int from, int to) const {
    auto it = adjacency.find(from);
    if (it == adjacency.end()) return false;
    return std::find(it->second.begin(), it->second.end(), to) != it->second.end();
}

namespace {

int sample_node(std::mt19937_64& rng, int n) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

// One pass of the generation loop. Returns false if the iteration cap is hit
// before the edge budget is filled.
bool generate_once(std::mt19937_64& rng, int n_nodes, int n_edges, Fsm& out) {
    out.n_nodes = n_nodes;
    out.adjacency.clear();
    for (int i = 0; i < n_nodes; ++i) out.adjacency[i] = {};

    int edges = 0;
    int non_connected = n_nodes - 1;
    bool flag = false;
    const long long cap = 1000LL * n_edges;
    long long iterations = 0;

    while (edges < n_edges) {
        if (++iterations > cap) return false;
        // the cursor only exists to guarantee an out-edge per node; skip
        // nodes that already picked one up from free sampling, otherwise a
        // node with a full out-star can pin the loop on duplicates
        while (non_connected >= 0 && !out.adjacency[non_connected].empty())
            --non_connected;
        const int j = sample_node(rng, n_nodes);
        int i;
        if (non_connected >= 0 && non_connected != j) {
            i = non_connected;  // force an edge out of this node
            flag = true;
        } else {
            i = sample_node(rng, n_nodes);
        }
        if (i != j && !out.has_edge(i, j)) {
            out.adjacency[i].push_back(j);
            ++edges;
            if (flag) {
                --non_connected;
            }
        }
        flag = false;
    }
    return true;
}

}  // namespace

Fsm generate_fsm(int n_nodes, int n_edges, std::uint64_t seed) {
    if (n_nodes < 2) throw InfeasibleGraph("need at least 2 nodes");
    const long long max_edges = static_cast<long long>(n_nodes) * (n_nodes - 1);
    if (n_edges > max_edges)
        throw InfeasibleGraph("edge budget exceeds n*(n-1)");
    if (n_edges < (n_nodes + 1) / 2)
        throw InfeasibleGraph("too few edges to touch every node");

    std::mt19937_64 rng(seed);
    // Small edge budgets can exhaust before the cursor reaches node 0; in
    // that case some low node may stay untouched. Retry the whole pass on
    // the same stream so the result stays deterministic per seed.
    for (int attempt = 0; attempt < 100; ++attempt) {
        Fsm fsm;
        if (!generate_once(rng, n_nodes, n_edges, fsm))
            throw GenerationStalled("edge rejection loop exceeded 1000*R iterations");
        if (validate_structure(fsm).empty()) return fsm;
    }
    throw GenerationStalled("could not produce a fully connected graph in 100 passes");
}

std::vector<std::string> validate_structure(const Fsm& fsm) {
    std::vector<std::string> violations;
    std::vector<bool> incident(std::max(fsm.n_nodes, 0), false);
    for (const auto& [from, succ] : fsm.adjacency) {
        if (from < 0 || from >= fsm.n_nodes) {
            violations.push_back("node id out of range: " + std::to_string(from));
            continue;
        }
        std::set<int> seen;
        for (int to : succ) {
            if (to < 0 || to >= fsm.n_nodes) {
                violations.push_back("edge target out of range: " + std::to_string(from) +
                                     "->" + std::to_string(to));
                continue;
            }
            if (to == from)
                violations.push_back("self-loop at " + std::to_string(from));
            if (!seen.insert(to).second)
                violations.push_back("duplicate edge " + std::to_string(from) + "->" +
                                     std::to_string(to));
            incident[from] = true;
            incident[to] = true;
        }
    }
    for (int i = 0; i < fsm.n_nodes; ++i) {
        if (!incident[i])
            violations.push_back("node " + std::to_string(i) + " disconnected");
    }
    return violations;
}

TraversalReport traverse(const Fsm& fsm, const PathPlan& path) {
    for (int s : path.states) {
        if (s < 0 || s >= fsm.n_nodes)
            throw UnknownState("state " + std::to_string(s) + " out of range");
    }
    TraversalReport report;
    if (path.states.empty()) {
        report.valid = false;
        return report;
    }
    report.executed_prefix.push_back(path.states.front());
    for (std::size_t i = 0; i + 1 < path.states.size(); ++i) {
        if (!fsm.has_edge(path.states[i], path.states[i + 1])) {
            report.valid = false;
            report.first_invalid_index = static_cast<int>(i);
            return report;
        }
        report.executed_prefix.push_back(path.states[i + 1]);
    }
    report.valid = true;
    return report;
}

std::optional<PathPlan> shortest_path(const Fsm& fsm, int start, int goal) {
    if (start < 0 || start >= fsm.n_nodes || goal < 0 || goal >= fsm.n_nodes)
        throw UnknownState("start/goal out of range");
    if (start == goal) return PathPlan{{start}};

    std::vector<int> parent(fsm.n_nodes, -1);
    std::vector<bool> visited(fsm.n_nodes, false);
    std::deque<int> queue{start};
    visited[start] = true;
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        auto it = fsm.adjacency.find(cur);
        if (it == fsm.adjacency.end()) continue;
        std::vector<int> succ = it->second;
        std::sort(succ.begin(), succ.end());  // deterministic tie-break
        for (int next : succ) {
            if (visited[next]) continue;
            visited[next] = true;
            parent[next] = cur;
            if (next == goal) {
                std::vector<int> states{goal};
                for (int s = goal; s != start; s = parent[s]) states.push_back(parent[s]);
                std::reverse(states.begin(), states.end());
                return PathPlan{std::move(states)};
            }
            queue.push_back(next);
        }
    }
    return std::nullopt;
}

std::string encode_as_dict_text(const Fsm& fsm) {
    std::ostringstream out;
    out << "{";
    bool first_key = true;
    for (const auto& [node, succ] : fsm.adjacency) {
        if (!first_key) out << ", ";
        first_key = false;
        out << node << ": [";
        for (std::size_t i = 0; i < succ.size(); ++i) {
            if (i) out << ", ";
            out << succ[i];
        }
        out << "]";
    }
    out << "}";
    return out.str();
}

Fsm parse_dict_text(const std::string& text, int n_nodes) {
    Fsm fsm;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto expect = [&](char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            throw ParseFailure(std::string("expected '") + c + "' in dict text", text);
        ++pos;
    };
    auto read_int = [&]() -> int {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) throw ParseFailure("expected integer in dict text", text);
        return std::stoi(text.substr(start, pos - start));
    };

    expect('{');
    skip_ws();
    int max_id = -1;
    if (pos < text.size() && text[pos] == '}') {
        ++pos;
    } else {
        while (true) {
            const int key = read_int();
            max_id = std::max(max_id, key);
            expect(':');
            expect('[');
            std::vector<int> succ;
            skip_ws();
            if (pos < text.size() && text[pos] == ']') {
                ++pos;
            } else {
                while (true) {
                    const int v = read_int();
                    max_id = std::max(max_id, v);
                    succ.push_back(v);
                    skip_ws();
                    if (pos < text.size() && text[pos] == ',') { ++pos; continue; }
                    expect(']');
                    break;
                }
            }
            fsm.adjacency[key] = std::move(succ);
            skip_ws();
            if (pos < text.size() && text[pos] == ',') { ++pos; continue; }
            expect('}');
            break;
        }
    }
    fsm.n_nodes = n_nodes >= 0 ? n_nodes : max_id + 1;
    for (int i = 0; i < fsm.n_nodes; ++i)
        if (!fsm.adjacency.count(i)) fsm.adjacency[i] = {};
    return fsm;
}

bool is_reachable(const Fsm& fsm, int start, int goal) {
    if (start < 0 || start >= fsm.n_nodes || goal < 0 || goal >= fsm.n_nodes)
        throw UnknownState("start/goal out of range");
    if (start == goal) return true;
    std::vector<bool> visited(fsm.n_nodes, false);
    std::deque<int> queue{start};
    visited[start] = true;
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        auto it = fsm.adjacency.find(cur);
        if (it == fsm.adjacency.end()) continue;
        for (int next : it->second) {
            if (next == goal) return true;
            if (!visited[next]) {
                visited[next] = true;
                queue.push_back(next);
            }
        }
    }
    return false;
}

std::pair<int, int> sample_benchmark_task(const Fsm& fsm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = fsm.n_nodes;
    const long long bound = 50LL * n * n;
    for (long long k = 0; k < bound; ++k) {
        const int start = sample_node(rng, n);
        const int goal = sample_node(rng, n);
        if (start != goal && is_reachable(fsm, start, goal)) return {start, goal};
    }
    // Sparse graph: enumerate the closure and pick exactly.
    std::vector<std::pair<int, int>> reachable;
    for (int s = 0; s < n; ++s)
        for (int g = 0; g < n; ++g)
            if (s != g && is_reachable(fsm, s, g)) reachable.emplace_back(s, g);
    if (reachable.empty()) throw NoReachablePair("no ordered pair is reachable");
    return reachable[rng() % reachable.size()];
}

nlohmann::json fsm_to_json(const Fsm& fsm, std::uint64_t seed) {
    nlohmann::json adj = nlohmann::json::object();
    for (const auto& [node, succ] : fsm.adjacency) adj[std::to_string(node)] = succ;
    return {{"n_nodes", fsm.n_nodes}, {"adjacency", adj}, {"seed", seed}};
}

Fsm fsm_from_json(const nlohmann::json& j) {
    Fsm fsm;
    fsm.n_nodes = j.at("n_nodes").get<int>();
    for (int i = 0; i < fsm.n_nodes; ++i) fsm.adjacency[i] = {};
    for (const auto& [key, value] : j.at("adjacency").items())
        fsm.adjacency[std::stoi(key)] = value.get<std::vector<int>>();
    return fsm;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace agctl
