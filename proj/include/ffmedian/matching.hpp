#pragma once

#include <cstddef>
#include <cstdint>
#include <tuple>
#include <vector>

namespace ffmedian {

struct MatchEdge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    double weight = 0.0;
};

struct MatchGraph {
    std::size_t vertex_count = 0;
    std::vector<MatchEdge> edges;

    void add_edge(std::uint32_t u, std::uint32_t v, double weight) { edges.push_back({u, v, weight}); }
};

// Maximum-weight matching on a general graph (blossom algorithm with exact
// integer duals). Weights are mapped onto a 2^-41 grid first. Self-loops and
// edges of weight <= 0 never enter the matching; among parallel edges the
// heaviest (then lowest index) is used. Returns chosen edge indices, sorted.
std::vector<std::size_t> mwm(const MatchGraph& graph);

double matching_weight(const MatchGraph& graph, const std::vector<std::size_t>& chosen);

// Integer core: mate[v] is the partner vertex or -1.
std::vector<long> max_weight_matching(std::size_t vertex_count,
                                      const std::vector<std::tuple<long, long, std::int64_t>>& edges);

}  // namespace ffmedian
