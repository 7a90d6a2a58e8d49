#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ffmedian/candidates.hpp"
#include "ffmedian/ilp.hpp"
#include "ffmedian/solver.hpp"

namespace ffmedian {

// Simple undirected graph with maximum degree 3.
class BoundedGraph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;  // first < second

    BoundedGraph() = default;

    // Vertex labels: [A-Za-z0-9.-]+, unique. Throws InputError on loops,
    // repeated edges, unknown vertices or degree above 3.
    static BoundedGraph build(std::vector<std::string> vertices, std::vector<Edge> edges);

    std::size_t vertex_count() const { return vertices_.size(); }
    const std::vector<std::string>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::uint32_t>& neighbours(std::uint32_t v) const { return adjacency_[v]; }
    std::size_t degree(std::uint32_t v) const { return adjacency_[v].size(); }
    bool adjacent(std::uint32_t u, std::uint32_t v) const;
    bool independent(const std::vector<std::uint32_t>& set) const;

private:
    std::vector<std::string> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
};

// "u<TAB>v" per line; a line with a single label declares an isolated
// vertex. '#' starts a comment. Vertices keep their order of appearance.
BoundedGraph read_graph(std::istream& in, const std::string& source = "<stream>");
BoundedGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const BoundedGraph& graph);

// Small four-vertex graph: a, b, c, d with ab ad bc bd cd.
BoundedGraph example_graph();

// Erdos-Renyi G(n, p) redrawn until every degree is at most 3.
BoundedGraph random_bounded_graph(std::uint64_t seed, std::size_t n, double p);

// Proper edge colouring with colours 0..3, found by backtracking.
std::vector<int> edge_coloring(const BoundedGraph& graph);

struct ReductionInstance {
    BoundedGraph graph;
    Instance instance;
    // xi: extant gene name -> associated vertices, per genome (unassociated
    // genes are absent)
    std::array<std::map<std::string, std::vector<std::uint32_t>>, genome_count> association;
    std::vector<int> colors;  // per edge; 0,1 -> I and 2,3 -> H

    const std::vector<std::uint32_t>& xi(std::size_t x, const std::string& gene) const;
};

ReductionInstance reduce_mis(const BoundedGraph& graph);

// Vertices of G-conserved chosen adjacencies between associated genes.
// Sorted, without duplicates.
std::vector<std::uint32_t> backmap_solution(const ReductionInstance& reduction, const CandidateSet& candidates,
                                            const MedianSolution& solution);

// Exact MIS size. Throws std::length_error above `cap` vertices.
std::size_t mis_bruteforce(const BoundedGraph& graph, std::size_t cap = 24);

// Instance directory: graph.tsv, genomes.tsv, similarities.tsv, association.tsv.
void write_reduction(const ReductionInstance& reduction, const std::string& dir);
ReductionInstance read_reduction(const std::string& dir);

struct ReductionCheck {
    std::size_t mis = 0;
    MedianSolution median;
    double score = 0.0;  // objective / 2 - 3
    std::vector<std::uint32_t> backmapped;
    bool independent = false;
    bool star_adjacencies = false;  // both X* adjacencies chosen
    bool associations = false;      // chosen genes consistent with xi, at most two unassociated
    bool holds() const;
};

ReductionCheck verify_reduction(const ReductionInstance& reduction, const SolveOptions& options = {});

}  // namespace ffmedian
