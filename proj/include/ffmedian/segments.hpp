#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ffmedian/candidates.hpp"
#include "ffmedian/matching.hpp"
#include "ffmedian/solver.hpp"

namespace ffmedian {

// Edge k is conserved candidate adjacency k; vertex 2m / 2m+1 is the
// tail (or telomeric end) / head of candidate m.
MatchGraph build_gamma(const CandidateSet& candidates);

// Delta(m): best head adjacency plus best tail adjacency, or the weight of a
// self-loop adjacency if that is larger; telomeres use their single end.
double potential(const CandidateSet& candidates, std::uint32_t m);
std::vector<double> potentials(const CandidateSet& candidates);

enum class SegmentKind { ic_free, framed, run };

const char* to_string(SegmentKind kind);

struct Segment {
    std::vector<std::uint32_t> genes;  // in G reading order
    SegmentKind kind = SegmentKind::run;
    bool circular = false;
    std::vector<std::uint32_t> links;  // A(S): adjacency between genes[j] and genes[j+1] (and back to genes[0])
};

// Contiguity, IC-free, framed and run tests for an arbitrary gene set.
// Returns the strongest kind that applies.
std::optional<SegmentKind> classify_segment(const CandidateSet& candidates, const std::vector<std::uint32_t>& genes);

// Runs: chains of candidate genes linked by adjacencies conserved in all
// three genomes, split greedily at internal conflicts. Telomere candidates
// and single genes are never part of a run. Sorted by G position.
std::vector<Segment> detect_runs(const CandidateSet& candidates);

// Raised when a segment gene has more external conflicts than the cap.
class SegmentSkipped : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GammaPrime {
    MatchGraph graph;                         // vertices 2j / 2j+1 for segment gene j
    std::vector<std::uint32_t> adjacency_of;  // per edge: adjacency index, or conflict_edge
    static constexpr std::uint32_t conflict_edge = UINT32_MAX;
};

// w'(m): max total weight of a conflict-free subset of `conflicts`, where
// weights[j] belongs to conflicts[j]. Exact; throws SegmentSkipped above cap.
double conflict_weight(const CandidateSet& candidates, const std::vector<std::uint32_t>& conflicts,
                       const std::vector<double>& weights, std::size_t cap = 20);

// Gamma restricted to the segment plus one conflict edge per gene. Only
// candidates and adjacencies flagged alive are considered (all when empty).
GammaPrime build_gamma_prime(const CandidateSet& candidates, const Segment& segment, std::size_t cap = 20,
                             const std::vector<bool>& gene_alive = {}, const std::vector<bool>& adjacency_alive = {});

struct AcceptedSegment {
    std::vector<std::uint32_t> genes;
    std::vector<std::uint32_t> adjacencies;
    bool circular = false;
    double weight = 0.0;
};

struct IcfSegOptions {
    std::size_t conflict_cap = 20;
};

struct IcfSegResult {
    std::vector<AcceptedSegment> accepted;
    std::vector<std::uint32_t> accepted_genes;        // sorted
    std::vector<std::uint32_t> accepted_adjacencies;  // sorted
    double accepted_weight = 0.0;
    CandidateSet reduced;
    std::vector<std::uint32_t> gene_map;       // reduced -> original
    std::vector<std::uint32_t> adjacency_map;  // reduced -> original
    std::size_t examined = 0;
    std::size_t rejected = 0;
    std::size_t skipped = 0;
};

IcfSegResult icf_seg(const CandidateSet& candidates, const IcfSegOptions& options = {});

// Accepted adjacencies plus a solution of the reduced instance, in original
// indices.
MedianSolution merge_solution(const CandidateSet& candidates, const IcfSegResult& seg, const MedianSolution& reduced);

}  // namespace ffmedian
