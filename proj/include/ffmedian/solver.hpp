#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffmedian/candidates.hpp"
#include "ffmedian/ilp.hpp"

namespace ffmedian {

inline constexpr double score_tolerance = 1e-9;

enum class SolveStatus { optimal, feasible, empty };

std::string to_string(SolveStatus status);

// Indices refer to the a (genes) and b (adjacencies) variables of the model,
// which match the candidate set the model was built from.
struct MedianSolution {
    SolveStatus status = SolveStatus::empty;
    std::vector<std::uint32_t> genes;
    std::vector<std::uint32_t> adjacencies;
    double objective = 0.0;
    double bound = 0.0;  // upper bound; equals objective when optimal
    std::size_t nodes = 0;
};

struct SolveOptions {
    double time_limit = 10800.0;  // seconds
    unsigned threads = 1;
    std::size_t max_open_nodes = 20'000'000;
};

// Exact branch-and-bound. Upper bounds come from maximum-weight matchings on
// the graph obtained by merging candidate extremities that share an extant
// extremity in one genome (the tightest of the three genomes is used).
// Independent components are solved separately; the result does not depend
// on the thread count. Throws std::runtime_error when the open-node cap is hit.
MedianSolution solve_branch_and_bound(const IlpModel& model, const SolveOptions& options = {});

// Enumerates every conflict-free gene subset and matches its extremities.
// With `forced`, only medians containing all forced adjacencies count.
// Throws std::length_error when the model has more than `cap` genes.
MedianSolution brute_force_median(const IlpModel& model, std::size_t cap = 12,
                                  const std::vector<std::uint32_t>* forced = nullptr);

// Best adjacency set for a fixed conflict-free gene set.
MedianSolution match_gene_set(const IlpModel& model, const std::vector<std::uint32_t>& genes);

// Sum of b coefficients.
double objective_of(const IlpModel& model, const std::vector<std::uint32_t>& adjacencies);

// Checks C.01-C.03 against the model; returns a description of the first
// violation.
std::optional<std::string> check_feasible(const IlpModel& model, const MedianSolution& solution);

// Potential of each a: best head plus best tail adjacency (or its self-loop).
std::vector<double> model_potentials(const IlpModel& model);

struct CarEntry {
    std::uint32_t gene = 0;
    bool forward = true;
};

struct Car {
    bool circular = false;
    std::vector<CarEntry> genes;
};

// Paths and cycles of the chosen adjacencies; no adjacency is added.
std::vector<Car> assemble_cars(const IlpModel& model, const MedianSolution& solution);

}  // namespace ffmedian
