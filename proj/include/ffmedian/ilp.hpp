#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ffmedian/candidates.hpp"

namespace ffmedian {

// b variable: one conserved candidate adjacency between a-variables.
struct IlpAdjacency {
    std::uint32_t a1 = 0;
    End end1 = End::tail;
    std::uint32_t a2 = 0;
    End end2 = End::tail;
    double coefficient = 0.0;

    bool self_loop() const { return a1 == a2; }
};

struct IlpRow {
    std::string name;
    std::vector<std::uint32_t> members;
};

// Program over a (candidate genes) and b (conserved candidate adjacencies).
// Index i of a/b matches the candidate set it was built from.
//   C.01  sum of a over the candidates of one extant gene <= 1
//   C.02  2 b - a1 - a2 <= 0, one per b
//   C.03  sum of b at one candidate extremity <= 1
struct IlpModel {
    std::vector<std::string> a_names;
    std::vector<std::string> b_names;
    std::vector<IlpAdjacency> b;
    std::array<std::vector<IlpRow>, genome_count> c01;  // rows per genome, members are a indices
    std::vector<IlpRow> c03;                             // members are b indices
    std::vector<std::array<std::uint32_t, genome_count>> a_rows;  // c01 row of each a, per genome

    std::size_t variable_count() const { return a_names.size() + b_names.size(); }
    std::size_t constraint_count() const;
    std::size_t size() const { return variable_count() + constraint_count(); }
};

// Replaces characters outside [A-Za-z0-9_.@] with '_'.
std::string lp_sanitize(const std::string& token);

IlpModel build_ilp(const CandidateSet& candidates);

// Standard LP text format; 12 significant digits.
void export_lp(std::ostream& out, const IlpModel& model);
void export_lp_file(const std::string& path, const IlpModel& model);

// Reads what export_lp writes.
IlpModel read_lp(std::istream& in);
IlpModel read_lp_file(const std::string& path);

std::string format_coefficient(double value);

}  // namespace ffmedian
