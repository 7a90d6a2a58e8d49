#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ffmedian/genome.hpp"

namespace ffmedian {

struct AlignmentHit {
    GeneId query;
    GeneId subject;
    double bitscore = 0.0;
    double evalue = 0.0;
};

struct FilterParams {
    double evalue_max = 1e-5;
    double f = 0.5;

    // Throws InputError when f is outside [0,1] or evalue_max is negative.
    void validate() const;
};

// Reads 12-column tabular alignment output (column 11 e-value, column 12
// bitscore); sequence ids are "genome:gene". Rows above evalue_max are
// dropped when a threshold is given. When a universe is given, ids outside it
// are rejected.
std::vector<AlignmentHit> parse_hits(std::istream& in, const std::string& source,
                                     std::optional<double> evalue_max = std::nullopt,
                                     const std::set<GeneId>* universe = nullptr);
std::vector<AlignmentHit> read_hits_file(const std::string& path, std::optional<double> evalue_max = std::nullopt,
                                         const std::set<GeneId>* universe = nullptr);

// Keeps a hit g->h iff bitscore(g->h) >= f * max over g' in genome(g) of
// bitscore(h->g'). Self hits are always kept. Input order is preserved.
std::vector<AlignmentHit> stringency_filter(const std::vector<AlignmentHit>& hits, double f);

// Relative reciprocal bitscore similarity:
//   (bs(g->h) + bs(h->g)) / (bs(g->g) + bs(h->h)), clamped to [0,1].
// A pair seen in one direction only counts that direction twice, unless
// require_reciprocal is set, in which case the pair is dropped.
SimilarityGraph rrbs_weights(const std::vector<AlignmentHit>& hits, bool require_reciprocal = false);

}  // namespace ffmedian
