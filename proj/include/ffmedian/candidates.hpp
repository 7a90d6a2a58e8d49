#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ffmedian/genome.hpp"

namespace ffmedian {

inline constexpr std::size_t genome_count = 3;

// Three extant genomes G, H, I with their similarity graph.
struct Instance {
    std::array<Genome, genome_count> genomes;
    SimilarityGraph sigma;
};

struct CandidateGene {
    std::array<GeneIndex, genome_count> genes{};  // extant gene per genome
    double triple_score = 0.0;                    // sigma(g,h) * sigma(g,i) * sigma(h,i)
    double gene_score = 0.0;                      // cube root of triple_score
    bool telomere = false;
};

struct CandidateAdjacency {
    std::uint32_t m1 = 0;
    End a = End::tail;
    std::uint32_t m2 = 0;
    End b = End::tail;
    std::uint8_t conserved = 0;  // bit X set when the projection is adjacent in genome X
    double factor = 0.0;         // sixth root of triple_score(m1) * triple_score(m2)

    int multiplicity() const { return std::popcount(conserved); }
    double weight() const { return factor * multiplicity(); }
    bool self_loop() const { return m1 == m2; }
};

// Candidate median genes and conserved candidate adjacencies, with the
// extant-gene bookkeeping needed to name, project, and check conflicts.
class CandidateSet {
public:
    CandidateSet() = default;
    CandidateSet(std::array<std::string, genome_count> labels,
                 std::array<std::vector<std::string>, genome_count> gene_names,
                 std::array<std::vector<GenePosition>, genome_count> positions,
                 std::vector<CandidateGene> genes, std::vector<CandidateAdjacency> adjacencies);

    const std::array<std::string, genome_count>& labels() const { return labels_; }
    const std::vector<std::string>& gene_names(std::size_t x) const { return gene_names_[x]; }
    const std::vector<GenePosition>& positions(std::size_t x) const { return positions_[x]; }
    const std::vector<CandidateGene>& genes() const { return genes_; }
    const std::vector<CandidateAdjacency>& adjacencies() const { return adjacencies_; }
    std::size_t size() const { return genes_.size(); }

    const std::string& extant_name(std::size_t x, std::uint32_t m) const {
        return gene_names_[x][genes_[m].genes[x]];
    }

    // Candidate-extremity vertex: 2m for tail / telomeric end, 2m+1 for head.
    static std::uint32_t vertex(std::uint32_t m, End end) { return 2 * m + (end == End::head ? 1u : 0u); }

    bool conflicting(std::uint32_t m1, std::uint32_t m2) const;
    // Candidates sharing extant gene g of genome x.
    const std::vector<std::uint32_t>& users(std::size_t x, GeneIndex g) const { return users_[x][g]; }
    // All candidates conflicting with m, sorted.
    std::vector<std::uint32_t> conflicts_of(std::uint32_t m) const;
    // Adjacency indices incident to a candidate-extremity vertex.
    const std::vector<std::uint32_t>& incident(std::uint32_t vertex) const { return incident_[vertex]; }

    // Restriction to the kept candidates and adjacencies (adjacencies whose
    // endpoints are dropped are discarded). Maps give new -> old indices.
    CandidateSet subset(const std::vector<bool>& keep_gene, const std::vector<bool>& keep_adjacency,
                        std::vector<std::uint32_t>* gene_map = nullptr,
                        std::vector<std::uint32_t>* adjacency_map = nullptr) const;

private:
    std::array<std::string, genome_count> labels_;
    std::array<std::vector<std::string>, genome_count> gene_names_;
    std::array<std::vector<GenePosition>, genome_count> positions_;
    std::vector<CandidateGene> genes_;
    std::vector<CandidateAdjacency> adjacencies_;
    std::array<std::vector<std::vector<std::uint32_t>>, genome_count> users_;
    std::vector<std::vector<std::uint32_t>> incident_;
};

// sqrt(sigma1 * sigma2)
double adjacency_score(double sigma1, double sigma2);

// (triple1 * triple2)^(1/6)
double median_adjacency_weight(double triple1, double triple2);

// Candidate median genes (tripartite triangles plus telomere triples), sorted
// by extant gene names; no adjacencies.
std::vector<CandidateGene> enumerate_candidates(const Instance& instance);

// Conserved candidate adjacencies over the given candidates, sorted by
// (m1, a, m2, b).
std::vector<CandidateAdjacency> enumerate_conserved_adjacencies(const Instance& instance,
                                                                const std::vector<CandidateGene>& genes);

// Both enumeration steps.
CandidateSet build_candidates(const Instance& instance);

struct PreprocessResult {
    Instance instance;
    std::vector<GeneId> removed;
};

// Splices out extant genes that belong to no triangle; their neighbours
// become adjacent. Telomeres are kept.
PreprocessResult preprocess_discard_nonclique(const Instance& instance);

// Checks labels are distinct. Throws InputError otherwise.
Instance make_instance(std::array<Genome, genome_count> genomes, SimilarityGraph sigma);

void write_candidates_tsv(std::ostream& out, const CandidateSet& candidates);

}  // namespace ffmedian
