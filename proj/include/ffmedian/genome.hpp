#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ffmedian {

// Raised for malformed inputs (files, chromosome lists, unknown ids).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using GeneIndex = std::uint32_t;

enum class End : std::uint8_t { tail = 0, head = 1, telomeric = 2 };

char end_letter(End end);

// Telomere names are generated as "@<chromosome id>.L" / ".R"; gene names may
// not start with this character.
inline constexpr char telomere_marker = '@';

struct GeneId {
    std::string genome;
    std::string name;

    bool is_telomere() const { return !name.empty() && name.front() == telomere_marker; }
    std::string str() const { return genome + ":" + name; }

    auto operator<=>(const GeneId&) const = default;
};

// Parses "label:name" (split at the first ':').
GeneId parse_gene_id(std::string_view token);

struct Extremity {
    GeneId gene;
    End end = End::tail;
};

enum class Shape : std::uint8_t { linear, circular };

struct OrientedGene {
    std::string name;
    bool forward = true;
};

// Chromosome as supplied by the user: no telomere entries.
struct ChromosomeSpec {
    std::string id;
    Shape shape = Shape::linear;
    std::vector<OrientedGene> genes;
};

// Chromosome as stored in a Genome: linear chromosomes carry their two
// telomeres as first and last entries.
struct Chromosome {
    std::string id;
    Shape shape = Shape::linear;
    std::vector<GeneIndex> order;
    std::vector<bool> forward;
};

struct GenePosition {
    std::uint32_t chromosome = 0;
    std::uint32_t offset = 0;
    bool forward = true;
};

// An adjacency between two extremity codes, stored with first <= second.
struct ExtremityPair {
    std::uint32_t first = 0;
    std::uint32_t second = 0;
    auto operator<=>(const ExtremityPair&) const = default;
};

class Genome {
public:
    // Extremity code of gene g: 2g for the tail (or the telomeric end), 2g+1
    // for the head.
    static std::uint32_t code(GeneIndex gene, End end) {
        return 2 * gene + (end == End::head ? 1u : 0u);
    }
    static GeneIndex code_gene(std::uint32_t code) { return code / 2; }

    static constexpr std::uint32_t no_partner = UINT32_MAX;

    static Genome build(std::string label, const std::vector<ChromosomeSpec>& chromosomes);

    const std::string& label() const { return label_; }
    const std::vector<Chromosome>& chromosomes() const { return chromosomes_; }
    std::size_t gene_count() const { return names_.size(); }
    const std::string& gene_name(GeneIndex g) const { return names_[g]; }
    GeneId gene_id(GeneIndex g) const { return {label_, names_[g]}; }
    bool is_telomere(GeneIndex g) const { return names_[g].front() == telomere_marker; }
    const GenePosition& position(GeneIndex g) const { return positions_[g]; }
    End extremity_end(std::uint32_t code) const;

    std::optional<GeneIndex> find(std::string_view name) const;

    // Partner of an extremity code in A(X), or no_partner.
    std::uint32_t partner(std::uint32_t code) const { return partner_[code]; }
    bool adjacent(GeneIndex g1, End a, GeneIndex g2, End b) const {
        return partner_[code(g1, a)] == code(g2, b);
    }

    // Indicator of {e1, e2} in A(X). Throws std::domain_error for extremities
    // that do not belong to this genome.
    int indicator(const Extremity& e1, const Extremity& e2) const;

    // All adjacencies, each unordered pair once, sorted.
    std::vector<ExtremityPair> adjacencies() const;

    // Canonical rebuild input (telomeres stripped).
    std::vector<ChromosomeSpec> specs() const;

private:
    std::uint32_t checked_code(const Extremity& e) const;

    std::string label_;
    std::vector<Chromosome> chromosomes_;
    std::vector<std::string> names_;
    std::vector<GenePosition> positions_;
    std::vector<std::uint32_t> partner_;
    std::unordered_map<std::string, GeneIndex> index_;
};

// Genome files: "label<TAB>chromosome<TAB>linear|circular<TAB>+a -b ...".
// Genomes are returned in order of first appearance.
std::vector<Genome> read_genomes(std::istream& in, const std::string& source = "<stream>");
std::vector<Genome> read_genome_file(const std::string& path);
void write_genome(std::ostream& out, const Genome& genome);

struct SimilarityEdge {
    GeneId a;
    GeneId b;
    double score = 0.0;
};

// Symmetric cross-genome similarity. Telomere pairs are implicit: 1 across
// genomes, 0 against genes.
class SimilarityGraph {
public:
    SimilarityGraph() = default;
    explicit SimilarityGraph(std::vector<SimilarityEdge> edges);

    double operator()(const GeneId& x, const GeneId& y) const;

    // Stored edges, canonical (a < b), sorted, all scores > 0.
    const std::vector<SimilarityEdge>& edges() const { return edges_; }
    std::size_t size() const { return edges_.size(); }

private:
    std::vector<SimilarityEdge> edges_;
    std::map<std::pair<GeneId, GeneId>, double> lookup_;
};

SimilarityGraph read_similarity(std::istream& in, const std::string& source = "<stream>");
SimilarityGraph read_similarity_file(const std::string& path);
void write_similarity(std::ostream& out, const SimilarityGraph& graph);

// Shortest decimal representation that round-trips.
std::string format_double(double value);

}  // namespace ffmedian
