#include "ffmedian/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

namespace ffmedian {

CandidateSet::CandidateSet(std::array<std::string, genome_count> labels,
                           std::array<std::vector<std::string>, genome_count> gene_names,
                           std::array<std::vector<GenePosition>, genome_count> positions,
                           std::vector<CandidateGene> genes, std::vector<CandidateAdjacency> adjacencies)
    : labels_(std::move(labels)),
      gene_names_(std::move(gene_names)),
      positions_(std::move(positions)),
      genes_(std::move(genes)),
      adjacencies_(std::move(adjacencies)) {
    for (std::size_t x = 0; x < genome_count; ++x) {
        users_[x].assign(gene_names_[x].size(), {});
        for (std::uint32_t m = 0; m < genes_.size(); ++m) users_[x][genes_[m].genes[x]].push_back(m);
    }
    incident_.assign(2 * genes_.size(), {});
    for (std::uint32_t k = 0; k < adjacencies_.size(); ++k) {
        const auto& adj = adjacencies_[k];
        auto v1 = vertex(adj.m1, adj.a);
        auto v2 = vertex(adj.m2, adj.b);
        incident_[v1].push_back(k);
        if (v2 != v1) incident_[v2].push_back(k);
    }
}

bool CandidateSet::conflicting(std::uint32_t m1, std::uint32_t m2) const {
    if (m1 == m2) return false;
    const auto& a = genes_[m1].genes;
    const auto& b = genes_[m2].genes;
    return a[0] == b[0] || a[1] == b[1] || a[2] == b[2];
}

std::vector<std::uint32_t> CandidateSet::conflicts_of(std::uint32_t m) const {
    std::vector<std::uint32_t> out;
    for (std::size_t x = 0; x < genome_count; ++x)
        for (auto other : users_[x][genes_[m].genes[x]])
            if (other != m) out.push_back(other);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CandidateSet CandidateSet::subset(const std::vector<bool>& keep_gene, const std::vector<bool>& keep_adjacency,
                                  std::vector<std::uint32_t>* gene_map,
                                  std::vector<std::uint32_t>* adjacency_map) const {
    std::vector<std::uint32_t> renumber(genes_.size(), UINT32_MAX);
    std::vector<CandidateGene> genes;
    std::vector<std::uint32_t> gmap;
    for (std::uint32_t m = 0; m < genes_.size(); ++m) {
        if (!keep_gene[m]) continue;
        renumber[m] = static_cast<std::uint32_t>(genes.size());
        genes.push_back(genes_[m]);
        gmap.push_back(m);
    }
    std::vector<CandidateAdjacency> adjacencies;
    std::vector<std::uint32_t> amap;
    for (std::uint32_t k = 0; k < adjacencies_.size(); ++k) {
        const auto& adj = adjacencies_[k];
        if (!keep_adjacency[k] || renumber[adj.m1] == UINT32_MAX || renumber[adj.m2] == UINT32_MAX) continue;
        auto copy = adj;
        copy.m1 = renumber[adj.m1];
        copy.m2 = renumber[adj.m2];
        adjacencies.push_back(copy);
        amap.push_back(k);
    }
    if (gene_map) *gene_map = std::move(gmap);
    if (adjacency_map) *adjacency_map = std::move(amap);
    return CandidateSet(labels_, gene_names_, positions_, std::move(genes), std::move(adjacencies));
}

double adjacency_score(double sigma1, double sigma2) { return std::sqrt(sigma1 * sigma2); }

double median_adjacency_weight(double triple1, double triple2) { return std::pow(triple1 * triple2, 1.0 / 6.0); }

Instance make_instance(std::array<Genome, genome_count> genomes, SimilarityGraph sigma) {
    for (std::size_t x = 0; x < genome_count; ++x)
        for (std::size_t y = x + 1; y < genome_count; ++y)
            if (genomes[x].label() == genomes[y].label())
                throw InputError("genome label '" + genomes[x].label() + "' used twice");
    return Instance{std::move(genomes), std::move(sigma)};
}

namespace {

// Local-index similarity lookup for one ordered genome pair.
struct PairSimilarity {
    std::vector<std::vector<std::pair<GeneIndex, double>>> neighbours;  // indexed by gene of first genome
    std::unordered_map<std::uint64_t, double> lookup;

    double operator()(GeneIndex a, GeneIndex b) const {
        auto it = lookup.find((static_cast<std::uint64_t>(a) << 32) | b);
        return it == lookup.end() ? 0.0 : it->second;
    }
};

PairSimilarity pair_similarity(const Instance& instance, std::size_t x, std::size_t y) {
    const auto& gx = instance.genomes[x];
    const auto& gy = instance.genomes[y];
    PairSimilarity out;
    out.neighbours.assign(gx.gene_count(), {});
    for (const auto& e : instance.sigma.edges()) {
        const GeneId* ex = nullptr;
        const GeneId* ey = nullptr;
        if (e.a.genome == gx.label() && e.b.genome == gy.label()) {
            ex = &e.a;
            ey = &e.b;
        } else if (e.b.genome == gx.label() && e.a.genome == gy.label()) {
            ex = &e.b;
            ey = &e.a;
        } else {
            continue;
        }
        auto ix = gx.find(ex->name);
        auto iy = gy.find(ey->name);
        if (!ix || !iy) continue;
        out.neighbours[*ix].push_back({*iy, e.score});
        out.lookup[(static_cast<std::uint64_t>(*ix) << 32) | *iy] = e.score;
    }
    for (auto& list : out.neighbours) std::sort(list.begin(), list.end());
    return out;
}

}  // namespace

std::vector<CandidateGene> enumerate_candidates(const Instance& instance) {
    const auto& G = instance.genomes[0];
    const auto& H = instance.genomes[1];
    const auto& I = instance.genomes[2];
    auto gh = pair_similarity(instance, 0, 1);
    auto gi = pair_similarity(instance, 0, 2);
    auto hi = pair_similarity(instance, 1, 2);

    std::vector<CandidateGene> out;
    for (GeneIndex g = 0; g < G.gene_count(); ++g) {
        if (G.is_telomere(g)) continue;
        for (auto [h, s_gh] : gh.neighbours[g]) {
            for (auto [i, s_gi] : gi.neighbours[g]) {
                const double s_hi = hi(h, i);
                const double triple = s_gh * s_gi * s_hi;
                if (!(triple > 0.0)) continue;
                out.push_back({{g, h, i}, triple, std::cbrt(triple), false});
            }
        }
    }
    std::array<std::vector<GeneIndex>, genome_count> telomeres;
    for (std::size_t x = 0; x < genome_count; ++x)
        for (GeneIndex t = 0; t < instance.genomes[x].gene_count(); ++t)
            if (instance.genomes[x].is_telomere(t)) telomeres[x].push_back(t);
    for (auto tg : telomeres[0])
        for (auto th : telomeres[1])
            for (auto ti : telomeres[2]) out.push_back({{tg, th, ti}, 1.0, 1.0, true});

    auto key = [&](const CandidateGene& m) {
        return std::tie(G.gene_name(m.genes[0]), H.gene_name(m.genes[1]), I.gene_name(m.genes[2]));
    };
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return out;
}

std::vector<CandidateAdjacency> enumerate_conserved_adjacencies(const Instance& instance,
                                                                const std::vector<CandidateGene>& genes) {
    std::array<std::vector<std::vector<std::uint32_t>>, genome_count> users;
    for (std::size_t x = 0; x < genome_count; ++x) {
        users[x].assign(instance.genomes[x].gene_count(), {});
        for (std::uint32_t m = 0; m < genes.size(); ++m) users[x][genes[m].genes[x]].push_back(m);
    }
    auto conflicting = [&](std::uint32_t m1, std::uint32_t m2) {
        const auto& a = genes[m1].genes;
        const auto& b = genes[m2].genes;
        return m1 != m2 && (a[0] == b[0] || a[1] == b[1] || a[2] == b[2]);
    };

    // (vertex1, vertex2, genome bit)
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint8_t>> hits;
    for (std::size_t x = 0; x < genome_count; ++x) {
        const auto& genome = instance.genomes[x];
        for (const auto& pair : genome.adjacencies()) {
            const GeneIndex x1 = Genome::code_gene(pair.first);
            const GeneIndex x2 = Genome::code_gene(pair.second);
            if (genome.is_telomere(x1) && genome.is_telomere(x2)) continue;  // empty linear chromosome
            const End a = genome.extremity_end(pair.first);
            const End b = genome.extremity_end(pair.second);
            for (auto m1 : users[x][x1]) {
                for (auto m2 : users[x][x2]) {
                    if (x1 == x2 ? m1 != m2 : conflicting(m1, m2)) continue;
                    auto v1 = CandidateSet::vertex(m1, a);
                    auto v2 = CandidateSet::vertex(m2, b);
                    if (v1 > v2) std::swap(v1, v2);
                    hits.emplace_back(v1, v2, static_cast<std::uint8_t>(1u << x));
                }
            }
        }
    }
    std::sort(hits.begin(), hits.end());

    auto end_of = [&](std::uint32_t vertex) {
        const auto& m = genes[vertex / 2];
        if (m.telomere) return End::telomeric;
        return (vertex & 1u) ? End::head : End::tail;
    };
    std::vector<CandidateAdjacency> out;
    for (std::size_t k = 0; k < hits.size();) {
        auto [v1, v2, bit] = hits[k];
        std::uint8_t mask = 0;
        while (k < hits.size() && std::get<0>(hits[k]) == v1 && std::get<1>(hits[k]) == v2) {
            mask |= std::get<2>(hits[k]);
            ++k;
        }
        CandidateAdjacency adj;
        adj.m1 = v1 / 2;
        adj.a = end_of(v1);
        adj.m2 = v2 / 2;
        adj.b = end_of(v2);
        adj.conserved = mask;
        adj.factor = median_adjacency_weight(genes[adj.m1].triple_score, genes[adj.m2].triple_score);
        out.push_back(adj);
    }
    return out;
}

CandidateSet build_candidates(const Instance& instance) {
    auto genes = enumerate_candidates(instance);
    auto adjacencies = enumerate_conserved_adjacencies(instance, genes);
    std::array<std::string, genome_count> labels;
    std::array<std::vector<std::string>, genome_count> names;
    std::array<std::vector<GenePosition>, genome_count> positions;
    for (std::size_t x = 0; x < genome_count; ++x) {
        const auto& genome = instance.genomes[x];
        labels[x] = genome.label();
        for (GeneIndex g = 0; g < genome.gene_count(); ++g) {
            names[x].push_back(genome.gene_name(g));
            positions[x].push_back(genome.position(g));
        }
    }
    return CandidateSet(std::move(labels), std::move(names), std::move(positions), std::move(genes),
                        std::move(adjacencies));
}

PreprocessResult preprocess_discard_nonclique(const Instance& instance) {
    std::array<std::vector<bool>, genome_count> in_clique;
    for (std::size_t x = 0; x < genome_count; ++x) in_clique[x].assign(instance.genomes[x].gene_count(), false);
    for (const auto& m : enumerate_candidates(instance)) {
        if (m.telomere) continue;
        for (std::size_t x = 0; x < genome_count; ++x) in_clique[x][m.genes[x]] = true;
    }

    PreprocessResult result;
    std::set<GeneId> kept;
    for (std::size_t x = 0; x < genome_count; ++x) {
        const auto& genome = instance.genomes[x];
        auto specs = genome.specs();
        for (auto& spec : specs) {
            std::vector<OrientedGene> retained;
            for (auto& gene : spec.genes) {
                auto g = *genome.find(gene.name);
                if (in_clique[x][g]) {
                    kept.insert({genome.label(), gene.name});
                    retained.push_back(std::move(gene));
                } else {
                    result.removed.push_back({genome.label(), gene.name});
                }
            }
            spec.genes = std::move(retained);
        }
        result.instance.genomes[x] = Genome::build(genome.label(), specs);
    }
    std::vector<SimilarityEdge> edges;
    for (const auto& e : instance.sigma.edges())
        if (kept.count(e.a) && kept.count(e.b)) edges.push_back(e);
    result.instance.sigma = SimilarityGraph(std::move(edges));
    return result;
}

void write_candidates_tsv(std::ostream& out, const CandidateSet& candidates) {
    const auto& labels = candidates.labels();
    out << "#ffmedian candidates v1\n";
    out << "#gene\tindex\t" << labels[0] << '\t' << labels[1] << '\t' << labels[2]
        << "\ttriple_score\tgene_score\n";
    out << "#adjacency\tindex\tm1\tend1\tm2\tend2\tconserved_in\tfactor\tweight\n";
    for (std::uint32_t m = 0; m < candidates.size(); ++m) {
        const auto& gene = candidates.genes()[m];
        out << "gene\t" << m;
        for (std::size_t x = 0; x < genome_count; ++x) out << '\t' << candidates.extant_name(x, m);
        out << '\t' << format_double(gene.triple_score) << '\t' << format_double(gene.gene_score) << '\n';
    }
    for (std::uint32_t k = 0; k < candidates.adjacencies().size(); ++k) {
        const auto& adj = candidates.adjacencies()[k];
        std::string conserved;
        for (std::size_t x = 0; x < genome_count; ++x)
            if (adj.conserved & (1u << x)) conserved += (conserved.empty() ? "" : ",") + labels[x];
        out << "adjacency\t" << k << '\t' << adj.m1 << '\t' << end_letter(adj.a) << '\t' << adj.m2 << '\t'
            << end_letter(adj.b) << '\t' << conserved << '\t' << format_double(adj.factor) << '\t'
            << format_double(adj.weight()) << '\n';
    }
}

}  // namespace ffmedian
