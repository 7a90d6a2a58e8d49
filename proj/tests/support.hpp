#pragma once

// Shared helpers for the test binaries: tiny instance builders, random
// instance generators and first-principles recomputations.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ffmedian/candidates.hpp"
#include "ffmedian/genome.hpp"
#include "ffmedian/ilp.hpp"
#include "ffmedian/solver.hpp"

namespace support {

using namespace ffmedian;

// Lines of "label<TAB>chr<TAB>shape<TAB>genes"; '|' may stand for TAB.
inline std::vector<Genome> genomes_from(std::string text) {
    std::replace(text.begin(), text.end(), '|', '\t');
    std::istringstream in(text);
    return read_genomes(in, "<test>");
}

inline Genome genome_from(const std::string& text) { return genomes_from(text).at(0); }

// "G:a H:b 0.5" triples separated by ';'.
inline SimilarityGraph sigma_from(const std::string& text) {
    std::vector<SimilarityEdge> edges;
    std::istringstream in(text);
    std::string chunk;
    while (std::getline(in, chunk, ';')) {
        std::istringstream words(chunk);
        std::string a, b;
        double s = 0.0;
        if (!(words >> a >> b >> s)) continue;
        edges.push_back({parse_gene_id(a), parse_gene_id(b), s});
    }
    return SimilarityGraph(std::move(edges));
}

inline Instance instance_from(const std::string& genomes_text, const std::string& sigma_text) {
    auto gs = genomes_from(genomes_text);
    return make_instance({gs.at(0), gs.at(1), gs.at(2)}, sigma_from(sigma_text));
}

struct RandomShape {
    int min_genes = 3;
    int max_genes = 6;
    double edge_probability = 0.35;
    double linear_probability = 0.3;  // per genome: one linear chromosome
    bool unit_scores = false;
};

inline std::vector<ChromosomeSpec> random_chromosomes(std::mt19937_64& rng, const std::vector<std::string>& names,
                                                      bool with_linear) {
    std::vector<std::string> order = names;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ChromosomeSpec> specs;
    std::size_t pos = 0;
    int id = 0;
    while (pos < order.size()) {
        std::size_t len = 1 + rng() % order.size();
        len = std::min(len, order.size() - pos);
        ChromosomeSpec spec;
        spec.id = "c" + std::to_string(++id);
        spec.shape = Shape::circular;
        for (std::size_t k = 0; k < len; ++k) spec.genes.push_back({order[pos + k], rng() % 2 == 0});
        pos += len;
        specs.push_back(std::move(spec));
    }
    if (with_linear) specs.front().shape = Shape::linear;
    return specs;
}

inline Instance random_instance(std::mt19937_64& rng, const RandomShape& shape = {}) {
    std::array<std::string, 3> labels{"G", "H", "I"};
    std::array<Genome, 3> genomes;
    std::array<std::vector<std::string>, 3> names;
    for (std::size_t x = 0; x < 3; ++x) {
        int n = shape.min_genes + static_cast<int>(rng() % (shape.max_genes - shape.min_genes + 1));
        for (int g = 0; g < n; ++g) names[x].push_back(std::string(1, static_cast<char>('a' + x * 8)) + std::to_string(g));
        bool linear = std::uniform_real_distribution<double>(0, 1)(rng) < shape.linear_probability;
        genomes[x] = Genome::build(labels[x], random_chromosomes(rng, names[x], linear));
    }
    std::vector<SimilarityEdge> edges;
    const double levels[] = {0.25, 0.5, 0.75, 1.0};
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = x + 1; y < 3; ++y)
            for (const auto& a : names[x])
                for (const auto& b : names[y])
                    if (std::uniform_real_distribution<double>(0, 1)(rng) < shape.edge_probability) {
                        double s = shape.unit_scores ? 1.0
                                   : rng() % 2 ? levels[rng() % 4]
                                               : std::uniform_real_distribution<double>(0.05, 1.0)(rng);
                        edges.push_back({{labels[x], a}, {labels[y], b}, s});
                    }
    return make_instance(genomes, SimilarityGraph(std::move(edges)));
}

// Random instance whose candidate count lies in [1, max_candidates].
inline Instance random_small_instance(std::mt19937_64& rng, std::size_t max_candidates, const RandomShape& shape = {}) {
    while (true) {
        auto inst = random_instance(rng, shape);
        auto count = enumerate_candidates(inst).size();
        if (count >= 1 && count <= max_candidates) return inst;
    }
}

struct Evolution {
    int genes = 6;               // ancestral genes
    int chromosomes = 1;
    double linear_probability = 0.0;  // per ancestral chromosome
    int inversions = 1;          // per extant genome
    double loss_probability = 0.0;
    double paralog_probability = 0.1;  // per ancestral gene and genome: extra copy
    double noise_probability = 0.02;   // per cross-genome gene pair
    double noise_max = 0.3;
};

struct Truth {
    // ancestral gene index of every extant gene, or -1 for none (noise-free copies keep it)
    std::array<std::map<std::string, int>, 3> origin;
};

// Extant genomes derived from one ancestor by inversions, losses and tandem
// paralogs; orthologs (and paralogs) get high similarity, plus weak noise.
inline Instance evolved_instance(std::mt19937_64& rng, const Evolution& ev, Truth* truth = nullptr) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<std::string, 3> labels{"G", "H", "I"};
    std::array<Genome, 3> genomes;
    std::array<std::vector<std::pair<std::string, int>>, 3> members;  // name, ancestor
    for (std::size_t x = 0; x < 3; ++x) {
        std::vector<ChromosomeSpec> specs;
        std::vector<std::vector<std::pair<int, bool>>> chroms(ev.chromosomes);
        for (int g = 0; g < ev.genes; ++g) chroms[g * ev.chromosomes / ev.genes].push_back({g, true});
        for (int k = 0; k < ev.inversions; ++k) {
            auto& c = chroms[rng() % chroms.size()];
            if (c.empty()) continue;
            std::size_t a = rng() % c.size(), b = rng() % c.size();
            if (a > b) std::swap(a, b);
            std::reverse(c.begin() + a, c.begin() + b + 1);
            for (std::size_t j = a; j <= b; ++j) c[j].second = !c[j].second;
        }
        int id = 0;
        for (std::size_t ci = 0; ci < chroms.size(); ++ci) {
            ChromosomeSpec spec;
            spec.id = "c" + std::to_string(++id);
            std::mt19937_64 shape_rng(ci * 7919 + 17);
            spec.shape = std::uniform_real_distribution<double>(0, 1)(shape_rng) < ev.linear_probability ? Shape::linear
                                                                                                         : Shape::circular;
            for (auto [g, fwd] : chroms[ci]) {
                if (unit(rng) < ev.loss_probability) continue;
                std::string name = std::string(1, static_cast<char>('a' + x * 8)) + std::to_string(g);
                spec.genes.push_back({name, fwd});
                members[x].push_back({name, g});
                if (unit(rng) < ev.paralog_probability) {
                    std::string copy = name + "p";
                    spec.genes.push_back({copy, rng() % 2 == 0});
                    members[x].push_back({copy, g});
                }
            }
            if (spec.genes.empty() && spec.shape == Shape::circular) continue;
            specs.push_back(std::move(spec));
        }
        genomes[x] = Genome::build(labels[x], specs);
        if (truth)
            for (auto& [name, g] : members[x]) truth->origin[x][name] = g;
    }
    std::vector<SimilarityEdge> edges;
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = x + 1; y < 3; ++y)
            for (auto& [a, ga] : members[x])
                for (auto& [b, gb] : members[y]) {
                    double s = 0.0;
                    if (ga == gb)
                        s = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
                    else if (unit(rng) < ev.noise_probability)
                        s = std::uniform_real_distribution<double>(0.01, ev.noise_max)(rng);
                    if (s > 0) edges.push_back({{labels[x], a}, {labels[y], b}, s});
                }
    return make_instance(genomes, SimilarityGraph(std::move(edges)));
}

inline Extremity project(const CandidateSet& cs, std::size_t x, std::uint32_t m, End end) {
    const auto& gene = cs.genes()[m];
    return {GeneId{cs.labels()[x], cs.extant_name(x, m)}, gene.telomere ? End::telomeric : end};
}

// Objective recomputed from raw similarities and extant adjacency indicators.
inline double first_principles_objective(const Instance& inst, const CandidateSet& cs,
                                         const std::vector<std::uint32_t>& adjacencies) {
    auto triple = [&](std::uint32_t m) {
        GeneId g{cs.labels()[0], cs.extant_name(0, m)};
        GeneId h{cs.labels()[1], cs.extant_name(1, m)};
        GeneId i{cs.labels()[2], cs.extant_name(2, m)};
        return inst.sigma(g, h) * inst.sigma(g, i) * inst.sigma(h, i);
    };
    double total = 0.0;
    for (auto k : adjacencies) {
        const auto& adj = cs.adjacencies()[k];
        const double score = std::pow(triple(adj.m1), 1.0 / 6.0) * std::pow(triple(adj.m2), 1.0 / 6.0);
        int conserved = 0;
        for (std::size_t x = 0; x < 3; ++x)
            conserved += inst.genomes[x].indicator(project(cs, x, adj.m1, adj.a), project(cs, x, adj.m2, adj.b));
        total += score * conserved;
    }
    return total;
}

// C.01-C.03 re-evaluated on extant gene names and extremities.
inline bool independently_feasible(const CandidateSet& cs, const MedianSolution& sol) {
    std::set<std::pair<std::size_t, std::string>> used_genes;
    std::set<std::uint32_t> chosen(sol.genes.begin(), sol.genes.end());
    for (auto m : sol.genes)
        for (std::size_t x = 0; x < 3; ++x)
            if (!used_genes.insert({x, cs.extant_name(x, m)}).second) return false;
    std::set<std::pair<std::uint32_t, int>> used_ends;
    for (auto k : sol.adjacencies) {
        const auto& adj = cs.adjacencies()[k];
        if (!chosen.count(adj.m1) || !chosen.count(adj.m2)) return false;
        if (!used_ends.insert({adj.m1, static_cast<int>(adj.a)}).second) return false;
        if (!used_ends.insert({adj.m2, static_cast<int>(adj.b)}).second) return false;
    }
    return true;
}

}  // namespace support
