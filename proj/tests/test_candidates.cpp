#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace ffmedian;
using namespace support;

namespace {

const char* conflict_genomes = "G|c|linear|+g1 +g2 +g3 +g4\nH|c|linear|+h1 +h2 +h3\nI|c|linear|+i1 +i2 +i3\n";
const char* conflict_sigma =
    "G:g1 H:h1 1;G:g1 I:i2 1;H:h1 I:i2 1;G:g2 H:h2 1;G:g2 I:i1 1;H:h2 I:i1 1;"
    "G:g3 H:h3 1;G:g3 I:i2 1;H:h3 I:i2 1;G:g4 H:h3 1;G:g4 I:i3 1;H:h3 I:i3 1";

std::uint32_t find_candidate(const CandidateSet& cs, const std::string& g, const std::string& h,
                             const std::string& i) {
    for (std::uint32_t m = 0; m < cs.size(); ++m)
        if (cs.extant_name(0, m) == g && cs.extant_name(1, m) == h && cs.extant_name(2, m) == i) return m;
    FAIL("no candidate " << g << " " << h << " " << i);
    return 0;
}

const CandidateAdjacency* find_adjacency(const CandidateSet& cs, std::uint32_t m1, End a, std::uint32_t m2, End b) {
    for (const auto& adj : cs.adjacencies())
        if ((adj.m1 == m1 && adj.a == a && adj.m2 == m2 && adj.b == b) ||
            (adj.m1 == m2 && adj.a == b && adj.m2 == m1 && adj.b == a))
            return &adj;
    return nullptr;
}

std::size_t brute_triangles(const Instance& inst) {
    std::size_t count = 0;
    const auto& [G, H, I] = inst.genomes;
    for (GeneIndex g = 0; g < G.gene_count(); ++g)
        for (GeneIndex h = 0; h < H.gene_count(); ++h)
            for (GeneIndex i = 0; i < I.gene_count(); ++i) {
                if (G.is_telomere(g) || H.is_telomere(h) || I.is_telomere(i)) continue;
                auto sg = G.gene_id(g), sh = H.gene_id(h), si = I.gene_id(i);
                if (inst.sigma(sg, sh) > 0 && inst.sigma(sg, si) > 0 && inst.sigma(sh, si) > 0) ++count;
            }
    return count;
}

std::size_t telomere_count(const Genome& genome) {
    std::size_t n = 0;
    for (GeneIndex g = 0; g < genome.gene_count(); ++g) n += genome.is_telomere(g);
    return n;
}

}  // namespace

TEST_CASE("four-gene conflict example candidates") {
    auto inst = instance_from(conflict_genomes, conflict_sigma);
    auto cs = build_candidates(inst);
    // four genes plus 2*2*2 telomere triples
    CHECK(cs.size() == 12);
    auto m1 = find_candidate(cs, "g1", "h1", "i2");
    auto m2 = find_candidate(cs, "g2", "h2", "i1");
    auto m3 = find_candidate(cs, "g3", "h3", "i2");
    auto m4 = find_candidate(cs, "g4", "h3", "i3");
    std::size_t genes = 0;
    for (const auto& m : cs.genes()) genes += !m.telomere;
    CHECK(genes == 4);
    CHECK(cs.conflicting(m1, m3));
    CHECK(cs.conflicting(m3, m4));
    CHECK_FALSE(cs.conflicting(m1, m2));
    CHECK_FALSE(cs.conflicting(m2, m4));

    // m2 -> m3 follows g2 g3, h2 h3 and (with all genes forward) i1 i2
    auto adj = find_adjacency(cs, m2, End::head, m3, End::tail);
    REQUIRE(adj);
    CHECK((adj->conserved & 0b011) == 0b011);
    CHECK(adj->conserved == 0b111);
    // reversing i1 leaves G and H
    auto flipped = build_candidates(instance_from(
        "G|c|linear|+g1 +g2 +g3 +g4\nH|c|linear|+h1 +h2 +h3\nI|c|linear|-i1 +i2 +i3\n", conflict_sigma));
    auto f = find_adjacency(flipped, find_candidate(flipped, "g2", "h2", "i1"), End::head,
                            find_candidate(flipped, "g3", "h3", "i2"), End::tail);
    REQUIRE(f);
    CHECK(f->conserved == 0b011);

    for (const auto& a : cs.adjacencies()) {
        CHECK_FALSE(cs.conflicting(a.m1, a.m2));
        bool m13 = (a.m1 == m1 && a.m2 == m3) || (a.m1 == m3 && a.m2 == m1);
        bool m34 = (a.m1 == m3 && a.m2 == m4) || (a.m1 == m4 && a.m2 == m3);
        CHECK_FALSE(m13);
        CHECK_FALSE(m34);
    }
}

TEST_CASE("enumeration examples") {
    // empty similarity graph
    auto empty = build_candidates(instance_from(
        "G|c|linear|+a\nG|d|linear|+b\nH|c|linear|+x\nI|c|circular|+y\nI|d|linear|+z\n", ""));
    CHECK(empty.size() == 4 * 2 * 2);
    for (const auto& m : empty.genes()) {
        CHECK(m.telomere);
        CHECK(m.triple_score == 1.0);
    }
    // no shared gene adjacencies: telomere triples see only telomere-gene pairs
    CHECK(empty.adjacencies().empty());

    // complete tripartite graph: n^3 triples
    for (int n = 1; n <= 5; ++n) {
        std::string text, sigma;
        const char* labels[] = {"G", "H", "I"};
        for (int x = 0; x < 3; ++x) {
            text += std::string(labels[x]) + "|c|circular|";
            for (int k = 0; k < n; ++k) text += " +" + std::string(1, static_cast<char>('a' + x)) + std::to_string(k);
            text += "\n";
        }
        for (int x = 0; x < 3; ++x)
            for (int y = x + 1; y < 3; ++y)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        sigma += std::string(labels[x]) + ":" + static_cast<char>('a' + x) + std::to_string(a) + " " +
                                 labels[y] + ":" + static_cast<char>('a' + y) + std::to_string(b) + " 0.5;";
        auto cands = enumerate_candidates(instance_from(text, sigma));
        CHECK(cands.size() == static_cast<std::size_t>(n * n * n));
        for (const auto& m : cands) CHECK(m.triple_score == doctest::Approx(0.125));
    }
}

TEST_CASE("score algebra") {
    CHECK(adjacency_score(1, 1) == 1.0);
    CHECK(adjacency_score(0.25, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(adjacency_score(0.8, 0.2) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(adjacency_score(0.0, 0.7) == 0.0);
    CHECK(median_adjacency_weight(1, 1) == 1.0);
    CHECK(median_adjacency_weight(1, std::ldexp(1.0, -6)) == doctest::Approx(0.5).epsilon(1e-15));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(1e-6, 1.0);
    for (int k = 0; k < 1000; ++k) {
        double t1 = unit(rng), t2 = unit(rng);
        double expected = std::sqrt(std::cbrt(t1)) * std::sqrt(std::cbrt(t2));
        CHECK(median_adjacency_weight(t1, t2) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("enumeration matches brute force") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 150; ++trial) {
        RandomShape shape;
        shape.min_genes = 2;
        shape.max_genes = trial < 120 ? 7 : 30;
        shape.edge_probability = trial < 120 ? 0.4 : 0.08;
        shape.linear_probability = 0.6;
        auto inst = random_instance(rng, shape);
        auto cs = build_candidates(inst);

        std::size_t telomere_triples = telomere_count(inst.genomes[0]) * telomere_count(inst.genomes[1]) *
                                       telomere_count(inst.genomes[2]);
        CHECK(cs.size() == brute_triangles(inst) + telomere_triples);
        for (std::uint32_t m = 1; m < cs.size(); ++m) {
            auto key = [&](std::uint32_t k) {
                return std::tuple(cs.extant_name(0, k), cs.extant_name(1, k), cs.extant_name(2, k));
            };
            CHECK(key(m - 1) < key(m));
        }
        for (const auto& m : cs.genes()) {
            CHECK(m.triple_score > 0);
            CHECK(m.gene_score == doctest::Approx(std::cbrt(m.triple_score)).epsilon(1e-12));
        }

        // conserved adjacencies from indicators over every vertex pair
        std::size_t expected = 0;
        for (std::uint32_t v1 = 0; v1 < 2 * cs.size(); ++v1)
            for (std::uint32_t v2 = v1; v2 < 2 * cs.size(); ++v2) {
                std::uint32_t m1 = v1 / 2, m2 = v2 / 2;
                if (v1 == v2 || cs.conflicting(m1, m2)) continue;
                const auto& c1 = cs.genes()[m1];
                const auto& c2 = cs.genes()[m2];
                if ((c1.telomere && v1 % 2) || (c2.telomere && v2 % 2)) continue;
                End a = c1.telomere ? End::telomeric : (v1 % 2 ? End::head : End::tail);
                End b = c2.telomere ? End::telomeric : (v2 % 2 ? End::head : End::tail);
                std::uint8_t mask = 0;
                for (std::size_t x = 0; x < 3; ++x) {
                    if (c1.telomere && c2.telomere) continue;
                    if (inst.genomes[x].indicator(project(cs, x, m1, a), project(cs, x, m2, b)))
                        mask |= static_cast<std::uint8_t>(1u << x);
                }
                if (!mask) continue;
                ++expected;
                auto adj = find_adjacency(cs, m1, a, m2, b);
                REQUIRE(adj);
                CHECK(adj->conserved == mask);
                CHECK(adj->weight() > 0.0);
                CHECK(adj->weight() <= 3.0);
                CHECK(adj->factor ==
                      doctest::Approx(std::pow(c1.triple_score * c2.triple_score, 1.0 / 6.0)).epsilon(1e-12));
            }
        CHECK(cs.adjacencies().size() == expected);
    }
}

TEST_CASE("conflict index agrees with pairwise definition") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        RandomShape shape;
        shape.edge_probability = 0.5;
        auto cs = build_candidates(random_instance(rng, shape));
        for (std::uint32_t a = 0; a < cs.size(); ++a) {
            CHECK_FALSE(cs.conflicting(a, a));
            auto list = cs.conflicts_of(a);
            for (std::uint32_t b = 0; b < cs.size(); ++b) {
                CHECK(cs.conflicting(a, b) == cs.conflicting(b, a));
                bool shares = false;
                for (std::size_t x = 0; x < 3; ++x) shares |= cs.genes()[a].genes[x] == cs.genes()[b].genes[x];
                CHECK(cs.conflicting(a, b) == (a != b && shares));
                CHECK(std::binary_search(list.begin(), list.end(), b) == cs.conflicting(a, b));
            }
        }
        // random sets: users-based check vs pairwise check
        for (int k = 0; k < 20 && cs.size(); ++k) {
            std::vector<std::uint32_t> set;
            for (std::uint32_t m = 0; m < cs.size(); ++m)
                if (rng() % 4 == 0) set.push_back(m);
            bool pairwise = true;
            for (auto a : set)
                for (auto b : set) pairwise &= !cs.conflicting(a, b);
            bool by_index = true;
            for (std::size_t x = 0; x < 3; ++x)
                for (GeneIndex g = 0; g < cs.gene_names(x).size(); ++g) {
                    int used = 0;
                    for (auto m : cs.users(x, g)) used += std::binary_search(set.begin(), set.end(), m);
                    by_index &= used <= 1;
                }
            CHECK(pairwise == by_index);
        }
    }
}

TEST_CASE("objective consistency") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = random_small_instance(rng, 12);
        auto cs = build_candidates(inst);
        if (cs.adjacencies().empty()) continue;
        std::vector<std::uint32_t> picked;
        for (std::uint32_t k = 0; k < cs.adjacencies().size(); ++k)
            if (rng() % 3 == 0) picked.push_back(k);
        double sum = 0.0;
        for (auto k : picked) sum += cs.adjacencies()[k].weight();
        CHECK(sum == doctest::Approx(first_principles_objective(inst, cs, picked)).epsilon(1e-9));
    }
}

TEST_CASE("discard non-clique genes") {
    auto none = preprocess_discard_nonclique(
        instance_from("G|c|linear|+a +b\nG|d|circular|+c\nH|c|linear|+x\nI|c|circular|+y +z\n", "G:a H:x 1"));
    CHECK(none.removed.size() == 6);
    for (const auto& genome : none.instance.genomes) {
        CHECK(genome.gene_count() == telomere_count(genome));
        for (auto p : genome.adjacencies()) {
            CHECK(genome.is_telomere(Genome::code_gene(p.first)));
            CHECK(genome.is_telomere(Genome::code_gene(p.second)));
        }
    }
    CHECK(none.instance.sigma.size() == 0);

    auto spliced = preprocess_discard_nonclique(instance_from(
        "G|c|linear|+a +x +b\nH|c|linear|+a2 +b2\nI|c|linear|+a3 +b3\n",
        "G:a H:a2 1;G:a I:a3 1;H:a2 I:a3 1;G:b H:b2 1;G:b I:b3 1;H:b2 I:b3 1;G:x H:a2 0.5"));
    REQUIRE(spliced.removed.size() == 1);
    CHECK(spliced.removed[0] == GeneId{"G", "x"});
    const auto& G = spliced.instance.genomes[0];
    CHECK(G.indicator({{"G", "a"}, End::head}, {{"G", "b"}, End::tail}) == 1);
    CHECK(G.indicator({{"G", "@c.L"}, End::telomeric}, {{"G", "a"}, End::tail}) == 1);
    CHECK(spliced.instance.sigma.size() == 6);

    // an inserted element splitting a conserved adjacency
    auto toy = instance_from("G|c|circular|+a0 +a1 +a2\nH|c|circular|+b0 +t +b1 +b2\nI|c|circular|+c0 +c1 +c2\n",
                             "G:a0 H:b0 1;G:a0 I:c0 1;H:b0 I:c0 1;G:a1 H:b1 1;G:a1 I:c1 1;H:b1 I:c1 1;"
                             "G:a2 H:b2 1;G:a2 I:c2 1;H:b2 I:c2 1;H:t G:a1 0.3");
    auto before = build_candidates(toy);
    auto after = build_candidates(preprocess_discard_nonclique(toy).instance);
    auto total = [](const CandidateSet& cs) {
        double w = 0;
        for (const auto& a : cs.adjacencies()) w += a.weight();
        return w;
    };
    CHECK(total(after) > total(before));
    auto adj = find_adjacency(after, find_candidate(after, "a0", "b0", "c0"), End::head,
                              find_candidate(after, "a1", "b1", "c1"), End::tail);
    REQUIRE(adj);
    CHECK(adj->conserved == 0b111);
}

TEST_CASE("candidates tsv") {
    auto cs = build_candidates(instance_from("G|c|circular|+a +b\nH|c|circular|+x +y\nI|c|circular|+p +q\n",
                                             "G:a H:x 1;G:a I:p 1;H:x I:p 1;G:b H:y 1;G:b I:q 1;H:y I:q 0.5"));
    std::ostringstream out;
    write_candidates_tsv(out, cs);
    CHECK(out.str() ==
          "#ffmedian candidates v1\n"
          "#gene\tindex\tG\tH\tI\ttriple_score\tgene_score\n"
          "#adjacency\tindex\tm1\tend1\tm2\tend2\tconserved_in\tfactor\tweight\n"
          "gene\t0\ta\tx\tp\t1\t1\n"
          "gene\t1\tb\ty\tq\t0.5\t" + format_double(std::cbrt(0.5)) + "\n"
          "adjacency\t0\t0\tt\t1\th\tG,H,I\t" + format_double(std::pow(0.5, 1.0 / 6)) + "\t" +
              format_double(3 * std::pow(0.5, 1.0 / 6)) + "\n"
          "adjacency\t1\t0\th\t1\tt\tG,H,I\t" + format_double(std::pow(0.5, 1.0 / 6)) + "\t" +
              format_double(3 * std::pow(0.5, 1.0 / 6)) + "\n");
}
