#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>
#include <sstream>

#include "ffmedian/ingestion.hpp"

using namespace ffmedian;

namespace {

std::string row(const std::string& q, const std::string& s, double evalue, double bits) {
    std::ostringstream out;
    out << q << '\t' << s << "\t90.0\t100\t5\t0\t1\t100\t1\t100\t" << evalue << '\t' << bits << '\n';
    return out.str();
}

std::vector<AlignmentHit> parse(const std::string& text, std::optional<double> evalue = std::nullopt,
                                const std::set<GeneId>* universe = nullptr) {
    std::istringstream in(text);
    return parse_hits(in, "hits.tsv", evalue, universe);
}

AlignmentHit hit(const std::string& q, const std::string& s, double bits) {
    return {parse_gene_id(q), parse_gene_id(s), bits, 0.0};
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse examples") {
    CHECK(parse(row("G:a", "H:b", 1e-3, 50), 1e-5).empty());
    CHECK(parse(row("G:a", "H:b", 0, 50), 1e-5).size() == 1);
    CHECK(parse(row("G:a", "H:b", 1e-5, 50), 1e-5).size() == 1);
    CHECK(parse(row("G:a", "H:b", 1e-3, 50)).size() == 1);
    auto both = parse(row("G:a", "H:b", 1e-20, 50) + row("H:b", "G:a", 1e-20, 52), 1e-5);
    REQUIRE(both.size() == 2);
    CHECK(both[0].bitscore == 50);
    CHECK(both[1].query == GeneId{"H", "b"});

    auto msg = error_of([] { parse("# header\n" + row("G:a", "H:b", 0, 50) + "G:a\tH:b\t1\n"); });
    CHECK(msg.find("hits.tsv:3") != std::string::npos);
    msg = error_of([] { parse(row("G:a", "H:b", 0, 0) ); });
    CHECK(msg.find("hits.tsv:1") != std::string::npos);
    msg = error_of([] { parse("G:a\tH:b\t1\t1\t1\t1\t1\t1\t1\t1\tx\t5\n"); });
    CHECK(msg.find("not a number") != std::string::npos);
    msg = error_of([] { parse("nogenome\tH:b\t1\t1\t1\t1\t1\t1\t1\t1\t0\t5\n"); });
    CHECK(msg.find("nogenome") != std::string::npos);

    std::set<GeneId> universe{{"G", "a"}, {"H", "b"}};
    CHECK(parse(row("G:a", "H:b", 0, 50), std::nullopt, &universe).size() == 1);
    msg = error_of([&] { parse(row("G:a", "H:zz", 0, 50), std::nullopt, &universe); });
    CHECK(msg.find("H:zz") != std::string::npos);

    FilterParams bad{1e-5, 1.5};
    CHECK_THROWS_AS(bad.validate(), InputError);
    FilterParams neg{-1, 0.5};
    CHECK_THROWS_AS(neg.validate(), InputError);
    CHECK_NOTHROW(FilterParams{}.validate());
}

TEST_CASE("stringency examples") {
    std::vector<AlignmentHit> hits{hit("G:g", "H:h", 40), hit("H:h", "G:g2", 100), hit("H:h", "G:g", 45),
                                   hit("G:g2", "H:h", 90)};
    CHECK(stringency_filter(hits, 0.0).size() == hits.size());
    auto half = stringency_filter(hits, 0.5);
    // 40 < 0.5 * 100 is dropped, the rest pass
    REQUIRE(half.size() == 3);
    for (const auto& h : half) CHECK_FALSE((h.query == GeneId{"G", "g"} && h.subject == GeneId{"H", "h"}));

    // f = 1 keeps the unique best partner
    std::vector<AlignmentHit> pair{hit("G:g", "H:h", 80), hit("H:h", "G:g", 80), hit("H:h", "G:x", 30)};
    auto strict = stringency_filter(pair, 1.0);
    bool kept = false;
    for (const auto& h : strict) kept |= h.query == GeneId{"G", "g"} && h.subject == GeneId{"H", "h"};
    CHECK(kept);
    CHECK(stringency_filter({}, 0.5).empty());
    // self hits survive any f
    CHECK(stringency_filter({hit("G:g", "G:g", 1)}, 1.0).size() == 1);
}

TEST_CASE("stringency monotone in f and matches direct rule") {
    std::mt19937_64 rng(5);
    const char* labels[] = {"G", "H", "I"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<AlignmentHit> hits;
        for (int k = 0; k < 30; ++k) {
            auto x = rng() % 3, y = (x + 1 + rng() % 2) % 3;
            hits.push_back(hit(std::string(labels[x]) + ":g" + std::to_string(rng() % 4),
                               std::string(labels[y]) + ":g" + std::to_string(rng() % 4),
                               1.0 + static_cast<double>(rng() % 100)));
        }
        std::vector<std::vector<bool>> kept;
        for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            auto out = stringency_filter(hits, f);
            // direct rule, recomputed hit by hit
            std::vector<bool> keep(hits.size());
            std::vector<AlignmentHit> expected;
            for (std::size_t i = 0; i < hits.size(); ++i) {
                double best = 0.0;
                for (const auto& other : hits)
                    if (other.query == hits[i].subject && other.subject.genome == hits[i].query.genome)
                        best = std::max(best, other.bitscore);
                keep[i] = hits[i].bitscore >= f * best;
                if (keep[i]) expected.push_back(hits[i]);
            }
            REQUIRE(out.size() == expected.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                CHECK(out[i].query == expected[i].query);
                CHECK(out[i].subject == expected[i].subject);
                CHECK(out[i].bitscore == expected[i].bitscore);
            }
            kept.push_back(keep);
        }
        for (std::size_t s = 1; s < kept.size(); ++s)
            for (std::size_t i = 0; i < hits.size(); ++i)
                if (kept[s][i]) CHECK(kept[s - 1][i]);
    }
}

TEST_CASE("rrbs examples") {
    auto one = rrbs_weights({hit("G:g", "H:h", 100), hit("H:h", "G:g", 100), hit("G:g", "G:g", 100),
                             hit("H:h", "H:h", 100)});
    CHECK(one({"G", "g"}, {"H", "h"}) == 1.0);
    auto half = rrbs_weights({hit("G:g", "H:h", 50), hit("H:h", "G:g", 50), hit("G:g", "G:g", 100),
                              hit("H:h", "H:h", 100)});
    CHECK(half({"G", "g"}, {"H", "h"}) == doctest::Approx(0.5).epsilon(1e-15));
    std::vector<AlignmentHit> single{hit("G:g", "H:h", 60), hit("G:g", "G:g", 100), hit("H:h", "H:h", 140)};
    CHECK(rrbs_weights(single)({"H", "h"}, {"G", "g"}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rrbs_weights(single, true).size() == 0);
    // clamped
    auto big = rrbs_weights({hit("G:g", "H:h", 300), hit("G:g", "G:g", 100), hit("H:h", "H:h", 100)});
    CHECK(big({"G", "g"}, {"H", "h"}) == 1.0);

    auto msg = error_of([] { rrbs_weights({hit("G:g", "H:h", 60), hit("G:g", "G:g", 100)}); });
    CHECK(msg.find("H:h") != std::string::npos);
}

TEST_CASE("rrbs properties and determinism") {
    std::mt19937_64 rng(9);
    const char* labels[] = {"G", "H", "I"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<AlignmentHit> hits;
        for (int x = 0; x < 3; ++x)
            for (int g = 0; g < 4; ++g) {
                auto id = std::string(labels[x]) + ":g" + std::to_string(g);
                hits.push_back(hit(id, id, 50.0 + static_cast<double>(rng() % 100)));
            }
        for (int k = 0; k < 25; ++k) {
            auto x = rng() % 3, y = (x + 1 + rng() % 2) % 3;
            hits.push_back(hit(std::string(labels[x]) + ":g" + std::to_string(rng() % 4),
                               std::string(labels[y]) + ":g" + std::to_string(rng() % 4),
                               1.0 + static_cast<double>(rng() % 150)));
        }
        auto sigma = rrbs_weights(stringency_filter(hits, 0.5));
        for (const auto& e : sigma.edges()) {
            CHECK(e.score > 0.0);
            CHECK(e.score <= 1.0);
            CHECK(e.a.genome != e.b.genome);
            CHECK(sigma(e.a, e.b) == sigma(e.b, e.a));
        }
        std::ostringstream first, second;
        write_similarity(first, sigma);
        auto shuffled = hits;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        write_similarity(second, rrbs_weights(stringency_filter(shuffled, 0.5)));
        CHECK(first.str() == second.str());
    }
}
