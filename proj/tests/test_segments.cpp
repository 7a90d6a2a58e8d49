#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ffmedian/segments.hpp"
#include "support.hpp"

using namespace ffmedian;
using namespace support;

namespace {

std::uint32_t candidate(const CandidateSet& cs, const std::string& g, const std::string& h, const std::string& i) {
    for (std::uint32_t m = 0; m < cs.size(); ++m)
        if (cs.extant_name(0, m) == g && cs.extant_name(1, m) == h && cs.extant_name(2, m) == i) return m;
    FAIL("no candidate " << g << " " << h << " " << i);
    return 0;
}

const MatchEdge* edge_between(const MatchGraph& graph, std::uint32_t u, std::uint32_t v) {
    for (const auto& e : graph.edges)
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) return &e;
    return nullptr;
}

std::string unit_triangles(int n) {
    std::string sigma;
    for (int k = 0; k < n; ++k) {
        auto a = "G:a" + std::to_string(k), b = "H:b" + std::to_string(k), c = "I:c" + std::to_string(k);
        sigma += a + " " + b + " 1;" + a + " " + c + " 1;" + b + " " + c + " 1;";
    }
    return sigma;
}

std::string identical(int n, const char* shape) {
    std::string text;
    const char* labels[] = {"G", "H", "I"};
    const char* prefix[] = {"a", "b", "c"};
    for (int x = 0; x < 3; ++x) {
        text += std::string(labels[x]) + "|c|" + shape + "|";
        for (int k = 0; k < n; ++k) text += (k ? " +" : "+") + std::string(prefix[x]) + std::to_string(k);
        text += "\n";
    }
    return text;
}

}  // namespace

TEST_CASE("gamma weights") {
    auto inst = instance_from("G|c|circular|+a0 +a1 +a2\nH|c|circular|+b0 +b1 +b2\nI|c|circular|+c0 +c1 +c2\n",
                              unit_triangles(2));
    auto cs = build_candidates(inst);
    auto gamma = build_gamma(cs);
    auto m0 = candidate(cs, "a0", "b0", "c0"), m1 = candidate(cs, "a1", "b1", "c1");
    auto e = edge_between(gamma, 2 * m0 + 1, 2 * m1);
    REQUIRE(e);
    CHECK(e->weight == doctest::Approx(3.0));
    // m1 head is next to a2, which has no candidate
    CHECK(edge_between(gamma, 2 * m1 + 1, 2 * m0) == nullptr);

    auto weak = instance_from("G|c|circular|+a0 +a1 +a2\nH|c|circular|+b0 +b1 +b2\nI|c|circular|+c1 +c0 +c2\n",
                              unit_triangles(1) + "G:a1 H:b1 0.25;G:a1 I:c1 0.25;H:b1 I:c1 0.25");
    cs = build_candidates(weak);
    gamma = build_gamma(cs);
    m0 = candidate(cs, "a0", "b0", "c0");
    m1 = candidate(cs, "a1", "b1", "c1");
    e = edge_between(gamma, 2 * m0 + 1, 2 * m1);
    REQUIRE(e);
    CHECK(e->weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("potential examples") {
    auto lone = instance_from("G|c|circular|+a0 +a1\nH|c|circular|+b0 +b1\nI|c|circular|+c0 +c1\n", unit_triangles(1));
    auto cs = build_candidates(lone);
    REQUIRE(cs.size() == 1);
    CHECK(potential(cs, 0) == 0.0);

    auto head_only = instance_from(
        "G|c|circular|+a0 +a1 +ax\nH|c|circular|+b0 +b1 +bx\nI|c|circular|+c0 +cx\nI|d|circular|+c1 +cy\n",
        unit_triangles(2));
    cs = build_candidates(head_only);
    CHECK(potential(cs, candidate(cs, "a0", "b0", "c0")) == doctest::Approx(2.0));

    auto both = instance_from(
        "G|c|circular|+a2 +a0 +a1 +ax\nH|c|circular|+b2 +b0 +b1 +bx\n"
        "I|c|circular|+c0 +cx\nI|d|circular|+c1 +cy\nI|e|circular|+c2 +cz\n",
        unit_triangles(2) + "G:a2 H:b2 0.5625;G:a2 I:c2 0.5625;H:b2 I:c2 0.5625");
    cs = build_candidates(both);
    auto m0 = candidate(cs, "a0", "b0", "c0");
    CHECK(potential(cs, m0) == doctest::Approx(3.5).epsilon(1e-12));
    for (std::uint32_t m = 0; m < cs.size(); ++m)
        for (auto k : cs.incident(2 * m)) CHECK(potential(cs, m) >= cs.adjacencies()[k].weight() - 1e-12);
}

TEST_CASE("conflict weights") {
    // a0 is shared by both candidates
    auto inst = instance_from("G|c|circular|+a0 +a1\nH|c|circular|+b0 +b1\nI|c|circular|+c0 +c1\n",
                              "G:a0 H:b0 1;G:a0 I:c0 1;H:b0 I:c0 1;G:a0 H:b1 1;G:a0 I:c1 1;H:b1 I:c1 1;"
                              "G:a1 H:b1 1;G:a1 I:c1 1");
    auto cs = build_candidates(inst);
    auto x = candidate(cs, "a0", "b0", "c0"), y = candidate(cs, "a0", "b1", "c1"), z = candidate(cs, "a1", "b1", "c1");
    REQUIRE(cs.conflicting(x, y));
    CHECK(conflict_weight(cs, {x}, {4.0}) == 4.0);
    CHECK(conflict_weight(cs, {x, y}, {3.0, 5.0}) == 5.0);
    CHECK(conflict_weight(cs, {x, z}, {3.0, 5.0}) == 8.0);
    CHECK(conflict_weight(cs, {}, {}) == 0.0);
    std::vector<std::uint32_t> many(21, x);
    std::vector<double> weights(21, 1.0);
    CHECK_THROWS_AS(conflict_weight(cs, many, weights), SegmentSkipped);
    CHECK(conflict_weight(cs, many, weights, 21) == 1.0);
}

TEST_CASE("runs on identical genomes") {
    for (const char* shape : {"circular", "linear"}) {
        CAPTURE(shape);
        auto inst = instance_from(identical(6, shape), unit_triangles(6));
        auto cs = build_candidates(inst);
        auto runs = detect_runs(cs);
        REQUIRE(runs.size() == 1);
        CHECK(runs[0].genes.size() == 6);
        CHECK(runs[0].circular == (std::string(shape) == "circular"));
        CHECK(runs[0].links.size() == (runs[0].circular ? 6u : 5u));
        CHECK(classify_segment(cs, runs[0].genes) == SegmentKind::run);
        for (std::size_t j = 0; j + 1 < runs[0].genes.size(); ++j)
            CHECK(cs.extant_name(0, runs[0].genes[j]) == "a" + std::to_string(j));

        auto gp = build_gamma_prime(cs, runs[0]);
        for (std::size_t e = 0; e < gp.graph.edges.size(); ++e)
            if (gp.adjacency_of[e] == GammaPrime::conflict_edge) CHECK(gp.graph.edges[e].weight == 0.0);

        auto seg = icf_seg(cs);
        CHECK(seg.accepted.size() == 1);
        if (std::string(shape) == "circular") CHECK(seg.reduced.size() == 0);
        auto full = solve_branch_and_bound(build_ilp(cs));
        auto rest = solve_branch_and_bound(build_ilp(seg.reduced));
        CHECK(seg.accepted_weight + rest.objective == doctest::Approx(full.objective));
    }
}

TEST_CASE("single shared adjacency gives a two-gene run") {
    auto inst = instance_from(
        "G|c|circular|+a0 +a1 +a2 +a3\nH|c|circular|+b0 +b1 -b2 -b3\nI|c|circular|+c0 +c1 +c3 +c2\n", unit_triangles(4));
    auto cs = build_candidates(inst);
    auto runs = detect_runs(cs);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].genes == std::vector<std::uint32_t>{candidate(cs, "a0", "b0", "c0"), candidate(cs, "a1", "b1", "c1")});
    CHECK_FALSE(runs[0].circular);
    CHECK(runs[0].links.size() == 1);
}

TEST_CASE("conflicting candidates never share a run") {
    auto inst = instance_from("G|c|linear|+g1 +g2 +g3 +g4\nH|c|linear|+h1 +h2 +h3\nI|c|linear|+i1 +i2 +i3\n",
                              "G:g1 H:h1 1;G:g1 I:i2 1;H:h1 I:i2 1;G:g2 H:h2 1;G:g2 I:i1 1;H:h2 I:i1 1;"
                              "G:g3 H:h3 1;G:g3 I:i2 1;H:h3 I:i2 1;G:g4 H:h3 1;G:g4 I:i3 1;H:h3 I:i3 1");
    auto cs = build_candidates(inst);
    auto m3 = candidate(cs, "g3", "h3", "i2"), m4 = candidate(cs, "g4", "h3", "i3");
    auto m1 = candidate(cs, "g1", "h1", "i2");
    CHECK(cs.conflicting(m3, m4));
    CHECK(cs.conflicting(m1, m3));
    for (const auto& run : detect_runs(cs)) {
        bool has3 = std::count(run.genes.begin(), run.genes.end(), m3) > 0;
        bool has4 = std::count(run.genes.begin(), run.genes.end(), m4) > 0;
        CHECK_FALSE((has3 && has4));
    }
    CHECK_FALSE(classify_segment(cs, {m3, m4}).has_value());
}

TEST_CASE("segment losing to a conflict edge is rejected") {
    auto inst = instance_from(
        "G|c|circular|+a0 +a1 +af\nG|d|circular|+a3 +a2 +a4\n"
        "H|c|circular|+b0 +b1 +bf\nH|d|circular|+b3 +b2 +b4\n"
        "I|c|circular|+c0 +c1 +cf\nI|d|circular|+c3 +cg\nI|e|circular|+c4 +ch\n",
        unit_triangles(2) + "G:a3 H:b3 1;G:a3 I:c3 1;H:b3 I:c3 1;G:a4 H:b4 1;G:a4 I:c4 1;H:b4 I:c4 1;"
                            "G:a2 H:b2 1;G:a2 I:c0 1;H:b2 I:c0 1");
    auto cs = build_candidates(inst);
    auto x = candidate(cs, "a2", "b2", "c0");
    CHECK(potential(cs, x) == doctest::Approx(4.0));
    auto runs = detect_runs(cs);
    REQUIRE(runs.size() == 1);
    auto seg = icf_seg(cs);
    CHECK(seg.accepted.empty());
    CHECK(seg.rejected == 1);
    CHECK(seg.reduced.size() == cs.size());
    CHECK(seg.reduced.adjacencies().size() == cs.adjacencies().size());
}

TEST_CASE("icf-seg is safe on evolved instances") {
    std::mt19937_64 rng(99);
    int done = 0, with_accepts = 0;
    while (done < 400) {
        Evolution ev;
        ev.genes = 3 + rng() % 5;
        ev.inversions = rng() % 3;
        ev.paralog_probability = 0.15;
        ev.noise_probability = 0.05;
        auto inst = evolved_instance(rng, ev);
        auto cs = build_candidates(inst);
        if (cs.size() == 0 || cs.size() > 12) continue;
        ++done;
        auto model = build_ilp(cs);
        auto full = brute_force_median(model);
        auto seg = icf_seg(cs);
        if (!seg.accepted.empty()) ++with_accepts;
        auto reduced = brute_force_median(build_ilp(seg.reduced));
        CHECK(seg.accepted_weight + reduced.objective == doctest::Approx(full.objective).epsilon(1e-6));
        auto forced = brute_force_median(model, 12, &seg.accepted_adjacencies);
        CHECK(forced.objective == doctest::Approx(full.objective).epsilon(1e-6));
        auto merged = merge_solution(cs, seg, solve_branch_and_bound(build_ilp(seg.reduced)));
        CHECK(independently_feasible(cs, merged));
    }
    MESSAGE("instances with accepted segments: " << with_accepts);
    CHECK(with_accepts > 80);
}
