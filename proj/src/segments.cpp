#include "ffmedian/segments.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace ffmedian {

const char* to_string(SegmentKind kind) {
    switch (kind) {
        case SegmentKind::ic_free: return "ic-free";
        case SegmentKind::framed: return "framed";
        case SegmentKind::run: return "run";
    }
    return "unknown";
}

MatchGraph build_gamma(const CandidateSet& candidates) {
    MatchGraph graph{2 * candidates.size(), {}};
    for (const auto& adj : candidates.adjacencies())
        graph.add_edge(CandidateSet::vertex(adj.m1, adj.a), CandidateSet::vertex(adj.m2, adj.b), adj.weight());
    return graph;
}

namespace {

bool alive(const std::vector<bool>& mask, std::size_t i) { return mask.empty() || mask[i]; }

double potential_masked(const CandidateSet& cs, std::uint32_t m, const std::vector<bool>& adjacency_alive) {
    double best[2] = {0.0, 0.0};
    double self = 0.0;
    for (std::uint32_t side = 0; side < 2; ++side) {
        for (auto k : cs.incident(2 * m + side)) {
            if (!alive(adjacency_alive, k)) continue;
            const auto& adj = cs.adjacencies()[k];
            if (adj.self_loop())
                self = std::max(self, adj.weight());
            else
                best[side] = std::max(best[side], adj.weight());
        }
    }
    return std::max(best[0] + best[1], self);
}

}  // namespace

double potential(const CandidateSet& candidates, std::uint32_t m) { return potential_masked(candidates, m, {}); }

std::vector<double> potentials(const CandidateSet& candidates) {
    std::vector<double> out(candidates.size());
    for (std::uint32_t m = 0; m < candidates.size(); ++m) out[m] = potential(candidates, m);
    return out;
}

namespace {

struct Place {
    std::uint32_t chromosome = 0;
    std::uint32_t offset = 0;
    auto operator<=>(const Place&) const = default;
};

// Chromosome lengths and shapes of genome x, recovered from the extant
// gene table (linear chromosomes start with a telomere).
struct Layout {
    std::vector<std::uint32_t> length;
    std::vector<bool> circular;
};

Layout layout_of(const CandidateSet& cs, std::size_t x) {
    Layout layout;
    const auto& positions = cs.positions(x);
    const auto& names = cs.gene_names(x);
    for (std::size_t g = 0; g < positions.size(); ++g) {
        const auto& p = positions[g];
        if (p.chromosome >= layout.length.size()) {
            layout.length.resize(p.chromosome + 1, 0);
            layout.circular.resize(p.chromosome + 1, true);
        }
        layout.length[p.chromosome] = std::max(layout.length[p.chromosome], p.offset + 1);
        if (p.offset == 0 && names[g].front() == telomere_marker) layout.circular[p.chromosome] = false;
    }
    return layout;
}

Place place_of(const CandidateSet& cs, std::size_t x, std::uint32_t m) {
    const auto& p = cs.positions(x)[cs.genes()[m].genes[x]];
    return {p.chromosome, p.offset};
}

// Reading order of a contiguous set in one genome: indices into `genes`,
// or nullopt when not contiguous. `whole` is set for full circles.
std::optional<std::vector<std::size_t>> reading_order(const CandidateSet& cs, std::size_t x, const Layout& layout,
                                                      const std::vector<std::uint32_t>& genes, bool& whole) {
    std::vector<std::pair<Place, std::size_t>> places;
    for (std::size_t j = 0; j < genes.size(); ++j) places.push_back({place_of(cs, x, genes[j]), j});
    std::sort(places.begin(), places.end());
    const auto chromosome = places.front().first.chromosome;
    for (const auto& [p, j] : places)
        if (p.chromosome != chromosome) return std::nullopt;
    const std::size_t c = places.size();
    const std::uint32_t length = layout.length[chromosome];
    whole = false;
    std::size_t start = 0;
    if (!layout.circular[chromosome]) {
        if (places.back().first.offset - places.front().first.offset + 1 != c) return std::nullopt;
    } else if (c == length) {
        whole = true;
    } else {
        std::size_t gaps = 0;
        for (std::size_t j = 0; j < c; ++j) {
            const auto here = places[j].first.offset;
            const auto next = places[(j + 1) % c].first.offset;
            if ((here + 1) % length != next) {
                ++gaps;
                start = (j + 1) % c;
            }
        }
        if (gaps != 1) return std::nullopt;
    }
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < c; ++j) order.push_back(places[(start + j) % c].second);
    return order;
}

}  // namespace

std::optional<SegmentKind> classify_segment(const CandidateSet& candidates, const std::vector<std::uint32_t>& genes) {
    if (genes.empty()) return std::nullopt;
    for (std::size_t p = 0; p < genes.size(); ++p)
        for (std::size_t q = p + 1; q < genes.size(); ++q)
            if (genes[p] == genes[q] || candidates.conflicting(genes[p], genes[q])) return std::nullopt;

    std::array<std::vector<std::size_t>, genome_count> orders;
    std::array<bool, genome_count> whole{};
    std::array<Layout, genome_count> layouts;
    for (std::size_t x = 0; x < genome_count; ++x) {
        layouts[x] = layout_of(candidates, x);
        auto order = reading_order(candidates, x, layouts[x], genes, whole[x]);
        if (!order) return std::nullopt;
        orders[x] = std::move(*order);
    }
    const std::size_t c = genes.size();

    // run: consecutive in every genome along the G order, one direction each
    bool run = true;
    for (std::size_t x = 1; x < genome_count && run; ++x) {
        const auto& layout = layouts[x];
        bool up = true, down = true;
        for (std::size_t j = 0; j + 1 < c; ++j) {
            const auto a = place_of(candidates, x, genes[orders[0][j]]);
            const auto b = place_of(candidates, x, genes[orders[0][j + 1]]);
            const auto len = layout.length[a.chromosome];
            const bool circ = layout.circular[a.chromosome];
            const auto next = circ ? (a.offset + 1) % len : a.offset + 1;
            const auto prev = circ ? (a.offset + len - 1) % len : a.offset - 1;
            up = up && b.offset == next;
            down = down && b.offset == prev;
        }
        run = up || down;
    }
    if (run) return SegmentKind::run;

    // framed: same two end genes everywhere, same relative orientation
    if (c >= 2 && !whole[0] && !whole[1] && !whole[2]) {
        const auto left0 = genes[orders[0].front()];
        const auto right0 = genes[orders[0].back()];
        const auto ma = std::min(left0, right0), mb = std::max(left0, right0);
        bool framed = true;
        std::optional<std::pair<bool, bool>> relative;
        for (std::size_t x = 0; x < genome_count && framed; ++x) {
            const auto left = genes[orders[x].front()];
            const auto right = genes[orders[x].back()];
            if (std::min(left, right) != ma || std::max(left, right) != mb) {
                framed = false;
                break;
            }
            const bool flip = left != ma;  // read so that ma comes first
            const auto& pos = candidates.positions(x);
            const bool fa = pos[candidates.genes()[ma].genes[x]].forward != flip;
            const bool fb = pos[candidates.genes()[mb].genes[x]].forward != flip;
            if (!relative)
                relative = std::make_pair(fa, fb);
            else if (*relative != std::make_pair(fa, fb))
                framed = false;
        }
        if (framed) return SegmentKind::framed;
    }
    return SegmentKind::ic_free;
}

namespace {

constexpr std::uint32_t no_vertex = UINT32_MAX;

// Partner vertex across an adjacency conserved in all three genomes.
std::uint32_t strong_partner(const CandidateSet& cs, std::uint32_t v, std::uint32_t& adjacency) {
    for (auto k : cs.incident(v)) {
        const auto& adj = cs.adjacencies()[k];
        if (adj.multiplicity() != static_cast<int>(genome_count) || adj.self_loop()) continue;
        if (cs.genes()[adj.m1].telomere || cs.genes()[adj.m2].telomere) continue;
        const auto v1 = CandidateSet::vertex(adj.m1, adj.a);
        const auto v2 = CandidateSet::vertex(adj.m2, adj.b);
        adjacency = k;
        return v1 == v ? v2 : v1;
    }
    return no_vertex;
}

// Splits a gene chain into maximal internally conflict-free pieces of >= 2.
void split_chain(const CandidateSet& cs, const std::vector<std::uint32_t>& genes,
                 const std::vector<std::uint32_t>& links, std::vector<Segment>& out) {
    Segment current;
    auto flush = [&] {
        if (current.genes.size() >= 2) out.push_back(current);
        current = Segment{};
    };
    for (std::size_t j = 0; j < genes.size(); ++j) {
        bool clash = false;
        for (auto m : current.genes) clash = clash || cs.conflicting(m, genes[j]);
        if (clash) flush();
        if (!current.genes.empty()) current.links.push_back(links[j - 1]);
        current.genes.push_back(genes[j]);
    }
    flush();
}

}  // namespace

std::vector<Segment> detect_runs(const CandidateSet& candidates) {
    const auto n = static_cast<std::uint32_t>(candidates.size());
    std::vector<std::array<std::uint32_t, 2>> partner(n, {no_vertex, no_vertex});
    std::vector<std::array<std::uint32_t, 2>> link(n, {0, 0});
    for (std::uint32_t m = 0; m < n; ++m) {
        if (candidates.genes()[m].telomere) continue;
        for (std::uint32_t side = 0; side < 2; ++side)
            partner[m][side] = strong_partner(candidates, 2 * m + side, link[m][side]);
    }
    auto g_place = [&](std::uint32_t m) { return place_of(candidates, 0, m); };

    std::vector<bool> visited(n, false);
    std::vector<Segment> runs;
    for (std::uint32_t m = 0; m < n; ++m) {
        if (visited[m] || (partner[m][0] == no_vertex && partner[m][1] == no_vertex)) continue;
        // walk from m out of its head, then out of its tail
        auto walk = [&](std::uint32_t side, std::vector<std::uint32_t>& genes, std::vector<std::uint32_t>& links) {
            std::uint32_t cur = m;
            std::uint32_t exit = side;
            while (partner[cur][exit] != no_vertex) {
                const auto v = partner[cur][exit];
                links.push_back(link[cur][exit]);
                cur = v / 2;
                if (cur == m) return true;
                genes.push_back(cur);
                exit = 1 - (v & 1u);
            }
            return false;
        };
        std::vector<std::uint32_t> fwd_genes, fwd_links;
        const bool cycle = walk(1, fwd_genes, fwd_links);
        std::vector<std::uint32_t> genes, links;
        if (cycle) {
            genes.push_back(m);
            genes.insert(genes.end(), fwd_genes.begin(), fwd_genes.end());
            links = fwd_links;  // links[j] joins genes[j] and genes[j+1 mod k]
            const std::size_t k = genes.size();
            std::size_t r = 0;
            for (std::size_t j = 1; j < k; ++j)
                if (g_place(genes[j]) < g_place(genes[r])) r = j;
            std::vector<std::uint32_t> rg(k), rl(k);
            const bool reverse = g_place(genes[(r + k - 1) % k]) < g_place(genes[(r + 1) % k]);
            for (std::size_t j = 0; j < k; ++j) {
                if (!reverse) {
                    rg[j] = genes[(r + j) % k];
                    rl[j] = links[(r + j) % k];
                } else {
                    rg[j] = genes[(r + k - j) % k];
                    rl[j] = links[(r + 2 * k - j - 1) % k];
                }
            }
            genes = std::move(rg);
            links = std::move(rl);
        } else {
            std::vector<std::uint32_t> back_genes, back_links;
            walk(0, back_genes, back_links);
            genes.assign(back_genes.rbegin(), back_genes.rend());
            links.assign(back_links.rbegin(), back_links.rend());
            genes.push_back(m);
            genes.insert(genes.end(), fwd_genes.begin(), fwd_genes.end());
            links.insert(links.end(), fwd_links.begin(), fwd_links.end());
            if (g_place(genes.back()) < g_place(genes.front())) {
                std::reverse(genes.begin(), genes.end());
                std::reverse(links.begin(), links.end());
            }
        }
        for (auto g : genes) visited[g] = true;

        bool conflict_free = true;
        for (std::size_t p = 0; p < genes.size() && conflict_free; ++p)
            for (std::size_t q = p + 1; q < genes.size(); ++q)
                if (candidates.conflicting(genes[p], genes[q])) {
                    conflict_free = false;
                    break;
                }
        if (cycle && conflict_free) {
            runs.push_back({genes, SegmentKind::run, true, links});
        } else {
            if (cycle) links.pop_back();  // drop the closing link
            split_chain(candidates, genes, links, runs);
        }
    }
    std::stable_sort(runs.begin(), runs.end(), [&](const Segment& a, const Segment& b) {
        return std::make_pair(g_place(a.genes.front()), a.genes.front()) <
               std::make_pair(g_place(b.genes.front()), b.genes.front());
    });
    return runs;
}

double conflict_weight(const CandidateSet& candidates, const std::vector<std::uint32_t>& conflicts,
                       const std::vector<double>& weights, std::size_t cap) {
    if (conflicts.size() > cap)
        throw SegmentSkipped("candidate gene has " + std::to_string(conflicts.size()) +
                             " external conflicts (cap " + std::to_string(cap) + "); skip this segment");
    std::vector<std::size_t> order(conflicts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto p, auto q) { return weights[p] > weights[q]; });
    std::vector<double> suffix(order.size() + 1, 0.0);
    for (std::size_t j = order.size(); j-- > 0;) suffix[j] = suffix[j + 1] + weights[order[j]];

    double best = 0.0;
    std::vector<std::uint32_t> chosen;
    auto search = [&](auto&& self, std::size_t j, double acc) -> void {
        best = std::max(best, acc);
        if (j == order.size() || acc + suffix[j] <= best) return;
        const auto m = conflicts[order[j]];
        bool ok = true;
        for (auto c : chosen) ok = ok && !candidates.conflicting(c, m) && c != m;
        if (ok) {
            chosen.push_back(m);
            self(self, j + 1, acc + weights[order[j]]);
            chosen.pop_back();
        }
        self(self, j + 1, acc);
    };
    search(search, 0, 0.0);
    return best;
}

GammaPrime build_gamma_prime(const CandidateSet& candidates, const Segment& segment, std::size_t cap,
                             const std::vector<bool>& gene_alive, const std::vector<bool>& adjacency_alive) {
    GammaPrime gp;
    gp.graph.vertex_count = 2 * segment.genes.size();
    std::unordered_map<std::uint32_t, std::uint32_t> slot;
    for (std::uint32_t j = 0; j < segment.genes.size(); ++j) slot.emplace(segment.genes[j], j);

    std::vector<std::uint32_t> inside;
    for (auto m : segment.genes) {
        for (std::uint32_t side = 0; side < 2; ++side) {
            for (auto k : candidates.incident(2 * m + side)) {
                if (!alive(adjacency_alive, k)) continue;
                const auto& adj = candidates.adjacencies()[k];
                if (slot.count(adj.m1) && slot.count(adj.m2)) inside.push_back(k);
            }
        }
    }
    std::sort(inside.begin(), inside.end());
    inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
    for (auto k : inside) {
        const auto& adj = candidates.adjacencies()[k];
        gp.graph.add_edge(2 * slot[adj.m1] + (adj.a == End::head ? 1u : 0u),
                          2 * slot[adj.m2] + (adj.b == End::head ? 1u : 0u), adj.weight());
        gp.adjacency_of.push_back(k);
    }

    for (std::uint32_t j = 0; j < segment.genes.size(); ++j) {
        std::vector<std::uint32_t> conflicts;
        std::vector<double> weights;
        for (auto c : candidates.conflicts_of(segment.genes[j])) {
            if (!alive(gene_alive, c) || slot.count(c)) continue;
            conflicts.push_back(c);
            weights.push_back(potential_masked(candidates, c, adjacency_alive));
        }
        gp.graph.add_edge(2 * j, 2 * j + 1, conflict_weight(candidates, conflicts, weights, cap));
        gp.adjacency_of.push_back(GammaPrime::conflict_edge);
    }
    return gp;
}

namespace {

// Cuts a run at dead genes and dead links; pieces keep >= 2 genes.
std::vector<Segment> surviving_pieces(const Segment& run, const std::vector<bool>& gene_alive,
                                      const std::vector<bool>& adjacency_alive) {
    const std::size_t k = run.genes.size();
    std::vector<bool> cut(run.links.size(), false);  // cut[j]: link j unusable
    bool intact = true;
    for (std::size_t j = 0; j < run.links.size(); ++j) {
        const auto next = run.genes[(j + 1) % k];
        cut[j] = !gene_alive[run.genes[j]] || !gene_alive[next] || !adjacency_alive[run.links[j]];
        intact = intact && !cut[j];
    }
    if (intact) return {run};

    std::vector<std::uint32_t> genes, links;
    std::size_t start = 0;
    if (run.circular) {
        std::size_t first_cut = 0;
        while (!cut[first_cut]) ++first_cut;
        start = (first_cut + 1) % k;
    }
    std::vector<Segment> pieces;
    Segment current;
    current.kind = SegmentKind::run;
    auto flush = [&] {
        if (current.genes.size() >= 2) pieces.push_back(current);
        current = Segment{};
    };
    for (std::size_t step = 0; step < k; ++step) {
        const std::size_t j = (start + step) % k;
        const auto m = run.genes[j];
        if (!gene_alive[m]) {
            flush();
            continue;
        }
        current.genes.push_back(m);
        const bool last = step + 1 == k;
        const bool has_link = run.circular || j + 1 < k;
        if (last || !has_link || cut[j]) {
            flush();
        } else {
            current.links.push_back(run.links[j]);
        }
    }
    flush();
    return pieces;
}

}  // namespace

IcfSegResult icf_seg(const CandidateSet& candidates, const IcfSegOptions& options) {
    IcfSegResult result;
    const auto n = candidates.size();
    const auto& adjacencies = candidates.adjacencies();
    std::vector<bool> gene_alive(n, true), adjacency_alive(adjacencies.size(), true);

    auto kill_gene = [&](std::uint32_t m) {
        gene_alive[m] = false;
        for (std::uint32_t side = 0; side < 2; ++side)
            for (auto k : candidates.incident(2 * m + side)) adjacency_alive[k] = false;
    };

    for (const auto& run : detect_runs(candidates)) {
        for (const auto& piece : surviving_pieces(run, gene_alive, adjacency_alive)) {
            ++result.examined;
            GammaPrime gp;
            try {
                gp = build_gamma_prime(candidates, piece, options.conflict_cap, gene_alive, adjacency_alive);
            } catch (const SegmentSkipped&) {
                ++result.skipped;
                continue;
            }
            const double best = matching_weight(gp.graph, mwm(gp.graph));
            double internal = 0.0;
            for (auto k : piece.links) internal += adjacencies[k].weight();
            if (internal < best - score_tolerance) {
                ++result.rejected;
                continue;
            }

            AcceptedSegment accepted{piece.genes, piece.links, piece.circular, internal};
            std::sort(accepted.adjacencies.begin(), accepted.adjacencies.end());
            std::vector<std::uint32_t> used;
            for (auto k : piece.links) {
                used.push_back(CandidateSet::vertex(adjacencies[k].m1, adjacencies[k].a));
                used.push_back(CandidateSet::vertex(adjacencies[k].m2, adjacencies[k].b));
            }
            for (auto m : piece.genes)
                for (auto c : candidates.conflicts_of(m))
                    if (gene_alive[c]) kill_gene(c);
            for (auto v : used)
                for (auto k : candidates.incident(v)) adjacency_alive[k] = false;
            std::sort(used.begin(), used.end());
            for (auto m : piece.genes) {
                const bool tail_used = std::binary_search(used.begin(), used.end(), 2 * m);
                const bool head_used = std::binary_search(used.begin(), used.end(), 2 * m + 1);
                if (tail_used && head_used) kill_gene(m);
            }
            result.accepted_weight += internal;
            result.accepted_genes.insert(result.accepted_genes.end(), piece.genes.begin(), piece.genes.end());
            result.accepted_adjacencies.insert(result.accepted_adjacencies.end(), piece.links.begin(),
                                               piece.links.end());
            result.accepted.push_back(std::move(accepted));
        }
    }
    std::sort(result.accepted_genes.begin(), result.accepted_genes.end());
    std::sort(result.accepted_adjacencies.begin(), result.accepted_adjacencies.end());
    result.reduced = candidates.subset(gene_alive, adjacency_alive, &result.gene_map, &result.adjacency_map);
    return result;
}

MedianSolution merge_solution(const CandidateSet& candidates, const IcfSegResult& seg, const MedianSolution& reduced) {
    MedianSolution out;
    out.adjacencies = seg.accepted_adjacencies;
    for (auto k : reduced.adjacencies) out.adjacencies.push_back(seg.adjacency_map[k]);
    std::sort(out.adjacencies.begin(), out.adjacencies.end());
    out.genes = seg.accepted_genes;
    for (auto m : reduced.genes) out.genes.push_back(seg.gene_map[m]);
    std::sort(out.genes.begin(), out.genes.end());
    out.genes.erase(std::unique(out.genes.begin(), out.genes.end()), out.genes.end());
    for (auto k : out.adjacencies) out.objective += candidates.adjacencies()[k].weight();
    out.bound = seg.accepted_weight + reduced.bound;
    out.nodes = reduced.nodes;
    out.status = reduced.status;
    if (out.status == SolveStatus::empty && !out.adjacencies.empty()) out.status = SolveStatus::optimal;
    if (out.status == SolveStatus::optimal) out.bound = out.objective;
    return out;
}

}  // namespace ffmedian
