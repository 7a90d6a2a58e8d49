#include "ffmedian/hardness.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ffmedian {

namespace {

bool valid_label(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') return false;
    return true;
}

}  // namespace

BoundedGraph BoundedGraph::build(std::vector<std::string> vertices, std::vector<Edge> edges) {
    BoundedGraph g;
    std::set<std::string> seen;
    for (const auto& v : vertices) {
        if (!valid_label(v)) throw InputError("invalid vertex label '" + v + "'");
        if (!seen.insert(v).second) throw InputError("duplicate vertex '" + v + "'");
    }
    g.adjacency_.resize(vertices.size());
    for (auto& [u, v] : edges) {
        if (u >= vertices.size() || v >= vertices.size()) throw InputError("edge refers to an unknown vertex");
        if (u == v) throw InputError("self loop at vertex " + vertices[u]);
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (edges[k] == edges[k - 1])
            throw InputError("repeated edge " + vertices[edges[k].first] + " " + vertices[edges[k].second]);
    for (auto [u, v] : edges) {
        g.adjacency_[u].push_back(v);
        g.adjacency_[v].push_back(u);
    }
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (g.adjacency_[v].size() > 3)
            throw InputError("vertex " + vertices[v] + " has degree " + std::to_string(g.adjacency_[v].size()) +
                             " (at most 3 allowed)");
        std::sort(g.adjacency_[v].begin(), g.adjacency_[v].end());
    }
    g.vertices_ = std::move(vertices);
    g.edges_ = std::move(edges);
    return g;
}

bool BoundedGraph::adjacent(std::uint32_t u, std::uint32_t v) const {
    const auto& n = adjacency_[u];
    return std::binary_search(n.begin(), n.end(), v);
}

bool BoundedGraph::independent(const std::vector<std::uint32_t>& set) const {
    for (std::size_t j = 0; j < set.size(); ++j)
        for (std::size_t k = j + 1; k < set.size(); ++k)
            if (set[j] == set[k] || adjacent(set[j], set[k])) return false;
    return true;
}

BoundedGraph read_graph(std::istream& in, const std::string& source) {
    std::vector<std::string> vertices;
    std::map<std::string, std::uint32_t> index;
    std::vector<BoundedGraph::Edge> edges;
    auto id = [&](const std::string& label) {
        auto [it, fresh] = index.emplace(label, static_cast<std::uint32_t>(vertices.size()));
        if (fresh) vertices.push_back(label);
        return it->second;
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream words(line);
        std::vector<std::string> tokens;
        for (std::string w; words >> w;) tokens.push_back(w);
        if (tokens.empty()) continue;
        if (tokens.size() > 2)
            throw InputError(source + ":" + std::to_string(lineno) + ": expected 'u<TAB>v' or a single vertex");
        for (const auto& t : tokens)
            if (!valid_label(t)) throw InputError(source + ":" + std::to_string(lineno) + ": invalid vertex label '" + t + "'");
        auto u = id(tokens[0]);
        if (tokens.size() == 2) edges.push_back({u, id(tokens[1])});
    }
    try {
        return BoundedGraph::build(std::move(vertices), std::move(edges));
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

BoundedGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open graph file " + path);
    return read_graph(in, path);
}

void write_graph(std::ostream& out, const BoundedGraph& graph) {
    // vertex lines first so that reading back keeps the vertex order
    for (const auto& v : graph.vertices()) out << v << '\n';
    for (auto [u, v] : graph.edges()) out << graph.vertices()[u] << '\t' << graph.vertices()[v] << '\n';
}

BoundedGraph example_graph() {
    return BoundedGraph::build({"a", "b", "c", "d"}, {{0, 1}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

BoundedGraph random_bounded_graph(std::uint64_t seed, std::size_t n, double p) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> labels;
    for (std::size_t v = 0; v < n; ++v) labels.push_back("v" + std::to_string(v));
    const double scale = 18446744073709551616.0;  // 2^64
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<BoundedGraph::Edge> edges;
        std::vector<int> degree(n, 0);
        bool ok = true;
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = u + 1; v < n; ++v)
                if (static_cast<double>(rng()) < p * scale) {
                    edges.push_back({u, v});
                    ok = ok && ++degree[u] <= 3 && ++degree[v] <= 3;
                }
        if (ok) return BoundedGraph::build(labels, edges);
    }
    throw std::runtime_error("no degree-3 graph drawn; lower the edge probability");
}

std::vector<int> edge_coloring(const BoundedGraph& graph) {
    const auto& edges = graph.edges();
    std::vector<int> color(edges.size(), -1);
    // used[v] bitmask of colours at v
    std::vector<unsigned> used(graph.vertex_count(), 0);
    auto assign = [&](auto&& self, std::size_t k) -> bool {
        if (k == edges.size()) return true;
        auto [u, v] = edges[k];
        for (int c = 0; c < 4; ++c) {
            const unsigned bit = 1u << c;
            if ((used[u] | used[v]) & bit) continue;
            used[u] |= bit;
            used[v] |= bit;
            color[k] = c;
            if (self(self, k + 1)) return true;
            used[u] &= ~bit;
            used[v] &= ~bit;
        }
        color[k] = -1;
        return false;
    };
    if (!assign(assign, 0)) throw std::logic_error("no 4-edge-colouring found");
    return color;
}

const std::vector<std::uint32_t>& ReductionInstance::xi(std::size_t x, const std::string& gene) const {
    static const std::vector<std::uint32_t> none;
    auto it = association[x].find(gene);
    return it == association[x].end() ? none : it->second;
}

ReductionInstance reduce_mis(const BoundedGraph& graph) {
    ReductionInstance r;
    r.graph = graph;
    r.colors = edge_coloring(graph);
    const auto& names = graph.vertices();
    const std::array<std::string, 3> labels{"G", "H", "I"};
    const std::array<std::string, 3> prefix{"g", "h", "i"};

    std::array<std::vector<ChromosomeSpec>, 3> specs;
    // per vertex and genome, associated genes in order of creation
    std::vector<std::array<std::vector<std::string>, 3>> owned(graph.vertex_count());
    std::array<std::vector<std::string>, 3> empty_genes;

    auto two_gene = [](std::string id, std::string a, std::string b) {
        return ChromosomeSpec{std::move(id), Shape::circular, {{std::move(a), true}, {std::move(b), true}}};
    };

    for (std::uint32_t v = 0; v < graph.vertex_count(); ++v) {
        std::string g = "g_" + names[v], gb = "gbar_" + names[v];
        specs[0].push_back(two_gene("v_" + names[v], g, gb));
        owned[v][0] = {g, gb};
        r.association[0][g] = {v};
        r.association[0][gb] = {v};
    }

    for (std::size_t k = 0; k < graph.edges().size(); ++k) {
        auto [u, v] = graph.edges()[k];
        const std::size_t x = r.colors[k] < 2 ? 2 : 1;
        std::string tag = names[u] + "_" + names[v];
        std::string gene = prefix[x] + "e_" + tag, empty = prefix[x] + "e0_" + tag;
        specs[x].push_back(two_gene("e_" + tag, gene, empty));
        owned[u][x].push_back(gene);
        owned[v][x].push_back(gene);
        r.association[x][gene] = {u, v};
        empty_genes[x].push_back(empty);
    }

    for (std::size_t x = 1; x < 3; ++x)
        for (std::uint32_t v = 0; v < graph.vertex_count(); ++v)
            for (std::size_t k = owned[v][x].size() + 1; k <= 2; ++k) {
                std::string tag = names[v] + "_" + std::to_string(k);
                std::string gene = prefix[x] + "f_" + tag, empty = prefix[x] + "f0_" + tag;
                specs[x].push_back(two_gene("f_" + tag, gene, empty));
                owned[v][x].push_back(gene);
                r.association[x][gene] = {v};
                empty_genes[x].push_back(empty);
            }

    for (std::size_t x = 0; x < 3; ++x)
        specs[x].push_back(two_gene("star", prefix[x] + "star", prefix[x] + "starbar"));

    std::vector<SimilarityEdge> edges;
    auto link = [&](std::size_t x, const std::string& a, std::size_t y, const std::string& b, double s) {
        edges.push_back({{labels[x], a}, {labels[y], b}, s});
    };
    for (std::uint32_t v = 0; v < graph.vertex_count(); ++v)
        for (std::size_t j = 0; j < 2; ++j) {
            const auto& g = owned[v][0][j];
            const auto& h = owned[v][1][j];
            const auto& i = owned[v][2][j];
            link(0, g, 1, h, 1.0);
            link(0, g, 2, i, 1.0);
            link(1, h, 2, i, 1.0);
        }
    for (const std::string bar : {"", "bar"}) {
        link(0, "gstar" + bar, 1, "hstar" + bar, 1.0);
        link(0, "gstar" + bar, 2, "istar" + bar, 1.0);
        link(1, "hstar" + bar, 2, "istar" + bar, 1.0);
    }
    empty_genes[0] = {"gstar", "gstarbar"};
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = x + 1; y < 3; ++y)
            for (const auto& a : empty_genes[x])
                for (const auto& b : empty_genes[y]) link(x, a, y, b, 0.25);

    for (std::size_t x = 0; x < 3; ++x) r.instance.genomes[x] = Genome::build(labels[x], specs[x]);
    r.instance.sigma = SimilarityGraph(std::move(edges));
    return r;
}

std::vector<std::uint32_t> backmap_solution(const ReductionInstance& reduction, const CandidateSet& candidates,
                                            const MedianSolution& solution) {
    std::set<std::uint32_t> out;
    for (auto k : solution.adjacencies) {
        const auto& adj = candidates.adjacencies()[k];
        if (!(adj.conserved & 1u)) continue;
        const auto& xi = reduction.xi(0, candidates.extant_name(0, adj.m1));
        out.insert(xi.begin(), xi.end());
    }
    return {out.begin(), out.end()};
}

std::size_t mis_bruteforce(const BoundedGraph& graph, std::size_t cap) {
    const std::size_t n = graph.vertex_count();
    if (n > cap)
        throw std::length_error("graph has " + std::to_string(n) + " vertices; brute force limited to " +
                                std::to_string(cap));
    std::vector<std::uint32_t> masks(n, 0);
    for (auto [u, v] : graph.edges()) {
        masks[u] |= 1u << v;
        masks[v] |= 1u << u;
    }
    // branch on the vertex of highest remaining degree; degree <= 1 is taken greedily
    auto best = [&](auto&& self, std::uint32_t alive) -> std::size_t {
        std::size_t taken = 0;
        while (alive) {
            int pick = -1, pick_degree = -1;
            bool reduced = false;
            for (std::uint32_t rest = alive; rest; rest &= rest - 1) {
                const int v = std::countr_zero(rest);
                const int d = std::popcount(masks[v] & alive);
                if (d <= 1) {
                    ++taken;
                    alive &= ~((1u << v) | masks[v]);
                    reduced = true;
                    break;
                }
                if (d > pick_degree) {
                    pick = v;
                    pick_degree = d;
                }
            }
            if (reduced) continue;
            const std::uint32_t without = alive & ~(1u << pick);
            const std::uint32_t with = alive & ~((1u << pick) | masks[pick]);
            return taken + std::max(self(self, without), 1 + self(self, with));
        }
        return taken;
    };
    return best(best, n == 32 ? ~0u : (1u << n) - 1);
}

void write_reduction(const ReductionInstance& reduction, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw InputError("cannot write " + (fs::path(dir) / name).string());
        return out;
    };
    {
        auto out = open("graph.tsv");
        write_graph(out, reduction.graph);
    }
    {
        auto out = open("genomes.tsv");
        for (const auto& g : reduction.instance.genomes) write_genome(out, g);
    }
    {
        auto out = open("similarities.tsv");
        write_similarity(out, reduction.instance.sigma);
    }
    {
        auto out = open("association.tsv");
        const auto& names = reduction.graph.vertices();
        for (std::size_t x = 0; x < genome_count; ++x)
            for (const auto& [gene, vertices] : reduction.association[x]) {
                out << reduction.instance.genomes[x].label() << '\t' << gene << '\t';
                for (std::size_t j = 0; j < vertices.size(); ++j) out << (j ? "," : "") << names[vertices[j]];
                out << '\n';
            }
    }
}

ReductionInstance read_reduction(const std::string& dir) {
    namespace fs = std::filesystem;
    ReductionInstance r;
    r.graph = read_graph_file((fs::path(dir) / "graph.tsv").string());
    auto genomes = read_genome_file((fs::path(dir) / "genomes.tsv").string());
    if (genomes.size() != genome_count) throw InputError(dir + ": genomes.tsv must hold three genomes");
    for (std::size_t x = 0; x < genome_count; ++x) r.instance.genomes[x] = std::move(genomes[x]);
    r.instance.sigma = read_similarity_file((fs::path(dir) / "similarities.tsv").string());
    r.colors = edge_coloring(r.graph);

    std::map<std::string, std::uint32_t> vertex;
    for (std::uint32_t v = 0; v < r.graph.vertex_count(); ++v) vertex[r.graph.vertices()[v]] = v;
    const auto path = (fs::path(dir) / "association.tsv").string();
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string label, gene, list;
        if (!std::getline(fields, label, '\t') || !std::getline(fields, gene, '\t') || !std::getline(fields, list))
            throw InputError(path + ":" + std::to_string(lineno) + ": expected genome, gene and vertex list");
        std::size_t x = genome_count;
        for (std::size_t y = 0; y < genome_count; ++y)
            if (r.instance.genomes[y].label() == label) x = y;
        if (x == genome_count) throw InputError(path + ":" + std::to_string(lineno) + ": unknown genome " + label);
        std::istringstream items(list);
        std::vector<std::uint32_t> vs;
        for (std::string item; std::getline(items, item, ',');) {
            auto it = vertex.find(item);
            if (it == vertex.end()) throw InputError(path + ":" + std::to_string(lineno) + ": unknown vertex " + item);
            vs.push_back(it->second);
        }
        r.association[x][gene] = std::move(vs);
    }
    return r;
}

bool ReductionCheck::holds() const {
    return median.status == SolveStatus::optimal && score == static_cast<double>(mis) && backmapped.size() == mis &&
           independent && star_adjacencies && associations;
}

ReductionCheck verify_reduction(const ReductionInstance& reduction, const SolveOptions& options) {
    ReductionCheck check;
    check.mis = mis_bruteforce(reduction.graph);
    auto cs = build_candidates(reduction.instance);
    auto model = build_ilp(cs);
    check.median = solve_branch_and_bound(model, options);
    check.score = check.median.objective / 2 - 3;
    check.backmapped = backmap_solution(reduction, cs, check.median);
    check.independent = reduction.graph.independent(check.backmapped);

    int star = 0;
    for (auto k : check.median.adjacencies) {
        const auto& adj = cs.adjacencies()[k];
        const auto& n1 = cs.extant_name(0, adj.m1);
        const auto& n2 = cs.extant_name(0, adj.m2);
        if (adj.conserved == 7 && n1.starts_with("gstar") && n2.starts_with("gstar") &&
            cs.extant_name(1, adj.m1).starts_with("hstar") && cs.extant_name(2, adj.m1).starts_with("istar"))
            ++star;
    }
    check.star_adjacencies = star == 2;

    int unassociated = 0;
    check.associations = true;
    for (auto m : check.median.genes) {
        const auto& g = reduction.xi(0, cs.extant_name(0, m));
        const auto& h = reduction.xi(1, cs.extant_name(1, m));
        const auto& i = reduction.xi(2, cs.extant_name(2, m));
        if (g.empty() && h.empty() && i.empty()) {
            ++unassociated;
            continue;
        }
        std::vector<std::uint32_t> common;
        std::set_intersection(h.begin(), h.end(), i.begin(), i.end(), std::back_inserter(common));
        if (g.size() != 1 || common != g) check.associations = false;
    }
    if (unassociated > 2) check.associations = false;
    return check;
}

}  // namespace ffmedian
