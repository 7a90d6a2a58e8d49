#include "ffmedian/solver.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <chrono>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "ffmedian/matching.hpp"

namespace ffmedian {

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::empty: return "empty";
    }
    return "unknown";
}

namespace {

std::uint32_t vertex_of(std::uint32_t a, End end) { return 2 * a + (end == End::head ? 1u : 0u); }

bool conflicting(const IlpModel& model, std::uint32_t a1, std::uint32_t a2) {
    if (a1 == a2) return false;
    for (std::size_t x = 0; x < genome_count; ++x)
        if (model.a_rows[a1][x] == model.a_rows[a2][x]) return true;
    return false;
}

std::vector<std::uint32_t> endpoints_of(const IlpModel& model, const std::vector<std::uint32_t>& adjacencies) {
    std::vector<std::uint32_t> genes;
    for (auto k : adjacencies) {
        genes.push_back(model.b[k].a1);
        genes.push_back(model.b[k].a2);
    }
    std::sort(genes.begin(), genes.end());
    genes.erase(std::unique(genes.begin(), genes.end()), genes.end());
    return genes;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::uint32_t> parent_;
};

struct Component {
    std::vector<std::uint32_t> genes;        // global a, sorted
    std::vector<std::uint32_t> adjacencies;  // global b, sorted
};

std::vector<Component> split_components(const IlpModel& model) {
    const std::size_t n = model.a_names.size();
    std::vector<bool> used(n, false);
    for (const auto& adj : model.b) used[adj.a1] = used[adj.a2] = true;
    UnionFind uf(n);
    for (const auto& adj : model.b) uf.unite(adj.a1, adj.a2);
    for (const auto& rows : model.c01) {
        for (const auto& row : rows) {
            std::uint32_t first = UINT32_MAX;
            for (auto m : row.members) {
                if (!used[m]) continue;
                if (first == UINT32_MAX)
                    first = m;
                else
                    uf.unite(first, m);
            }
        }
    }
    std::unordered_map<std::uint32_t, std::size_t> slot;
    std::vector<Component> components;
    for (std::uint32_t m = 0; m < n; ++m) {
        if (!used[m]) continue;
        auto [it, inserted] = slot.emplace(uf.find(m), components.size());
        if (inserted) components.emplace_back();
        components[it->second].genes.push_back(m);
    }
    for (std::uint32_t k = 0; k < model.b.size(); ++k)
        components[slot.at(uf.find(model.b[k].a1))].adjacencies.push_back(k);
    return components;
}

struct ComponentResult {
    std::vector<std::uint32_t> adjacencies;  // global b
    double value = 0.0;
    double bound = 0.0;
    bool optimal = false;
    std::size_t nodes = 0;
};

enum : std::uint8_t { free_gene = 0, excluded_gene = 1, included_gene = 2 };

// Branch-and-bound over one connected component, with local indices.
class ComponentSearch {
public:
    ComponentSearch(const IlpModel& model, const Component& component, const SolveOptions& options,
                    std::chrono::steady_clock::time_point deadline, bool has_deadline);

    ComponentResult run();

private:
    struct LocalAdjacency {
        std::uint32_t u1, u2;
        End e1, e2;
        double weight;
        std::uint32_t global;
    };
    struct Group {
        std::uint32_t cu, cv;
        std::vector<std::uint32_t> adjacencies;  // local, heaviest first
    };
    struct Node {
        std::vector<std::uint8_t> state;
        double bound;
    };

    double contracted_bound(std::size_t x, const std::vector<std::uint8_t>& state,
                            std::vector<std::uint32_t>& realized) const;
    void consider(const std::vector<std::uint32_t>& adjacencies, double value);
    void greedy_start();

    const SolveOptions& options_;
    std::chrono::steady_clock::time_point deadline_;
    bool has_deadline_;
    std::size_t n_ = 0;
    std::vector<LocalAdjacency> adjacencies_;
    std::vector<std::vector<std::uint32_t>> conflicts_;
    std::array<std::vector<Group>, genome_count> groups_;
    std::array<std::uint32_t, genome_count> row_count_{};
    std::vector<std::uint32_t> incumbent_;
    double incumbent_value_ = 0.0;
};

ComponentSearch::ComponentSearch(const IlpModel& model, const Component& component, const SolveOptions& options,
                                 std::chrono::steady_clock::time_point deadline, bool has_deadline)
    : options_(options), deadline_(deadline), has_deadline_(has_deadline), n_(component.genes.size()) {
    auto local = [&](std::uint32_t a) {
        return static_cast<std::uint32_t>(std::lower_bound(component.genes.begin(), component.genes.end(), a) -
                                          component.genes.begin());
    };
    for (auto k : component.adjacencies) {
        const auto& adj = model.b[k];
        adjacencies_.push_back({local(adj.a1), local(adj.a2), adj.end1, adj.end2, adj.coefficient, k});
    }

    std::array<std::vector<std::uint32_t>, genome_count> rows;
    for (std::size_t x = 0; x < genome_count; ++x) {
        std::unordered_map<std::uint32_t, std::uint32_t> renumber;
        std::vector<std::vector<std::uint32_t>> members;
        for (std::uint32_t u = 0; u < n_; ++u) {
            auto [it, inserted] = renumber.emplace(model.a_rows[component.genes[u]][x], members.size());
            if (inserted) members.emplace_back();
            members[it->second].push_back(u);
            rows[x].push_back(it->second);
        }
        row_count_[x] = static_cast<std::uint32_t>(members.size());
        if (x == 0) conflicts_.assign(n_, {});
        for (const auto& group : members)
            for (auto u : group)
                for (auto v : group)
                    if (u != v) conflicts_[u].push_back(v);
    }
    for (auto& list : conflicts_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    for (std::size_t x = 0; x < genome_count; ++x) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> by_pair;
        for (std::uint32_t k = 0; k < adjacencies_.size(); ++k) {
            const auto& adj = adjacencies_[k];
            auto cu = 2 * rows[x][adj.u1] + (adj.e1 == End::head ? 1u : 0u);
            auto cv = 2 * rows[x][adj.u2] + (adj.e2 == End::head ? 1u : 0u);
            by_pair[std::minmax(cu, cv)].push_back(k);
        }
        for (auto& [pair, list] : by_pair) {
            std::sort(list.begin(), list.end(), [&](auto p, auto q) {
                if (adjacencies_[p].weight != adjacencies_[q].weight)
                    return adjacencies_[p].weight > adjacencies_[q].weight;
                return adjacencies_[p].global < adjacencies_[q].global;
            });
            groups_[x].push_back({pair.first, pair.second, std::move(list)});
        }
    }
}

double ComponentSearch::contracted_bound(std::size_t x, const std::vector<std::uint8_t>& state,
                                         std::vector<std::uint32_t>& realized) const {
    MatchGraph graph{2 * static_cast<std::size_t>(row_count_[x]), {}};
    std::vector<std::uint32_t> representative;
    for (const auto& group : groups_[x]) {
        for (auto k : group.adjacencies) {
            const auto& adj = adjacencies_[k];
            if (state[adj.u1] == excluded_gene || state[adj.u2] == excluded_gene) continue;
            graph.add_edge(group.cu, group.cv, adj.weight);
            representative.push_back(k);
            break;
        }
    }
    realized.clear();
    double value = 0.0;
    for (auto e : mwm(graph)) {
        realized.push_back(representative[e]);
        value += graph.edges[e].weight;
    }
    return value;
}

void ComponentSearch::consider(const std::vector<std::uint32_t>& adjacencies, double value) {
    if (value > incumbent_value_ + score_tolerance) {
        incumbent_value_ = value;
        incumbent_ = adjacencies;
    }
}

void ComponentSearch::greedy_start() {
    std::vector<double> best(2 * n_, 0.0), self(n_, 0.0);
    for (const auto& adj : adjacencies_) {
        if (adj.u1 == adj.u2) {
            self[adj.u1] = std::max(self[adj.u1], adj.weight);
            continue;
        }
        auto v1 = vertex_of(adj.u1, adj.e1);
        auto v2 = vertex_of(adj.u2, adj.e2);
        best[v1] = std::max(best[v1], adj.weight);
        best[v2] = std::max(best[v2], adj.weight);
    }
    std::vector<std::uint32_t> order(n_);
    std::iota(order.begin(), order.end(), 0u);
    std::vector<double> potential(n_);
    for (std::uint32_t u = 0; u < n_; ++u) potential[u] = std::max(best[2 * u] + best[2 * u + 1], self[u]);
    std::stable_sort(order.begin(), order.end(), [&](auto p, auto q) { return potential[p] > potential[q]; });
    std::vector<bool> picked(n_, false);
    for (auto u : order) {
        bool ok = true;
        for (auto v : conflicts_[u]) ok = ok && !picked[v];
        if (ok) picked[u] = true;
    }
    MatchGraph graph{2 * n_, {}};
    std::vector<std::uint32_t> origin;
    for (std::uint32_t k = 0; k < adjacencies_.size(); ++k) {
        const auto& adj = adjacencies_[k];
        if (!picked[adj.u1] || !picked[adj.u2]) continue;
        graph.add_edge(vertex_of(adj.u1, adj.e1), vertex_of(adj.u2, adj.e2), adj.weight);
        origin.push_back(k);
    }
    std::vector<std::uint32_t> chosen;
    double value = 0.0;
    for (auto e : mwm(graph)) {
        chosen.push_back(origin[e]);
        value += graph.edges[e].weight;
    }
    consider(chosen, value);
}

ComponentResult ComponentSearch::run() {
    ComponentResult result;
    greedy_start();

    std::vector<Node> stack;
    stack.push_back({std::vector<std::uint8_t>(n_, free_gene), std::numeric_limits<double>::infinity()});
    std::vector<std::uint32_t> realized, candidate, order;
    std::vector<std::uint8_t> in_realized(n_, 0), accepted(n_, 0);
    bool timed_out = false;

    while (!stack.empty()) {
        if (stack.back().bound <= incumbent_value_ + score_tolerance) {
            stack.pop_back();
            continue;
        }
        if (has_deadline_ && std::chrono::steady_clock::now() >= deadline_) {
            timed_out = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++result.nodes;

        double bound = std::numeric_limits<double>::infinity();
        bool pruned = false;
        for (std::size_t x = 0; x < genome_count; ++x) {
            double value = contracted_bound(x, node.state, candidate);
            if (value < bound) {
                bound = value;
                realized.swap(candidate);
            }
            if (bound <= incumbent_value_ + score_tolerance) {
                pruned = true;
                break;
            }
        }
        if (pruned) continue;

        order = realized;
        std::sort(order.begin(), order.end(), [&](auto p, auto q) {
            if (adjacencies_[p].weight != adjacencies_[q].weight)
                return adjacencies_[p].weight > adjacencies_[q].weight;
            return adjacencies_[p].global < adjacencies_[q].global;
        });
        for (auto k : order) in_realized[adjacencies_[k].u1] = in_realized[adjacencies_[k].u2] = 1;

        // feasible part of the relaxed solution
        std::vector<std::uint32_t> kept;
        double kept_value = 0.0;
        for (auto k : order) {
            const auto& adj = adjacencies_[k];
            bool ok = true;
            for (auto u : {adj.u1, adj.u2}) {
                if (accepted[u]) continue;
                for (auto v : conflicts_[u]) ok = ok && !accepted[v];
            }
            if (adj.u1 != adj.u2 && !accepted[adj.u1] && !accepted[adj.u2]) {
                for (auto v : conflicts_[adj.u1]) ok = ok && v != adj.u2;
            }
            if (!ok) continue;
            accepted[adj.u1] = accepted[adj.u2] = 1;
            kept.push_back(k);
            kept_value += adj.weight;
        }
        consider(kept, kept_value);

        std::uint32_t branch = UINT32_MAX;
        for (auto k : order) {
            for (auto u : {adjacencies_[k].u1, adjacencies_[k].u2}) {
                for (auto v : conflicts_[u]) {
                    if (in_realized[v]) {
                        branch = u;
                        break;
                    }
                }
                if (branch != UINT32_MAX) break;
            }
            if (branch != UINT32_MAX) break;
        }
        for (auto k : order) {
            in_realized[adjacencies_[k].u1] = in_realized[adjacencies_[k].u2] = 0;
            accepted[adjacencies_[k].u1] = accepted[adjacencies_[k].u2] = 0;
        }
        if (branch == UINT32_MAX) continue;  // relaxation is feasible, already recorded

        Node out{node.state, bound};
        out.state[branch] = excluded_gene;
        Node in{std::move(node.state), bound};
        in.state[branch] = included_gene;
        for (auto v : conflicts_[branch]) in.state[v] = excluded_gene;
        stack.push_back(std::move(out));
        stack.push_back(std::move(in));
        if (stack.size() > options_.max_open_nodes)
            throw std::runtime_error("branch-and-bound exceeded the open-node limit of " +
                                     std::to_string(options_.max_open_nodes));
    }

    for (auto k : incumbent_) result.adjacencies.push_back(adjacencies_[k].global);
    std::sort(result.adjacencies.begin(), result.adjacencies.end());
    result.value = incumbent_value_;
    result.optimal = !timed_out;
    result.bound = incumbent_value_;
    if (timed_out) {
        std::vector<std::uint32_t> scratch;
        for (const auto& node : stack) {
            double b = node.bound;
            // never evaluated (the root)
            if (std::isinf(b))
                for (std::size_t x = 0; x < genome_count; ++x) b = std::min(b, contracted_bound(x, node.state, scratch));
            result.bound = std::max(result.bound, b);
        }
    }
    return result;
}

}  // namespace

double objective_of(const IlpModel& model, const std::vector<std::uint32_t>& adjacencies) {
    double total = 0.0;
    for (auto k : adjacencies) total += model.b[k].coefficient;
    return total;
}

MedianSolution solve_branch_and_bound(const IlpModel& model, const SolveOptions& options) {
    MedianSolution solution;
    if (model.a_names.empty()) return solution;

    const auto start = std::chrono::steady_clock::now();
    const bool has_deadline = options.time_limit < 1e8;
    const auto deadline =
        has_deadline ? start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(std::max(0.0, options.time_limit)))
                     : start;

    const auto components = split_components(model);
    std::vector<ComponentResult> results(components.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= components.size()) return;
            try {
                results[c] = ComponentSearch(model, components[c], options, deadline, has_deadline).run();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, components.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    bool optimal = true;
    for (const auto& r : results) {
        solution.adjacencies.insert(solution.adjacencies.end(), r.adjacencies.begin(), r.adjacencies.end());
        solution.bound += r.bound;
        solution.nodes += r.nodes;
        optimal = optimal && r.optimal;
    }
    std::sort(solution.adjacencies.begin(), solution.adjacencies.end());
    solution.genes = endpoints_of(model, solution.adjacencies);
    solution.objective = objective_of(model, solution.adjacencies);
    solution.status = optimal ? SolveStatus::optimal : SolveStatus::feasible;
    if (optimal) solution.bound = solution.objective;
    return solution;
}

namespace {

// MWM over the extremities of `genes`, skipping vertices in `blocked`.
std::vector<std::uint32_t> match_extremities(const IlpModel& model, const std::vector<bool>& in_set,
                                             const std::vector<bool>& blocked) {
    MatchGraph graph{2 * model.a_names.size(), {}};
    std::vector<std::uint32_t> origin;
    for (std::uint32_t k = 0; k < model.b.size(); ++k) {
        const auto& adj = model.b[k];
        if (!in_set[adj.a1] || !in_set[adj.a2]) continue;
        auto v1 = vertex_of(adj.a1, adj.end1);
        auto v2 = vertex_of(adj.a2, adj.end2);
        if (blocked[v1] || blocked[v2]) continue;
        graph.add_edge(v1, v2, adj.coefficient);
        origin.push_back(k);
    }
    std::vector<std::uint32_t> chosen;
    for (auto e : mwm(graph)) chosen.push_back(origin[e]);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace

MedianSolution match_gene_set(const IlpModel& model, const std::vector<std::uint32_t>& genes) {
    std::vector<bool> in_set(model.a_names.size(), false);
    for (auto m : genes) in_set[m] = true;
    MedianSolution solution;
    solution.status = SolveStatus::optimal;
    solution.adjacencies = match_extremities(model, in_set, std::vector<bool>(2 * model.a_names.size(), false));
    solution.genes = endpoints_of(model, solution.adjacencies);
    solution.objective = solution.bound = objective_of(model, solution.adjacencies);
    return solution;
}

MedianSolution brute_force_median(const IlpModel& model, std::size_t cap, const std::vector<std::uint32_t>* forced) {
    const std::size_t n = model.a_names.size();
    if (n > cap)
        throw std::length_error("brute force refuses " + std::to_string(n) + " candidate genes (cap " +
                                std::to_string(cap) + ")");
    MedianSolution best;
    if (n == 0 && (!forced || forced->empty())) return best;

    std::vector<bool> blocked(2 * n, false);
    std::vector<std::uint32_t> required;
    double forced_value = 0.0;
    if (forced) {
        for (auto k : *forced) {
            const auto& adj = model.b[k];
            for (auto v : {vertex_of(adj.a1, adj.end1), vertex_of(adj.a2, adj.end2)}) {
                if (blocked[v]) throw std::invalid_argument("forced adjacencies share an extremity");
                blocked[v] = true;
            }
            required.push_back(adj.a1);
            required.push_back(adj.a2);
            forced_value += adj.coefficient;
        }
    }

    bool found = false;
    std::vector<bool> in_set(n, false);
    auto evaluate = [&] {
        for (auto m : required)
            if (!in_set[m]) return;
        auto chosen = match_extremities(model, in_set, blocked);
        const double value = objective_of(model, chosen) + forced_value;
        if (!found || value > best.objective + score_tolerance) {
            found = true;
            if (forced) chosen.insert(chosen.end(), forced->begin(), forced->end());
            std::sort(chosen.begin(), chosen.end());
            best.adjacencies = std::move(chosen);
            best.objective = value;
        }
    };
    auto extend = [&](auto&& self, std::uint32_t m) -> void {
        if (m == n) {
            evaluate();
            return;
        }
        self(self, m + 1);
        for (std::uint32_t other = 0; other < m; ++other)
            if (in_set[other] && conflicting(model, other, m)) return;
        in_set[m] = true;
        self(self, m + 1);
        in_set[m] = false;
    };
    extend(extend, 0);
    if (!found) throw std::invalid_argument("forced adjacencies do not fit any conflict-free median");
    best.genes = endpoints_of(model, best.adjacencies);
    best.objective = objective_of(model, best.adjacencies);
    best.bound = best.objective;
    best.status = SolveStatus::optimal;
    return best;
}

std::optional<std::string> check_feasible(const IlpModel& model, const MedianSolution& solution) {
    const std::size_t n = model.a_names.size();
    std::vector<bool> chosen(n, false);
    for (auto m : solution.genes) {
        if (m >= n) return "gene index out of range";
        chosen[m] = true;
    }
    for (std::size_t x = 0; x < genome_count; ++x) {
        for (const auto& row : model.c01[x]) {
            int count = 0;
            for (auto m : row.members) count += chosen[m];
            if (count > 1) return "C.01 violated at " + row.name;
        }
    }
    std::vector<int> degree(2 * n, 0);
    for (auto k : solution.adjacencies) {
        if (k >= model.b.size()) return "adjacency index out of range";
        const auto& adj = model.b[k];
        if (!chosen[adj.a1] || !chosen[adj.a2]) return "C.02 violated at " + model.b_names[k];
        if (++degree[vertex_of(adj.a1, adj.end1)] > 1 || ++degree[vertex_of(adj.a2, adj.end2)] > 1)
            return "C.03 violated at " + model.b_names[k];
    }
    return std::nullopt;
}

std::vector<double> model_potentials(const IlpModel& model) {
    const std::size_t n = model.a_names.size();
    std::vector<double> best(2 * n, 0.0), self(n, 0.0), out(n, 0.0);
    for (const auto& adj : model.b) {
        if (adj.self_loop()) {
            self[adj.a1] = std::max(self[adj.a1], adj.coefficient);
            continue;
        }
        auto v1 = vertex_of(adj.a1, adj.end1);
        auto v2 = vertex_of(adj.a2, adj.end2);
        best[v1] = std::max(best[v1], adj.coefficient);
        best[v2] = std::max(best[v2], adj.coefficient);
    }
    for (std::size_t m = 0; m < n; ++m) out[m] = std::max(best[2 * m] + best[2 * m + 1], self[m]);
    return out;
}

std::vector<Car> assemble_cars(const IlpModel& model, const MedianSolution& solution) {
    const std::size_t n = model.a_names.size();
    constexpr std::uint32_t none = UINT32_MAX;
    std::vector<std::uint32_t> partner(2 * n, none);
    std::vector<bool> telomere(n, false);
    std::vector<End> partner_end(2 * n, End::tail);
    for (const auto& adj : model.b) {
        if (adj.end1 == End::telomeric) telomere[adj.a1] = true;
        if (adj.end2 == End::telomeric) telomere[adj.a2] = true;
    }
    for (auto k : solution.adjacencies) {
        const auto& adj = model.b[k];
        auto v1 = vertex_of(adj.a1, adj.end1);
        auto v2 = vertex_of(adj.a2, adj.end2);
        partner[v1] = v2;
        partner[v2] = v1;
        partner_end[v1] = adj.end2;
        partner_end[v2] = adj.end1;
    }

    std::vector<bool> visited(n, false);
    std::vector<Car> cars;
    auto walk = [&](std::uint32_t m, End entry, bool circular) {
        Car car;
        car.circular = circular;
        const std::uint32_t start = m;
        bool first = true;
        while (true) {
            visited[m] = true;
            car.genes.push_back({m, entry != End::head});
            End exit;
            if (telomere[m]) {
                if (!first) break;
                exit = End::telomeric;
            } else {
                exit = entry == End::head ? End::tail : End::head;
            }
            first = false;
            const auto v = vertex_of(m, exit);
            if (partner[v] == none) break;
            const std::uint32_t next = partner[v] / 2;
            if (circular && next == start) break;
            entry = partner_end[v];
            m = next;
        }
        cars.push_back(std::move(car));
    };
    for (auto m : solution.genes) {
        if (visited[m]) continue;
        if (telomere[m]) {
            walk(m, End::telomeric, false);
        } else if (partner[vertex_of(m, End::tail)] == none) {
            walk(m, End::tail, false);
        } else if (partner[vertex_of(m, End::head)] == none) {
            walk(m, End::head, false);
        }
    }
    for (auto m : solution.genes)
        if (!visited[m]) walk(m, End::tail, true);
    return cars;
}

}  // namespace ffmedian
