#include "ffmedian/evaluation.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace ffmedian {

GenePair make_pair_of(const GeneId& a, const GeneId& b) { return a < b ? GenePair{a, b} : GenePair{b, a}; }

void TruthPairs::add(const GeneId& a, const GeneId& b) {
    universe.insert(a);
    universe.insert(b);
    pairs.insert(make_pair_of(a, b));
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

GeneId checked_id(const std::string& token, const std::string& where) {
    auto id = parse_gene_id(token);
    if (id.genome.empty() || id.name.empty()) throw InputError(where + ": expected 'genome:gene', got '" + token + "'");
    return id;
}

}  // namespace

TruthPairs read_truth_pairs(std::istream& in, const std::string& source) {
    TruthPairs truth;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = source + ":" + std::to_string(lineno);
        if (!line.empty() && line[0] == '#') continue;
        auto f = split_fields(line);
        if (f.empty()) continue;
        if (f.size() > 2) throw InputError(where + ": expected 'geneA<TAB>geneB'");
        auto a = checked_id(f[0], where);
        if (f.size() == 1) {
            truth.universe.insert(a);
            continue;
        }
        auto b = checked_id(f[1], where);
        if (a.genome == b.genome) throw InputError(where + ": pair within one genome");
        truth.add(a, b);
    }
    return truth;
}

TruthPairs read_truth_pairs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open truth file " + path);
    return read_truth_pairs(in, path);
}

EvalReport precision_recall_pairs(const std::set<GenePair>& predicted, const TruthPairs& truth, bool strict) {
    EvalReport r;
    std::size_t matched = 0;
    for (const auto& p : predicted) {
        if (!truth.universe.count(p.first) || !truth.universe.count(p.second)) {
            if (strict)
                throw InputError("predicted pair " + p.first.str() + " " + p.second.str() +
                                 " involves a gene outside the truth universe");
            ++r.ignored;
            continue;
        }
        if (truth.pairs.count(p)) {
            ++r.tp;
            ++matched;
        } else {
            ++r.fp;
        }
    }
    r.fn = truth.pairs.size() - matched;
    r.precision_vacuous = r.tp + r.fp == 0;
    r.recall_vacuous = r.tp + r.fn == 0;
    r.precision = r.precision_vacuous ? 1.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    r.recall = r.recall_vacuous ? 1.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    return r;
}

std::set<GenePair> induced_pairs(const std::vector<OrthologTriple>& predicted) {
    std::set<GenePair> out;
    for (const auto& t : predicted)
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t y = x + 1; y < 3; ++y) out.insert(make_pair_of(t[x], t[y]));
    return out;
}

EvalReport precision_recall(const std::vector<OrthologTriple>& predicted, const TruthPairs& truth, bool strict) {
    return precision_recall_pairs(induced_pairs(predicted), truth, strict);
}

const char* to_string(Agreement a) {
    switch (a) {
    case Agreement::agree: return "agree";
    case Agreement::compatible: return "compatible";
    case Agreement::disagree: return "disagree";
    }
    return "?";
}

TruthMap::TruthMap(std::map<GeneId, std::string> groups) : groups_(std::move(groups)) {
    for (const auto& [gene, group] : groups_) ++counts_[{group, gene.genome}];
}

const std::string* TruthMap::group(const GeneId& gene) const {
    auto it = groups_.find(gene);
    return it == groups_.end() ? nullptr : &it->second;
}

std::size_t TruthMap::members_in(const std::string& group, const std::string& label) const {
    auto it = counts_.find({group, label});
    return it == counts_.end() ? 0 : it->second;
}

TruthMap read_groups(std::istream& in, const std::string& source) {
    std::map<GeneId, std::string> groups;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = source + ":" + std::to_string(lineno);
        if (!line.empty() && line[0] == '#') continue;
        auto f = split_fields(line);
        if (f.empty()) continue;
        if (f.size() != 2) throw InputError(where + ": expected 'gene<TAB>group_id'");
        auto id = checked_id(f[0], where);
        auto [it, fresh] = groups.emplace(id, f[1]);
        if (!fresh && it->second != f[1]) throw InputError(where + ": gene " + f[0] + " listed in two groups");
    }
    return TruthMap(std::move(groups));
}

TruthMap read_groups_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open group file " + path);
    return read_groups(in, path);
}

Agreement classify(const OrthologTriple& triple, const TruthMap& reference) {
    std::array<const std::string*, 3> g{};
    for (std::size_t x = 0; x < 3; ++x) g[x] = reference.group(triple[x]);
    if (g[0] && g[1] && g[2] && *g[0] == *g[1] && *g[1] == *g[2]) return Agreement::agree;
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = 0; y < 3; ++y) {
            if (x == y || !g[x] || !g[y] || *g[x] == *g[y]) continue;
            // y itself is not in x's group, so any member of genome(y) is another gene
            if (reference.members_in(*g[x], triple[y].genome) > 0) return Agreement::disagree;
        }
    return Agreement::compatible;
}

ClassCounts classify_vs_reference(const std::vector<OrthologTriple>& predicted, const TruthMap& reference,
                                  std::vector<Agreement>* classes) {
    ClassCounts counts;
    if (classes) classes->clear();
    for (const auto& t : predicted) {
        auto a = classify(t, reference);
        if (classes) classes->push_back(a);
        switch (a) {
        case Agreement::agree: ++counts.agree; break;
        case Agreement::compatible: ++counts.compatible; break;
        case Agreement::disagree: ++counts.disagree; break;
        }
    }
    return counts;
}

double robustness(const std::vector<std::vector<OrthologTriple>>& runs, const std::string& x_label,
                  const std::string& y_label, const std::vector<std::set<GeneId>>& universes) {
    if (runs.size() < 2) throw std::invalid_argument("robustness needs at least two runs");
    if (!universes.empty() && universes.size() != runs.size())
        throw std::invalid_argument("one gene universe per run expected");
    std::vector<std::set<std::pair<GeneId, GeneId>>> predicted(runs.size());
    std::set<std::pair<GeneId, GeneId>> all;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const auto& t : runs[r]) {
            const GeneId* x = nullptr;
            const GeneId* y = nullptr;
            for (const auto& gene : t) {
                if (gene.genome == x_label) x = &gene;
                if (gene.genome == y_label) y = &gene;
            }
            if (!x || !y) throw std::invalid_argument("run " + std::to_string(r) + " lacks genome " + x_label + " or " + y_label);
            predicted[r].insert({*x, *y});
        }
        all.insert(predicted[r].begin(), predicted[r].end());
    }
    if (all.empty()) return 100.0;
    std::size_t robust = 0;
    for (const auto& p : all) {
        bool ok = true;
        for (std::size_t r = 0; r < runs.size() && ok; ++r) {
            if (!universes.empty() && (!universes[r].count(p.first) || !universes[r].count(p.second))) continue;
            ok = predicted[r].count(p) > 0;
        }
        robust += ok;
    }
    return 100.0 * static_cast<double>(robust) / static_cast<double>(all.size());
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= static_cast<double>(s.n);
    return s;
}

}  // namespace ffmedian
