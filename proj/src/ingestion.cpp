#include "ffmedian/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace ffmedian {

namespace {

double parse_number(std::string_view field, const std::string& where, const char* what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
        throw InputError(where + what + " '" + std::string(field) + "' is not a number");
    return value;
}

}  // namespace

void FilterParams::validate() const {
    if (!(f >= 0.0 && f <= 1.0)) throw InputError("stringency parameter f must lie in [0,1]");
    if (!(evalue_max >= 0.0)) throw InputError("e-value threshold must be non-negative");
}

std::vector<AlignmentHit> parse_hits(std::istream& in, const std::string& source, std::optional<double> evalue_max,
                                     const std::set<GeneId>* universe) {
    std::vector<AlignmentHit> hits;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw.front() == '#') continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        std::vector<std::string_view> fields;
        std::string_view line(raw);
        std::size_t start = 0;
        while (true) {
            auto pos = line.find('\t', start);
            fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        if (fields.size() != 12)
            throw InputError(where + "expected 12 tab-separated columns, got " + std::to_string(fields.size()));
        AlignmentHit hit;
        try {
            hit.query = parse_gene_id(fields[0]);
            hit.subject = parse_gene_id(fields[1]);
        } catch (const InputError& e) {
            throw InputError(where + e.what());
        }
        hit.evalue = parse_number(fields[10], where, "e-value");
        hit.bitscore = parse_number(fields[11], where, "bitscore");
        if (hit.evalue < 0.0) throw InputError(where + "negative e-value");
        if (hit.bitscore <= 0.0) throw InputError(where + "bitscore must be positive");
        if (universe) {
            for (const auto* id : {&hit.query, &hit.subject})
                if (!universe->count(*id)) throw InputError(where + "unknown gene id " + id->str());
        }
        if (evalue_max && hit.evalue > *evalue_max) continue;
        hits.push_back(std::move(hit));
    }
    return hits;
}

std::vector<AlignmentHit> read_hits_file(const std::string& path, std::optional<double> evalue_max,
                                         const std::set<GeneId>* universe) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open hits file " + path);
    return parse_hits(in, path, evalue_max, universe);
}

std::vector<AlignmentHit> stringency_filter(const std::vector<AlignmentHit>& hits, double f) {
    // best[(h, genome)] = best bitscore of a hit from h into that genome
    std::map<std::pair<GeneId, std::string>, double> best;
    for (const auto& hit : hits) {
        auto& slot = best[{hit.query, hit.subject.genome}];
        slot = std::max(slot, hit.bitscore);
    }
    std::vector<AlignmentHit> kept;
    for (const auto& hit : hits) {
        if (hit.query == hit.subject) {
            kept.push_back(hit);
            continue;
        }
        auto it = best.find({hit.subject, hit.query.genome});
        const double reference = it == best.end() ? 0.0 : it->second;
        if (hit.bitscore >= f * reference) kept.push_back(hit);
    }
    return kept;
}

SimilarityGraph rrbs_weights(const std::vector<AlignmentHit>& hits, bool require_reciprocal) {
    std::map<GeneId, double> self;
    std::map<std::pair<GeneId, GeneId>, double> directed;
    for (const auto& hit : hits) {
        if (hit.query == hit.subject) {
            auto& s = self[hit.query];
            s = std::max(s, hit.bitscore);
        } else if (hit.query.genome != hit.subject.genome) {
            auto& d = directed[{hit.query, hit.subject}];
            d = std::max(d, hit.bitscore);
        }
    }
    std::set<GeneId> missing;
    std::vector<SimilarityEdge> edges;
    for (const auto& [key, forward] : directed) {
        const auto& [g, h] = key;
        auto reverse = directed.find({h, g});
        if (reverse != directed.end() && h < g) continue;  // counted from the other side
        if (reverse == directed.end() && require_reciprocal) continue;
        auto sg = self.find(g);
        auto sh = self.find(h);
        if (sg == self.end()) missing.insert(g);
        if (sh == self.end()) missing.insert(h);
        if (sg == self.end() || sh == self.end()) continue;
        const double numerator = reverse == directed.end() ? 2.0 * forward : forward + reverse->second;
        const double score = std::clamp(numerator / (sg->second + sh->second), 0.0, 1.0);
        edges.push_back({g, h, score});
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id.str();
        throw InputError("missing self-hit bitscore for: " + list);
    }
    return SimilarityGraph(std::move(edges));
}

}  // namespace ffmedian
