#include "ffmedian/genome.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace ffmedian {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool skippable(std::string_view line) {
    auto first = line.find_first_not_of(" \t");
    return first == std::string_view::npos || line[first] == '#';
}

}  // namespace

char end_letter(End end) {
    switch (end) {
        case End::tail: return 't';
        case End::head: return 'h';
        case End::telomeric: return 'o';
    }
    return '?';
}

GeneId parse_gene_id(std::string_view token) {
    auto colon = token.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == token.size())
        throw InputError("gene id '" + std::string(token) + "' is not of the form genome:gene");
    return {std::string(token.substr(0, colon)), std::string(token.substr(colon + 1))};
}

Genome Genome::build(std::string label, const std::vector<ChromosomeSpec>& chromosomes) {
    if (label.empty()) throw InputError("genome label must not be empty");
    Genome genome;
    genome.label_ = std::move(label);

    std::set<std::string> chromosome_ids;
    auto add_gene = [&](std::string name, bool forward, Chromosome& chr) {
        if (!genome.index_.emplace(name, static_cast<GeneIndex>(genome.names_.size())).second)
            throw InputError("duplicate gene '" + name + "' in genome " + genome.label_);
        GeneIndex g = static_cast<GeneIndex>(genome.names_.size());
        genome.names_.push_back(std::move(name));
        genome.positions_.push_back({static_cast<std::uint32_t>(genome.chromosomes_.size()),
                                     static_cast<std::uint32_t>(chr.order.size()), forward});
        chr.order.push_back(g);
        chr.forward.push_back(forward);
    };

    for (const auto& spec : chromosomes) {
        if (spec.id.empty()) throw InputError("chromosome id must not be empty in genome " + genome.label_);
        if (!chromosome_ids.insert(spec.id).second)
            throw InputError("duplicate chromosome '" + spec.id + "' in genome " + genome.label_);
        Chromosome chr;
        chr.id = spec.id;
        chr.shape = spec.shape;
        if (spec.shape == Shape::linear) add_gene(std::string(1, telomere_marker) + spec.id + ".L", true, chr);
        for (const auto& gene : spec.genes) {
            if (gene.name.empty()) throw InputError("empty gene name in chromosome " + spec.id);
            if (gene.name.front() == telomere_marker) {
                if (spec.shape == Shape::circular)
                    throw InputError("telomere '" + gene.name + "' inside circular chromosome " + spec.id);
                throw InputError("telomere '" + gene.name + "' given explicitly in chromosome " + spec.id +
                                 " (telomeres are implicit)");
            }
            add_gene(gene.name, gene.forward, chr);
        }
        if (spec.shape == Shape::linear) add_gene(std::string(1, telomere_marker) + spec.id + ".R", true, chr);
        genome.chromosomes_.push_back(std::move(chr));
    }

    genome.partner_.assign(2 * genome.names_.size(), no_partner);
    auto left = [&](const Chromosome& chr, std::size_t k) {
        GeneIndex g = chr.order[k];
        if (genome.is_telomere(g)) return code(g, End::telomeric);
        return code(g, chr.forward[k] ? End::tail : End::head);
    };
    auto right = [&](const Chromosome& chr, std::size_t k) {
        GeneIndex g = chr.order[k];
        if (genome.is_telomere(g)) return code(g, End::telomeric);
        return code(g, chr.forward[k] ? End::head : End::tail);
    };
    auto link = [&](std::uint32_t x, std::uint32_t y) {
        genome.partner_[x] = y;
        genome.partner_[y] = x;
    };
    for (const auto& chr : genome.chromosomes_) {
        const std::size_t n = chr.order.size();
        for (std::size_t k = 0; k + 1 < n; ++k) link(right(chr, k), left(chr, k + 1));
        if (chr.shape == Shape::circular && n > 0) link(right(chr, n - 1), left(chr, 0));
    }
    return genome;
}

End Genome::extremity_end(std::uint32_t c) const {
    if (is_telomere(code_gene(c))) return End::telomeric;
    return (c & 1u) ? End::head : End::tail;
}

std::optional<GeneIndex> Genome::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t Genome::checked_code(const Extremity& e) const {
    if (e.gene.genome != label_)
        throw std::domain_error("extremity of " + e.gene.str() + " does not belong to genome " + label_);
    auto g = find(e.gene.name);
    if (!g) throw std::domain_error("gene " + e.gene.str() + " is absent from genome " + label_);
    if (is_telomere(*g) != (e.end == End::telomeric))
        throw std::domain_error("extremity end does not match gene kind for " + e.gene.str());
    return code(*g, e.end);
}

int Genome::indicator(const Extremity& e1, const Extremity& e2) const {
    auto c1 = checked_code(e1);
    auto c2 = checked_code(e2);
    return partner_[c1] == c2 ? 1 : 0;
}

std::vector<ExtremityPair> Genome::adjacencies() const {
    std::vector<ExtremityPair> out;
    for (std::uint32_t c = 0; c < partner_.size(); ++c) {
        auto p = partner_[c];
        if (p != no_partner && c <= p) out.push_back({c, p});
    }
    return out;
}

std::vector<ChromosomeSpec> Genome::specs() const {
    std::vector<ChromosomeSpec> out;
    for (const auto& chr : chromosomes_) {
        ChromosomeSpec spec{chr.id, chr.shape, {}};
        for (std::size_t k = 0; k < chr.order.size(); ++k) {
            if (is_telomere(chr.order[k])) continue;
            spec.genes.push_back({names_[chr.order[k]], static_cast<bool>(chr.forward[k])});
        }
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<Genome> read_genomes(std::istream& in, const std::string& source) {
    std::vector<std::string> labels;
    std::map<std::string, std::vector<ChromosomeSpec>> by_label;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (skippable(line)) continue;
        auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
        auto fields = split(line, '\t');
        if (fields.size() == 3) fields.emplace_back();
        if (fields.size() != 4)
            throw InputError(where() + "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        ChromosomeSpec spec;
        std::string label(fields[0]);
        spec.id = std::string(fields[1]);
        if (label.empty() || spec.id.empty()) throw InputError(where() + "empty genome label or chromosome id");
        if (fields[2] == "linear") spec.shape = Shape::linear;
        else if (fields[2] == "circular") spec.shape = Shape::circular;
        else throw InputError(where() + "chromosome shape must be 'linear' or 'circular', got '" +
                              std::string(fields[2]) + "'");
        std::istringstream tokens{std::string(fields[3])};
        std::string token;
        while (tokens >> token) {
            if (token.size() < 2 || (token[0] != '+' && token[0] != '-'))
                throw InputError(where() + "gene token '" + token + "' must be +name or -name");
            spec.genes.push_back({token.substr(1), token[0] == '+'});
        }
        if (!by_label.count(label)) labels.push_back(label);
        by_label[label].push_back(std::move(spec));
    }
    std::vector<Genome> out;
    for (const auto& label : labels) {
        try {
            out.push_back(Genome::build(label, by_label[label]));
        } catch (const InputError& e) {
            throw InputError(source + ": " + e.what());
        }
    }
    return out;
}

std::vector<Genome> read_genome_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open genome file " + path);
    return read_genomes(in, path);
}

void write_genome(std::ostream& out, const Genome& genome) {
    for (const auto& spec : genome.specs()) {
        out << genome.label() << '\t' << spec.id << '\t'
            << (spec.shape == Shape::linear ? "linear" : "circular") << '\t';
        for (std::size_t k = 0; k < spec.genes.size(); ++k) {
            if (k) out << ' ';
            out << (spec.genes[k].forward ? '+' : '-') << spec.genes[k].name;
        }
        out << '\n';
    }
}

SimilarityGraph::SimilarityGraph(std::vector<SimilarityEdge> edges) {
    for (auto& e : edges) {
        if (e.a.genome == e.b.genome)
            throw InputError("similarity " + e.a.str() + " ~ " + e.b.str() + " is intra-genome");
        if (e.a.is_telomere() || e.b.is_telomere())
            throw InputError("similarity " + e.a.str() + " ~ " + e.b.str() + " involves a telomere");
        if (!std::isfinite(e.score) || e.score < 0.0 || e.score > 1.0)
            throw InputError("similarity " + e.a.str() + " ~ " + e.b.str() + " outside [0,1]");
        if (e.b < e.a) std::swap(e.a, e.b);
        if (e.score == 0.0) continue;
        auto [it, inserted] = lookup_.emplace(std::make_pair(e.a, e.b), e.score);
        if (!inserted && it->second != e.score)
            throw InputError("conflicting similarity values for " + e.a.str() + " ~ " + e.b.str());
    }
    for (const auto& [key, score] : lookup_) edges_.push_back({key.first, key.second, score});
}

double SimilarityGraph::operator()(const GeneId& x, const GeneId& y) const {
    if (x.genome == y.genome) return 0.0;
    const bool tx = x.is_telomere();
    const bool ty = y.is_telomere();
    if (tx || ty) return (tx && ty) ? 1.0 : 0.0;
    auto it = (x < y) ? lookup_.find({x, y}) : lookup_.find({y, x});
    return it == lookup_.end() ? 0.0 : it->second;
}

SimilarityGraph read_similarity(std::istream& in, const std::string& source) {
    std::vector<SimilarityEdge> edges;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (skippable(line)) continue;
        auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw InputError(where() + "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        SimilarityEdge e;
        try {
            e.a = parse_gene_id(fields[0]);
            e.b = parse_gene_id(fields[1]);
        } catch (const InputError& err) {
            throw InputError(where() + err.what());
        }
        auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), e.score);
        if (ec != std::errc() || ptr != fields[2].data() + fields[2].size())
            throw InputError(where() + "score '" + std::string(fields[2]) + "' is not a number");
        edges.push_back(std::move(e));
    }
    try {
        return SimilarityGraph(std::move(edges));
    } catch (const InputError& err) {
        throw InputError(source + ": " + err.what());
    }
}

SimilarityGraph read_similarity_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open similarity file " + path);
    return read_similarity(in, path);
}

void write_similarity(std::ostream& out, const SimilarityGraph& graph) {
    for (const auto& e : graph.edges())
        out << e.a.str() << '\t' << e.b.str() << '\t' << format_double(e.score) << '\n';
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

}  // namespace ffmedian
