#include "ffmedian/ilp.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ffmedian {

std::size_t IlpModel::constraint_count() const {
    std::size_t rows = b.size() + c03.size();
    for (const auto& per_genome : c01) rows += per_genome.size();
    return rows;
}

std::string lp_sanitize(const std::string& token) {
    std::string out = token;
    for (auto& c : out) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                          c == '.' || c == '@';
        if (!keep) c = '_';
    }
    return out;
}

std::string format_coefficient(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%#.12g", value);
    return buf;
}

namespace {

// Appends "~<index>" when a sanitized name is already taken.
std::string claim(std::unordered_set<std::string>& taken, std::string name, std::size_t index) {
    if (!taken.insert(name).second) {
        name += "~" + std::to_string(index);
        while (!taken.insert(name).second) name += "~";
    }
    return name;
}

}  // namespace

IlpModel build_ilp(const CandidateSet& candidates) {
    IlpModel model;
    const auto& genes = candidates.genes();
    const auto& adjacencies = candidates.adjacencies();
    std::unordered_set<std::string> taken;

    for (std::uint32_t m = 0; m < genes.size(); ++m) {
        std::string name = "a";
        for (std::size_t x = 0; x < genome_count; ++x) name += "_" + lp_sanitize(candidates.extant_name(x, m));
        model.a_names.push_back(claim(taken, std::move(name), m));
    }
    for (std::uint32_t k = 0; k < adjacencies.size(); ++k) {
        const auto& adj = adjacencies[k];
        std::string name = "b";
        for (std::size_t x = 0; x < genome_count; ++x) {
            name += "_" + lp_sanitize(candidates.extant_name(x, adj.m1)) + end_letter(adj.a);
            name += "_" + lp_sanitize(candidates.extant_name(x, adj.m2)) + end_letter(adj.b);
        }
        model.b_names.push_back(claim(taken, std::move(name), k));
        model.b.push_back({adj.m1, adj.a, adj.m2, adj.b, adj.weight()});
    }

    model.a_rows.assign(genes.size(), {});
    for (std::size_t x = 0; x < genome_count; ++x) {
        const auto& names = candidates.gene_names(x);
        for (GeneIndex g = 0; g < names.size(); ++g) {
            const auto& users = candidates.users(x, g);
            if (users.empty()) continue;
            IlpRow row{claim(taken, "c01_" + lp_sanitize(candidates.labels()[x]) + "_" + lp_sanitize(names[g]), g),
                       users};
            for (auto m : users) model.a_rows[m][x] = static_cast<std::uint32_t>(model.c01[x].size());
            model.c01[x].push_back(std::move(row));
        }
    }
    for (std::uint32_t v = 0; v < 2 * genes.size(); ++v) {
        const auto& incident = candidates.incident(v);
        if (incident.empty()) continue;
        const std::uint32_t m = v / 2;
        const char end = genes[m].telomere ? 'o' : (v & 1u ? 'h' : 't');
        // a names are unique, so these are too
        model.c03.push_back({"c03_" + model.a_names[m] + "_" + end, incident});
    }
    return model;
}

namespace {

class LineWrapper {
public:
    explicit LineWrapper(std::ostream& out) : out_(out) {}
    void start(const std::string& head) {
        out_ << head;
        width_ = head.size();
    }
    void put(const std::string& token) {
        if (width_ + token.size() + 1 > 200) {
            out_ << "\n  ";
            width_ = 2;
        } else {
            out_ << ' ';
            ++width_;
        }
        out_ << token;
        width_ += token.size();
    }
    void finish() { out_ << '\n'; }

private:
    std::ostream& out_;
    std::size_t width_ = 0;
};

void write_sum_row(LineWrapper& line, const std::string& name, const std::vector<std::string>& terms) {
    line.start(" " + name + ":");
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (k > 0) line.put("+");
        line.put(terms[k]);
    }
    line.put("<=");
    line.put("1");
    line.finish();
}

}  // namespace

void export_lp(std::ostream& out, const IlpModel& model) {
    LineWrapper line(out);
    out << "Maximize\n";
    line.start(" obj:");
    for (std::size_t k = 0; k < model.b.size(); ++k) {
        if (k > 0) line.put("+");
        line.put(format_coefficient(model.b[k].coefficient));
        line.put(model.b_names[k]);
    }
    line.finish();
    out << "Subject To\n";
    for (const auto& per_genome : model.c01) {
        for (const auto& row : per_genome) {
            std::vector<std::string> terms;
            for (auto m : row.members) terms.push_back(model.a_names[m]);
            write_sum_row(line, row.name, terms);
        }
    }
    for (std::size_t k = 0; k < model.b.size(); ++k) {
        const auto& adj = model.b[k];
        line.start(" c02_" + model.b_names[k] + ":");
        line.put("2");
        line.put(model.b_names[k]);
        if (adj.self_loop()) {
            line.put("-");
            line.put("2");
            line.put(model.a_names[adj.a1]);
        } else {
            line.put("-");
            line.put(model.a_names[adj.a1]);
            line.put("-");
            line.put(model.a_names[adj.a2]);
        }
        line.put("<=");
        line.put("0");
        line.finish();
    }
    for (const auto& row : model.c03) {
        std::vector<std::string> terms;
        for (auto k : row.members) terms.push_back(model.b_names[k]);
        write_sum_row(line, row.name, terms);
    }
    out << "Binary\n";
    for (const auto& name : model.a_names) out << ' ' << name << '\n';
    for (const auto& name : model.b_names) out << ' ' << name << '\n';
    out << "End\n";
}

void export_lp_file(const std::string& path, const IlpModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    export_lp(out, model);
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct Term {
    double coefficient = 1.0;
    std::string name;
};

struct Row {
    std::string name;
    std::vector<Term> terms;
    double rhs = 0.0;
};

double parse_number(const std::string& token) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) throw InputError("LP: bad number '" + token + "'");
    return value;
}

bool is_number(const std::string& token) {
    return !token.empty() && ((token[0] >= '0' && token[0] <= '9') || token[0] == '.');
}

std::vector<Term> parse_terms(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
    std::vector<Term> terms;
    double sign = 1.0;
    double coefficient = 1.0;
    for (std::size_t k = begin; k < end; ++k) {
        const auto& tok = tokens[k];
        if (tok == "+") {
            sign = 1.0;
        } else if (tok == "-") {
            sign = -1.0;
        } else if (is_number(tok)) {
            coefficient = parse_number(tok);
        } else {
            terms.push_back({sign * coefficient, tok});
            sign = 1.0;
            coefficient = 1.0;
        }
    }
    return terms;
}

}  // namespace

IlpModel read_lp(std::istream& in) {
    enum class Section { none, objective, constraints, binary, done } section = Section::none;
    std::vector<std::string> objective_tokens;
    std::vector<std::string> constraint_tokens;
    std::vector<std::string> binaries;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream words(line);
        std::string first;
        if (!(words >> first)) continue;
        if (first == "Maximize") {
            section = Section::objective;
            continue;
        }
        if (first == "Subject") {
            section = Section::constraints;
            continue;
        }
        if (first == "Binary") {
            section = Section::binary;
            continue;
        }
        if (first == "End") {
            section = Section::done;
            break;
        }
        std::vector<std::string>* sink = nullptr;
        switch (section) {
            case Section::objective: sink = &objective_tokens; break;
            case Section::constraints: sink = &constraint_tokens; break;
            case Section::binary: sink = &binaries; break;
            default: throw InputError("LP: content outside a section: " + line);
        }
        sink->push_back(first);
        std::string word;
        while (words >> word) sink->push_back(word);
    }
    if (section != Section::done) throw InputError("LP: missing End");

    IlpModel model;
    std::unordered_map<std::string, std::uint32_t> a_index, b_index;
    for (const auto& name : binaries) {
        if (name.rfind("a_", 0) == 0) {
            a_index.emplace(name, static_cast<std::uint32_t>(model.a_names.size()));
            model.a_names.push_back(name);
        } else if (name.rfind("b_", 0) == 0) {
            b_index.emplace(name, static_cast<std::uint32_t>(model.b_names.size()));
            model.b_names.push_back(name);
        } else {
            throw InputError("LP: unexpected variable " + name);
        }
    }
    auto lookup = [](const auto& index, const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw InputError("LP: unknown variable " + name);
        return it->second;
    };

    model.b.assign(model.b_names.size(), {});
    if (!objective_tokens.empty()) {
        if (objective_tokens[0] != "obj:") throw InputError("LP: objective must be named obj");
        for (const auto& term : parse_terms(objective_tokens, 1, objective_tokens.size()))
            model.b[lookup(b_index, term.name)].coefficient = term.coefficient;
    }

    std::vector<Row> rows;
    for (std::size_t k = 0; k < constraint_tokens.size();) {
        const auto& head = constraint_tokens[k];
        if (head.empty() || head.back() != ':') throw InputError("LP: unnamed constraint at '" + head + "'");
        std::size_t op = k + 1;
        while (op < constraint_tokens.size() && constraint_tokens[op] != "<=") ++op;
        if (op + 1 >= constraint_tokens.size()) throw InputError("LP: truncated constraint " + head);
        rows.push_back({head.substr(0, head.size() - 1), parse_terms(constraint_tokens, k + 1, op),
                        parse_number(constraint_tokens[op + 1])});
        k = op + 2;
    }

    model.a_rows.assign(model.a_names.size(), {});
    std::vector<std::uint32_t> seen(model.a_names.size(), 0);
    std::vector<bool> c02_seen(model.b_names.size(), false);
    std::vector<std::vector<std::pair<std::uint32_t, End>>> ends(model.b_names.size());
    for (auto& row : rows) {
        if (row.name.rfind("c01_", 0) == 0) {
            IlpRow out{row.name, {}};
            for (const auto& term : row.terms) out.members.push_back(lookup(a_index, term.name));
            if (out.members.empty()) throw InputError("LP: empty row " + row.name);
            const auto x = seen[out.members.front()];
            if (x >= genome_count) throw InputError("LP: too many c01 rows for " + row.terms[0].name);
            for (auto m : out.members) {
                if (seen[m] != x) throw InputError("LP: inconsistent c01 rows at " + row.name);
                model.a_rows[m][x] = static_cast<std::uint32_t>(model.c01[x].size());
                ++seen[m];
            }
            model.c01[x].push_back(std::move(out));
        } else if (row.name.rfind("c02_", 0) == 0) {
            const auto k = lookup(b_index, row.name.substr(4));
            std::vector<std::uint32_t> as;
            for (const auto& term : row.terms) {
                if (term.name == model.b_names[k]) continue;
                const auto m = lookup(a_index, term.name);
                as.push_back(m);
                if (term.coefficient == -2.0) as.push_back(m);
            }
            if (as.size() != 2) throw InputError("LP: malformed " + row.name);
            model.b[k].a1 = as[0];
            model.b[k].a2 = as[1];
            c02_seen[k] = true;
        } else if (row.name.rfind("c03_", 0) == 0) {
            if (row.name.size() < 7) throw InputError("LP: malformed " + row.name);
            const char letter = row.name.back();
            const auto m = lookup(a_index, row.name.substr(4, row.name.size() - 6));
            const End end = letter == 'h' ? End::head : letter == 't' ? End::tail : End::telomeric;
            IlpRow out{row.name, {}};
            for (const auto& term : row.terms) {
                const auto k = lookup(b_index, term.name);
                out.members.push_back(k);
                ends[k].push_back({m, end});
            }
            model.c03.push_back(std::move(out));
        } else {
            throw InputError("LP: unexpected constraint " + row.name);
        }
    }
    for (std::size_t k = 0; k < model.b.size(); ++k) {
        if (!c02_seen[k]) throw InputError("LP: missing c02 row for " + model.b_names[k]);
        auto& adj = model.b[k];
        if (adj.self_loop()) {
            adj.end1 = End::tail;
            adj.end2 = End::head;
            continue;
        }
        bool has1 = false, has2 = false;
        for (auto [m, end] : ends[k]) {
            if (m == adj.a1 && !has1) {
                adj.end1 = end;
                has1 = true;
            } else if (m == adj.a2) {
                adj.end2 = end;
                has2 = true;
            }
        }
        if (!has1 || !has2) throw InputError("LP: missing c03 rows for " + model.b_names[k]);
    }
    return model;
}

IlpModel read_lp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    return read_lp(in);
}

}  // namespace ffmedian
