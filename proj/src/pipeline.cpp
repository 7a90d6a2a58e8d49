#include "ffmedian/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ffmedian {

namespace fs = std::filesystem;
using nlohmann::json;

Engine parse_engine(const std::string& name) {
    if (name == "bb") return Engine::branch_and_bound;
    if (name == "oracle") return Engine::oracle;
    throw InputError("unknown engine '" + name + "' (expected bb or oracle)");
}

const char* to_string(Engine engine) { return engine == Engine::oracle ? "oracle" : "bb"; }

void RunConfig::validate() const {
    if (genome_files.empty()) throw InputError("no genome file given");
    if (similarity_file.empty() == hit_files.empty())
        throw InputError("give either a similarity file or alignment hit tables");
    filter.validate();
    if (!(time_limit >= 0.0)) throw InputError("time limit must be non-negative");
    if (threads == 0) throw InputError("thread count must be positive");
    if (conflict_cap == 0) throw InputError("conflict cap must be positive");
    if (!truth_file.empty() && !groups_file.empty()) throw InputError("give truth pairs or reference groups, not both");
    auto must_exist = [](const std::string& path) {
        if (!fs::is_regular_file(path)) throw InputError("input file not found: " + path);
    };
    for (const auto& p : genome_files) must_exist(p);
    for (const auto& p : hit_files) must_exist(p);
    if (!similarity_file.empty()) must_exist(similarity_file);
    if (!truth_file.empty()) must_exist(truth_file);
    if (!groups_file.empty()) must_exist(groups_file);
}

json RunConfig::to_json() const {
    auto name = [&](const std::string& p) { return canonical ? fs::path(p).filename().string() : p; };
    auto names = [&](const std::vector<std::string>& ps) {
        json out = json::array();
        for (const auto& p : ps) out.push_back(name(p));
        return out;
    };
    json j;
    j["genome_files"] = names(genome_files);
    j["similarity_file"] = similarity_file.empty() ? json(nullptr) : json(name(similarity_file));
    j["hit_files"] = names(hit_files);
    j["f"] = filter.f;
    j["evalue_max"] = filter.evalue_max;
    j["require_reciprocal"] = require_reciprocal;
    j["discard_nonclique"] = discard_nonclique;
    j["icf_seg"] = icf_seg;
    j["conflict_cap"] = conflict_cap;
    j["engine"] = to_string(engine);
    j["time_limit"] = time_limit;
    j["threads"] = threads;
    j["seed"] = seed;
    if (!canonical) j["output_dir"] = output_dir;
    j["truth_file"] = truth_file.empty() ? json(nullptr) : json(name(truth_file));
    j["groups_file"] = groups_file.empty() ? json(nullptr) : json(name(groups_file));
    j["strict"] = strict;
    return j;
}

void Log::operator()(const std::string& stage, json fields) const {
    if (!out) return;
    json line{{"stage", stage}};
    line.update(fields);
    *out << line.dump() << '\n';
}

unsigned effective_threads(unsigned requested) {
    const char* env = std::getenv("FFMEDIAN_THREADS");
    if (!env || !*env) return requested;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) throw InputError(std::string("FFMEDIAN_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(n);
}

std::array<Genome, genome_count> load_genomes(const std::vector<std::string>& files) {
    std::vector<Genome> all;
    for (const auto& f : files)
        for (auto& g : read_genome_file(f)) all.push_back(std::move(g));
    if (all.size() != genome_count)
        throw InputError("expected exactly three genomes across the genome files, found " + std::to_string(all.size()));
    return {std::move(all[0]), std::move(all[1]), std::move(all[2])};
}

SimilarityGraph build_similarity(const std::vector<std::string>& hit_files, const FilterParams& filter,
                                 bool require_reciprocal, const Log& log) {
    filter.validate();
    std::vector<AlignmentHit> hits;
    for (const auto& f : hit_files) {
        auto part = read_hits_file(f, filter.evalue_max);
        hits.insert(hits.end(), part.begin(), part.end());
    }
    auto kept = stringency_filter(hits, filter.f);
    auto sigma = rrbs_weights(kept, require_reciprocal);
    log("build-graph", {{"hits", hits.size()}, {"retained", kept.size()}, {"edges", sigma.size()}});
    return sigma;
}

Instance load_instance(const std::vector<std::string>& genome_files, SimilarityGraph sigma, bool discard_nonclique,
                       const Log& log) {
    auto instance = make_instance(load_genomes(genome_files), std::move(sigma));
    auto known = [&](const GeneId& id) {
        for (const auto& g : instance.genomes)
            if (g.label() == id.genome) return g.find(id.name).has_value();
        return false;
    };
    for (const auto& e : instance.sigma.edges()) {
        if (!known(e.a)) throw InputError("similarity refers to unknown gene " + e.a.str());
        if (!known(e.b)) throw InputError("similarity refers to unknown gene " + e.b.str());
    }
    if (discard_nonclique) {
        auto pre = preprocess_discard_nonclique(instance);
        log("preprocess", {{"removed", pre.removed.size()}});
        instance = std::move(pre.instance);
    }
    return instance;
}

int exit_code(SolveStatus status) { return status == SolveStatus::feasible ? 2 : 0; }

namespace {

MedianSolution run_engine(const IlpModel& model, Engine engine, const SolveOptions& options) {
    if (engine == Engine::branch_and_bound) return solve_branch_and_bound(model, options);
    try {
        return brute_force_median(model);
    } catch (const std::length_error& e) {
        throw InputError(std::string("oracle engine: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SolveOutcome solve_instance(const CandidateSet& candidates, Engine engine, bool icf, std::size_t conflict_cap,
                            const SolveOptions& options, const Log& log) {
    SolveOutcome out;
    out.candidates = candidates;
    out.model = build_ilp(candidates);
    if (icf) {
        out.seg = icf_seg(candidates, IcfSegOptions{conflict_cap});
        log("icf-seg", {{"runs", out.seg->examined},
                        {"accepted", out.seg->accepted.size()},
                        {"rejected", out.seg->rejected},
                        {"skipped", out.seg->skipped},
                        {"remaining_genes", out.seg->reduced.size()}});
        auto reduced = run_engine(build_ilp(out.seg->reduced), engine, options);
        out.solution = merge_solution(candidates, *out.seg, reduced);
    } else {
        out.solution = run_engine(out.model, engine, options);
    }
    if (auto problem = check_feasible(out.model, out.solution))
        throw std::logic_error("solver returned an infeasible median: " + *problem);
    log("solve", {{"status", to_string(out.solution.status)},
                  {"objective", out.solution.objective},
                  {"bound", out.solution.bound},
                  {"nodes", out.solution.nodes}});
    return out;
}

json median_json(const CandidateSet& candidates, const IlpModel& model, const MedianSolution& solution) {
    json doc;
    doc["schema"] = "ffmedian-median";
    doc["version"] = report_schema_version;
    doc["genomes"] = json::array();
    for (const auto& l : candidates.labels()) doc["genomes"].push_back(l);
    doc["status"] = to_string(solution.status);
    doc["objective"] = solution.objective;
    doc["bound"] = solution.bound;

    std::map<std::uint32_t, std::size_t> position;
    json genes = json::array();
    for (auto m : solution.genes) {
        position[m] = genes.size();
        const auto& c = candidates.genes()[m];
        json extant = json::array();
        for (std::size_t x = 0; x < genome_count; ++x) extant.push_back(candidates.extant_name(x, m));
        genes.push_back({{"name", model.a_names[m]},
                         {"extant", extant},
                         {"telomere", c.telomere},
                         {"score", c.gene_score}});
    }
    doc["genes"] = genes;

    json adjacencies = json::array();
    for (auto k : solution.adjacencies) {
        const auto& a = candidates.adjacencies()[k];
        json conserved = json::array();
        for (std::size_t x = 0; x < genome_count; ++x)
            if (a.conserved >> x & 1u) conserved.push_back(candidates.labels()[x]);
        adjacencies.push_back({{"genes", {position.at(a.m1), position.at(a.m2)}},
                               {"ends", {std::string(1, end_letter(a.a)), std::string(1, end_letter(a.b))}},
                               {"weight", a.weight()},
                               {"conserved", conserved}});
    }
    doc["adjacencies"] = adjacencies;

    json cars = json::array();
    for (const auto& car : assemble_cars(model, solution)) {
        json order = json::array();
        for (const auto& e : car.genes) order.push_back({{"gene", position.at(e.gene)}, {"strand", e.forward ? "+" : "-"}});
        cars.push_back({{"circular", car.circular}, {"genes", order}});
    }
    doc["cars"] = cars;
    return doc;
}

std::vector<OrthologTriple> median_triples(const json& median) {
    try {
        const auto& labels = median.at("genomes");
        if (labels.size() != genome_count) throw InputError("median document must name three genomes");
        std::vector<OrthologTriple> out;
        for (const auto& g : median.at("genes")) {
            if (g.at("telomere").get<bool>()) continue;
            const auto& extant = g.at("extant");
            OrthologTriple t;
            for (std::size_t x = 0; x < genome_count; ++x)
                t[x] = GeneId{labels.at(x).get<std::string>(), extant.at(x).get<std::string>()};
            out.push_back(std::move(t));
        }
        return out;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed median document: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

void write_accepted_tsv(std::ostream& out, const CandidateSet& candidates, const IcfSegResult& seg) {
    const auto model = build_ilp(candidates);
    out << "#segment\tcircular\tgenes\tadjacencies\tweight\n";
    for (std::size_t s = 0; s < seg.accepted.size(); ++s) {
        const auto& a = seg.accepted[s];
        out << s << '\t' << (a.circular ? "circular" : "linear") << '\t';
        for (std::size_t j = 0; j < a.genes.size(); ++j) out << (j ? "," : "") << model.a_names[a.genes[j]];
        out << '\t';
        for (std::size_t j = 0; j < a.adjacencies.size(); ++j) out << (j ? "," : "") << model.b_names[a.adjacencies[j]];
        out << '\t' << format_double(a.weight) << '\n';
    }
}

json eval_json(const EvalReport& r) {
    return {{"tp", r.tp},
            {"fp", r.fp},
            {"fn", r.fn},
            {"precision", r.precision},
            {"recall", r.recall},
            {"precision_vacuous", r.precision_vacuous},
            {"recall_vacuous", r.recall_vacuous},
            {"ignored", r.ignored}};
}

json classes_json(const ClassCounts& c) {
    return {{"agree", c.agree}, {"compatible", c.compatible}, {"disagree", c.disagree}};
}

PipelineResult run_pipeline(const RunConfig& config, const Log& log) {
    config.validate();
    PipelineResult result;
    json timings = json::object();
    auto clock = std::chrono::steady_clock::now();
    auto lap = [&](const char* stage) {
        timings[stage] = seconds_since(clock);
        clock = std::chrono::steady_clock::now();
    };

    SimilarityGraph sigma;
    if (config.similarity_file.empty()) {
        sigma = build_similarity(config.hit_files, config.filter, config.require_reciprocal, log);
    } else {
        sigma = read_similarity_file(config.similarity_file);
    }
    lap("build-graph");
    auto instance = load_instance(config.genome_files, std::move(sigma), config.discard_nonclique, log);
    lap("load");
    auto candidates = build_candidates(instance);
    log("enumerate", {{"candidates", candidates.size()}, {"adjacencies", candidates.adjacencies().size()}});
    lap("enumerate");

    SolveOptions options;
    options.time_limit = config.time_limit;
    options.threads = effective_threads(config.threads);
    auto outcome = solve_instance(candidates, config.engine, config.icf_seg, config.conflict_cap, options, log);
    lap("solve");
    const auto& sol = outcome.solution;
    result.exit_code = exit_code(sol.status);
    result.median = median_json(candidates, outcome.model, sol);

    json report;
    report["schema"] = "ffmedian-report";
    report["version"] = report_schema_version;
    report["tool"] = std::string("ffmedian ") + tool_version;
    report["config"] = config.to_json();
    json genomes = json::array();
    for (const auto& g : instance.genomes) {
        std::size_t genes = 0;
        for (std::size_t k = 0; k < g.gene_count(); ++k) genes += !g.is_telomere(static_cast<GeneIndex>(k));
        genomes.push_back({{"label", g.label()}, {"chromosomes", g.chromosomes().size()}, {"genes", genes}});
    }
    report["input"] = {{"genomes", genomes}, {"similarities", instance.sigma.size()}};
    report["candidates"] = {{"genes", candidates.size()}, {"adjacencies", candidates.adjacencies().size()}};
    if (outcome.seg) {
        const auto& s = *outcome.seg;
        report["icf_seg"] = {{"runs", s.examined},
                             {"accepted", s.accepted.size()},
                             {"rejected", s.rejected},
                             {"skipped", s.skipped},
                             {"accepted_adjacencies", s.accepted_adjacencies.size()},
                             {"accepted_weight", s.accepted_weight},
                             {"remaining_genes", s.reduced.size()},
                             {"remaining_adjacencies", s.reduced.adjacencies().size()}};
    } else {
        report["icf_seg"] = nullptr;
    }
    report["model"] = {{"variables", outcome.model.variable_count()}, {"constraints", outcome.model.constraint_count()}};
    std::size_t circular = 0;
    for (const auto& car : result.median["cars"]) circular += car["circular"].get<bool>();
    report["solution"] = {{"status", to_string(sol.status)},
                          {"objective", sol.objective},
                          {"bound", sol.bound},
                          {"nodes", sol.nodes},
                          {"genes", sol.genes.size()},
                          {"adjacencies", sol.adjacencies.size()},
                          {"cars", result.median["cars"].size()},
                          {"circular_cars", circular}};

    if (!config.truth_file.empty() || !config.groups_file.empty()) {
        auto triples = median_triples(result.median);
        json ev;
        if (!config.truth_file.empty()) {
            auto r = precision_recall(triples, read_truth_pairs_file(config.truth_file), config.strict);
            if (r.ignored) log("eval", {{"ignored_pairs", r.ignored}});
            ev["pairs"] = eval_json(r);
        }
        if (!config.groups_file.empty())
            ev["classes"] = classes_json(classify_vs_reference(triples, read_groups_file(config.groups_file)));
        report["evaluation"] = ev;
        lap("eval");
    }
    report["exit_code"] = result.exit_code;
    if (!config.canonical) report["timings"] = timings;
    result.report = report;

    if (!config.output_dir.empty()) {
        fs::create_directories(config.output_dir);
        const fs::path dir(config.output_dir);
        write_json_file((dir / "median.json").string(), result.median);
        write_json_file((dir / "report.json").string(), result.report);
        {
            std::ofstream out(dir / "candidates.tsv");
            write_candidates_tsv(out, candidates);
        }
        if (config.similarity_file.empty()) {
            std::ofstream out(dir / "graph.sim");
            write_similarity(out, instance.sigma);
        }
    }
    return result;
}

}  // namespace ffmedian
