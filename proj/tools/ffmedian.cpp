// ffmedian command line: one subcommand per pipeline stage plus `run`.
//
// exit codes: 0 optimal / success, 1 input error, 2 feasible only (time
// limit), 3 reduction law violated, 4 internal or resource error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ffmedian/hardness.hpp"
#include "ffmedian/pipeline.hpp"

using namespace ffmedian;
using nlohmann::json;

namespace {

struct InstanceArgs {
    std::vector<std::string> genomes;
    std::string similarity;
    bool discard_nonclique = false;

    void add(CLI::App* cmd) {
        cmd->add_option("-g,--genome", genomes,
                        "genome file (label<TAB>chromosome<TAB>linear|circular<TAB>+a -b ...); repeat, three genomes in total")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("-s,--similarities", similarity, "similarity file (genome:gene<TAB>genome:gene<TAB>score)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_flag("--discard-nonclique", discard_nonclique,
                      "splice out extant genes that belong to no candidate triangle before enumerating");
    }

    Instance load(const Log& log) const {
        return load_instance(genomes, read_similarity_file(similarity), discard_nonclique, log);
    }
};

struct SolveArgs {
    std::string engine = "bb";
    double time_limit = 10800.0;
    unsigned threads = 1;
    bool no_icf = false;
    std::size_t conflict_cap = 20;

    void add(CLI::App* cmd) {
        cmd->add_option("--engine", engine, "bb (branch-and-bound) or oracle (exhaustive, at most 12 candidate genes)")
            ->check(CLI::IsMember({"bb", "oracle"}))
            ->capture_default_str();
        cmd->add_option("--time-limit", time_limit, "solver time limit in seconds")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_option("--threads", threads, "solver threads (FFMEDIAN_THREADS overrides)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_flag("--no-icf-seg", no_icf, "solve without extracting conserved runs first");
        cmd->add_option("--conflict-cap", conflict_cap, "maximum external conflicts per run gene before a run is skipped")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }

    SolveOptions options() const {
        SolveOptions o;
        o.time_limit = time_limit;
        o.threads = effective_threads(threads);
        return o;
    }
};

void write_text(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    body(out);
}

void print_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-")
        std::cout << j.dump(2) << '\n';
    else
        write_json_file(path, j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gene family-free median of three genomes"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "no JSON progress lines on stderr");
    int code = 0;

    // build-graph
    auto* build = app.add_subcommand("build-graph", "similarity graph from tabular alignment hits");
    std::vector<std::string> hit_files, self_files, universe_genomes;
    FilterParams filter;
    bool reciprocal = false;
    std::string build_out;
    build->add_option("--hits", hit_files, "12-column alignment table with genome:gene ids; repeat")
        ->required()
        ->check(CLI::ExistingFile);
    build->add_option("--self", self_files, "self-alignment table; repeat")->check(CLI::ExistingFile);
    build->add_option("--evalue", filter.evalue_max, "drop hits with a larger e-value")->capture_default_str();
    build->add_option("-f", filter.f, "stringency: keep g->h if its bitscore is at least f times h's best hit into genome(g)")
        ->capture_default_str();
    build->add_flag("--require-reciprocal", reciprocal, "drop pairs seen in one direction only");
    build->add_option("-g,--genome", universe_genomes, "genome files; when given, unknown gene ids are rejected")
        ->check(CLI::ExistingFile);
    build->add_option("-o,--output", build_out, "similarity file to write")->required();

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "candidate median genes and conserved candidate adjacencies");
    InstanceArgs enum_in;
    std::string enum_out;
    enum_in.add(enumerate);
    enumerate->add_option("-o,--output", enum_out, "candidate table to write")->required();

    // icf-seg
    auto* seg_cmd = app.add_subcommand("icf-seg", "accept conserved runs that lie in some optimal median");
    InstanceArgs seg_in;
    std::string seg_out, seg_reduced;
    std::size_t seg_cap = 20;
    seg_in.add(seg_cmd);
    seg_cmd->add_option("--conflict-cap", seg_cap, "maximum external conflicts per run gene before a run is skipped")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    seg_cmd->add_option("-o,--output", seg_out, "accepted segment table to write")->required();
    seg_cmd->add_option("--emit-reduced", seg_reduced, "directory for the reduced candidate table and LP model");

    // solve
    auto* solve = app.add_subcommand("solve", "compute a median");
    InstanceArgs solve_in;
    SolveArgs solve_args;
    std::string solve_out, solve_lp;
    solve_in.add(solve);
    solve_args.add(solve);
    solve->add_option("--export-lp", solve_lp, "also write the 0-1 program in LP format");
    solve->add_option("-o,--output", solve_out, "median JSON to write")->required();

    // export-lp
    auto* export_cmd = app.add_subcommand("export-lp", "write the 0-1 program in LP format");
    InstanceArgs export_in;
    std::string export_out;
    export_in.add(export_cmd);
    export_cmd->add_option("-o,--output", export_out, "LP file to write")->required();

    // reduce-mis
    auto* reduce = app.add_subcommand("reduce-mis", "median instance from a graph of maximum degree 3");
    std::string graph_file, reduce_out;
    reduce->add_option("--graph", graph_file, "edge list, u<TAB>v per line (a single label declares an isolated vertex)")
        ->required()
        ->check(CLI::ExistingFile);
    reduce->add_option("-o,--output", reduce_out, "instance directory to write")->required();

    // verify-reduction
    auto* verify = app.add_subcommand("verify-reduction", "solve a reduced instance and compare with the exact MIS");
    std::string verify_dir;
    SolveArgs verify_args;
    verify->add_option("dir", verify_dir, "instance directory written by reduce-mis")->required()->check(CLI::ExistingDirectory);
    verify->add_option("--time-limit", verify_args.time_limit, "solver time limit in seconds")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    verify->add_option("--threads", verify_args.threads, "solver threads (FFMEDIAN_THREADS overrides)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "score predicted orthologous groups");
    std::vector<std::string> preds;
    std::string truth_file, groups_file, eval_out;
    std::vector<std::string> robust_pair;
    bool strict = false;
    eval->add_option("--pred", preds, "median JSON; repeat for robustness")->required()->check(CLI::ExistingFile);
    eval->add_option("--truth", truth_file, "true ortholog pairs, genome:gene<TAB>genome:gene")->check(CLI::ExistingFile);
    eval->add_option("--groups", groups_file, "reference groups, genome:gene<TAB>group")->check(CLI::ExistingFile);
    eval->add_flag("--strict", strict, "fail on predicted genes outside the truth universe instead of ignoring them");
    eval->add_option("--robust", robust_pair, "two genome labels shared by all --pred files")->expected(2);
    eval->add_option("-o,--output", eval_out, "report JSON (default stdout)");

    // run
    auto* run = app.add_subcommand("run", "whole pipeline with a JSON report");
    RunConfig config;
    std::string engine = "bb";
    run->add_option("-g,--genome", config.genome_files, "genome file; repeat")->required()->check(CLI::ExistingFile);
    run->add_option("-s,--similarities", config.similarity_file, "similarity file")->check(CLI::ExistingFile);
    run->add_option("--hits", config.hit_files, "alignment table instead of a similarity file; repeat")
        ->check(CLI::ExistingFile);
    run->add_option("--evalue", config.filter.evalue_max, "e-value threshold for --hits")->capture_default_str();
    run->add_option("-f", config.filter.f, "stringency for --hits")->capture_default_str();
    run->add_flag("--require-reciprocal", config.require_reciprocal, "drop one-directional hit pairs");
    run->add_flag("--discard-nonclique", config.discard_nonclique, "splice out genes in no candidate triangle");
    run->add_option("--engine", engine, "bb or oracle")->check(CLI::IsMember({"bb", "oracle"}))->capture_default_str();
    run->add_option("--time-limit", config.time_limit, "solver time limit in seconds")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    run->add_option("--threads", config.threads, "solver threads (FFMEDIAN_THREADS overrides)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_option("--seed", config.seed, "recorded in the report")->capture_default_str();
    bool run_no_icf = false;
    run->add_flag("--no-icf-seg", run_no_icf, "skip run extraction");
    run->add_option("--conflict-cap", config.conflict_cap, "external conflict cap per run gene")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_option("--truth", config.truth_file, "true ortholog pairs")->check(CLI::ExistingFile);
    run->add_option("--groups", config.groups_file, "reference groups")->check(CLI::ExistingFile);
    run->add_flag("--strict", config.strict, "fail on genes outside the truth universe");
    run->add_flag("--canonical", config.canonical, "omit timings and output paths from the report");
    run->add_option("-o,--output", config.output_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    Log log;
    if (!quiet) log.out = &std::cerr;

    try {
        if (*build) {
            for (auto& f : self_files) hit_files.push_back(f);
            auto sigma = build_similarity(hit_files, filter, reciprocal, log);
            if (!universe_genomes.empty()) {
                // validates every id against the genomes
                sigma = load_instance(universe_genomes, std::move(sigma), false, log).sigma;
            }
            write_text(build_out, [&](std::ostream& out) { write_similarity(out, sigma); });
        } else if (*enumerate) {
            auto cs = build_candidates(enum_in.load(log));
            log("enumerate", {{"candidates", cs.size()}, {"adjacencies", cs.adjacencies().size()}});
            write_text(enum_out, [&](std::ostream& out) { write_candidates_tsv(out, cs); });
        } else if (*seg_cmd) {
            auto cs = build_candidates(seg_in.load(log));
            auto seg = icf_seg(cs, IcfSegOptions{seg_cap});
            log("icf-seg", {{"runs", seg.examined},
                            {"accepted", seg.accepted.size()},
                            {"rejected", seg.rejected},
                            {"skipped", seg.skipped},
                            {"accepted_weight", seg.accepted_weight}});
            write_text(seg_out, [&](std::ostream& out) { write_accepted_tsv(out, cs, seg); });
            if (!seg_reduced.empty()) {
                std::filesystem::create_directories(seg_reduced);
                const std::filesystem::path dir(seg_reduced);
                write_text((dir / "candidates.tsv").string(),
                           [&](std::ostream& out) { write_candidates_tsv(out, seg.reduced); });
                export_lp_file((dir / "model.lp").string(), build_ilp(seg.reduced));
            }
        } else if (*solve) {
            auto cs = build_candidates(solve_in.load(log));
            auto outcome = solve_instance(cs, parse_engine(solve_args.engine), !solve_args.no_icf,
                                          solve_args.conflict_cap, solve_args.options(), log);
            if (!solve_lp.empty()) export_lp_file(solve_lp, outcome.model);
            write_json_file(solve_out, median_json(cs, outcome.model, outcome.solution));
            code = exit_code(outcome.solution.status);
        } else if (*export_cmd) {
            auto model = build_ilp(build_candidates(export_in.load(log)));
            log("export-lp", {{"variables", model.variable_count()}, {"constraints", model.constraint_count()}});
            export_lp_file(export_out, model);
        } else if (*reduce) {
            auto reduction = reduce_mis(read_graph_file(graph_file));
            write_reduction(reduction, reduce_out);
            log("reduce-mis", {{"vertices", reduction.graph.vertex_count()}, {"edges", reduction.graph.edges().size()}});
        } else if (*verify) {
            auto check = verify_reduction(read_reduction(verify_dir), verify_args.options());
            json out{{"mis", check.mis},
                     {"status", to_string(check.median.status)},
                     {"objective", check.median.objective},
                     {"score", check.score},
                     {"backmapped", check.backmapped.size()},
                     {"independent", check.independent},
                     {"star_adjacencies", check.star_adjacencies},
                     {"associations", check.associations},
                     {"holds", check.holds()}};
            std::cout << out.dump(2) << '\n';
            code = check.median.status == SolveStatus::feasible ? 2 : check.holds() ? 0 : 3;
        } else if (*eval) {
            if (truth_file.empty() && groups_file.empty() && robust_pair.empty())
                throw InputError("eval needs --truth, --groups or --robust");
            std::vector<std::vector<OrthologTriple>> runs;
            for (const auto& p : preds) runs.push_back(median_triples(read_json_file(p)));
            json report;
            report["schema"] = "ffmedian-eval";
            report["version"] = report_schema_version;
            json per_run = json::array();
            for (std::size_t r = 0; r < runs.size(); ++r) {
                json item{{"pred", preds[r]}, {"groups", runs[r].size()}};
                if (!truth_file.empty()) {
                    auto pr = precision_recall(runs[r], read_truth_pairs_file(truth_file), strict);
                    if (pr.ignored) log("eval", {{"pred", preds[r]}, {"ignored_pairs", pr.ignored}});
                    item["pairs"] = eval_json(pr);
                }
                if (!groups_file.empty())
                    item["classes"] = classes_json(classify_vs_reference(runs[r], read_groups_file(groups_file)));
                per_run.push_back(item);
            }
            report["runs"] = per_run;
            if (!robust_pair.empty()) {
                if (runs.size() < 2) throw InputError("--robust needs at least two --pred files");
                report["robustness"] = {{"genomes", robust_pair},
                                        {"percent", robustness(runs, robust_pair[0], robust_pair[1])}};
            }
            print_json(report, eval_out);
        } else if (*run) {
            config.engine = parse_engine(engine);
            config.icf_seg = !run_no_icf;
            auto result = run_pipeline(config, log);
            code = result.exit_code;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
    return code;
}
