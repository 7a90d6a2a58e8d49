#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffmedian/candidates.hpp"
#include "ffmedian/evaluation.hpp"
#include "ffmedian/ilp.hpp"
#include "ffmedian/ingestion.hpp"
#include "ffmedian/segments.hpp"
#include "ffmedian/solver.hpp"

namespace ffmedian {

inline constexpr int report_schema_version = 1;
inline constexpr const char* tool_version = "0.1.0";

enum class Engine { branch_and_bound, oracle };

Engine parse_engine(const std::string& name);  // "bb" or "oracle"
const char* to_string(Engine engine);

struct RunConfig {
    std::vector<std::string> genome_files;
    std::string similarity_file;          // either this ...
    std::vector<std::string> hit_files;   // ... or alignment tables
    FilterParams filter;
    bool require_reciprocal = false;
    bool discard_nonclique = false;
    bool icf_seg = true;
    std::size_t conflict_cap = 20;
    Engine engine = Engine::branch_and_bound;
    double time_limit = 10800.0;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::string truth_file;
    std::string groups_file;
    bool strict = false;
    bool canonical = false;  // no timings, no output dir, input basenames only

    // Throws InputError.
    void validate() const;
    nlohmann::json to_json() const;
};

// JSON lines on a stream; silent without one.
struct Log {
    std::ostream* out = nullptr;
    void operator()(const std::string& stage, nlohmann::json fields = nlohmann::json::object()) const;
};

// Thread count after the FFMEDIAN_THREADS override.
unsigned effective_threads(unsigned requested);

// Genome files must hold exactly three genomes between them.
std::array<Genome, genome_count> load_genomes(const std::vector<std::string>& files);
SimilarityGraph build_similarity(const std::vector<std::string>& hit_files, const FilterParams& filter,
                                 bool require_reciprocal, const Log& log = {});
Instance load_instance(const std::vector<std::string>& genome_files, SimilarityGraph sigma, bool discard_nonclique,
                       const Log& log = {});

struct SolveOutcome {
    CandidateSet candidates;
    IlpModel model;
    std::optional<IcfSegResult> seg;
    MedianSolution solution;  // indices into candidates / model
};

SolveOutcome solve_instance(const CandidateSet& candidates, Engine engine, bool icf, std::size_t conflict_cap,
                            const SolveOptions& options, const Log& log = {});

// 0 optimal or empty, 2 feasible.
int exit_code(SolveStatus status);

nlohmann::json median_json(const CandidateSet& candidates, const IlpModel& model, const MedianSolution& solution);
// Non-telomere gene triples of a median document.
std::vector<OrthologTriple> median_triples(const nlohmann::json& median);
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& doc);

void write_accepted_tsv(std::ostream& out, const CandidateSet& candidates, const IcfSegResult& seg);

nlohmann::json eval_json(const EvalReport& report);
nlohmann::json classes_json(const ClassCounts& counts);

struct PipelineResult {
    int exit_code = 0;
    nlohmann::json report;
    nlohmann::json median;
};

// Reads, solves and evaluates; writes median.json and report.json (plus
// graph.sim and candidates.tsv) when an output directory is set. Input
// problems surface as InputError.
PipelineResult run_pipeline(const RunConfig& config, const Log& log = {});

}  // namespace ffmedian
