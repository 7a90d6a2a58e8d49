#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ffmedian/genome.hpp"

namespace ffmedian {

// One predicted orthologous group: a gene of each extant genome.
using OrthologTriple = std::array<GeneId, 3>;
// Unordered gene pair, stored with first < second.
using GenePair = std::pair<GeneId, GeneId>;

GenePair make_pair_of(const GeneId& a, const GeneId& b);

struct TruthPairs {
    std::set<GenePair> pairs;
    std::set<GeneId> universe;  // every gene named in the file

    void add(const GeneId& a, const GeneId& b);
};

// "geneA<TAB>geneB" per line with "label:name" ids; a single id declares a
// gene without true orthologs.
TruthPairs read_truth_pairs(std::istream& in, const std::string& source = "<stream>");
TruthPairs read_truth_pairs_file(const std::string& path);

struct EvalReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    bool precision_vacuous = false;  // tp + fp == 0
    bool recall_vacuous = false;     // tp + fn == 0
    std::size_t ignored = 0;         // predicted pairs outside the truth universe
};

// Counts over pairs. Pairs touching genes outside the truth universe are
// ignored, or raise InputError when strict.
EvalReport precision_recall_pairs(const std::set<GenePair>& predicted, const TruthPairs& truth, bool strict = false);

// Every triple contributes its three induced pairs.
std::set<GenePair> induced_pairs(const std::vector<OrthologTriple>& predicted);
EvalReport precision_recall(const std::vector<OrthologTriple>& predicted, const TruthPairs& truth,
                            bool strict = false);

enum class Agreement { agree, compatible, disagree };

const char* to_string(Agreement a);

// Gene -> reference group label.
class TruthMap {
public:
    TruthMap() = default;
    explicit TruthMap(std::map<GeneId, std::string> groups);

    const std::string* group(const GeneId& gene) const;
    // Members of `group` in genome `label`.
    std::size_t members_in(const std::string& group, const std::string& label) const;
    std::size_t size() const { return groups_.size(); }

private:
    std::map<GeneId, std::string> groups_;
    std::map<std::pair<std::string, std::string>, std::size_t> counts_;  // (group, genome) -> genes
};

// "gene<TAB>group_id" per line.
TruthMap read_groups(std::istream& in, const std::string& source = "<stream>");
TruthMap read_groups_file(const std::string& path);

// agree: one group for all three genes. disagree: for some ordered pair
// (x, y), both grouped, different groups, and x's group holds another gene
// of y's genome. compatible otherwise.
Agreement classify(const OrthologTriple& triple, const TruthMap& reference);

struct ClassCounts {
    std::size_t agree = 0;
    std::size_t compatible = 0;
    std::size_t disagree = 0;
    std::size_t total() const { return agree + compatible + disagree; }
};

ClassCounts classify_vs_reference(const std::vector<OrthologTriple>& predicted, const TruthMap& reference,
                                  std::vector<Agreement>* classes = nullptr);

// Percentage of (x, y) pairs, x of genome x_label and y of y_label,
// predicted in at least one run that are predicted in every run where both
// genes are present. Without universes every gene counts as present in every
// run. Throws std::invalid_argument for fewer than two runs.
double robustness(const std::vector<std::vector<OrthologTriple>>& runs, const std::string& x_label,
                  const std::string& y_label, const std::vector<std::set<GeneId>>& universes = {});

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // population
};

Summary summarize(const std::vector<double>& values);

}  // namespace ffmedian
