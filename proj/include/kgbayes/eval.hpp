#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgbayes/dataset.hpp"
#include "kgbayes/em.hpp"
#include "kgbayes/kg_encoder.hpp"

namespace kgbayes {

// Randomly generated disjunctive target over encoded features, with
// three-valued labels computed under Kleene semantics.
struct ProblemLiteral {
    int feature = 0;  // column index in the encoding
    bool negated = false;
    std::string feature_name;
};
using Conjunct = std::vector<ProblemLiteral>;

struct Problem {
    std::string name;
    std::vector<Conjunct> definition;  // disjunction of conjunctions
    std::vector<Ternary> labels;       // per individual
    std::string definition_text() const;
};

// Rejection-samples disjunctions of 2-3 conjunctions, each of 1-2 (possibly
// negated) features, until n candidates meet the min_pos/min_neg counts.
// Fails after 10000 rejected candidates.
std::vector<Problem> generate_problems(const KnowledgeBase& kb, const std::vector<Feature>& feats,
                                       int n, int min_pos, int min_neg, std::uint64_t seed);
std::vector<Problem> generate_problems(const Dataset& encoded, int n, int min_pos, int min_neg,
                                       std::uint64_t seed);

// Stratified assignment: positive, negative and unknown rows are shuffled
// independently and dealt round-robin, the deal position carrying over
// between strata so fold sizes differ by at most one.
struct FoldSplit {
    int k = 0;
    std::vector<int> fold_of_row;

    std::vector<int> test_rows(int fold) const;
    std::vector<int> train_rows(int fold) const;
};
FoldSplit stratified_kfold(const std::vector<Ternary>& labels, int k, std::uint64_t seed);

// Support-weighted binary classification metrics. Zero-denominator metrics
// are reported as 0 and flagged.
struct MetricsReport {
    double precision = 0, recall = 0, f1 = 0, gmean = 0;
    double precision_std = 0, recall_std = 0, f1_std = 0, gmean_std = 0;
    int support_pos = 0, support_neg = 0;
    bool degenerate = false;
};
MetricsReport compute_metrics(const std::vector<bool>& y_true, const std::vector<bool>& y_pred);
MetricsReport aggregate_metrics(const std::vector<MetricsReport>& folds);

// Friedman rank test over a problems x models score matrix (higher scores are
// better), with the Nemenyi critical-difference post hoc at alpha in
// {0.05, 0.10}. Supports up to 10 models.
struct RankTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double critical_difference = 0.0;
    std::vector<double> mean_ranks;
    std::vector<std::pair<int, int>> significant_pairs;  // model index pairs, i < j
};
RankTestResult friedman_nemenyi(const std::vector<std::vector<double>>& scores, double alpha);

enum class ModelKind { Mbnb, MbnbEm, Hbm };
std::string model_name(ModelKind k);

struct BenchConfig {
    std::vector<ModelKind> models{ModelKind::Mbnb, ModelKind::MbnbEm, ModelKind::Hbm};
    int folds = 10;
    int problems = 10;
    int min_pos = 10;
    int min_neg = 10;
    std::uint64_t seed = 42;
    double variance_cutoff = 0.0;
    double alpha = 1.0;
    int components = 0;  // HBM mixture size; 0 selects by BIC over k_grid
    std::vector<int> k_grid{2, 3, 4, 5, 6, 7, 8, 9, 10};
    int restarts = 10;
    EmConfig em;
    double significance = 0.05;
};

struct BenchReport {
    std::vector<std::string> model_names;
    struct ProblemResult {
        std::string problem;
        std::string definition;
        bool failed = false;
        std::string error;
        std::vector<MetricsReport> per_model;                    // aggregated over folds
        std::vector<std::vector<MetricsReport>> per_model_folds;  // [model][fold]
    };
    std::vector<ProblemResult> problems;
    std::vector<MetricsReport> summary;  // per model, mean/std over problems
    RankTestResult rank_test;
    bool rank_test_valid = false;
    int chosen_components = 0;
    std::string header;  // config echo, deterministic

    // summary.csv, problem_<name>.csv per problem, rank_test.txt
    void write(const std::string& out_dir) const;
};

BenchReport run_benchmark(const KnowledgeBase& kb, const BenchConfig& cfg);

}  // namespace kgbayes
