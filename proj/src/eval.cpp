#include "kgbayes/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgbayes/errors.hpp"
#include "kgbayes/mixture_hbm.hpp"
#include "kgbayes/numerics.hpp"

namespace kgbayes {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

std::string Problem::definition_text() const {
    std::string out;
    for (std::size_t c = 0; c < definition.size(); ++c) {
        if (c) out += " or ";
        out += '(';
        for (std::size_t l = 0; l < definition[c].size(); ++l) {
            if (l) out += " and ";
            if (definition[c][l].negated) out += "not ";
            out += definition[c][l].feature_name;
        }
        out += ')';
    }
    return out;
}

namespace {

// Kleene three-valued evaluation of a disjunction of conjunctions.
Ternary eval_definition(const std::vector<Conjunct>& def, const std::vector<Ternary>& row) {
    bool any_true = false, all_false = true;
    for (const auto& conj : def) {
        bool c_false = false, c_all_true = true;
        for (const auto& lit : conj) {
            Ternary v = row[lit.feature];
            if (!is_known(v)) {
                c_all_true = false;
                continue;
            }
            bool truth = (v == Ternary::True) != lit.negated;
            if (!truth) {
                c_false = true;
                c_all_true = false;
                break;
            }
        }
        if (c_all_true) any_true = true;
        if (!c_false) all_false = false;
    }
    if (any_true) return Ternary::True;
    if (all_false) return Ternary::False;
    return Ternary::Unknown;
}

}  // namespace

std::vector<Problem> generate_problems(const Dataset& encoded, int n, int min_pos, int min_neg,
                                       std::uint64_t seed) {
    if (n < 1) throw DataError("generate_problems: n must be >= 1");
    if (encoded.dims() == 0) throw DataError("generate_problems: no features");

    Rng rng(seed);
    std::vector<Problem> out;
    int rejected = 0, short_pos = 0, short_neg = 0;
    while (static_cast<int>(out.size()) < n) {
        if (rejected >= 10000) {
            std::string tightest = short_pos >= short_neg
                                       ? "min_pos=" + std::to_string(min_pos)
                                       : "min_neg=" + std::to_string(min_neg);
            throw DataError("problem generation exhausted after 10000 rejections; tightest "
                            "constraint: " +
                            tightest);
        }
        std::vector<Conjunct> def;
        int n_disjuncts = 2 + static_cast<int>(rng.next_index(2));  // 2..3
        for (int cj = 0; cj < n_disjuncts; ++cj) {
            Conjunct conj;
            int n_lits = 1 + static_cast<int>(rng.next_index(2));  // 1..2
            std::vector<std::size_t> picked;
            for (int l = 0; l < n_lits; ++l) {
                std::size_t f = rng.next_index(encoded.dims());
                if (std::find(picked.begin(), picked.end(), f) != picked.end()) continue;
                picked.push_back(f);
                conj.push_back({static_cast<int>(f), rng.next_index(2) == 1,
                                encoded.features[f].name});
            }
            def.push_back(std::move(conj));
        }

        std::vector<Ternary> labels(encoded.rows());
        int pos = 0, neg = 0;
        for (std::size_t t = 0; t < encoded.rows(); ++t) {
            labels[t] = eval_definition(def, encoded.x[t]);
            if (labels[t] == Ternary::True) ++pos;
            if (labels[t] == Ternary::False) ++neg;
        }
        if (pos < min_pos || neg < min_neg) {
            ++rejected;
            if (pos < min_pos) ++short_pos;
            if (neg < min_neg) ++short_neg;
            continue;
        }
        Problem p;
        p.name = "P" + std::string(out.size() + 1 < 10 ? "0" : "") + std::to_string(out.size() + 1);
        p.definition = std::move(def);
        p.labels = std::move(labels);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Problem> generate_problems(const KnowledgeBase& kb, const std::vector<Feature>& feats,
                                       int n, int min_pos, int min_neg, std::uint64_t seed) {
    return generate_problems(encode_individuals(kb, feats), n, min_pos, min_neg, seed);
}

std::vector<int> FoldSplit::test_rows(int fold) const {
    std::vector<int> out;
    for (std::size_t t = 0; t < fold_of_row.size(); ++t)
        if (fold_of_row[t] == fold) out.push_back(static_cast<int>(t));
    return out;
}

std::vector<int> FoldSplit::train_rows(int fold) const {
    std::vector<int> out;
    for (std::size_t t = 0; t < fold_of_row.size(); ++t)
        if (fold_of_row[t] != fold) out.push_back(static_cast<int>(t));
    return out;
}

FoldSplit stratified_kfold(const std::vector<Ternary>& labels, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("stratified_kfold: k must be >= 2");
    std::vector<std::vector<int>> strata(3);
    for (std::size_t t = 0; t < labels.size(); ++t)
        strata[static_cast<int>(labels[t])].push_back(static_cast<int>(t));
    for (const auto& s : strata)
        if (!s.empty() && static_cast<int>(s.size()) < k)
            throw DataError("stratified_kfold: a stratum with " + std::to_string(s.size()) +
                            " rows cannot fill " + std::to_string(k) + " folds");

    Rng rng(seed);
    FoldSplit split;
    split.k = k;
    split.fold_of_row.assign(labels.size(), 0);
    int deal = 0;  // carries over between strata so fold sizes differ by <= 1
    for (auto& s : strata) {
        rng.shuffle(s);
        for (int row : s) {
            split.fold_of_row[row] = deal % k;
            ++deal;
        }
    }
    return split;
}

MetricsReport compute_metrics(const std::vector<bool>& y_true, const std::vector<bool>& y_pred) {
    if (y_true.empty()) throw DataError("compute_metrics: empty input");
    if (y_true.size() != y_pred.size()) throw DataError("compute_metrics: length mismatch");

    int tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] && y_pred[i]) ++tp;
        if (!y_true[i] && y_pred[i]) ++fp;
        if (!y_true[i] && !y_pred[i]) ++tn;
        if (y_true[i] && !y_pred[i]) ++fn;
    }

    MetricsReport r;
    r.support_pos = tp + fn;
    r.support_neg = tn + fp;
    bool flagged = false;
    auto safe_div = [&flagged](double num, double den) {
        if (den == 0.0) {
            flagged = true;
            return 0.0;
        }
        return num / den;
    };

    double prec_pos = safe_div(tp, tp + fp);
    double rec_pos = safe_div(tp, tp + fn);
    double f1_pos = safe_div(2.0 * prec_pos * rec_pos, prec_pos + rec_pos);
    double prec_neg = safe_div(tn, tn + fn);
    double rec_neg = safe_div(tn, tn + fp);
    double f1_neg = safe_div(2.0 * prec_neg * rec_neg, prec_neg + rec_neg);

    double n = static_cast<double>(y_true.size());
    double w_pos = r.support_pos / n;
    double w_neg = r.support_neg / n;
    r.precision = w_pos * prec_pos + w_neg * prec_neg;
    r.recall = w_pos * rec_pos + w_neg * rec_neg;
    r.f1 = w_pos * f1_pos + w_neg * f1_neg;
    r.gmean = std::sqrt(rec_pos * rec_neg);
    r.degenerate = flagged;
    return r;
}

MetricsReport aggregate_metrics(const std::vector<MetricsReport>& folds) {
    if (folds.empty()) throw DataError("aggregate_metrics: empty input");
    MetricsReport out;
    auto mean_std = [&](auto getter, double& mean, double& sd) {
        double m = 0.0;
        for (const auto& f : folds) m += getter(f);
        m /= folds.size();
        double v = 0.0;
        for (const auto& f : folds) v += (getter(f) - m) * (getter(f) - m);
        v /= folds.size();
        mean = m;
        sd = std::sqrt(v);
    };
    mean_std([](const MetricsReport& f) { return f.precision; }, out.precision, out.precision_std);
    mean_std([](const MetricsReport& f) { return f.recall; }, out.recall, out.recall_std);
    mean_std([](const MetricsReport& f) { return f.f1; }, out.f1, out.f1_std);
    mean_std([](const MetricsReport& f) { return f.gmean; }, out.gmean, out.gmean_std);
    for (const auto& f : folds) {
        out.support_pos += f.support_pos;
        out.support_neg += f.support_neg;
        out.degenerate = out.degenerate || f.degenerate;
    }
    return out;
}

namespace {

// Nemenyi critical values for alpha = 0.05 and 0.10, k = 2..10 models
// (studentized range over sqrt(2)).
constexpr double kNemenyi05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
constexpr double kNemenyi10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};

}  // namespace

RankTestResult friedman_nemenyi(const std::vector<std::vector<double>>& scores, double alpha) {
    std::size_t n = scores.size();
    if (n < 2) throw DataError("friedman_nemenyi: need at least 2 problems");
    std::size_t k = scores[0].size();
    if (k < 2) throw DataError("friedman_nemenyi: need at least 2 models");
    if (k > 10) throw DataError("friedman_nemenyi: critical values cover at most 10 models");
    for (const auto& row : scores)
        if (row.size() != k) throw DataError("friedman_nemenyi: ragged score matrix");
    if (alpha != 0.05 && alpha != 0.10)
        throw DataError("friedman_nemenyi: alpha must be 0.05 or 0.10");

    // Per-problem ranks, best (highest score) = rank 1, ties averaged.
    RankTestResult res;
    res.mean_ranks.assign(k, 0.0);
    for (const auto& row : scores) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
            double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t t = i; t <= j; ++t) res.mean_ranks[order[t]] += avg_rank;
            i = j + 1;
        }
    }
    for (double& r : res.mean_ranks) r /= static_cast<double>(n);

    double sum_sq = 0.0;
    for (double r : res.mean_ranks) sum_sq += r * r;
    double kd = static_cast<double>(k);
    double nd = static_cast<double>(n);
    res.statistic = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
    if (res.statistic < 0.0) res.statistic = 0.0;  // guard fp noise on tied inputs
    res.p_value = chi_square_survival(res.statistic, static_cast<int>(k) - 1);

    const double* table = alpha == 0.05 ? kNemenyi05 : kNemenyi10;
    double q = table[k - 2];
    res.critical_difference = q * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            if (std::fabs(res.mean_ranks[a] - res.mean_ranks[b]) > res.critical_difference)
                res.significant_pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    return res;
}

std::string model_name(ModelKind k) {
    switch (k) {
        case ModelKind::Mbnb: return "mbnb";
        case ModelKind::MbnbEm: return "mbnb-em";
        case ModelKind::Hbm: return "hbm";
    }
    return "?";
}

namespace {

// Train on the fold's training rows and return predictions for the test rows.
std::vector<bool> fit_and_predict(ModelKind kind, const Dataset& train,
                                  const std::vector<std::vector<Ternary>>& test_rows,
                                  const BenchConfig& cfg, int components) {
    std::vector<bool> preds;
    preds.reserve(test_rows.size());
    switch (kind) {
        case ModelKind::Mbnb: {
            // Plain supervised fit: unlabeled rows dropped.
            std::vector<int> labeled;
            for (std::size_t t = 0; t < train.rows(); ++t)
                if (is_known((*train.y)[t])) labeled.push_back(static_cast<int>(t));
            MbnbParams m = fit_mle(select_rows(train, labeled), cfg.alpha);
            for (const auto& x : test_rows) preds.push_back(posterior(m, x) > 0.5);
            break;
        }
        case ModelKind::MbnbEm: {
            MbnbParams m = fit_mbnb_em(train, cfg.alpha, cfg.em, true);
            for (const auto& x : test_rows) preds.push_back(posterior(m, x) > 0.5);
            break;
        }
        case ModelKind::Hbm: {
            HbmModel h =
                fit_hbm(train, components, cfg.restarts, cfg.alpha, cfg.em, HbmVariant::Pipeline);
            for (const auto& x : test_rows) preds.push_back(hbm_posterior(h, x) > 0.5);
            break;
        }
    }
    return preds;
}

}  // namespace

BenchReport run_benchmark(const KnowledgeBase& kb, const BenchConfig& cfg) {
    BenchReport report;
    for (ModelKind m : cfg.models) report.model_names.push_back(model_name(m));

    std::vector<Feature> feats = generate_features(kb);
    Dataset encoded = encode_individuals(kb, feats);
    Dataset ds = variance_select(encoded, cfg.variance_cutoff);
    if (ds.dims() == 0) throw DataError("run_benchmark: variance selection kept no features");

    bool wants_hbm = std::find(cfg.models.begin(), cfg.models.end(), ModelKind::Hbm) !=
                     cfg.models.end();
    int components = cfg.components;
    if (wants_hbm && components == 0) {
        KSelection sel = select_k(ds, cfg.k_grid, cfg.restarts, cfg.em);
        components = sel.best_k;
    }
    report.chosen_components = components;

    std::ostringstream header;
    header << "models:";
    for (const auto& n : report.model_names) header << ' ' << n;
    header << "\nfolds: " << cfg.folds << "\nproblems: " << cfg.problems
           << "\nmin_pos: " << cfg.min_pos << "\nmin_neg: " << cfg.min_neg
           << "\nseed: " << cfg.seed << "\nvariance_cutoff: " << fmt(cfg.variance_cutoff, "%g")
           << "\nalpha: " << fmt(cfg.alpha, "%g") << "\nrestarts: " << cfg.restarts
           << "\nfeatures: " << encoded.dims() << " generated, " << ds.dims() << " selected"
           << "\nindividuals: " << ds.rows();
    if (wants_hbm) header << "\nhbm_components: " << components;
    header << "\ngmean: computed per fold, then averaged\n";
    report.header = header.str();

    // Problems are defined over the full generated feature set; models consume
    // the variance-selected encoding.
    std::vector<Problem> problems =
        generate_problems(encoded, cfg.problems, cfg.min_pos, cfg.min_neg, cfg.seed);

    for (std::size_t pi = 0; pi < problems.size(); ++pi) {
        const Problem& prob = problems[pi];
        BenchReport::ProblemResult pr;
        pr.problem = prob.name;
        pr.definition = prob.definition_text();
        try {
            std::uint64_t fold_seed = cfg.seed + 7919ull * (pi + 1);
            FoldSplit split = stratified_kfold(prob.labels, cfg.folds, fold_seed);
            Dataset labeled_ds = with_labels(ds, prob.labels);

            pr.per_model_folds.assign(cfg.models.size(), {});
            for (int fold = 0; fold < cfg.folds; ++fold) {
                std::vector<int> train_idx = split.train_rows(fold);
                std::vector<int> test_idx = split.test_rows(fold);
                Dataset train = select_rows(labeled_ds, train_idx);

                std::vector<std::vector<Ternary>> test_x;
                std::vector<bool> y_true;
                for (int t : test_idx) {
                    if (!is_known(prob.labels[t])) continue;  // definite memberships only
                    test_x.push_back(ds.x[t]);
                    y_true.push_back(prob.labels[t] == Ternary::True);
                }
                for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
                    std::vector<bool> preds =
                        fit_and_predict(cfg.models[mi], train, test_x, cfg, components);
                    pr.per_model_folds[mi].push_back(compute_metrics(y_true, preds));
                }
            }
            for (std::size_t mi = 0; mi < cfg.models.size(); ++mi)
                pr.per_model.push_back(aggregate_metrics(pr.per_model_folds[mi]));
        } catch (const Error& e) {
            pr.failed = true;
            pr.error = e.what();
            pr.per_model.clear();
            pr.per_model_folds.clear();
        }
        report.problems.push_back(std::move(pr));
    }

    // Summary over the problems that completed.
    std::vector<std::vector<MetricsReport>> ok;  // [model][problem]
    ok.assign(cfg.models.size(), {});
    for (const auto& pr : report.problems) {
        if (pr.failed) continue;
        for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) ok[mi].push_back(pr.per_model[mi]);
    }
    if (!ok.empty() && !ok[0].empty())
        for (std::size_t mi = 0; mi < cfg.models.size(); ++mi)
            report.summary.push_back(aggregate_metrics(ok[mi]));

    if (cfg.models.size() >= 2 && ok[0].size() >= 2) {
        std::vector<std::vector<double>> f1_scores;
        for (const auto& pr : report.problems) {
            if (pr.failed) continue;
            std::vector<double> row;
            for (const auto& m : pr.per_model) row.push_back(m.f1);
            f1_scores.push_back(std::move(row));
        }
        report.rank_test = friedman_nemenyi(f1_scores, cfg.significance);
        report.rank_test_valid = true;
    }
    return report;
}

namespace {

void write_metrics_row(std::ostream& out, const std::string& model, const MetricsReport& m) {
    out << model << ",precision," << fmt(m.precision) << ',' << fmt(m.precision_std) << '\n';
    out << model << ",recall," << fmt(m.recall) << ',' << fmt(m.recall_std) << '\n';
    out << model << ",f1," << fmt(m.f1) << ',' << fmt(m.f1_std) << '\n';
    out << model << ",gmean," << fmt(m.gmean) << ',' << fmt(m.gmean_std) << '\n';
}

}  // namespace

void BenchReport::write(const std::string& out_dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream out(fs::path(out_dir) / "summary.csv");
        if (!out) throw DataError("cannot write summary.csv");
        out << "model,metric,mean,std\n";
        for (std::size_t mi = 0; mi < summary.size(); ++mi)
            write_metrics_row(out, model_names[mi], summary[mi]);
    }

    for (const auto& pr : problems) {
        std::ofstream out(fs::path(out_dir) / ("problem_" + pr.problem + ".csv"));
        if (!out) throw DataError("cannot write problem file");
        out << "model,fold,precision,recall,f1,gmean,support_pos,support_neg,degenerate\n";
        if (pr.failed) continue;
        for (std::size_t mi = 0; mi < pr.per_model_folds.size(); ++mi)
            for (std::size_t fold = 0; fold < pr.per_model_folds[mi].size(); ++fold) {
                const MetricsReport& m = pr.per_model_folds[mi][fold];
                out << model_names[mi] << ',' << fold << ',' << fmt(m.precision) << ','
                    << fmt(m.recall) << ',' << fmt(m.f1) << ',' << fmt(m.gmean) << ','
                    << m.support_pos << ',' << m.support_neg << ',' << (m.degenerate ? 1 : 0)
                    << '\n';
            }
    }

    {
        std::ofstream out(fs::path(out_dir) / "rank_test.txt");
        if (!out) throw DataError("cannot write rank_test.txt");
        out << header;
        for (const auto& pr : problems) {
            out << "problem " << pr.problem << ": " << pr.definition;
            if (pr.failed) out << "  [FAILED: " << pr.error << "]";
            out << '\n';
        }
        if (!rank_test_valid) {
            out << "rank test: not run (needs >= 2 models and >= 2 completed problems)\n";
            return;
        }
        out << "rank test on weighted F1, chi-square statistic " << fmt(rank_test.statistic, "%.6g")
            << ", p-value " << fmt(rank_test.p_value, "%.6g") << '\n';
        out << "mean ranks:";
        for (std::size_t mi = 0; mi < model_names.size(); ++mi)
            out << ' ' << model_names[mi] << '=' << fmt(rank_test.mean_ranks[mi], "%.4f");
        out << '\n';
        out << "critical difference: " << fmt(rank_test.critical_difference, "%.4f") << '\n';
        if (rank_test.significant_pairs.empty()) {
            out << "significant pairs: none\n";
        } else {
            out << "significant pairs:";
            for (auto [a, b] : rank_test.significant_pairs)
                out << ' ' << model_names[a] << '/' << model_names[b];
            out << '\n';
        }
    }
}

}  // namespace kgbayes
