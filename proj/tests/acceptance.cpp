// Acceptance suite: one binary, one pass/fail line per criterion, nonzero
// exit if anything fails. Run from the repository root (needs data/synth200.kb).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kgbayes/cli.hpp"
#include "kgbayes/dataset.hpp"
#include "kgbayes/em.hpp"
#include "kgbayes/eval.hpp"
#include "kgbayes/mbnb.hpp"
#include "kgbayes/mixture_hbm.hpp"
#include "kgbayes/numerics.hpp"
#include "kgbayes/rules.hpp"

using namespace kgbayes;
namespace fs = std::filesystem;

namespace {

constexpr Ternary T = Ternary::True;
constexpr Ternary F = Ternary::False;
constexpr Ternary U = Ternary::Unknown;

Dataset make_ds(std::vector<std::vector<Ternary>> x, std::vector<Ternary> y) {
    Dataset ds;
    std::size_t d = x.empty() ? 0 : x[0].size();
    for (std::size_t i = 0; i < d; ++i) ds.features.push_back({"f" + std::to_string(i), 0.5, 0.0});
    ds.x = std::move(x);
    if (!y.empty()) ds.y = std::move(y);
    for (std::size_t t = 0; t < ds.x.size(); ++t) ds.row_ids.push_back(std::to_string(t));
    refresh_feature_stats(ds);
    return ds;
}

double brute_posterior(const MbnbParams& m, const std::vector<Ternary>& x) {
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!is_known(x[i])) unknown.push_back(i);
    double num = 0.0, den = 0.0;
    for (std::size_t mask = 0; mask < (1ull << unknown.size()); ++mask) {
        std::vector<double> v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) v[i] = ternary_value(x[i]);
        for (std::size_t u = 0; u < unknown.size(); ++u)
            v[unknown[u]] = (mask >> u) & 1 ? 1.0 : 0.0;
        double b1 = m.pi, b0 = 1.0 - m.pi;
        for (std::size_t i = 0; i < x.size(); ++i) {
            b1 *= v[i] * m.p1[i] + (1.0 - v[i]) * (1.0 - m.p1[i]);
            b0 *= v[i] * m.p0[i] + (1.0 - v[i]) * (1.0 - m.p0[i]);
        }
        num += b1;
        den += b1 + b0;
    }
    return num / den;
}

// ---------------------------------------------------------------------------

bool criterion_marginalization(std::string& detail) {
    Rng rng(20250801);
    double worst = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        std::size_t d = 1 + rng.next_index(12);
        MbnbParams m;
        m.pi = rng.next_in(0.1, 0.9);
        for (std::size_t i = 0; i < d; ++i) {
            m.p1.push_back(rng.next_in(0.05, 0.95));
            m.p0.push_back(rng.next_in(0.05, 0.95));
            m.feature_names.push_back("f" + std::to_string(i));
        }
        std::vector<Ternary> x(d);
        for (auto& c : x) c = static_cast<Ternary>(rng.next_index(3));
        worst = std::max(worst, std::fabs(posterior(m, x) - brute_posterior(m, x)));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max |err| = %.3g over 500 cases", worst);
    detail = buf;
    return worst <= 1e-10;
}

bool criterion_em_monotonicity(std::string& detail) {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed * 7919 + 13);
        std::size_t n = 20 + rng.next_index(30), d = 2 + rng.next_index(5);
        std::vector<std::vector<Ternary>> x(n, std::vector<Ternary>(d));
        std::vector<Ternary> y(n);
        for (std::size_t t = 0; t < n; ++t) {
            for (auto& c : x[t])
                c = rng.next_unit() < 0.3 ? U : (rng.next_index(2) ? T : F);
            y[t] = rng.next_unit() < 0.25 ? U : (rng.next_index(2) ? T : F);
        }
        y[0] = T;
        y[1] = F;
        Dataset ds = make_ds(x, y);

        std::vector<int> labeled;
        for (std::size_t t = 0; t < n; ++t)
            if (is_known((*ds.y)[t])) labeled.push_back(static_cast<int>(t));
        Dataset sub = select_rows(ds, labeled);
        double alpha = seed % 2 ? 1.0 : 0.0;

        auto monotone = [](const EmTrace& tr) {
            for (std::size_t i = 1; i < tr.loglik.size(); ++i)
                if (tr.loglik[i] < tr.loglik[i - 1] - 1e-9) return false;
            return true;
        };
        MbnbParams init = fit_mle(sub, alpha);
        if (!monotone(em_phase1(sub, init, {}).trace)) ++violations;
        if (!monotone(em_phase2(impute_constant(ds), *ds.y, init, {}).trace)) ++violations;
        EmConfig mix_cfg;
        mix_cfg.seed = seed;
        if (!monotone(fit_mixture(ds, 2, 1, mix_cfg).trace)) ++violations;
    }
    detail = std::to_string(violations) + " violating traces of 300";
    return violations == 0;
}

bool criterion_parameter_recovery(std::string& detail) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed * 104729 + 7);
        std::size_t d = 10, n = 2000;
        MbnbParams truth;
        truth.pi = 0.5;
        for (std::size_t i = 0; i < d; ++i) {
            truth.p1.push_back(rng.next_in(0.1, 0.9));
            truth.p0.push_back(rng.next_in(0.1, 0.9));
            truth.feature_names.push_back("f" + std::to_string(i));
        }
        std::vector<std::vector<Ternary>> x(n, std::vector<Ternary>(d));
        std::vector<Ternary> y(n);
        for (std::size_t t = 0; t < n; ++t) {
            bool pos = rng.next_unit() < truth.pi;
            y[t] = pos ? T : F;
            for (std::size_t i = 0; i < d; ++i)
                x[t][i] = rng.next_unit() < (pos ? truth.p1[i] : truth.p0[i]) ? T : F;
        }
        MbnbParams fit = fit_mle(make_ds(x, y), 0.0);
        double worst = std::fabs(fit.pi - truth.pi);
        for (std::size_t i = 0; i < d; ++i) {
            worst = std::max(worst, std::fabs(fit.p1[i] - truth.p1[i]));
            worst = std::max(worst, std::fabs(fit.p0[i] - truth.p0[i]));
        }
        if (worst <= 0.05) ++good;
    }
    detail = std::to_string(good) + "/50 seeds with every parameter within 0.05";
    return good >= 48;  // >= 95%
}

bool criterion_mixture_recovery(std::string& detail) {
    int good = 0;
    for (std::uint64_t run = 0; run < 50; ++run) {
        Rng rng(run * 2654435761ull + 3);
        std::size_t d = 10, n = 2000;
        std::vector<std::vector<Ternary>> x;
        for (std::size_t t = 0; t < n; ++t) {
            bool a = rng.next_index(2) == 0;
            std::vector<Ternary> row(d);
            for (std::size_t i = 0; i < d; ++i)
                row[i] = rng.next_unit() < ((i < d / 2) == a ? 0.9 : 0.1) ? T : F;
            x.push_back(std::move(row));
        }
        EmConfig cfg;
        cfg.seed = run * 31 + 1;
        MixtureFit fit = fit_mixture(make_ds(x, {}), 2, 10, cfg);
        // Match components by the first coordinate.
        int ca = fit.params.p[0][0] > 0.5 ? 0 : 1;
        double worst = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double pa = i < d / 2 ? 0.9 : 0.1;
            worst = std::max(worst, std::fabs(fit.params.p[ca][i] - pa));
            worst = std::max(worst, std::fabs(fit.params.p[1 - ca][i] - (1.0 - pa)));
        }
        if (worst <= 0.05) ++good;
    }
    detail = std::to_string(good) + "/50 runs recovered P within 0.05 up to permutation";
    return good >= 45;  // >= 90%
}

bool criterion_missing_data_benefit(std::string& detail) {
    double sum_em = 0.0, sum_const = 0.0;
    const std::size_t d = 10, n_train = 2000, n_test = 1000;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed * 1299709 + 11);
        MbnbParams truth;
        truth.pi = 0.5;
        for (std::size_t i = 0; i < d; ++i) {
            truth.p1.push_back(0.9);
            truth.p0.push_back(0.1);
            truth.feature_names.push_back("f" + std::to_string(i));
        }
        auto sample = [&](std::size_t n, std::vector<std::vector<Ternary>>& x,
                          std::vector<Ternary>& y) {
            for (std::size_t t = 0; t < n; ++t) {
                bool pos = rng.next_unit() < truth.pi;
                y.push_back(pos ? T : F);
                std::vector<Ternary> row(d);
                for (std::size_t i = 0; i < d; ++i)
                    row[i] = rng.next_unit() < (pos ? truth.p1[i] : truth.p0[i]) ? T : F;
                x.push_back(std::move(row));
            }
        };
        std::vector<std::vector<Ternary>> xtr, xte;
        std::vector<Ternary> ytr, yte;
        sample(n_train, xtr, ytr);
        sample(n_test, xte, yte);
        // 30% MAR erasure of inputs and labels in the training set.
        for (auto& row : xtr)
            for (auto& c : row)
                if (rng.next_unit() < 0.3) c = U;
        for (auto& label : ytr)
            if (rng.next_unit() < 0.3) label = U;
        ytr[0] = T;
        ytr[1] = F;
        Dataset train = make_ds(xtr, ytr);

        // Constant-imputation baseline on the labeled rows.
        std::vector<int> labeled;
        for (std::size_t t = 0; t < n_train; ++t)
            if (is_known((*train.y)[t])) labeled.push_back(static_cast<int>(t));
        Dataset sub = select_rows(train, labeled);
        MbnbParams const_fit = fit_mle_soft(impute_constant(sub), *sub.y, feature_names(sub), 1.0);

        // EM pipeline over missing inputs and labels.
        MbnbParams em_fit = fit_mbnb_em(train, 1.0, {}, true);

        auto f1_of = [&](const MbnbParams& m) {
            std::vector<bool> yt, yp;
            for (std::size_t t = 0; t < n_test; ++t) {
                yt.push_back(yte[t] == T);
                yp.push_back(posterior(m, xte[t]) > 0.5);
            }
            return compute_metrics(yt, yp).f1;
        };
        sum_const += f1_of(const_fit);
        sum_em += f1_of(em_fit);
    }
    double mean_em = sum_em / 20.0, mean_const = sum_const / 20.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "mean F1: em=%.4f const=%.4f", mean_em, mean_const);
    detail = buf;
    return mean_em >= mean_const - 0.01 && mean_em >= 0.95;
}

bool criterion_hbm_separation(std::string& detail) {
    Rng rng(424242);
    const std::size_t d = 10;
    auto sample = [&](bool first_hi, bool second_hi) {
        std::vector<Ternary> r(d);
        for (std::size_t i = 0; i < d; ++i)
            r[i] = rng.next_unit() < ((i < d / 2 ? first_hi : second_hi) ? 0.9 : 0.1) ? T : F;
        return r;
    };
    std::vector<std::vector<Ternary>> xtr, xte;
    std::vector<Ternary> ytr;
    std::vector<bool> yte;
    for (int t = 0; t < 2000; ++t) {
        bool pos = t % 2 == 0;
        bool flip = rng.next_index(2) == 0;
        xtr.push_back(pos ? sample(flip, !flip) : sample(flip, flip));
        ytr.push_back(pos ? T : F);
    }
    for (int t = 0; t < 1000; ++t) {
        bool pos = t % 2 == 0;
        bool flip = rng.next_index(2) == 0;
        xte.push_back(pos ? sample(flip, !flip) : sample(flip, flip));
        yte.push_back(pos);
    }
    Dataset train = make_ds(xtr, ytr);
    HbmModel h = fit_hbm(train, 2, 10, 1.0, {}, HbmVariant::ClassConditional);
    MbnbParams nb = fit_mle(train, 1.0);
    int h_ok = 0, nb_ok = 0;
    for (std::size_t t = 0; t < xte.size(); ++t) {
        if ((hbm_posterior(h, xte[t]) > 0.5) == yte[t]) ++h_ok;
        if ((posterior(nb, xte[t]) > 0.5) == yte[t]) ++nb_ok;
    }
    double h_acc = h_ok / 1000.0, nb_acc = nb_ok / 1000.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "accuracy: hbm=%.3f mbnb=%.3f", h_acc, nb_acc);
    detail = buf;
    return h_acc >= 0.95 && nb_acc <= 0.6;
}

bool criterion_rule_roundtrip(std::string& detail) {
    const std::set<std::string> defining{"f0", "f2", "f5"};
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed * 6700417 + 5);
        std::size_t d = 8, n = 2000;
        std::vector<std::vector<Ternary>> x;
        std::vector<Ternary> y;
        for (std::size_t t = 0; t < n; ++t) {
            bool pos = rng.next_unit() < 0.5;
            std::vector<Ternary> row(d);
            for (std::size_t i = 0; i < d; ++i) {
                bool def = defining.count("f" + std::to_string(i)) > 0;
                row[i] = rng.next_unit() < (pos && def ? 0.98 : 0.5) ? T : F;
            }
            x.push_back(std::move(row));
            y.push_back(pos ? T : F);
        }
        y[0] = T;
        y[1] = F;
        MbnbParams m = fit_mle(make_ds(x, y), 1.0);
        ApproximateAxiom a = extract_axiom(m, "C", 0.9);
        std::set<std::string> pos_set(a.positive.begin(), a.positive.end());
        if (pos_set == defining) ++hits;
    }
    detail = std::to_string(hits) + "/100 seeds recovered the defining set exactly";
    return hits >= 99;
}

bool criterion_metrics_oracle(std::string& detail) {
    Rng rng(321);
    for (int rep = 0; rep < 1000; ++rep) {
        std::size_t n = 1 + rng.next_index(40);
        std::vector<bool> yt(n), yp(n);
        for (std::size_t i = 0; i < n; ++i) {
            yt[i] = rng.next_index(2) == 1;
            yp[i] = rng.next_index(2) == 1;
        }
        int tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (yt[i] && yp[i]) ++tp;
            if (!yt[i] && yp[i]) ++fp;
            if (!yt[i] && !yp[i]) ++tn;
            if (yt[i] && !yp[i]) ++fn;
        }
        auto div = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
        double pp = div(tp, tp + fp), rp = div(tp, tp + fn);
        double pn = div(tn, tn + fn), rn = div(tn, tn + fp);
        double wp = (tp + fn) / static_cast<double>(n), wn = (tn + fp) / static_cast<double>(n);
        MetricsReport got = compute_metrics(yt, yp);
        if (got.precision != wp * pp + wn * pn) {
            detail = "precision mismatch";
            return false;
        }
        if (got.recall != wp * rp + wn * rn) {
            detail = "recall mismatch";
            return false;
        }
        if (got.f1 != wp * div(2 * pp * rp, pp + rp) + wn * div(2 * pn * rn, pn + rn)) {
            detail = "f1 mismatch";
            return false;
        }
        if (got.gmean != std::sqrt(rp * rn)) {
            detail = "gmean mismatch";
            return false;
        }
    }
    // Hand example to 1e-12.
    MetricsReport hand = compute_metrics({true, true, false, false}, {true, false, false, false});
    bool ok = std::fabs(hand.gmean - std::sqrt(0.5)) < 1e-12 &&
              std::fabs(hand.f1 - (0.5 * (2.0 / 3.0) + 0.5 * 0.8)) < 1e-12;
    detail = "1000 random vectors exact, hand values within 1e-12";
    return ok;
}

bool criterion_friedman(std::string& detail) {
    std::vector<std::vector<double>> strict(10, {0.9, 0.8, 0.7});
    RankTestResult a = friedman_nemenyi(strict, 0.05);
    std::vector<std::vector<double>> equal(10, {0.5, 0.5, 0.5});
    RankTestResult b = friedman_nemenyi(equal, 0.05);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "strict chi2=%.17g, identical chi2=%.3g p=%.3g", a.statistic,
                  b.statistic, b.p_value);
    detail = buf;
    return a.statistic == 20.0 && b.statistic == 0.0 && b.p_value == 1.0 &&
           std::fabs(a.p_value - std::exp(-10.0)) < 1e-15;
}

bool criterion_end_to_end_determinism(std::string& detail) {
    if (!fs::exists("data/synth200.kb")) {
        detail = "data/synth200.kb not found (run from the repository root)";
        return false;
    }
    fs::path dir1 = fs::temp_directory_path() / "kgb_acceptance_run1";
    fs::path dir2 = fs::temp_directory_path() / "kgb_acceptance_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    if (cli::run({"eval", "data/synth200.kb", "-o", dir1.string(), "--seed", "42"}) != 0) {
        detail = "first eval run failed";
        return false;
    }
    if (cli::run({"eval", "data/synth200.kb", "-o", dir2.string(), "--seed", "42"}) != 0) {
        detail = "second eval run failed";
        return false;
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dir1)) {
        fs::path other = dir2 / entry.path().filename();
        if (!fs::exists(other)) {
            detail = "missing " + other.string();
            return false;
        }
        std::ifstream a(entry.path(), std::ios::binary), b(other, std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (sa.str() != sb.str()) {
            detail = "byte difference in " + entry.path().filename().string();
            return false;
        }
        ++files;
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    detail = std::to_string(files) + " report files byte-identical across runs";
    return files >= 12;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
    double time_limit_s;  // 0 = none
};

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "marginalization oracle (500 cases, 1e-10)", criterion_marginalization, 10.0},
        {2, "EM monotonicity across 100 seeds", criterion_em_monotonicity, 60.0},
        {3, "MBNB parameter recovery (D=10, N=2000)", criterion_parameter_recovery, 30.0},
        {4, "mixture recovery up to permutation", criterion_mixture_recovery, 0.0},
        {5, "missing-data benefit of the EM fit", criterion_missing_data_benefit, 0.0},
        {6, "HBM separates the block construction", criterion_hbm_separation, 0.0},
        {7, "rule round-trip at theta=0.9", criterion_rule_roundtrip, 0.0},
        {8, "metrics confusion-matrix oracle", criterion_metrics_oracle, 0.0},
        {9, "Friedman statistic closed forms", criterion_friedman, 0.0},
        {10, "end-to-end eval determinism", criterion_end_to_end_determinism, 120.0},
    };

    int failures = 0;
    for (auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
            ok = false;
            detail += " [exceeded " + std::to_string(c.time_limit_s) + "s limit]";
        }
        std::printf("[%s] criterion %2d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.c_str(), secs);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
