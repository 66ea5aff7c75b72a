#include "kgbayes/em.hpp"

#include <cmath>
#include <ostream>

#include "kgbayes/errors.hpp"
#include "kgbayes/numerics.hpp"

namespace kgbayes {

namespace {

// Beta pseudo-count penalty matching the (n + alpha)/(N + 2 alpha) updates.
double map_penalty(const MbnbParams& m) {
    if (m.alpha == 0.0) return 0.0;
    double s = std::log(m.pi) + std::log1p(-m.pi);
    for (std::size_t i = 0; i < m.dims(); ++i) {
        s += std::log(m.p1[i]) + std::log1p(-m.p1[i]);
        s += std::log(m.p0[i]) + std::log1p(-m.p0[i]);
    }
    return m.alpha * s;
}

bool converged_step(double prev, double cur, double tol) {
    return std::fabs(cur - prev) / (std::fabs(prev) + 1e-12) < tol;
}

}  // namespace

void EmTrace::write_csv(std::ostream& out) const {
    out << "iteration,loglik\n";
    for (std::size_t i = 0; i < loglik.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", loglik[i]);
        out << i << ',' << buf << '\n';
    }
}

Phase1Result em_phase1(const Dataset& ds, const MbnbParams& init, const EmConfig& cfg) {
    if (!ds.has_labels()) throw DataError("em_phase1 requires labels");
    if (init.dims() != ds.dims()) throw DataError("init dimension mismatch");
    if (cfg.tol <= 0.0 || cfg.max_iter < 1) throw DataError("invalid EM configuration");
    for (Ternary label : *ds.y)
        if (!is_known(label)) throw DataError("em_phase1 requires known labels for all rows");

    std::size_t n = ds.rows(), d = ds.dims();
    MbnbParams params = init;

    // The soft matrix is rebuilt from the current parameters each E-step.
    SoftMatrix sm;
    sm.values.assign(n, std::vector<double>(d, 0.0));
    sm.origin.assign(n, std::vector<CellOrigin>(d, CellOrigin::Observed));
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t i = 0; i < d; ++i)
            if (is_known(ds.x[t][i]))
                sm.values[t][i] = ternary_value(ds.x[t][i]);
            else
                sm.origin[t][i] = CellOrigin::Imputed;

    EmTrace trace;
    trace.loglik.push_back(log_likelihood(params, ds) + map_penalty(params));
    for (int it = 0; it < cfg.max_iter; ++it) {
        // E step: class-conditional means for the unknown cells.
        for (std::size_t t = 0; t < n; ++t) {
            const auto& p = (*ds.y)[t] == Ternary::True ? params.p1 : params.p0;
            for (std::size_t i = 0; i < d; ++i)
                if (sm.origin[t][i] == CellOrigin::Imputed) sm.values[t][i] = p[i];
        }
        // M step.
        params = fit_mle_soft(sm, *ds.y, params.feature_names, init.alpha);

        trace.loglik.push_back(log_likelihood(params, ds) + map_penalty(params));
        trace.iterations = it + 1;
        if (converged_step(trace.loglik[trace.loglik.size() - 2], trace.loglik.back(), cfg.tol)) {
            trace.converged = true;
            break;
        }
    }

    // Final completion under the converged parameters.
    for (std::size_t t = 0; t < n; ++t) {
        const auto& p = (*ds.y)[t] == Ternary::True ? params.p1 : params.p0;
        for (std::size_t i = 0; i < d; ++i)
            if (sm.origin[t][i] == CellOrigin::Imputed) sm.values[t][i] = p[i];
    }
    return {std::move(params), std::move(sm), std::move(trace)};
}

namespace {

double phase2_objective(const SoftMatrix& x, const std::vector<Ternary>& y, const MbnbParams& m) {
    double total = 0.0;
    for (std::size_t t = 0; t < x.rows(); ++t) {
        double l1 = std::log(m.pi);
        double l0 = std::log1p(-m.pi);
        for (std::size_t i = 0; i < x.cols(); ++i) {
            l1 += log_bernoulli(x.values[t][i], m.p1[i]);
            l0 += log_bernoulli(x.values[t][i], m.p0[i]);
        }
        if (y[t] == Ternary::True)
            total += l1;
        else if (y[t] == Ternary::False)
            total += l0;
        else
            total += log_sum_exp({l1, l0});
    }
    return total + map_penalty(m);
}

}  // namespace

Phase2Result em_phase2(const SoftMatrix& x, const std::vector<Ternary>& y,
                       const MbnbParams& init, const EmConfig& cfg) {
    if (x.rows() != y.size()) throw DataError("label vector length mismatch");
    if (init.dims() != x.cols()) throw DataError("init dimension mismatch");
    if (cfg.tol <= 0.0 || cfg.max_iter < 1) throw DataError("invalid EM configuration");

    std::size_t n = x.rows(), d = x.cols();
    double alpha = init.alpha;
    MbnbParams params = init;
    std::vector<double> r1(n, 0.0);

    EmTrace trace;
    trace.loglik.push_back(phase2_objective(x, y, params));
    for (int it = 0; it < cfg.max_iter; ++it) {
        // E step: responsibilities for the positive class.
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == Ternary::True) {
                r1[t] = 1.0;
            } else if (y[t] == Ternary::False) {
                r1[t] = 0.0;
            } else {
                double l1 = std::log(params.pi);
                double l0 = std::log1p(-params.pi);
                for (std::size_t i = 0; i < d; ++i) {
                    l1 += log_bernoulli(x.values[t][i], params.p1[i]);
                    l0 += log_bernoulli(x.values[t][i], params.p0[i]);
                }
                r1[t] = stable_binary_ratio(l1, l0);
            }
        }
        // M step with the same pseudo-counts as the supervised fit.
        double sum_r1 = 0.0;
        std::vector<double> num1(d, 0.0), num0(d, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            sum_r1 += r1[t];
            for (std::size_t i = 0; i < d; ++i) {
                num1[i] += r1[t] * x.values[t][i];
                num0[i] += (1.0 - r1[t]) * x.values[t][i];
            }
        }
        double sum_r0 = static_cast<double>(n) - sum_r1;
        params.pi = clamp_prob((sum_r1 + alpha) / (static_cast<double>(n) + 2.0 * alpha));
        for (std::size_t i = 0; i < d; ++i) {
            // A class with zero responsibility leaves its parameters alone.
            if (sum_r1 + 2.0 * alpha > 0.0)
                params.p1[i] = clamp_prob((num1[i] + alpha) / (sum_r1 + 2.0 * alpha));
            if (sum_r0 + 2.0 * alpha > 0.0)
                params.p0[i] = clamp_prob((num0[i] + alpha) / (sum_r0 + 2.0 * alpha));
        }

        trace.loglik.push_back(phase2_objective(x, y, params));
        trace.iterations = it + 1;
        if (converged_step(trace.loglik[trace.loglik.size() - 2], trace.loglik.back(), cfg.tol)) {
            trace.converged = true;
            break;
        }
    }

    // Final responsibilities under the converged parameters.
    for (std::size_t t = 0; t < n; ++t) {
        if (y[t] == Ternary::True) {
            r1[t] = 1.0;
        } else if (y[t] == Ternary::False) {
            r1[t] = 0.0;
        } else {
            double l1 = std::log(params.pi);
            double l0 = std::log1p(-params.pi);
            for (std::size_t i = 0; i < d; ++i) {
                l1 += log_bernoulli(x.values[t][i], params.p1[i]);
                l0 += log_bernoulli(x.values[t][i], params.p0[i]);
            }
            r1[t] = stable_binary_ratio(l1, l0);
        }
    }
    return {std::move(params), std::move(r1), std::move(trace)};
}

MbnbParams fit_mbnb_em(const Dataset& ds, double alpha, const EmConfig& cfg,
                       bool phase2_for_unlabeled) {
    if (!ds.has_labels()) throw FitError("fit_mbnb_em requires a labeled dataset");
    std::vector<int> labeled;
    for (std::size_t t = 0; t < ds.rows(); ++t)
        if (is_known((*ds.y)[t])) labeled.push_back(static_cast<int>(t));

    Dataset sub = select_rows(ds, labeled);
    MbnbParams init = fit_mle(sub, alpha);
    Phase1Result ph1 = em_phase1(sub, init, cfg);
    if (!phase2_for_unlabeled || labeled.size() == ds.rows()) return std::move(ph1.params);

    // Complete every row: Phase-1 rows keep their class-conditional
    // completions, unlabeled rows get the class-marginal expectation.
    SoftMatrix all;
    all.values.assign(ds.rows(), std::vector<double>(ds.dims(), 0.0));
    all.origin.assign(ds.rows(), std::vector<CellOrigin>(ds.dims(), CellOrigin::Observed));
    std::size_t labeled_pos = 0;
    for (std::size_t t = 0; t < ds.rows(); ++t) {
        if (is_known((*ds.y)[t])) {
            all.values[t] = ph1.completed.values[labeled_pos];
            all.origin[t] = ph1.completed.origin[labeled_pos];
            ++labeled_pos;
            continue;
        }
        std::vector<double> expect = expected_missing(ph1.params, ds.x[t]);
        std::size_t u = 0;
        for (std::size_t i = 0; i < ds.dims(); ++i) {
            if (is_known(ds.x[t][i])) {
                all.values[t][i] = ternary_value(ds.x[t][i]);
            } else {
                all.values[t][i] = expect[u++];
                all.origin[t][i] = CellOrigin::Imputed;
            }
        }
    }
    Phase2Result ph2 = em_phase2(all, *ds.y, ph1.params, cfg);
    return std::move(ph2.params);
}

}  // namespace kgbayes
