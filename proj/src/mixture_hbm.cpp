#include "kgbayes/mixture_hbm.hpp"

#include <algorithm>
#include <cmath>

#include "kgbayes/errors.hpp"
#include "kgbayes/numerics.hpp"

namespace kgbayes {

namespace {

// Unified view: every cell is either a value in [0,1] or missing.
struct SoftData {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<char>> known;
    std::vector<std::string> names;

    std::size_t rows() const { return values.size(); }
    std::size_t cols() const { return values.empty() ? 0 : values[0].size(); }
};

SoftData view_of(const Dataset& ds) {
    SoftData sd;
    sd.names = feature_names(ds);
    sd.values.assign(ds.rows(), std::vector<double>(ds.dims(), 0.0));
    sd.known.assign(ds.rows(), std::vector<char>(ds.dims(), 0));
    for (std::size_t t = 0; t < ds.rows(); ++t)
        for (std::size_t i = 0; i < ds.dims(); ++i)
            if (is_known(ds.x[t][i])) {
                sd.values[t][i] = ternary_value(ds.x[t][i]);
                sd.known[t][i] = 1;
            }
    return sd;
}

SoftData view_of(const SoftMatrix& x, std::vector<std::string> names) {
    SoftData sd;
    sd.names = std::move(names);
    sd.values = x.values;
    sd.known.assign(x.rows(), std::vector<char>(x.cols(), 1));
    return sd;
}

void check_dims(const MixtureParams& m, std::size_t d) {
    if (m.dims() != d)
        throw DataError("dimension mismatch: mixture has " + std::to_string(m.dims()) +
                        " features, input has " + std::to_string(d));
}

double loglik(const MixtureParams& m, const SoftData& sd) {
    int k = m.components();
    std::vector<double> lw(k);
    double total = 0.0;
    for (std::size_t t = 0; t < sd.rows(); ++t) {
        for (int c = 0; c < k; ++c) {
            double l = std::log(m.mu[c]);
            for (std::size_t i = 0; i < sd.cols(); ++i)
                if (sd.known[t][i]) l += log_bernoulli(sd.values[t][i], m.p[c][i]);
            lw[c] = l;
        }
        total += log_sum_exp(lw);
    }
    return total;
}

// One EM run from a given initialization.
MixtureFit em_run(MixtureParams params, const SoftData& sd, const EmConfig& cfg) {
    std::size_t n = sd.rows(), d = sd.cols();
    int k = params.components();
    std::vector<std::vector<double>> resp(n, std::vector<double>(k, 0.0));

    EmTrace trace;
    trace.loglik.push_back(loglik(params, sd));
    for (int it = 0; it < cfg.max_iter; ++it) {
        // E step.
        for (std::size_t t = 0; t < n; ++t) {
            std::vector<double>& r = resp[t];
            for (int c = 0; c < k; ++c) {
                double l = std::log(params.mu[c]);
                for (std::size_t i = 0; i < d; ++i)
                    if (sd.known[t][i]) l += log_bernoulli(sd.values[t][i], params.p[c][i]);
                r[c] = l;
            }
            softmax_inplace(r);
        }
        // M step; unknown cells stay out of both numerator and denominator.
        for (int c = 0; c < k; ++c) {
            double weight = 0.0;
            std::vector<double> num(d, 0.0), den(d, 0.0);
            for (std::size_t t = 0; t < n; ++t) {
                double r = resp[t][c];
                weight += r;
                for (std::size_t i = 0; i < d; ++i)
                    if (sd.known[t][i]) {
                        num[i] += r * sd.values[t][i];
                        den[i] += r;
                    }
            }
            params.mu[c] = weight / static_cast<double>(n);
            for (std::size_t i = 0; i < d; ++i)
                params.p[c][i] = clamp_prob(den[i] > 0.0 ? num[i] / den[i] : params.p[c][i]);
        }
        // Numerical renormalization of the weights.
        double mu_sum = 0.0;
        for (double w : params.mu) mu_sum += w;
        for (double& w : params.mu) w /= mu_sum;

        trace.loglik.push_back(loglik(params, sd));
        trace.iterations = it + 1;
        double prev = trace.loglik[trace.loglik.size() - 2];
        if (std::fabs(trace.loglik.back() - prev) / (std::fabs(prev) + 1e-12) < cfg.tol) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(params), std::move(trace)};
}

MixtureFit fit_mixture_core(const SoftData& sd, int k, int restarts, const EmConfig& cfg) {
    if (k < 1) throw DataError("mixture requires K >= 1");
    if (restarts < 1) throw DataError("restarts must be >= 1");
    if (sd.rows() == 0) throw DataError("empty data");
    if (cfg.tol <= 0.0 || cfg.max_iter < 1) throw DataError("invalid EM configuration");

    std::optional<MixtureFit> best;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(r));
        MixtureParams init;
        init.feature_names = sd.names;
        init.mu.assign(k, 1.0 / k);
        init.p.assign(k, std::vector<double>(sd.cols()));
        for (int c = 0; c < k; ++c)
            for (std::size_t i = 0; i < sd.cols(); ++i) init.p[c][i] = rng.next_in(0.25, 0.75);

        MixtureFit fit = em_run(std::move(init), sd, cfg);
        if (!best || fit.trace.loglik.back() > best->trace.loglik.back()) best = std::move(fit);
    }
    return std::move(*best);
}

}  // namespace

MixtureFit fit_mixture(const Dataset& ds, int k, int restarts, const EmConfig& cfg) {
    return fit_mixture_core(view_of(ds), k, restarts, cfg);
}

MixtureFit fit_mixture(const SoftMatrix& x, std::vector<std::string> names, int k, int restarts,
                       const EmConfig& cfg) {
    return fit_mixture_core(view_of(x, std::move(names)), k, restarts, cfg);
}

std::vector<double> responsibilities(const MixtureParams& m, const std::vector<Ternary>& x) {
    check_dims(m, x.size());
    std::vector<double> r(m.components());
    for (int c = 0; c < m.components(); ++c) {
        double l = std::log(m.mu[c]);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (is_known(x[i])) l += log_bernoulli(ternary_value(x[i]), m.p[c][i]);
        r[c] = l;
    }
    softmax_inplace(r);
    return r;
}

std::vector<double> responsibilities_soft(const MixtureParams& m, const std::vector<double>& x) {
    check_dims(m, x.size());
    std::vector<double> r(m.components());
    for (int c = 0; c < m.components(); ++c) {
        double l = std::log(m.mu[c]);
        for (std::size_t i = 0; i < x.size(); ++i) l += log_bernoulli(x[i], m.p[c][i]);
        r[c] = l;
    }
    softmax_inplace(r);
    return r;
}

double mixture_log_likelihood(const MixtureParams& m, const Dataset& ds) {
    check_dims(m, ds.dims());
    return loglik(m, view_of(ds));
}

double mixture_log_likelihood(const MixtureParams& m, const SoftMatrix& x) {
    check_dims(m, x.cols());
    return loglik(m, view_of(x, m.feature_names));
}

namespace {

KSelection select_k_core(const SoftData& sd, const std::vector<int>& k_range, int restarts,
                         const EmConfig& cfg) {
    if (k_range.empty()) throw DataError("empty K range");
    KSelection sel;
    double best_bic = 0.0;
    double log_n = std::log(static_cast<double>(sd.rows()));
    for (int k : k_range) {
        MixtureFit fit = fit_mixture_core(sd, k, restarts, cfg);
        double l = fit.trace.loglik.back();
        double free_params = (k - 1) + k * static_cast<double>(sd.cols());
        double bic = l - 0.5 * free_params * log_n;
        sel.table.push_back({k, l, bic});
        if (sel.best_k == 0 || bic > best_bic) {
            // Strict >: ties keep the earlier (smaller) K.
            sel.best_k = k;
            best_bic = bic;
        }
    }
    return sel;
}

}  // namespace

KSelection select_k(const Dataset& ds, const std::vector<int>& k_range, int restarts,
                    const EmConfig& cfg) {
    return select_k_core(view_of(ds), k_range, restarts, cfg);
}

KSelection select_k(const SoftMatrix& x, const std::vector<int>& k_range, int restarts,
                    const EmConfig& cfg) {
    return select_k_core(view_of(x, {}), k_range, restarts, cfg);
}

std::vector<double> mixture_impute(const MixtureParams& m, const std::vector<Ternary>& x) {
    std::vector<double> r = responsibilities(m, x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_known(x[i])) {
            out[i] = ternary_value(x[i]);
        } else {
            double e = 0.0;
            for (int c = 0; c < m.components(); ++c) e += r[c] * m.p[c][i];
            out[i] = e;
        }
    }
    return out;
}

SoftMatrix mixture_impute_all(const MixtureParams& m, const Dataset& ds) {
    check_dims(m, ds.dims());
    SoftMatrix sm;
    sm.values.reserve(ds.rows());
    sm.origin.reserve(ds.rows());
    for (std::size_t t = 0; t < ds.rows(); ++t) {
        sm.values.push_back(mixture_impute(m, ds.x[t]));
        std::vector<CellOrigin> o(ds.dims());
        for (std::size_t i = 0; i < ds.dims(); ++i)
            o[i] = is_known(ds.x[t][i]) ? CellOrigin::Observed : CellOrigin::Imputed;
        sm.origin.push_back(std::move(o));
    }
    return sm;
}

HbmModel fit_hbm(const Dataset& ds, int k, int restarts, double alpha, const EmConfig& cfg,
                 HbmVariant variant) {
    if (!ds.has_labels()) throw FitError("fit_hbm requires a labeled dataset");
    if (k < 1) throw DataError("fit_hbm requires K >= 1");

    HbmModel h;
    h.variant = variant;
    if (variant == HbmVariant::Pipeline) {
        // Bottom tier is unsupervised over every row, labeled or not.
        MixtureFit mf = fit_mixture(ds, k, restarts, cfg);
        h.mixture = std::move(mf.params);
        SoftMatrix completed = mixture_impute_all(*h.mixture, ds);
        h.top = fit_mle_soft(completed, *ds.y, feature_names(ds), alpha);
        return h;
    }

    // ClassConditional: one mixture per label value.
    std::vector<int> pos_rows, neg_rows;
    std::size_t n_labeled = 0;
    for (std::size_t t = 0; t < ds.rows(); ++t) {
        if (!is_known((*ds.y)[t])) continue;
        ++n_labeled;
        ((*ds.y)[t] == Ternary::True ? pos_rows : neg_rows).push_back(static_cast<int>(t));
    }
    if (pos_rows.size() < static_cast<std::size_t>(k))
        throw FitError("class-conditional fit requires at least K positive rows");
    if (neg_rows.size() < static_cast<std::size_t>(k))
        throw FitError("class-conditional fit requires at least K negative rows");

    MixtureFit pos = fit_mixture(select_rows(ds, pos_rows), k, restarts, cfg);
    MixtureFit neg = fit_mixture(select_rows(ds, neg_rows), k, restarts, cfg);

    h.top.alpha = alpha;
    h.top.feature_names = feature_names(ds);
    h.top.pi = clamp_prob((static_cast<double>(pos_rows.size()) + alpha) /
                          (static_cast<double>(n_labeled) + 2.0 * alpha));
    // Collapsed marginals: P(x_i = 1 | y) = sum_k mu_k p_ki.
    h.top.p1.assign(ds.dims(), 0.0);
    h.top.p0.assign(ds.dims(), 0.0);
    for (std::size_t i = 0; i < ds.dims(); ++i) {
        for (int c = 0; c < k; ++c) {
            h.top.p1[i] += pos.params.mu[c] * pos.params.p[c][i];
            h.top.p0[i] += neg.params.mu[c] * neg.params.p[c][i];
        }
        h.top.p1[i] = clamp_prob(h.top.p1[i]);
        h.top.p0[i] = clamp_prob(h.top.p0[i]);
    }
    h.class_mixtures = std::make_pair(std::move(pos.params), std::move(neg.params));
    return h;
}

double hbm_posterior(const HbmModel& h, const std::vector<Ternary>& x) {
    if (h.variant == HbmVariant::Pipeline) {
        if (!h.mixture) throw DataError("pipeline model missing its mixture tier");
        return posterior_soft(h.top, mixture_impute(*h.mixture, x));
    }
    if (!h.class_mixtures) throw DataError("class-conditional model missing its mixtures");
    const MixtureParams& m1 = h.class_mixtures->first;
    const MixtureParams& m0 = h.class_mixtures->second;
    check_dims(m1, x.size());
    check_dims(m0, x.size());

    auto log_mix = [&](const MixtureParams& m) {
        std::vector<double> lw(m.components());
        for (int c = 0; c < m.components(); ++c) {
            double l = std::log(m.mu[c]);
            for (std::size_t i = 0; i < x.size(); ++i)
                if (is_known(x[i])) l += log_bernoulli(ternary_value(x[i]), m.p[c][i]);
            lw[c] = l;
        }
        return log_sum_exp(lw);
    };
    double l1 = std::log(h.top.pi) + log_mix(m1);
    double l0 = std::log1p(-h.top.pi) + log_mix(m0);
    return stable_binary_ratio(l1, l0);
}

}  // namespace kgbayes
