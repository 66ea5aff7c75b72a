#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgbayes/dataset.hpp"
#include "kgbayes/em.hpp"
#include "kgbayes/mbnb.hpp"

namespace kgbayes {

// Mixture of multivariate Bernoullis: weights mu on the simplex and a K x D
// matrix of per-component success probabilities, all strictly inside (0,1).
struct MixtureParams {
    std::vector<double> mu;
    std::vector<std::vector<double>> p;
    std::vector<std::string> feature_names;

    int components() const { return static_cast<int>(mu.size()); }
    std::size_t dims() const { return p.empty() ? 0 : p[0].size(); }
};

struct MixtureFit {
    MixtureParams params;
    EmTrace trace;  // trace of the winning restart
};

// EM with `restarts` seeded random initializations (P ~ uniform(0.25,0.75),
// mu uniform); the run with the highest final log-likelihood wins, ties by
// lowest restart index. Unknown cells are marginalized in the E-step and
// excluded per coordinate from the M-step counts.
MixtureFit fit_mixture(const Dataset& ds, int k, int restarts, const EmConfig& cfg);
MixtureFit fit_mixture(const SoftMatrix& x, std::vector<std::string> names, int k, int restarts,
                       const EmConfig& cfg);

// Posterior component memberships for one input, Unknowns marginalized.
std::vector<double> responsibilities(const MixtureParams& m, const std::vector<Ternary>& x);
std::vector<double> responsibilities_soft(const MixtureParams& m, const std::vector<double>& x);

double mixture_log_likelihood(const MixtureParams& m, const Dataset& ds);
double mixture_log_likelihood(const MixtureParams& m, const SoftMatrix& x);

// BIC(K) = L - 0.5 * ((K-1) + K*D) * ln N, maximized; ties -> smallest K.
struct KSelection {
    struct Row {
        int k;
        double loglik;
        double bic;
    };
    int best_k = 0;
    std::vector<Row> table;
};
KSelection select_k(const Dataset& ds, const std::vector<int>& k_range, int restarts,
                    const EmConfig& cfg);
KSelection select_k(const SoftMatrix& x, const std::vector<int>& k_range, int restarts,
                    const EmConfig& cfg);

// Observed coordinates pass through as 0/1; an Unknown coordinate u becomes
// sum_k r_k(x_o) p_ku.
std::vector<double> mixture_impute(const MixtureParams& m, const std::vector<Ternary>& x);
SoftMatrix mixture_impute_all(const MixtureParams& m, const Dataset& ds);

enum class HbmVariant { Pipeline, ClassConditional };

// Two-tier model. Pipeline: an unsupervised mixture completes missing inputs
// and a Naive Bayes top tier classifies the completed vectors.
// ClassConditional: one mixture per label value; the class likelihood is the
// mixture likelihood. `top` always carries pi; for ClassConditional its
// p-vectors hold the collapsed per-class marginals sum_k mu_k p_k.
struct HbmModel {
    HbmVariant variant = HbmVariant::Pipeline;
    std::optional<MixtureParams> mixture;  // Pipeline completion tier
    MbnbParams top;
    std::optional<std::pair<MixtureParams, MixtureParams>> class_mixtures;  // (pos, neg)
};

HbmModel fit_hbm(const Dataset& ds, int k, int restarts, double alpha, const EmConfig& cfg,
                 HbmVariant variant = HbmVariant::Pipeline);

double hbm_posterior(const HbmModel& h, const std::vector<Ternary>& x);

}  // namespace kgbayes
