#pragma once

#include <string>
#include <vector>

#include "kgbayes/dataset.hpp"

namespace kgbayes {

// Multivariate Bernoulli Naive Bayes parameters: class prior pi = P(y=1) and
// class-conditional success probabilities p1[i] = P(x_i=1|y=1),
// p0[i] = P(x_i=1|y=0). All entries strictly inside (0,1).
struct MbnbParams {
    double pi = 0.5;
    std::vector<double> p1;
    std::vector<double> p0;
    std::vector<std::string> feature_names;
    double alpha = 1.0;  // pseudo-count used at fit time; EM updates reuse it

    std::size_t dims() const { return p1.size(); }
};

enum class Outcome { Negative = 0, Positive = 1, Rejected = 2 };

struct Decision {
    Outcome outcome;
    double posterior;
};

// Maximum-likelihood / pseudo-count fit from labeled ternary data. Unknown
// input cells are skipped per column; rows with Unknown labels are ignored.
//   pi    = (N1 + alpha) / (N + 2 alpha)
//   p_bi  = (N_bi + alpha) / (N_b^(i) + 2 alpha),   N_b^(i) over known cells
// Estimates are clamped to [1e-9, 1 - 1e-9]. Throws FitError if either class
// has no labeled rows.
MbnbParams fit_mle(const Dataset& ds, double alpha = 1.0);

// Same estimator over a soft-completed matrix: cells contribute fractionally.
MbnbParams fit_mle_soft(const SoftMatrix& x, const std::vector<Ternary>& y,
                        std::vector<std::string> names, double alpha = 1.0);

// P(y=1 | observed coordinates of x), Unknown coordinates marginalized away.
// Log-space throughout.
double posterior(const MbnbParams& m, const std::vector<Ternary>& x);

// Posterior against soft evidence: fractional cells enter the Bernoulli
// factors as exponents, p^x (1-p)^(1-x). Exact for 0/1 cells.
double posterior_soft(const MbnbParams& m, const std::vector<double>& x);

// theta in [0.5, 1]: Rejected when max(q, 1-q) < theta, else Positive iff
// q > 0.5 (ties go Negative).
Decision decide(double q, double theta);
Decision classify(const MbnbParams& m, const std::vector<Ternary>& x, double theta = 0.5);

// E[x_u | x_o] for each Unknown coordinate u, in coordinate order:
// posterior(m,x) * p1[u] + (1 - posterior(m,x)) * p0[u].
std::vector<double> expected_missing(const MbnbParams& m, const std::vector<Ternary>& x);

// Joint log-likelihood of a fully labeled dataset; Unknown input cells
// contribute no factor.
double log_likelihood(const MbnbParams& m, const Dataset& ds);

}  // namespace kgbayes
