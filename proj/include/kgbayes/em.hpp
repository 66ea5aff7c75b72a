#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kgbayes/dataset.hpp"
#include "kgbayes/mbnb.hpp"

namespace kgbayes {

struct EmConfig {
    double tol = 1e-6;   // relative objective-change convergence threshold
    int max_iter = 200;
    std::uint64_t seed = 42;
};

// Objective values recorded after initialization and after every iteration.
// When alpha > 0 the objective is the pseudo-count-penalized observed-data
// log-likelihood (the quantity the M-step actually maximizes), so the
// sequence is nondecreasing; at alpha = 0 it is the plain log-likelihood.
struct EmTrace {
    std::vector<double> loglik;
    int iterations = 0;
    bool converged = false;

    void write_csv(std::ostream& out) const;
};

struct Phase1Result {
    MbnbParams params;
    SoftMatrix completed;
    EmTrace trace;
};

// Missing input features, labels fully known. E-step: the expectation of an
// Unknown cell given its row's label b is the current class-conditional mean
// p_bu (conditional independence makes the observed cells irrelevant).
// M-step: re-fit on the soft-completed matrix with init.alpha pseudo-counts.
Phase1Result em_phase1(const Dataset& ds, const MbnbParams& init, const EmConfig& cfg);

struct Phase2Result {
    MbnbParams params;
    std::vector<double> soft_labels;  // final r_t1; one-hot rows keep their indicator
    EmTrace trace;
};

// Missing target labels over a soft-completed matrix. Rows with a known label
// keep a one-hot responsibility; Unknown-label rows get
// r_tb = pi_b Ber(x_t | p_b) / sum_b' pi_b' Ber(x_t | p_b'), with soft cells
// entering the Bernoulli factors as fractional exponents.
Phase2Result em_phase2(const SoftMatrix& x, const std::vector<Ternary>& y,
                       const MbnbParams& init, const EmConfig& cfg);

// End-to-end fit for incomplete data: MLE init on labeled rows, Phase 1 over
// their missing inputs, then (when unlabeled rows exist and phase2 is on)
// Phase 2 over all rows with inputs completed under the Phase-1 parameters.
MbnbParams fit_mbnb_em(const Dataset& ds, double alpha, const EmConfig& cfg,
                       bool phase2_for_unlabeled = true);

}  // namespace kgbayes
