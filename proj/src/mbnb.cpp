#include "kgbayes/mbnb.hpp"

#include <cmath>

#include "kgbayes/errors.hpp"
#include "kgbayes/numerics.hpp"

namespace kgbayes {

namespace {

void check_dims(const MbnbParams& m, std::size_t d) {
    if (m.dims() != d)
        throw DataError("dimension mismatch: model has " + std::to_string(m.dims()) +
                        " features, input has " + std::to_string(d));
}

// Log joints log P(x_o, y=b) for b = 1, 0.
std::pair<double, double> log_joints(const MbnbParams& m, const std::vector<Ternary>& x) {
    check_dims(m, x.size());
    double l1 = std::log(m.pi);
    double l0 = std::log1p(-m.pi);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!is_known(x[i])) continue;
        double v = ternary_value(x[i]);
        l1 += log_bernoulli(v, m.p1[i]);
        l0 += log_bernoulli(v, m.p0[i]);
    }
    return {l1, l0};
}

}  // namespace

MbnbParams fit_mle(const Dataset& ds, double alpha) {
    if (alpha < 0.0) throw DataError("alpha must be >= 0");
    if (!ds.has_labels()) throw FitError("fit_mle requires a labeled dataset");

    std::size_t d = ds.dims();
    std::size_t n = 0, n1 = 0;
    std::vector<double> ones1(d, 0.0), ones0(d, 0.0);
    std::vector<double> known1(d, 0.0), known0(d, 0.0);
    for (std::size_t t = 0; t < ds.rows(); ++t) {
        Ternary label = (*ds.y)[t];
        if (!is_known(label)) continue;
        ++n;
        bool pos = label == Ternary::True;
        if (pos) ++n1;
        for (std::size_t i = 0; i < d; ++i) {
            Ternary c = ds.x[t][i];
            if (!is_known(c)) continue;  // skipped per column
            (pos ? known1 : known0)[i] += 1.0;
            if (c == Ternary::True) (pos ? ones1 : ones0)[i] += 1.0;
        }
    }
    if (n1 == 0) throw FitError("no rows labeled positive");
    if (n1 == n) throw FitError("no rows labeled negative");

    MbnbParams m;
    m.alpha = alpha;
    m.feature_names = feature_names(ds);
    m.pi = clamp_prob((static_cast<double>(n1) + alpha) / (static_cast<double>(n) + 2.0 * alpha));
    m.p1.resize(d);
    m.p0.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        // No known cells and no pseudo-counts: the likelihood does not
        // constrain the parameter; 0.5 is the alpha -> 0 limit of the update.
        double d1 = known1[i] + 2.0 * alpha;
        double d0 = known0[i] + 2.0 * alpha;
        m.p1[i] = d1 > 0.0 ? clamp_prob((ones1[i] + alpha) / d1) : 0.5;
        m.p0[i] = d0 > 0.0 ? clamp_prob((ones0[i] + alpha) / d0) : 0.5;
    }
    return m;
}

MbnbParams fit_mle_soft(const SoftMatrix& x, const std::vector<Ternary>& y,
                        std::vector<std::string> names, double alpha) {
    if (alpha < 0.0) throw DataError("alpha must be >= 0");
    if (x.rows() != y.size()) throw DataError("label vector length mismatch");
    std::size_t d = x.cols();

    double n = 0.0, n1 = 0.0;
    std::vector<double> sum1(d, 0.0), sum0(d, 0.0);
    double rows1 = 0.0, rows0 = 0.0;
    for (std::size_t t = 0; t < x.rows(); ++t) {
        if (!is_known(y[t])) continue;
        bool pos = y[t] == Ternary::True;
        n += 1.0;
        if (pos) {
            n1 += 1.0;
            rows1 += 1.0;
        } else {
            rows0 += 1.0;
        }
        for (std::size_t i = 0; i < d; ++i) (pos ? sum1 : sum0)[i] += x.values[t][i];
    }
    if (rows1 == 0.0) throw FitError("no rows labeled positive");
    if (rows0 == 0.0) throw FitError("no rows labeled negative");

    MbnbParams m;
    m.alpha = alpha;
    m.feature_names = std::move(names);
    m.pi = clamp_prob((n1 + alpha) / (n + 2.0 * alpha));
    m.p1.resize(d);
    m.p0.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        m.p1[i] = clamp_prob((sum1[i] + alpha) / (rows1 + 2.0 * alpha));
        m.p0[i] = clamp_prob((sum0[i] + alpha) / (rows0 + 2.0 * alpha));
    }
    return m;
}

double posterior(const MbnbParams& m, const std::vector<Ternary>& x) {
    auto [l1, l0] = log_joints(m, x);
    return stable_binary_ratio(l1, l0);
}

double posterior_soft(const MbnbParams& m, const std::vector<double>& x) {
    check_dims(m, x.size());
    double l1 = std::log(m.pi);
    double l0 = std::log1p(-m.pi);
    for (std::size_t i = 0; i < x.size(); ++i) {
        l1 += log_bernoulli(x[i], m.p1[i]);
        l0 += log_bernoulli(x[i], m.p0[i]);
    }
    return stable_binary_ratio(l1, l0);
}

Decision decide(double q, double theta) {
    if (theta < 0.5 || theta > 1.0) throw DataError("theta must lie in [0.5, 1]");
    if (std::max(q, 1.0 - q) < theta) return {Outcome::Rejected, q};
    return {q > 0.5 ? Outcome::Positive : Outcome::Negative, q};
}

Decision classify(const MbnbParams& m, const std::vector<Ternary>& x, double theta) {
    return decide(posterior(m, x), theta);
}

std::vector<double> expected_missing(const MbnbParams& m, const std::vector<Ternary>& x) {
    double q = posterior(m, x);
    std::vector<double> out;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!is_known(x[i])) out.push_back(q * m.p1[i] + (1.0 - q) * m.p0[i]);
    return out;
}

double log_likelihood(const MbnbParams& m, const Dataset& ds) {
    if (!ds.has_labels()) throw DataError("log_likelihood requires labels");
    check_dims(m, ds.dims());
    double total = 0.0;
    for (std::size_t t = 0; t < ds.rows(); ++t) {
        Ternary label = (*ds.y)[t];
        if (!is_known(label)) throw DataError("log_likelihood requires known labels for all rows");
        bool pos = label == Ternary::True;
        total += pos ? std::log(m.pi) : std::log1p(-m.pi);
        const auto& p = pos ? m.p1 : m.p0;
        for (std::size_t i = 0; i < ds.dims(); ++i)
            if (is_known(ds.x[t][i])) total += log_bernoulli(ternary_value(ds.x[t][i]), p[i]);
    }
    return total;
}

}  // namespace kgbayes
