#include "kgbayes/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "kgbayes/errors.hpp"

namespace kgbayes {

double clamp_prob(double p) {
    return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

double log_bernoulli(double x, double p) {
    return x * std::log(p) + (1.0 - x) * std::log1p(-p);
}

double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) throw DataError("log_sum_exp over empty vector");
    double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double stable_binary_ratio(double la, double lb) {
    double m = std::max(la, lb);
    double ea = std::exp(la - m);
    double eb = std::exp(lb - m);
    return ea / (ea + eb);
}

void softmax_inplace(std::vector<double>& log_w) {
    double m = *std::max_element(log_w.begin(), log_w.end());
    double s = 0.0;
    for (double& x : log_w) {
        x = std::exp(x - m);
        s += x;
    }
    for (double& x : log_w) x /= s;
}

namespace {

// Regularized lower incomplete gamma P(s,x) by power series; converges for x < s+1.
double gamma_p_series(double s, double x) {
    double ap = s;
    double sum = 1.0 / s;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Regularized upper incomplete gamma Q(s,x) by modified Lentz continued
// fraction; converges for x >= s+1.
double gamma_q_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double chi_square_survival(double x, int dof) {
    if (dof < 1) throw DataError("chi_square_survival: dof must be >= 1");
    if (x <= 0.0) return 1.0;
    double s = 0.5 * dof;
    double hx = 0.5 * x;
    if (hx < s + 1.0) return 1.0 - gamma_p_series(s, hx);
    return gamma_q_cf(s, hx);
}

double Rng::next_unit() {
    // 53 random bits into [0,1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::next_in(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
}

std::size_t Rng::next_index(std::size_t n) {
    if (n == 0) throw DataError("next_index: empty range");
    // Rejection sampling keeps the distribution exactly uniform.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return static_cast<std::size_t>(v % n);
}

}  // namespace kgbayes
