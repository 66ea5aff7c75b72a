#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kgbayes {

// Probabilities are kept strictly inside (0,1) so log-space products stay finite.
inline constexpr double kProbFloor = 1e-9;

double clamp_prob(double p);

// log Ber(x|p) = x log p + (1-x) log(1-p); x may be fractional (soft evidence).
double log_bernoulli(double x, double p);

// log(sum_i exp(v_i)), stable. Empty input is an error.
double log_sum_exp(const std::vector<double>& v);

// exp(la) / (exp(la) + exp(lb)) without overflow/underflow. Invariant under a
// common additive offset of both arguments, which is what makes decisions
// independent of any uniform likelihood rescaling.
double stable_binary_ratio(double la, double lb);

// Normalizes log weights in place into a probability simplex.
void softmax_inplace(std::vector<double>& log_w);

// Upper-tail probability P(X >= x) for a chi-square variable with `dof`
// degrees of freedom. Regularized incomplete gamma, series + continued
// fraction split as in the classic numerical recipes.
double chi_square_survival(double x, int dof);

// Deterministic uniform helpers on top of mt19937_64. The engine itself is
// fully specified by the standard; the std::* distributions are not, so
// sampling goes through these conversions instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double next_unit();                     // [0, 1)
    double next_in(double lo, double hi);   // [lo, hi)
    std::size_t next_index(std::size_t n);  // uniform on [0, n)

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace kgbayes
