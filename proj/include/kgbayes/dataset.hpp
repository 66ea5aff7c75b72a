#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kgbayes {

// Open-world cell value: membership can be asserted, refuted, or undecided.
enum class Ternary : std::uint8_t { False = 0, True = 1, Unknown = 2 };

inline bool is_known(Ternary t) { return t != Ternary::Unknown; }
inline double ternary_value(Ternary t) { return t == Ternary::True ? 1.0 : 0.0; }

struct FeatureInfo {
    std::string name;
    double prior = 0.5;           // imputation constant m_i, strictly in (0,1)
    double known_variance = 0.0;  // p(1-p) over known cells, in [0, 0.25]
};

enum class CellOrigin : std::uint8_t { Observed, Imputed };

// Real-valued completion of a ternary matrix. Observed cells are exactly 0/1;
// imputed cells carry expectations in [0,1].
struct SoftMatrix {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<CellOrigin>> origin;

    std::size_t rows() const { return values.size(); }
    std::size_t cols() const { return values.empty() ? 0 : values[0].size(); }
};

// N x D ternary matrix with optional ternary labels. Immutable by convention:
// all operations below return new values.
struct Dataset {
    std::vector<FeatureInfo> features;
    std::vector<std::vector<Ternary>> x;
    std::optional<std::vector<Ternary>> y;
    std::vector<std::string> row_ids;
    bool explicit_ids = false;  // source had an `id` column; serialization keeps it

    std::size_t rows() const { return x.size(); }
    std::size_t dims() const { return features.size(); }
    bool has_labels() const { return y.has_value(); }
};

// CSV wire format: header row mandatory; cells `1`/`0`/`?`; optional leading
// `id` column; optional `label` column carries y. Serialization writes id
// first and label last. Feature priors default to the observed frequency of
// True among known cells, clamped to [0.01, 0.99].
Dataset load_csv(std::istream& in);
Dataset load_csv_file(const std::string& path);
void save_csv(const Dataset& ds, std::ostream& out);
void save_csv_file(const Dataset& ds, const std::string& path);

// Keeps feature i iff p(1-p) > cutoff, where p is the frequency of True among
// known cells of column i. Columns without known cells are dropped. Order
// preserved. cutoff must lie in [0, 0.25].
Dataset variance_select(const Dataset& ds, double cutoff);

// Observed cells become 0/1; Unknown cells take the column prior m_i.
SoftMatrix impute_constant(const Dataset& ds);

// Copy with every feature prior replaced by a single constant in (0,1).
Dataset with_fixed_priors(Dataset ds, double prior);

// Recomputes priors (clamped known-True frequency) and known variances from
// the current matrix. Construction-time helper for loaders/encoders.
void refresh_feature_stats(Dataset& ds);

// Row subset in the given order (plumbing for folds and class splits).
Dataset select_rows(const Dataset& ds, const std::vector<int>& rows);

// Copy with labels replaced.
Dataset with_labels(Dataset ds, std::vector<Ternary> labels);

std::vector<std::string> feature_names(const Dataset& ds);

}  // namespace kgbayes
