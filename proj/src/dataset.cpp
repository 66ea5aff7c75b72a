#include "kgbayes/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "kgbayes/errors.hpp"
#include "kgbayes/numerics.hpp"

namespace kgbayes {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

Ternary parse_cell(const std::string& tok, int line, int col, const std::string& col_name) {
    if (tok == "1") return Ternary::True;
    if (tok == "0") return Ternary::False;
    if (tok == "?") return Ternary::Unknown;
    throw ParseError("malformed cell '" + tok + "' in column " + std::to_string(col) +
                         " (" + col_name + ")",
                     line);
}

struct ColumnStats {
    double freq_true;  // over known cells; 0.5 when none are known
    double variance;   // p(1-p); 0 when none are known
    bool any_known;
};

ColumnStats column_stats(const Dataset& ds, std::size_t col) {
    std::size_t known = 0, ones = 0;
    for (const auto& row : ds.x) {
        if (is_known(row[col])) {
            ++known;
            if (row[col] == Ternary::True) ++ones;
        }
    }
    if (known == 0) return {0.5, 0.0, false};
    double p = static_cast<double>(ones) / static_cast<double>(known);
    return {p, p * (1.0 - p), true};
}

}  // namespace

void refresh_feature_stats(Dataset& ds) {
    for (std::size_t i = 0; i < ds.dims(); ++i) {
        ColumnStats st = column_stats(ds, i);
        ds.features[i].prior = std::clamp(st.freq_true, 0.01, 0.99);
        ds.features[i].known_variance = st.variance;
    }
}

Dataset load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input: header row required", 1);

    std::vector<std::string> header = split_line(line);
    Dataset ds;
    int id_col = -1;
    int label_col = -1;
    std::vector<int> feature_cols;
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name.empty()) throw ParseError("empty column name at column " + std::to_string(c + 1), 1);
        if (!seen.insert(name).second)
            throw ParseError("duplicate header '" + name + "' at column " + std::to_string(c + 1), 1);
        if (name == "id" && c == 0) {
            id_col = 0;
        } else if (name == "label") {
            label_col = static_cast<int>(c);
        } else {
            feature_cols.push_back(static_cast<int>(c));
            ds.features.push_back(FeatureInfo{name, 0.5, 0.0});
        }
    }
    ds.explicit_ids = id_col >= 0;
    if (label_col >= 0) ds.y.emplace();

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == EOF) break;  // tolerate trailing newline
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ParseError("ragged row: " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(header.size()),
                             line_no);
        std::vector<Ternary> row;
        row.reserve(feature_cols.size());
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            int c = feature_cols[k];
            row.push_back(parse_cell(cells[c], line_no, c + 1, ds.features[k].name));
        }
        ds.x.push_back(std::move(row));
        if (label_col >= 0)
            ds.y->push_back(parse_cell(cells[label_col], line_no, label_col + 1, "label"));
        if (id_col >= 0)
            ds.row_ids.push_back(cells[0]);
        else
            ds.row_ids.push_back(std::to_string(ds.x.size() - 1));
    }

    std::unordered_set<std::string> ids(ds.row_ids.begin(), ds.row_ids.end());
    if (ids.size() != ds.row_ids.size()) throw ParseError("duplicate row ids");

    refresh_feature_stats(ds);
    return ds;
}

Dataset load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return load_csv(in);
}

void save_csv(const Dataset& ds, std::ostream& out) {
    bool first = true;
    if (ds.explicit_ids) {
        out << "id";
        first = false;
    }
    for (const auto& f : ds.features) {
        if (!first) out << ',';
        out << f.name;
        first = false;
    }
    if (ds.has_labels()) {
        if (!first) out << ',';
        out << "label";
    }
    out << '\n';

    auto token = [](Ternary t) { return t == Ternary::True ? "1" : t == Ternary::False ? "0" : "?"; };
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        first = true;
        if (ds.explicit_ids) {
            out << ds.row_ids[r];
            first = false;
        }
        for (std::size_t c = 0; c < ds.dims(); ++c) {
            if (!first) out << ',';
            out << token(ds.x[r][c]);
            first = false;
        }
        if (ds.has_labels()) {
            if (!first) out << ',';
            out << token((*ds.y)[r]);
        }
        out << '\n';
    }
}

void save_csv_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    save_csv(ds, out);
}

Dataset variance_select(const Dataset& ds, double cutoff) {
    if (cutoff < 0.0 || cutoff > 0.25)
        throw DataError("variance cutoff must lie in [0, 0.25]");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.dims(); ++i) {
        ColumnStats st = column_stats(ds, i);
        if (st.any_known && st.variance > cutoff) keep.push_back(i);
    }
    Dataset out;
    out.y = ds.y;
    out.row_ids = ds.row_ids;
    out.explicit_ids = ds.explicit_ids;
    for (std::size_t i : keep) out.features.push_back(ds.features[i]);
    out.x.reserve(ds.rows());
    for (const auto& row : ds.x) {
        std::vector<Ternary> nrow;
        nrow.reserve(keep.size());
        for (std::size_t i : keep) nrow.push_back(row[i]);
        out.x.push_back(std::move(nrow));
    }
    return out;
}

SoftMatrix impute_constant(const Dataset& ds) {
    for (const auto& f : ds.features)
        if (!(f.prior > 0.0 && f.prior < 1.0))
            throw DataError("imputation prior for feature '" + f.name + "' must be in (0,1)");
    SoftMatrix sm;
    sm.values.reserve(ds.rows());
    sm.origin.reserve(ds.rows());
    for (const auto& row : ds.x) {
        std::vector<double> v(ds.dims());
        std::vector<CellOrigin> o(ds.dims());
        for (std::size_t i = 0; i < ds.dims(); ++i) {
            if (is_known(row[i])) {
                v[i] = ternary_value(row[i]);
                o[i] = CellOrigin::Observed;
            } else {
                v[i] = ds.features[i].prior;
                o[i] = CellOrigin::Imputed;
            }
        }
        sm.values.push_back(std::move(v));
        sm.origin.push_back(std::move(o));
    }
    return sm;
}

Dataset with_fixed_priors(Dataset ds, double prior) {
    if (!(prior > 0.0 && prior < 1.0)) throw DataError("prior must be in (0,1)");
    for (auto& f : ds.features) f.prior = prior;
    return ds;
}

Dataset select_rows(const Dataset& ds, const std::vector<int>& rows) {
    Dataset out;
    out.features = ds.features;
    out.explicit_ids = ds.explicit_ids;
    if (ds.has_labels()) out.y.emplace();
    for (int r : rows) {
        if (r < 0 || static_cast<std::size_t>(r) >= ds.rows())
            throw DataError("row index out of range");
        out.x.push_back(ds.x[r]);
        out.row_ids.push_back(ds.row_ids[r]);
        if (ds.has_labels()) out.y->push_back((*ds.y)[r]);
    }
    return out;
}

Dataset with_labels(Dataset ds, std::vector<Ternary> labels) {
    if (labels.size() != ds.rows()) throw DataError("label vector length mismatch");
    ds.y = std::move(labels);
    return ds;
}

std::vector<std::string> feature_names(const Dataset& ds) {
    std::vector<std::string> out;
    out.reserve(ds.dims());
    for (const auto& f : ds.features) out.push_back(f.name);
    return out;
}

}  // namespace kgbayes
