#include "kgbayes/kg_encoder.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "kgbayes/errors.hpp"

namespace kgbayes {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : line) {
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!cur.empty()) {
                toks.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) toks.push_back(cur);
    return toks;
}

class KbBuilder {
public:
    KnowledgeBase kb;
    std::set<std::string> declared_classes;
    std::set<std::string> declared_roles;
    // First line that referenced a not-yet-declared name.
    std::unordered_map<std::string, int> pending_classes;
    std::unordered_map<std::string, int> pending_roles;
    std::vector<int> subclass_edge_lines;

    int intern_class(const std::string& name) {
        auto it = kb.class_index.find(name);
        if (it != kb.class_index.end()) return it->second;
        kb.class_index.emplace(name, static_cast<int>(kb.classes.size()));
        kb.classes.push_back(name);
        return static_cast<int>(kb.classes.size()) - 1;
    }

    int use_class(const std::string& name, int line) {
        if (!declared_classes.count(name)) pending_classes.emplace(name, line);
        return intern_class(name);
    }

    int intern_role(const std::string& name) {
        auto it = kb.role_index.find(name);
        if (it != kb.role_index.end()) return it->second;
        kb.role_index.emplace(name, static_cast<int>(kb.roles.size()));
        kb.roles.push_back(name);
        return static_cast<int>(kb.roles.size()) - 1;
    }

    int use_role(const std::string& name, int line) {
        if (!declared_roles.count(name)) pending_roles.emplace(name, line);
        return intern_role(name);
    }

    int individual(const std::string& name) {
        auto it = kb.individual_index.find(name);
        if (it != kb.individual_index.end()) return it->second;
        kb.individual_index.emplace(name, static_cast<int>(kb.individuals.size()));
        kb.individuals.push_back(name);
        return static_cast<int>(kb.individuals.size()) - 1;
    }
};

void check_cycles(const KnowledgeBase& kb, const std::vector<int>& edge_lines) {
    // Iterative DFS over declared subclass edges, ignoring trivial self-pairs.
    int n = static_cast<int>(kb.classes.size());
    std::vector<std::vector<int>> succ(n);
    for (auto [sub, super] : kb.subclass_axioms)
        if (sub != super) succ[sub].push_back(super);

    std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
    for (int start = 0; start < n; ++start) {
        if (state[start] != 0) continue;
        std::vector<std::pair<int, std::size_t>> frames{{start, 0}};
        state[start] = 1;
        while (!frames.empty()) {
            auto& [node, next] = frames.back();
            if (next < succ[node].size()) {
                int child = succ[node][next++];
                if (state[child] == 1) {
                    for (std::size_t e = 0; e < kb.subclass_axioms.size(); ++e)
                        if (kb.subclass_axioms[e].first == node && kb.subclass_axioms[e].second == child)
                            throw ParseError("subclass cycle through '" + kb.classes[node] +
                                                 "' and '" + kb.classes[child] + "'",
                                             edge_lines[e]);
                    throw ParseError("subclass cycle detected");
                }
                if (state[child] == 0) {
                    state[child] = 1;
                    frames.push_back({child, 0});
                }
            } else {
                state[node] = 2;
                frames.pop_back();
            }
        }
    }
}

// Reflexive-transitive subclass closure plus per-individual derivable sets.
struct EntailmentIndex {
    std::vector<std::vector<char>> up;    // up[c][t]: t is a (possibly equal) super of c
    std::vector<std::vector<char>> down;  // down[c][t]: t is a (possibly equal) sub of c
    std::vector<std::vector<char>> member;
    std::vector<std::vector<char>> excluded;
    std::vector<std::vector<char>> has_role;

    explicit EntailmentIndex(const KnowledgeBase& kb) {
        int nc = static_cast<int>(kb.classes.size());
        up.assign(nc, std::vector<char>(nc, 0));
        for (int c = 0; c < nc; ++c) up[c][c] = 1;
        std::vector<std::vector<int>> supers(nc);
        for (auto [sub, super] : kb.subclass_axioms)
            if (sub != super) supers[sub].push_back(super);
        // Fixpoint propagation; class counts are small.
        bool changed = true;
        while (changed) {
            changed = false;
            for (int c = 0; c < nc; ++c)
                for (int s : supers[c])
                    for (int t = 0; t < nc; ++t)
                        if (up[s][t] && !up[c][t]) {
                            up[c][t] = 1;
                            changed = true;
                        }
        }
        down.assign(nc, std::vector<char>(nc, 0));
        for (int c = 0; c < nc; ++c)
            for (int t = 0; t < nc; ++t)
                if (up[c][t]) down[t][c] = 1;

        int ni = static_cast<int>(kb.individuals.size());
        int nr = static_cast<int>(kb.roles.size());
        member.assign(ni, std::vector<char>(nc, 0));
        excluded.assign(ni, std::vector<char>(nc, 0));
        has_role.assign(ni, std::vector<char>(nr, 0));

        // (i) upward closure of positive assertions.
        for (const auto& a : kb.instance_assertions)
            if (!a.negated)
                for (int t = 0; t < nc; ++t)
                    if (up[a.cls][t]) member[a.individual][t] = 1;

        // (iii) negated assertions propagate to subclasses.
        for (const auto& a : kb.instance_assertions)
            if (a.negated)
                for (int t = 0; t < nc; ++t)
                    if (down[a.cls][t]) excluded[a.individual][t] = 1;

        // (ii) disjointness with any derivable class refutes the partner class
        // and, downward, all of its subclasses. Membership sets are already
        // upward closed, so "B subsumed by B'" is covered by member[i][B'].
        for (int i = 0; i < ni; ++i) {
            for (auto [p, q] : kb.disjointness) {
                if (member[i][p])
                    for (int t = 0; t < nc; ++t)
                        if (down[q][t]) excluded[i][t] = 1;
                if (member[i][q])
                    for (int t = 0; t < nc; ++t)
                        if (down[p][t]) excluded[i][t] = 1;
            }
        }

        // (iv) existential evidence.
        for (const auto& r : kb.role_assertions) has_role[r.subject][r.role] = 1;
    }

    Ternary query(const KnowledgeBase& kb, int ind, const Feature& f) const {
        if (f.kind == FeatureKind::NamedClass) {
            auto it = kb.class_index.find(f.name);
            if (it == kb.class_index.end())
                throw LookupError("unknown class feature '" + f.name + "'");
            int c = it->second;
            bool pos = member[ind][c];
            bool neg = excluded[ind][c];
            if (pos && neg)
                throw InconsistencyError("inconsistent membership for individual '" +
                                         kb.individuals[ind] + "' and feature '" + f.name + "'");
            if (pos) return Ternary::True;
            if (neg) return Ternary::False;
            return Ternary::Unknown;
        }
        auto it = kb.role_index.find(f.name);
        if (it == kb.role_index.end())
            throw LookupError("unknown role feature '" + f.name + "'");
        int r = it->second;
        if (has_role[ind][r]) return Ternary::True;
        if (kb.closed_roles.count(r)) return Ternary::False;
        return Ternary::Unknown;  // open world: absence of evidence refutes nothing
    }
};

}  // namespace

KnowledgeBase parse_kb(std::istream& in) {
    KbBuilder b;
    std::string line;
    int line_no = 0;
    auto need = [&](const std::vector<std::string>& t, std::size_t arity) {
        if (t.size() != arity + 1)
            throw ParseError("directive '" + t[0] + "' expects " + std::to_string(arity) +
                                 " argument(s), got " + std::to_string(t.size() - 1),
                             line_no);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string> t = tokenize(line);
        if (t.empty()) continue;
        const std::string& d = t[0];
        if (d == "class") {
            need(t, 1);
            b.intern_class(t[1]);
            b.declared_classes.insert(t[1]);
        } else if (d == "subclass") {
            need(t, 2);
            int sub = b.use_class(t[1], line_no);
            int super = b.use_class(t[2], line_no);
            b.kb.subclass_axioms.emplace_back(sub, super);
            b.subclass_edge_lines.push_back(line_no);
        } else if (d == "disjoint") {
            need(t, 2);
            b.kb.disjointness.emplace_back(b.use_class(t[1], line_no), b.use_class(t[2], line_no));
        } else if (d == "role") {
            need(t, 1);
            b.intern_role(t[1]);
            b.declared_roles.insert(t[1]);
        } else if (d == "closed") {
            need(t, 1);
            b.kb.closed_roles.insert(b.use_role(t[1], line_no));
        } else if (d == "individual") {
            need(t, 1);
            b.individual(t[1]);
        } else if (d == "instance" || d == "neg-instance") {
            need(t, 2);
            b.kb.instance_assertions.push_back(
                {b.individual(t[1]), b.use_class(t[2], line_no), d == "neg-instance"});
        } else if (d == "rel") {
            need(t, 3);
            int role = b.use_role(t[1], line_no);
            int subj = b.individual(t[2]);
            int obj = b.individual(t[3]);
            b.kb.role_assertions.push_back({role, subj, obj});
        } else {
            throw ParseError("unknown directive '" + d + "'", line_no);
        }
    }

    for (const auto& [name, first_line] : b.pending_classes)
        if (!b.declared_classes.count(name))
            throw ParseError("undeclared class '" + name + "'", first_line);
    for (const auto& [name, first_line] : b.pending_roles)
        if (!b.declared_roles.count(name))
            throw ParseError("undeclared role '" + name + "'", first_line);

    check_cycles(b.kb, b.subclass_edge_lines);
    return b.kb;
}

KnowledgeBase parse_kb_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_kb(in);
}

std::vector<Feature> generate_features(const KnowledgeBase& kb) {
    std::vector<Feature> out;
    std::vector<char> has_strict_sub(kb.classes.size(), 0);
    for (auto [sub, super] : kb.subclass_axioms)
        if (sub != super) has_strict_sub[super] = 1;
    for (std::size_t c = 0; c < kb.classes.size(); ++c)
        if (!has_strict_sub[c]) out.push_back({FeatureKind::NamedClass, kb.classes[c]});
    for (const auto& r : kb.roles) out.push_back({FeatureKind::ExistentialRestriction, r});
    return out;
}

Ternary entail(const KnowledgeBase& kb, const std::string& individual, const Feature& f) {
    auto it = kb.individual_index.find(individual);
    if (it == kb.individual_index.end())
        throw LookupError("unknown individual '" + individual + "'");
    EntailmentIndex idx(kb);
    return idx.query(kb, it->second, f);
}

Dataset encode_individuals(const KnowledgeBase& kb, const std::vector<Feature>& feats) {
    if (feats.empty()) throw DataError("encode_individuals: empty feature list");
    EntailmentIndex idx(kb);
    Dataset ds;
    ds.explicit_ids = true;
    std::set<std::string> labels;
    for (const auto& f : feats) {
        if (!labels.insert(f.label()).second)
            throw DataError("duplicate feature label '" + f.label() + "'");
        ds.features.push_back(FeatureInfo{f.label(), 0.5, 0.0});
    }
    for (std::size_t i = 0; i < kb.individuals.size(); ++i) {
        std::vector<Ternary> row;
        row.reserve(feats.size());
        for (const auto& f : feats) row.push_back(idx.query(kb, static_cast<int>(i), f));
        ds.x.push_back(std::move(row));
        ds.row_ids.push_back(kb.individuals[i]);
    }
    refresh_feature_stats(ds);
    return ds;
}

}  // namespace kgbayes
