#include "kgbayes/rules.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "kgbayes/errors.hpp"

namespace kgbayes {

namespace {

std::string prob4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string theta_str(double theta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", theta);
    return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

ConjunctiveRule extract_rule(const MbnbParams& m, const std::string& target, bool simplified,
                             bool complement) {
    ConjunctiveRule r;
    r.target = target;
    r.simplified = simplified;
    r.complement = complement;
    r.prior = complement ? 1.0 - m.pi : m.pi;
    const auto& p = complement ? m.p0 : m.p1;
    r.literals.reserve(m.dims());
    for (std::size_t i = 0; i < m.dims(); ++i) r.literals.push_back({m.feature_names[i], p[i]});
    return r;
}

ApproximateAxiom extract_axiom(const MbnbParams& m, const std::string& target, double theta) {
    if (!(theta > 0.5 && theta < 1.0)) throw DataError("theta must lie in (0.5, 1)");
    ApproximateAxiom a;
    a.target = target;
    a.theta = theta;
    for (std::size_t i = 0; i < m.dims(); ++i) {
        bool pos = m.p1[i] > theta;
        bool neg = m.p0[i] > theta;
        if (pos && neg)
            a.uninformative.push_back(m.feature_names[i]);
        else if (pos)
            a.positive.push_back(m.feature_names[i]);
        else if (neg)
            a.negative.push_back(m.feature_names[i]);
    }
    return a;
}

DisjunctiveRuleSet extract_disjunctive(const HbmModel& h, const std::string& target, double theta,
                                       const Dataset& ds) {
    if (!(theta > 0.0 && theta < 1.0)) throw DataError("theta must lie in (0, 1)");
    const MixtureParams* mix = nullptr;
    std::vector<double> links;
    if (h.variant == HbmVariant::ClassConditional) {
        if (!h.class_mixtures) throw DataError("class-conditional model missing its mixtures");
        mix = &h.class_mixtures->first;
        links = mix->mu;  // weights of the positive-class mixture
    } else {
        if (!h.mixture) throw DataError("pipeline model missing its mixture tier");
        mix = &*h.mixture;
        if (!ds.has_labels()) throw DataError("link estimation requires labeled rows");
        links.assign(mix->components(), 0.0);
        std::size_t n_pos = 0;
        for (std::size_t t = 0; t < ds.rows(); ++t) {
            if ((*ds.y)[t] != Ternary::True) continue;
            ++n_pos;
            std::vector<double> r = responsibilities(*mix, ds.x[t]);
            for (int c = 0; c < mix->components(); ++c) links[c] += r[c];
        }
        if (n_pos == 0) throw DataError("no positive-labeled rows for link estimation");
        for (double& l : links) l /= static_cast<double>(n_pos);
    }

    DisjunctiveRuleSet out;
    out.target = target;
    out.theta = theta;
    out.prior = h.top.pi;
    for (int c = 0; c < mix->components(); ++c) {
        DisjunctiveComponent comp;
        comp.id = c + 1;
        comp.link = links[c];
        comp.rule.target = target + "_" + std::to_string(c + 1);
        comp.rule.prior = mix->mu[c];
        for (std::size_t i = 0; i < mix->dims(); ++i)
            comp.rule.literals.push_back({mix->feature_names[i], mix->p[c][i]});
        out.components.push_back(std::move(comp));
        if (links[c] > theta) out.disjunction.push_back(c + 1);
        if (links[c] <= 1.0 - theta) out.complement.push_back(c + 1);
    }
    return out;
}

std::string render(const ConjunctiveRule& r) {
    std::ostringstream out;
    std::string head = r.complement ? "not " + r.target : r.target;
    out << "IF " << head << "(x) [prior " << prob4(r.prior) << "] THEN\n";
    for (const auto& lit : r.literals) {
        if (r.simplified) {
            if (lit.prob_true >= 0.5)
                out << "  AND " << lit.feature << " = 1 with probability " << prob4(lit.prob_true)
                    << "\n";
            else
                out << "  AND " << lit.feature << " = 0 with probability "
                    << prob4(1.0 - lit.prob_true) << "\n";
        } else {
            out << "  AND " << lit.feature << " = 1 with probability " << prob4(lit.prob_true)
                << " AND " << lit.feature << " = 0 with probability " << prob4(1.0 - lit.prob_true)
                << "\n";
        }
    }
    return out.str();
}

std::string render(const ApproximateAxiom& a) {
    std::ostringstream out;
    if (a.trivial()) {
        out << a.target << " SubClassOf: Thing  # trivial (no feature exceeded theta="
            << theta_str(a.theta) << ")";
    } else {
        std::vector<std::string> parts;
        for (const auto& f : a.positive) parts.push_back(f);
        for (const auto& f : a.negative) parts.push_back("not " + f);
        out << a.target << " SubClassOf: " << join(parts, " and ");
    }
    if (!a.uninformative.empty())
        out << "\n# uninformative (exceeded theta in both classes): " << join(a.uninformative, ", ");
    out << "\n";
    return out.str();
}

std::string render(const DisjunctiveRuleSet& d) {
    std::ostringstream out;
    auto component_name = [&](int id) { return d.target + "_" + std::to_string(id); };
    if (d.disjunction.empty()) {
        out << d.target << " SubClassOf: Thing  # trivial (no component exceeded theta="
            << theta_str(d.theta) << ")\n";
    } else {
        std::vector<std::string> parts;
        for (int id : d.disjunction) parts.push_back(component_name(id));
        out << d.target << " SubClassOf: " << join(parts, " or ") << "\n";
    }
    if (!d.complement.empty()) {
        std::vector<std::string> parts;
        for (int id : d.complement) parts.push_back(component_name(id));
        out << "not " << d.target << " SubClassOf: " << join(parts, " or ") << "\n";
    }
    out << "IF " << d.target << "(x) [prior " << prob4(d.prior) << "] THEN\n";
    for (const auto& comp : d.components)
        out << "  z" << comp.id << " = 1 with probability " << prob4(comp.link) << "\n";
    for (const auto& comp : d.components) {
        bool in_disjunction =
            std::find(d.disjunction.begin(), d.disjunction.end(), comp.id) != d.disjunction.end();
        if (!in_disjunction) continue;
        out << render(comp.rule);
    }
    return out.str();
}

void write_artifact(std::ostream& out, const std::string& model_kind, double theta,
                    const std::string& timestamp, const std::string& body) {
    out << "# model: " << model_kind << "\n";
    out << "# theta: " << theta_str(theta) << "\n";
    out << "# extracted: " << timestamp << "\n";
    out << body;
}

}  // namespace kgbayes
