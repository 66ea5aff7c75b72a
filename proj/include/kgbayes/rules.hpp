#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kgbayes/dataset.hpp"
#include "kgbayes/mbnb.hpp"
#include "kgbayes/mixture_hbm.hpp"

namespace kgbayes {

struct RuleLiteral {
    std::string feature;
    double prob_true;  // P(x_i = 1) under the rule's class
};

// Probabilistic conjunctive description of a class: every feature with its
// success probability. `simplified` renders only the more probable branch per
// feature; `complement` marks a rule for the negated target.
struct ConjunctiveRule {
    std::string target;
    double prior = 0.5;
    bool simplified = false;
    bool complement = false;
    std::vector<RuleLiteral> literals;
};

// Thresholded subsumption candidate: C is included in every feature of
// `positive` and in the complement of every feature of `negative`. Features
// that exceeded theta in both classes are uninformative and excluded.
struct ApproximateAxiom {
    std::string target;
    std::vector<std::string> positive;
    std::vector<std::string> negative;
    std::vector<std::string> uninformative;
    double theta = 0.9;

    bool trivial() const { return positive.empty() && negative.empty(); }
};

struct DisjunctiveComponent {
    int id = 0;          // 1-based component index
    double link = 0.0;   // estimated P(z_k = 1 | y = 1)
    ConjunctiveRule rule;
};

// HBM reading of the class: a disjunction over mixture components whose link
// to the positive class exceeds theta, plus the component descriptions.
struct DisjunctiveRuleSet {
    std::string target;
    double prior = 0.5;
    double theta = 0.9;
    std::vector<DisjunctiveComponent> components;  // all K, id order
    std::vector<int> disjunction;                  // ids with link > theta
    std::vector<int> complement;                   // ids with link <= 1 - theta
};

ConjunctiveRule extract_rule(const MbnbParams& m, const std::string& target,
                             bool simplified = false, bool complement = false);

// theta in (0.5, 1).
ApproximateAxiom extract_axiom(const MbnbParams& m, const std::string& target, double theta);

// Link probabilities: mean component responsibility over positive-labeled
// rows of ds (Pipeline), or the positive-class mixture weights directly
// (ClassConditional). Throws if ds has no positive-labeled rows.
DisjunctiveRuleSet extract_disjunctive(const HbmModel& h, const std::string& target, double theta,
                                       const Dataset& ds);

// Deterministic plain-text forms; probabilities at 4 decimals, features in
// declaration order.
std::string render(const ConjunctiveRule& r);
std::string render(const ApproximateAxiom& a);
std::string render(const DisjunctiveRuleSet& d);

// Artifact file: header comments (model kind, theta, extraction timestamp)
// followed by the rendered body. Golden comparisons skip `# extracted:` lines.
void write_artifact(std::ostream& out, const std::string& model_kind, double theta,
                    const std::string& timestamp, const std::string& body);

}  // namespace kgbayes
