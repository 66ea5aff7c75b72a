#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgbayes/dataset.hpp"

namespace kgbayes {

// Parsed restricted assertion document: class hierarchy, disjointness, roles,
// and ABox facts about individuals. Immutable after parse.
struct KnowledgeBase {
    std::vector<std::string> classes;      // declaration order
    std::vector<std::string> roles;        // declaration order
    std::vector<std::string> individuals;  // first-mention order

    std::vector<std::pair<int, int>> subclass_axioms;  // (sub, super) class indices
    std::vector<std::pair<int, int>> disjointness;     // unordered class pairs
    std::set<int> closed_roles;

    struct InstanceAssertion {
        int individual;
        int cls;
        bool negated;
    };
    std::vector<InstanceAssertion> instance_assertions;

    struct RoleAssertion {
        int role;
        int subject;
        int object;
    };
    std::vector<RoleAssertion> role_assertions;

    std::unordered_map<std::string, int> class_index;
    std::unordered_map<std::string, int> role_index;
    std::unordered_map<std::string, int> individual_index;
};

enum class FeatureKind { NamedClass, ExistentialRestriction };

// A Boolean feature over individuals: membership in a named class, or
// participation as subject of a role (existential restriction on r).
struct Feature {
    FeatureKind kind;
    std::string name;  // class name, or role name for existentials

    // Column/axiom identifier. Existentials render as `some_<role>`.
    std::string label() const {
        return kind == FeatureKind::NamedClass ? name : "some_" + name;
    }
};

// Line-oriented directives, `#` comments:
//   class C | subclass C D | disjoint C D | role r | closed r |
//   individual a | instance a C | neg-instance a C | rel r a b
// Classes and roles must be declared somewhere in the document (forward
// references allowed); individuals are declared by `individual` or by first
// appearance in an assertion.
KnowledgeBase parse_kb(std::istream& in);
KnowledgeBase parse_kb_file(const std::string& path);

// One feature per leaf class (no declared strict subclass), in declaration
// order, followed by one existential feature per role, in declaration order.
std::vector<Feature> generate_features(const KnowledgeBase& kb);

// Sound forward-chaining fragment: asserted memberships propagate up the
// subclass closure; refutations come from disjointness with a derivable class
// or explicit negated assertions, and propagate down; existentials are True
// iff a matching role assertion exists and False only for `closed` roles.
// Throws InconsistencyError if both polarities become derivable.
Ternary entail(const KnowledgeBase& kb, const std::string& individual, const Feature& f);

// One row per individual in declaration order; cell (t,i) = entail over
// feats[i]. Labels absent; row ids are individual names.
Dataset encode_individuals(const KnowledgeBase& kb, const std::vector<Feature>& feats);

}  // namespace kgbayes
