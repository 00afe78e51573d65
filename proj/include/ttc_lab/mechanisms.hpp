// Mechanisms: TTC, the endowment rule, explicit tables, the Diff construction
// for domains failing the top-two condition on the whole object set, and the
// lifting of a small counterexample onto a failing subset.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ttc_lab/axioms.hpp"
#include "ttc_lab/core.hpp"
#include "ttc_lab/richness.hpp"
#include "ttc_lab/serialize.hpp"
#include "ttc_lab/ttc.hpp"

namespace ttc_lab {

// ---------------------------------------------------------------------------
// Relabeling
// ---------------------------------------------------------------------------

/// Object permutation from canonical labels to concrete ones. Agents follow
/// their endowments, so canonical agent c is concrete agent to_concrete(o_c).
class Relabeling {
public:
    Relabeling() = default;

    explicit Relabeling(std::vector<ObjectId> canonical_to_concrete) : forward_(std::move(canonical_to_concrete)) {
        (void)Preference(forward_);  // throws unless a bijection
        backward_.assign(forward_.size(), ObjectId{});
        for (std::size_t c = 0; c < forward_.size(); ++c) {
            backward_[static_cast<std::size_t>(forward_[c].index - 1)] = ObjectId{static_cast<int>(c) + 1};
        }
    }

    static Relabeling identity(int n) {
        std::vector<ObjectId> v;
        for (int i = 1; i <= n; ++i) {
            v.push_back(ObjectId{i});
        }
        return Relabeling(std::move(v));
    }

    int n() const noexcept { return static_cast<int>(forward_.size()); }
    const std::vector<ObjectId>& canonical_to_concrete() const noexcept { return forward_; }
    ObjectId to_concrete(ObjectId canonical) const { return forward_[static_cast<std::size_t>(canonical.index - 1)]; }
    ObjectId to_canonical(ObjectId concrete) const { return backward_[static_cast<std::size_t>(concrete.index - 1)]; }
    AgentId to_concrete(AgentId canonical) const { return owner_of(to_concrete(endowment_of(canonical))); }

    Preference canonicalize(const Preference& concrete) const {
        std::vector<ObjectId> order;
        for (ObjectId o : concrete.order()) {
            order.push_back(to_canonical(o));
        }
        return Preference(std::move(order));
    }

    Preference concretize(const Preference& canonical) const {
        std::vector<ObjectId> order;
        for (ObjectId o : canonical.order()) {
            order.push_back(to_concrete(o));
        }
        return Preference(std::move(order));
    }

    Domain canonicalize(const Domain& d) const {
        std::vector<Preference> out;
        for (const Preference& p : d) {
            out.push_back(canonicalize(p));
        }
        return Domain(std::move(out));
    }

    Domain concretize(const Domain& d) const {
        std::vector<Preference> out;
        for (const Preference& p : d) {
            out.push_back(concretize(p));
        }
        return Domain(std::move(out));
    }

    /// Canonical agent c reports the canonicalized preference of concrete agent pi(c).
    Profile canonicalize(const Profile& concrete) const {
        std::vector<Preference> prefs;
        for (int c = 1; c <= n(); ++c) {
            prefs.push_back(canonicalize(concrete.of(to_concrete(AgentId{c}))));
        }
        return Profile(std::move(prefs));
    }

    Profile concretize(const Profile& canonical) const {
        std::vector<Preference> prefs(static_cast<std::size_t>(n()));
        for (int c = 1; c <= n(); ++c) {
            prefs[static_cast<std::size_t>(to_concrete(AgentId{c}).index - 1)] = concretize(canonical.of(AgentId{c}));
        }
        return Profile(std::move(prefs));
    }

    Allocation concretize(const Allocation& canonical) const {
        std::vector<ObjectId> out(static_cast<std::size_t>(n()));
        for (int c = 1; c <= n(); ++c) {
            out[static_cast<std::size_t>(to_concrete(AgentId{c}).index - 1)] = to_concrete(canonical.of(AgentId{c}));
        }
        return Allocation(std::move(out));
    }

    Allocation canonicalize(const Allocation& concrete) const {
        std::vector<ObjectId> out(static_cast<std::size_t>(n()));
        for (int c = 1; c <= n(); ++c) {
            out[static_cast<std::size_t>(c - 1)] = to_canonical(concrete.of(to_concrete(AgentId{c})));
        }
        return Allocation(std::move(out));
    }

    friend bool operator==(const Relabeling&, const Relabeling&) = default;

private:
    std::vector<ObjectId> forward_;
    std::vector<ObjectId> backward_;
};

// ---------------------------------------------------------------------------
// Mechanism
// ---------------------------------------------------------------------------

class Mechanism;

struct TtcRule {};

struct EndowmentRule {};

struct TableRule {
    std::map<Profile, Allocation> entries;
};

/// Off Diff this is TTC; on Diff agent 1 gets r_2(P_1, O) = o_k, agents
/// 2..k get o_1..o_{k-1} and agents k+1..n trade by TTC among themselves
/// (all in canonical labels).
struct DiffRule {
    Relabeling relabeling;
    Domain base_domain;
};

/// TTC unless every agent outside `subset` tops its own endowment within
/// subset + {o_i}; then `inner` on the subset sub-economy and TTC on the rest.
struct LiftedRule {
    SubsetO subset;
    std::shared_ptr<const Mechanism> inner;
};

class Mechanism {
public:
    using Rule = std::variant<TtcRule, EndowmentRule, TableRule, DiffRule, LiftedRule>;

    Mechanism() : rule_(TtcRule{}) {}
    explicit Mechanism(Rule rule) : rule_(std::move(rule)) {}

    const Rule& rule() const noexcept { return rule_; }

    std::string kind() const {
        switch (rule_.index()) {
            case 0: return "ttc";
            case 1: return "endowment";
            case 2: return "table";
            case 3: return "diff";
            default: return "lifted";
        }
    }

    Allocation operator()(const Profile& profile) const;

private:
    Rule rule_;
};

inline Mechanism ttc_mechanism() { return Mechanism(TtcRule{}); }

/// phi(P) = (o_1, ..., o_n) at every profile.
inline Mechanism endowment_mechanism() { return Mechanism(EndowmentRule{}); }

inline Mechanism table_mechanism(std::map<Profile, Allocation> entries) {
    for (const auto& [p, x] : entries) {
        if (p.n() != x.n()) {
            throw DomainError("table entry pairs a profile and an allocation of different sizes");
        }
    }
    return Mechanism(TableRule{std::move(entries)});
}

/// Materialize `mech` over every profile of `space`.
template <MechanismLike M>
Mechanism tabulate(const M& mech, const ProfileSpace& space) {
    std::map<Profile, Allocation> entries;
    for (std::uint64_t idx = 0; idx < space.size(); ++idx) {
        Profile p = space.profile_at(idx);
        Allocation x = mech(p);
        entries.emplace(std::move(p), std::move(x));
    }
    return Mechanism(TableRule{std::move(entries)});
}

// ---------------------------------------------------------------------------
// Diff construction
// ---------------------------------------------------------------------------

/// P is in Diff iff, in canonical labels, P_1 tops o_2 and for i >= 2
/// P_i tops o_{i-1} among {o_{i-1}, ..., o_n}.
inline bool diff_contains_canonical(const Profile& canonical) {
    const int n = canonical.n();
    if (canonical[0].top() != ObjectId{2}) {
        return false;
    }
    for (int i = 2; i <= n; ++i) {
        const std::uint32_t tail = SubsetO::full(n).mask() & ~((std::uint32_t{1} << (i - 2)) - 1);
        if (canonical.of(AgentId{i}).top_within(tail) != ObjectId{i - 1}) {
            return false;
        }
    }
    return true;
}

inline bool diff_contains(const Profile& profile, const Relabeling& relabeling) {
    if (profile.n() != relabeling.n()) {
        throw DomainError("profile and relabeling disagree on n");
    }
    return diff_contains_canonical(relabeling.canonicalize(profile));
}

/// Relabeling that puts a domain failing the top-two condition on all of O
/// into the form used by the Diff construction:
///  (i)   o_1 and o_2 can both be most preferred;
///  (ii)  no preference ranks o_2 first and o_1 second;
///  (iii) some preference ranks o_2 > o_3 > ... > o_n.
/// The smallest failure witness (a, b) at O becomes (o_2, o_1); the first
/// preference topping a fixes the labels of the remaining objects.
inline Relabeling canonicalize_failure(const Domain& domain) {
    const int n = domain.n();
    const SubsetO all = SubsetO::full(n);
    const auto failures = failures_at(check_top_two(domain), all);
    if (failures.empty()) {
        throw PreconditionError("domain does not fail the top-two condition on the full object set");
    }
    const TopTwoFailure& w = failures.front();
    const Preference* p0 = nullptr;
    for (const Preference& p : domain) {
        if (p.top() == w.a) {
            p0 = &p;
            break;
        }
    }
    std::vector<ObjectId> canonical_to_concrete(static_cast<std::size_t>(n));
    canonical_to_concrete[0] = w.b;
    canonical_to_concrete[1] = w.a;
    std::size_t next = 2;
    for (ObjectId o : p0->order()) {
        if (o != w.a && o != w.b) {
            canonical_to_concrete[next++] = o;
        }
    }
    return Relabeling(std::move(canonical_to_concrete));
}

struct DiffBuildOptions {
    /// Permit n > 4. The construction is not strategyproof there; exposed
    /// only so tests can exhibit the failure.
    bool allow_large_n = false;
};

inline Mechanism build_diff_mechanism(const Domain& domain, DiffBuildOptions options = {}) {
    if (domain.n() > 4 && !options.allow_large_n) {
        throw UnsupportedError("Diff construction is only strategyproof for n <= 4");
    }
    Relabeling pi = canonicalize_failure(domain);
    return Mechanism(DiffRule{std::move(pi), domain});
}

namespace detail {

inline Allocation evaluate_diff(const DiffRule& rule, const Profile& profile) {
    const int n = profile.n();
    if (n != rule.relabeling.n()) {
        throw EvaluationError("profile size does not match the Diff mechanism");
    }
    const Profile canonical = rule.relabeling.canonicalize(profile);
    if (!diff_contains_canonical(canonical)) {
        return ttc(profile);
    }
    const int k = canonical[0].at(1).index;
    std::vector<ObjectId> x(static_cast<std::size_t>(n));
    x[0] = ObjectId{k};
    for (int i = 2; i <= k; ++i) {
        x[static_cast<std::size_t>(i - 1)] = ObjectId{i - 1};
    }
    if (k < n) {
        std::vector<AgentId> rest;
        for (int i = k + 1; i <= n; ++i) {
            rest.push_back(AgentId{i});
        }
        const SubsetO rest_objects = SubsetO::from_mask(SubsetO::full(n).mask() & ~SubsetO::full(k).mask());
        const SubEconomy sub = restrict(canonical, rest, rest_objects);
        const Allocation local = ttc(sub.profile);
        for (int j = 1; j <= local.n(); ++j) {
            x[static_cast<std::size_t>(sub.original_agent(AgentId{j}).index - 1)] =
                sub.original_object(local.of(AgentId{j}));
        }
    }
    return rule.relabeling.concretize(Allocation(std::move(x)));
}

/// Outside agents that do not top their own endowment within subset + {o_i}.
inline bool lifted_trigger(SubsetO subset, const Profile& profile) {
    for (int i = 1; i <= profile.n(); ++i) {
        const ObjectId own{i};
        if (subset.contains(own)) {
            continue;
        }
        if (profile.of(AgentId{i}).top_within(subset.with(own).mask()) != own) {
            return false;
        }
    }
    return true;
}

inline Allocation evaluate_lifted(const LiftedRule& rule, const Profile& profile) {
    const int n = profile.n();
    if (rule.subset.max_index() > n) {
        throw EvaluationError("lifted mechanism subset exceeds the profile size");
    }
    if (!lifted_trigger(rule.subset, profile)) {
        return ttc(profile);
    }
    std::vector<ObjectId> x(static_cast<std::size_t>(n));
    const SubEconomy inside = restrict(profile, owners(rule.subset), rule.subset);
    const Allocation inner = (*rule.inner)(inside.profile);
    for (int j = 1; j <= inner.n(); ++j) {
        x[static_cast<std::size_t>(inside.original_agent(AgentId{j}).index - 1)] =
            inside.original_object(inner.of(AgentId{j}));
    }
    const SubsetO complement = SubsetO::from_mask(SubsetO::full(n).mask() & ~rule.subset.mask());
    if (!complement.empty()) {
        const SubEconomy outside = restrict(profile, owners(complement), complement);
        const Allocation rest = ttc(outside.profile);
        for (int j = 1; j <= rest.n(); ++j) {
            x[static_cast<std::size_t>(outside.original_agent(AgentId{j}).index - 1)] =
                outside.original_object(rest.of(AgentId{j}));
        }
    }
    return Allocation(std::move(x));
}

}  // namespace detail

inline Allocation Mechanism::operator()(const Profile& profile) const {
    return std::visit(
        [&](const auto& rule) -> Allocation {
            using R = std::decay_t<decltype(rule)>;
            if constexpr (std::is_same_v<R, TtcRule>) {
                return ttc(profile);
            } else if constexpr (std::is_same_v<R, EndowmentRule>) {
                return Allocation::endowment(profile.n());
            } else if constexpr (std::is_same_v<R, TableRule>) {
                auto it = rule.entries.find(profile);
                if (it == rule.entries.end()) {
                    throw EvaluationError("table mechanism undefined at profile " + emit_profile(profile));
                }
                return it->second;
            } else if constexpr (std::is_same_v<R, DiffRule>) {
                return detail::evaluate_diff(rule, profile);
            } else {
                return detail::evaluate_lifted(rule, profile);
            }
        },
        rule_);
}

// ---------------------------------------------------------------------------
// Lifting
// ---------------------------------------------------------------------------

/// Objects o outside `subset` that cannot be most preferred within subset + {o}.
inline std::vector<ObjectId> lifting_blockers(const Domain& domain, SubsetO subset) {
    std::vector<ObjectId> out;
    for (int i = 1; i <= domain.n(); ++i) {
        const ObjectId o{i};
        if (!subset.contains(o) && !top_set(domain, subset.with(o), 1).contains(o)) {
            out.push_back(o);
        }
    }
    return out;
}

/// Embed `inner` (a mechanism over the |subset|-agent sub-economy in local
/// labels) into a mechanism on `domain`.
inline Mechanism lift_mechanism(const Domain& domain, SubsetO subset, Mechanism inner) {
    if (subset.empty() || subset.max_index() > domain.n()) {
        throw ConstructionError("subset is not a nonempty subset of the objects");
    }
    if (subset.size() > 4) {
        throw ConstructionError("lifting requires |subset| <= 4");
    }
    if (!fails_top_two_for(domain, subset)) {
        throw ConstructionError("domain does not fail the top-two condition for " + to_string(subset));
    }
    const auto blockers = lifting_blockers(domain, subset);
    if (!blockers.empty()) {
        throw ConstructionError(to_string(blockers.front()) + " cannot be most preferred within " +
                                to_string(subset.with(blockers.front())));
    }
    return Mechanism(LiftedRule{subset, std::make_shared<const Mechanism>(std::move(inner))});
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

struct Counterexample {
    std::optional<Mechanism> mechanism;
    std::optional<SubsetO> failing_subset;
    std::string reason;
};

/// A non-TTC mechanism satisfying IR, Pareto efficiency and strategyproofness
/// on `domain`, when one of the two constructions applies.
inline Counterexample build_necessity_counterexample(const Domain& domain) {
    Counterexample out;
    const auto subset = maximal_failing_subset(domain);
    if (!subset) {
        out.reason = "domain satisfies the top-two condition";
        return out;
    }
    out.failing_subset = subset;
    const int n = domain.n();
    if (subset->size() == n) {
        if (n <= 4) {
            out.mechanism = build_diff_mechanism(domain);
            out.reason = "top-two fails on the full object set; Diff construction";
        } else {
            out.reason = "top-two fails on the full object set with n > 4; no construction available";
        }
        return out;
    }
    if (subset->size() > 4) {
        out.reason = "largest failing subset " + to_string(*subset) + " has more than 4 objects";
        return out;
    }
    const auto blockers = lifting_blockers(domain, *subset);
    if (!blockers.empty()) {
        out.reason = "largest failing subset " + to_string(*subset) + " cannot be lifted: " +
                     to_string(blockers.front()) + " is never most preferred within " +
                     to_string(subset->with(blockers.front()));
        return out;
    }
    Mechanism inner = build_diff_mechanism(restrict_domain(domain, *subset));
    out.mechanism = lift_mechanism(domain, *subset, std::move(inner));
    out.reason = "top-two fails on " + to_string(*subset) + "; Diff construction lifted with TTC outside";
    return out;
}

}  // namespace ttc_lab
