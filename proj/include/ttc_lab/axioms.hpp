// Allocation-level axioms (individual rationality, pair and Pareto efficiency)
// and mechanism-level axioms (strategyproofness, group strategyproofness),
// each with a replayable witness on failure.
#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ttc_lab/core.hpp"

namespace ttc_lab {

enum class Axiom { IR, Pair, Pareto, SP, GroupSP };

inline std::string to_string(Axiom a) {
    switch (a) {
        case Axiom::IR: return "ir";
        case Axiom::Pair: return "pair";
        case Axiom::Pareto: return "pareto";
        case Axiom::SP: return "sp";
        case Axiom::GroupSP: return "gsp";
    }
    return "?";
}

inline Axiom parse_axiom(const std::string& s) {
    if (s == "ir") return Axiom::IR;
    if (s == "pair") return Axiom::Pair;
    if (s == "pareto") return Axiom::Pareto;
    if (s == "sp") return Axiom::SP;
    if (s == "gsp") return Axiom::GroupSP;
    throw DomainError("unknown axiom '" + s + "'");
}

/// Witness of a failed axiom.
///  IR:      profiles[0], allocations[0], agents[0] (worse off than endowment)
///  Pair:    profiles[0], allocations[0], agents = {i, j} (mutual envy)
///  Pareto:  profiles[0], allocations = {x, y} with y dominating x
///  SP:      profiles = {P, (P_i', P_-i)}, allocations = their outcomes,
///           agents[0] = i, misreports[0] = P_i'
///  GroupSP: as SP with agents = S and misreports = P'_S
struct AxiomViolation {
    Axiom kind = Axiom::IR;
    std::vector<Profile> profiles;
    std::vector<AgentId> agents;
    std::vector<Allocation> allocations;
    std::vector<Preference> misreports;
};

template <class M>
concept MechanismLike = requires(const M& m, const Profile& p) {
    { m(p) } -> std::convertible_to<Allocation>;
};

namespace detail {

inline void check_sizes(const Profile& profile, const Allocation& alloc) {
    if (profile.n() != alloc.n()) {
        throw DomainError("profile has " + std::to_string(profile.n()) + " agents, allocation " +
                          std::to_string(alloc.n()));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-profile checks
// ---------------------------------------------------------------------------

/// First agent (by index) strictly worse off than with its endowment.
inline std::optional<AgentId> ir_witness(const Profile& profile, const Allocation& alloc) {
    detail::check_sizes(profile, alloc);
    for (int i = 1; i <= profile.n(); ++i) {
        const AgentId a{i};
        if (profile.of(a).prefers(endowment_of(a), alloc.of(a))) {
            return a;
        }
    }
    return std::nullopt;
}

inline bool is_ir(const Profile& profile, const Allocation& alloc) { return !ir_witness(profile, alloc); }

/// First pair (i < j) who each strictly prefer the other's assignment.
inline std::optional<std::pair<AgentId, AgentId>> pair_witness(const Profile& profile, const Allocation& alloc) {
    detail::check_sizes(profile, alloc);
    const int n = profile.n();
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const AgentId a{i};
            const AgentId b{j};
            if (profile.of(a).prefers(alloc.of(b), alloc.of(a)) && profile.of(b).prefers(alloc.of(a), alloc.of(b))) {
                return std::make_pair(a, b);
            }
        }
    }
    return std::nullopt;
}

inline bool is_pair_efficient(const Profile& profile, const Allocation& alloc) {
    return !pair_witness(profile, alloc);
}

/// A Pareto improvement over `alloc`, if one exists.
///
/// With strict preferences an improvement moves only agents who strictly
/// gain, so it exists iff the graph i -> j (x_j P_i x_i) has a cycle; trading
/// along that cycle gives the dominating allocation.
inline std::optional<Allocation> pareto_improvement(const Profile& profile, const Allocation& alloc) {
    detail::check_sizes(profile, alloc);
    const int n = profile.n();
    std::vector<std::uint32_t> envies(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const Preference& p = profile[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            if (p.prefers(alloc[static_cast<std::size_t>(j)], alloc[static_cast<std::size_t>(i)])) {
                envies[static_cast<std::size_t>(i)] |= std::uint32_t{1} << j;
            }
        }
    }
    // iterative DFS with colors; parent links recover the cycle
    std::vector<int> color(static_cast<std::size_t>(n), 0);
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    for (int root = 0; root < n; ++root) {
        if (color[static_cast<std::size_t>(root)] != 0) {
            continue;
        }
        std::vector<std::pair<int, std::uint32_t>> stack{{root, envies[static_cast<std::size_t>(root)]}};
        color[static_cast<std::size_t>(root)] = 1;
        while (!stack.empty()) {
            auto& [v, pending] = stack.back();
            if (pending == 0) {
                color[static_cast<std::size_t>(v)] = 2;
                stack.pop_back();
                continue;
            }
            const int w = std::countr_zero(pending);
            pending &= pending - 1;
            if (color[static_cast<std::size_t>(w)] == 1) {
                // cycle w -> ... -> v -> w
                std::vector<ObjectId> y(alloc.assignment().begin(), alloc.assignment().end());
                int u = v;
                int next = w;
                while (true) {
                    y[static_cast<std::size_t>(u)] = alloc[static_cast<std::size_t>(next)];
                    if (u == w) {
                        break;
                    }
                    next = u;
                    u = parent[static_cast<std::size_t>(u)];
                }
                return Allocation(std::move(y));
            }
            if (color[static_cast<std::size_t>(w)] == 0) {
                color[static_cast<std::size_t>(w)] = 1;
                parent[static_cast<std::size_t>(w)] = v;
                stack.emplace_back(w, envies[static_cast<std::size_t>(w)]);
            }
        }
    }
    return std::nullopt;
}

inline bool is_pareto(const Profile& profile, const Allocation& alloc) {
    return !pareto_improvement(profile, alloc);
}

/// y weakly improves every agent over x and strictly improves one.
inline bool pareto_dominates(const Profile& profile, const Allocation& y, const Allocation& x) {
    detail::check_sizes(profile, x);
    detail::check_sizes(profile, y);
    bool strict = false;
    for (int i = 1; i <= profile.n(); ++i) {
        const AgentId a{i};
        if (profile.of(a).prefers(x.of(a), y.of(a))) {
            return false;
        }
        strict = strict || profile.of(a).prefers(y.of(a), x.of(a));
    }
    return strict;
}

// ---------------------------------------------------------------------------
// Mechanism-level checks
// ---------------------------------------------------------------------------

/// Group-strategyproofness checks refuse profile spaces needing more than
/// this many (coalition, joint misreport) combinations per profile.
inline constexpr std::uint64_t kGroupSpComboCap = 20'000;

/// phi evaluated at every profile of `space`, in index order.
template <MechanismLike M>
std::vector<Allocation> tabulate_outcomes(const M& mech, const ProfileSpace& space) {
    std::vector<Allocation> out;
    out.reserve(static_cast<std::size_t>(space.size()));
    for (std::uint64_t idx = 0; idx < space.size(); ++idx) {
        Allocation x = mech(space.profile_at(idx));
        if (x.n() != space.n()) {
            throw EvaluationError("mechanism returned an allocation of the wrong size");
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// First (profile, agent, misreport) in scan order where the misreport
/// strictly gains; nullopt if strategyproof.
inline std::optional<AxiomViolation> sp_violation(const ProfileSpace& space, const std::vector<Allocation>& outcomes) {
    const std::size_t n = static_cast<std::size_t>(space.n());
    for (std::uint64_t idx = 0; idx < space.size(); ++idx) {
        for (std::size_t i = 0; i < n; ++i) {
            const Domain& d = space.domain_of(i);
            const Preference& truth = d[space.choice(idx, i)];
            const ObjectId truthful = outcomes[static_cast<std::size_t>(idx)][i];
            for (std::size_t dev = 0; dev < d.size(); ++dev) {
                const std::uint64_t jdx = space.deviate(idx, i, dev);
                const ObjectId gained = outcomes[static_cast<std::size_t>(jdx)][i];
                if (truth.prefers(gained, truthful)) {
                    AxiomViolation v;
                    v.kind = Axiom::SP;
                    v.profiles = {space.profile_at(idx), space.profile_at(jdx)};
                    v.agents = {AgentId{static_cast<int>(i) + 1}};
                    v.allocations = {outcomes[static_cast<std::size_t>(idx)], outcomes[static_cast<std::size_t>(jdx)]};
                    v.misreports = {d[dev]};
                    return v;
                }
            }
        }
    }
    return std::nullopt;
}

template <MechanismLike M>
std::optional<AxiomViolation> strategyproofness_violation(const M& mech, const ProfileSpace& space) {
    return sp_violation(space, tabulate_outcomes(mech, space));
}

template <MechanismLike M>
bool is_strategyproof(const M& mech, const ProfileSpace& space) {
    return !strategyproofness_violation(mech, space);
}

/// Number of (coalition, joint misreport) pairs examined at each profile.
inline std::uint64_t group_sp_combinations(const ProfileSpace& space) {
    const std::size_t n = static_cast<std::size_t>(space.n());
    std::uint64_t total = 0;
    for (std::uint32_t s = 1; s < (std::uint32_t{1} << n); ++s) {
        std::uint64_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if ((s >> i) & 1U) {
                combos *= space.domain_of(i).size();
                if (combos > kGroupSpComboCap) {
                    return kGroupSpComboCap + 1;
                }
            }
        }
        total += combos;
        if (total > kGroupSpComboCap) {
            return kGroupSpComboCap + 1;
        }
    }
    return total;
}

inline std::optional<AxiomViolation> group_sp_violation(const ProfileSpace& space,
                                                        const std::vector<Allocation>& outcomes) {
    const std::size_t n = static_cast<std::size_t>(space.n());
    if (n > 4) {
        throw BudgetError("group strategyproofness is only checked for n <= 4");
    }
    if (group_sp_combinations(space) > kGroupSpComboCap) {
        throw BudgetError("group strategyproofness check exceeds " + std::to_string(kGroupSpComboCap) +
                          " coalition-misreport combinations per profile");
    }
    std::vector<std::size_t> members;
    std::vector<std::size_t> pick;
    for (std::uint64_t idx = 0; idx < space.size(); ++idx) {
        const Allocation& base = outcomes[static_cast<std::size_t>(idx)];
        for (std::uint32_t s = 1; s < (std::uint32_t{1} << n); ++s) {
            members.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if ((s >> i) & 1U) {
                    members.push_back(i);
                }
            }
            pick.assign(members.size(), 0);
            // odometer over the coalition's joint misreports
            bool exhausted = false;
            while (!exhausted) {
                std::uint64_t jdx = idx;
                for (std::size_t m = 0; m < members.size(); ++m) {
                    jdx = space.deviate(jdx, members[m], pick[m]);
                }
                const Allocation& dev = outcomes[static_cast<std::size_t>(jdx)];
                bool all_weak = true;
                bool some_strict = false;
                for (std::size_t i : members) {
                    const Preference& truth = space.domain_of(i)[space.choice(idx, i)];
                    if (truth.prefers(base[i], dev[i])) {
                        all_weak = false;
                        break;
                    }
                    some_strict = some_strict || truth.prefers(dev[i], base[i]);
                }
                if (all_weak && some_strict) {
                    AxiomViolation v;
                    v.kind = Axiom::GroupSP;
                    v.profiles = {space.profile_at(idx), space.profile_at(jdx)};
                    for (std::size_t m = 0; m < members.size(); ++m) {
                        v.agents.push_back(AgentId{static_cast<int>(members[m]) + 1});
                        v.misreports.push_back(space.domain_of(members[m])[pick[m]]);
                    }
                    v.allocations = {base, dev};
                    return v;
                }
                std::size_t m = members.size();
                while (true) {
                    if (m == 0) {
                        exhausted = true;
                        break;
                    }
                    --m;
                    if (++pick[m] < space.domain_of(members[m]).size()) {
                        break;
                    }
                    pick[m] = 0;
                }
            }
        }
    }
    return std::nullopt;
}

template <MechanismLike M>
std::optional<AxiomViolation> group_strategyproofness_violation(const M& mech, const ProfileSpace& space) {
    if (space.n() > 4 || group_sp_combinations(space) > kGroupSpComboCap) {
        return group_sp_violation(space, {});  // throws the budget error
    }
    return group_sp_violation(space, tabulate_outcomes(mech, space));
}

template <MechanismLike M>
bool is_group_strategyproof(const M& mech, const ProfileSpace& space) {
    return !group_strategyproofness_violation(mech, space);
}

// ---------------------------------------------------------------------------
// Batch driver
// ---------------------------------------------------------------------------

struct AxiomResult {
    Axiom axiom = Axiom::IR;
    bool passed = true;
    std::optional<AxiomViolation> violation;
};

struct AxiomReport {
    std::vector<AxiomResult> results;

    bool clean() const {
        for (const AxiomResult& r : results) {
            if (!r.passed) {
                return false;
            }
        }
        return true;
    }

    const AxiomResult* find(Axiom a) const {
        for (const AxiomResult& r : results) {
            if (r.axiom == a) {
                return &r;
            }
        }
        return nullptr;
    }
};

/// First per-profile violation of `axiom` in profile index order.
inline std::optional<AxiomViolation> allocation_axiom_violation(Axiom axiom, const ProfileSpace& space,
                                                                const std::vector<Allocation>& outcomes) {
    for (std::uint64_t idx = 0; idx < space.size(); ++idx) {
        const Profile p = space.profile_at(idx);
        const Allocation& x = outcomes[static_cast<std::size_t>(idx)];
        AxiomViolation v;
        v.kind = axiom;
        v.profiles = {p};
        v.allocations = {x};
        if (axiom == Axiom::IR) {
            if (auto a = ir_witness(p, x)) {
                v.agents = {*a};
                return v;
            }
        } else if (axiom == Axiom::Pair) {
            if (auto w = pair_witness(p, x)) {
                v.agents = {w->first, w->second};
                return v;
            }
        } else if (axiom == Axiom::Pareto) {
            if (auto y = pareto_improvement(p, x)) {
                v.allocations.push_back(*y);
                return v;
            }
        }
    }
    return std::nullopt;
}

/// Runs each selected axiom (in IR, Pair, Pareto, SP, GroupSP order) and
/// keeps the first witness of each failure.
template <MechanismLike M>
AxiomReport check_mechanism(const M& mech, const ProfileSpace& space, const std::set<Axiom>& which) {
    const std::vector<Allocation> outcomes = tabulate_outcomes(mech, space);
    AxiomReport report;
    for (Axiom a : which) {
        AxiomResult r;
        r.axiom = a;
        switch (a) {
            case Axiom::IR:
            case Axiom::Pair:
            case Axiom::Pareto: r.violation = allocation_axiom_violation(a, space, outcomes); break;
            case Axiom::SP: r.violation = sp_violation(space, outcomes); break;
            case Axiom::GroupSP: r.violation = group_sp_violation(space, outcomes); break;
        }
        r.passed = !r.violation.has_value();
        report.results.push_back(std::move(r));
    }
    return report;
}

inline const std::set<Axiom>& all_axioms() {
    static const std::set<Axiom> all{Axiom::IR, Axiom::Pair, Axiom::Pareto, Axiom::SP, Axiom::GroupSP};
    return all;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

/// Re-derive the violation from its fields alone (and, for the incentive
/// axioms, from fresh evaluations of `mech`). True iff the witness holds.
template <MechanismLike M>
bool replays(const AxiomViolation& v, const M& mech) {
    switch (v.kind) {
        case Axiom::IR: {
            const Profile& p = v.profiles.at(0);
            const AgentId a = v.agents.at(0);
            return p.of(a).prefers(endowment_of(a), v.allocations.at(0).of(a));
        }
        case Axiom::Pair: {
            const Profile& p = v.profiles.at(0);
            const Allocation& x = v.allocations.at(0);
            const AgentId a = v.agents.at(0);
            const AgentId b = v.agents.at(1);
            return a != b && p.of(a).prefers(x.of(b), x.of(a)) && p.of(b).prefers(x.of(a), x.of(b));
        }
        case Axiom::Pareto:
            return pareto_dominates(v.profiles.at(0), v.allocations.at(1), v.allocations.at(0));
        case Axiom::SP:
        case Axiom::GroupSP: {
            const Profile& truth = v.profiles.at(0);
            Profile lie = truth;
            for (std::size_t k = 0; k < v.agents.size(); ++k) {
                lie = lie.with(v.agents[k], v.misreports.at(k));
            }
            if (lie != v.profiles.at(1)) {
                return false;
            }
            const Allocation x = mech(truth);
            const Allocation y = mech(lie);
            bool strict = false;
            for (AgentId a : v.agents) {
                if (truth.of(a).prefers(x.of(a), y.of(a))) {
                    return false;
                }
                strict = strict || truth.of(a).prefers(y.of(a), x.of(a));
            }
            return strict;
        }
    }
    return false;
}

}  // namespace ttc_lab
