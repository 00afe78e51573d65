// Preference-domain generators. Every generator filters the n! linear orders
// through its defining predicate, so each one reads directly as a set-builder.
#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ttc_lab/core.hpp"

namespace ttc_lab {

/// An axis o_{order[0]} -> ... -> o_{order[n-1]}; `cyclic` closes it into a
/// cycle for the circular domain.
struct LinearOrderSpec {
    std::vector<ObjectId> order;
    bool cyclic = false;

    static LinearOrderSpec identity(int n, bool cyclic = false) {
        LinearOrderSpec s;
        s.cyclic = cyclic;
        for (int i = 1; i <= n; ++i) {
            s.order.push_back(ObjectId{i});
        }
        return s;
    }
};

/// A strict partial order given by generating edges (a, b) meaning a dominates b.
class PartialOrderSpec {
public:
    PartialOrderSpec(int n, std::vector<std::pair<ObjectId, ObjectId>> edges) : n_(n), edges_(std::move(edges)) {
        if (n < 1 || n > kMaxObjects) {
            throw DomainError("object count out of range");
        }
        above_.assign(static_cast<std::size_t>(n), 0);
        for (auto [a, b] : edges_) {
            if (a.index < 1 || a.index > n || b.index < 1 || b.index > n) {
                throw DomainError("partial order edge mentions an object outside 1.." + std::to_string(n));
            }
            above_[static_cast<std::size_t>(a.index - 1)] |= bit_of(b);
        }
        // transitive closure: above_[a] = everything a dominates
        for (int k = 0; k < n; ++k) {
            for (int a = 0; a < n; ++a) {
                if ((above_[static_cast<std::size_t>(a)] >> k) & 1U) {
                    above_[static_cast<std::size_t>(a)] |= above_[static_cast<std::size_t>(k)];
                }
            }
        }
        for (int a = 0; a < n; ++a) {
            if ((above_[static_cast<std::size_t>(a)] >> a) & 1U) {
                throw ConstructionError("partial order contains a cycle through o" + std::to_string(a + 1));
            }
        }
    }

    int n() const noexcept { return n_; }
    const std::vector<std::pair<ObjectId, ObjectId>>& edges() const noexcept { return edges_; }

    /// a dominates b in the transitive closure.
    bool dominates(ObjectId a, ObjectId b) const {
        return (above_[static_cast<std::size_t>(a.index - 1)] & bit_of(b)) != 0;
    }

private:
    int n_;
    std::vector<std::pair<ObjectId, ObjectId>> edges_;
    std::vector<std::uint32_t> above_;
};

namespace detail {

inline void check_axis(const LinearOrderSpec& axis, int n) {
    if (static_cast<int>(axis.order.size()) != n) {
        throw DomainError("axis has " + std::to_string(axis.order.size()) + " objects, expected " +
                          std::to_string(n));
    }
    (void)Preference(axis.order);  // throws unless a permutation
}

/// axis_pos[o.index] = 0-based position of o on the axis.
inline std::vector<int> axis_positions(const LinearOrderSpec& axis) {
    std::vector<int> pos(axis.order.size() + 1, 0);
    for (std::size_t k = 0; k < axis.order.size(); ++k) {
        pos[static_cast<std::size_t>(axis.order[k].index)] = static_cast<int>(k);
    }
    return pos;
}

inline Domain filter_permutations(int n, const std::function<bool(const Preference&)>& keep) {
    if (n < 1 || n > 9) {
        throw DomainError("enumeration requires 1 <= n <= 9");
    }
    std::vector<ObjectId> v;
    for (int i = 1; i <= n; ++i) {
        v.push_back(ObjectId{i});
    }
    std::vector<Preference> out;
    do {
        Preference p(v);
        if (keep(p)) {
            out.push_back(std::move(p));
        }
    } while (std::next_permutation(v.begin(), v.end()));
    if (out.empty()) {
        throw DomainError("generator produced an empty domain");
    }
    return Domain(std::move(out));
}

inline bool is_single_peaked(const Preference& p, const LinearOrderSpec& axis) {
    const auto& ax = axis.order;
    const int n = static_cast<int>(ax.size());
    const int peak = detail::axis_positions(axis)[static_cast<std::size_t>(p.top().index)];
    for (int k = 0; k + 1 < n; ++k) {
        const ObjectId lo = ax[static_cast<std::size_t>(k)];
        const ObjectId hi = ax[static_cast<std::size_t>(k + 1)];
        if (k < peak ? !p.prefers(hi, lo) : !p.prefers(lo, hi)) {
            return false;
        }
    }
    return true;
}

inline bool is_single_dipped(const Preference& p, const LinearOrderSpec& axis) {
    const auto& ax = axis.order;
    const int n = static_cast<int>(ax.size());
    const int dip = detail::axis_positions(axis)[static_cast<std::size_t>(p.at(n - 1).index)];
    for (int k = 0; k + 1 < n; ++k) {
        const ObjectId lo = ax[static_cast<std::size_t>(k)];
        const ObjectId hi = ax[static_cast<std::size_t>(k + 1)];
        if (k < dip ? !p.prefers(lo, hi) : !p.prefers(hi, lo)) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

/// All n! linear orders, lexicographic.
inline Domain unrestricted(int n) {
    if (n < 1 || n > 9) {
        throw DomainError("unrestricted domain requires 1 <= n <= 9");
    }
    return detail::filter_permutations(n, [](const Preference&) { return true; });
}

inline Domain single_peaked(int n, const LinearOrderSpec& axis) {
    if (n < 3) {
        throw DomainError("single-peaked domain requires n >= 3");
    }
    detail::check_axis(axis, n);
    return detail::filter_permutations(n, [&](const Preference& p) { return detail::is_single_peaked(p, axis); });
}

inline Domain single_peaked(int n) { return single_peaked(n, LinearOrderSpec::identity(n)); }

/// Single-peaked preferences whose peak is one of the adjacent axis objects
/// at positions p and p+1 (1-based).
inline Domain single_peaked_two_adjacent(int n, const LinearOrderSpec& axis, int p) {
    if (n < 3) {
        throw DomainError("single-peaked domain requires n >= 3");
    }
    if (p < 1 || p > n - 1) {
        throw DomainError("peak index " + std::to_string(p) + " outside 1.." + std::to_string(n - 1));
    }
    detail::check_axis(axis, n);
    const ObjectId left = axis.order[static_cast<std::size_t>(p - 1)];
    const ObjectId right = axis.order[static_cast<std::size_t>(p)];
    return detail::filter_permutations(n, [&](const Preference& pref) {
        return detail::is_single_peaked(pref, axis) && (pref.top() == left || pref.top() == right);
    });
}

inline Domain single_peaked_two_adjacent(int n, int p) {
    return single_peaked_two_adjacent(n, LinearOrderSpec::identity(n), p);
}

inline Domain single_dipped(int n, const LinearOrderSpec& axis) {
    if (n < 3) {
        throw DomainError("single-dipped domain requires n >= 3");
    }
    detail::check_axis(axis, n);
    return detail::filter_permutations(n, [&](const Preference& p) { return detail::is_single_dipped(p, axis); });
}

inline Domain single_dipped(int n) { return single_dipped(n, LinearOrderSpec::identity(n)); }

/// For each top object, the clockwise and the counter-clockwise traversal of
/// the cycle starting there.
inline Domain circular(int n, const LinearOrderSpec& cycle) {
    if (n < 4) {
        throw DomainError("circular domain requires n >= 4");
    }
    if (!cycle.cyclic) {
        throw DomainError("circular domain needs a cyclic order spec");
    }
    detail::check_axis(cycle, n);
    const auto pos = detail::axis_positions(cycle);
    return detail::filter_permutations(n, [&](const Preference& pref) {
        const int start = pos[static_cast<std::size_t>(pref.top().index)];
        bool forward = true;
        bool backward = true;
        for (int k = 0; k < n; ++k) {
            const ObjectId got = pref.at(k);
            forward = forward && got == cycle.order[static_cast<std::size_t>((start + k) % n)];
            backward = backward && got == cycle.order[static_cast<std::size_t>((start - k + n) % n)];
        }
        return forward || backward;
    });
}

inline Domain circular(int n) { return circular(n, LinearOrderSpec::identity(n, true)); }

/// Every linear extension of `spec`.
inline Domain partial_agreement(const PartialOrderSpec& spec) {
    const int n = spec.n();
    return detail::filter_permutations(n, [&](const Preference& p) {
        for (int a = 1; a <= n; ++a) {
            for (int b = 1; b <= n; ++b) {
                if (spec.dominates(ObjectId{a}, ObjectId{b}) && !p.prefers(ObjectId{a}, ObjectId{b})) {
                    return false;
                }
            }
        }
        return true;
    });
}

inline Domain partial_agreement(int n, const PartialOrderSpec& spec) {
    if (spec.n() != n) {
        throw DomainError("partial order spec is over a different object count");
    }
    return partial_agreement(spec);
}

}  // namespace ttc_lab
