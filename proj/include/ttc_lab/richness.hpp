// Top-two and top-k richness conditions with exhaustive failure witnesses.
//
// Subsets O' with |O'| >= 2 are scanned in size-then-lex order. For each O',
// every ordered tuple of distinct objects from r_1(D, O') must be realised by
// some preference as its ranks 1..k within O'. A subset whose r_1 set has
// fewer than k members satisfies the condition vacuously.
#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "ttc_lab/core.hpp"

namespace ttc_lab {

/// No preference ranks `a` first and `b` second within `subset`.
struct TopTwoFailure {
    SubsetO subset;
    ObjectId a;
    ObjectId b;
    friend bool operator==(const TopTwoFailure&, const TopTwoFailure&) = default;
};

struct TopTwoReport {
    bool satisfied = true;
    std::vector<TopTwoFailure> failures;
};

/// No preference ranks `tuple` as its top |tuple| objects, in order, within `subset`.
struct TopKFailure {
    SubsetO subset;
    std::vector<ObjectId> tuple;
    friend bool operator==(const TopKFailure&, const TopKFailure&) = default;
};

struct TopKReport {
    int k = 2;
    bool satisfied = true;
    std::vector<TopKFailure> failures;
};

namespace detail {

/// Nonempty subsets of {o_1..o_n} with at least `min_size` members, size then lex.
inline std::vector<SubsetO> subsets_size_then_lex(int n, int min_size) {
    std::vector<SubsetO> out;
    const std::uint32_t limit = std::uint32_t{1} << n;
    for (std::uint32_t m = 1; m < limit; ++m) {
        if (std::popcount(m) >= min_size) {
            out.push_back(SubsetO::from_mask(m));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](SubsetO a, SubsetO b) { return size_then_lex_less(a, b); });
    return out;
}

/// Prefixes (length k) realised by some preference of `domain` within `mask`,
/// each encoded as a vector of object indices.
inline std::vector<std::vector<int>> realised_prefixes(const Domain& domain, std::uint32_t mask, int k) {
    std::vector<std::vector<int>> out;
    out.reserve(domain.size());
    for (const Preference& p : domain) {
        std::vector<int> prefix;
        prefix.reserve(static_cast<std::size_t>(k));
        for (ObjectId o : p.order()) {
            if ((mask & bit_of(o)) != 0) {
                prefix.push_back(o.index);
                if (static_cast<int>(prefix.size()) == k) {
                    break;
                }
            }
        }
        out.push_back(std::move(prefix));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace detail

inline TopKReport check_top_k(const Domain& domain, int k) {
    const int n = domain.n();
    if (k < 2 || k > std::max(2, n)) {
        throw DomainError("top-k condition requires 2 <= k <= n");
    }
    TopKReport report;
    report.k = k;
    if (n < k) {
        return report;
    }
    for (SubsetO subset : detail::subsets_size_then_lex(n, k)) {
        const std::vector<ObjectId> tops = top_set(domain, subset, 1).members();
        if (static_cast<int>(tops.size()) < k) {
            continue;
        }
        const auto realised = detail::realised_prefixes(domain, subset.mask(), k);
        // every ordered k-tuple of distinct members of tops, lexicographic
        std::vector<int> pick(static_cast<std::size_t>(k), 0);
        std::vector<bool> used(tops.size(), false);
        auto recurse = [&](auto&& self, int depth) -> void {
            if (depth == k) {
                std::vector<int> tuple;
                for (int i : pick) {
                    tuple.push_back(tops[static_cast<std::size_t>(i)].index);
                }
                if (!std::binary_search(realised.begin(), realised.end(), tuple)) {
                    TopKFailure f;
                    f.subset = subset;
                    for (int idx : tuple) {
                        f.tuple.push_back(ObjectId{idx});
                    }
                    report.failures.push_back(std::move(f));
                }
                return;
            }
            for (std::size_t i = 0; i < tops.size(); ++i) {
                if (!used[i]) {
                    used[i] = true;
                    pick[static_cast<std::size_t>(depth)] = static_cast<int>(i);
                    self(self, depth + 1);
                    used[i] = false;
                }
            }
        };
        recurse(recurse, 0);
    }
    report.satisfied = report.failures.empty();
    return report;
}

inline TopTwoReport check_top_two(const Domain& domain) {
    TopTwoReport report;
    const int n = domain.n();
    if (n < 2) {
        return report;
    }
    for (SubsetO subset : detail::subsets_size_then_lex(n, 2)) {
        const std::vector<ObjectId> tops = top_set(domain, subset, 1).members();
        if (tops.size() < 2) {
            continue;
        }
        // realised[a][b]: some preference ranks a then b within subset
        std::vector<std::uint32_t> second_after(static_cast<std::size_t>(n) + 1, 0);
        for (const Preference& p : domain) {
            const ObjectId first = detail::rank_unchecked(p, subset.mask(), 1);
            const ObjectId second = detail::rank_unchecked(p, subset.mask(), 2);
            second_after[static_cast<std::size_t>(first.index)] |= bit_of(second);
        }
        for (ObjectId a : tops) {
            for (ObjectId b : tops) {
                if (a != b && (second_after[static_cast<std::size_t>(a.index)] & bit_of(b)) == 0) {
                    report.failures.push_back(TopTwoFailure{subset, a, b});
                }
            }
        }
    }
    report.satisfied = report.failures.empty();
    return report;
}

/// Failure witnesses restricted to one subset, in (a, b) lexicographic order.
inline std::vector<TopTwoFailure> failures_at(const TopTwoReport& report, SubsetO subset) {
    std::vector<TopTwoFailure> out;
    for (const TopTwoFailure& f : report.failures) {
        if (f.subset == subset) {
            out.push_back(f);
        }
    }
    return out;
}

inline bool fails_top_two_for(const Domain& domain, SubsetO subset) {
    return !failures_at(check_top_two(domain), subset).empty();
}

/// A largest subset on which the top-two condition fails; ties go to the
/// lexicographically smallest member sequence.
inline std::optional<SubsetO> maximal_failing_subset(const Domain& domain) {
    const TopTwoReport report = check_top_two(domain);
    std::optional<SubsetO> best;
    for (const TopTwoFailure& f : report.failures) {
        if (!best || f.subset.size() > best->size() ||
            (f.subset.size() == best->size() && size_then_lex_less(f.subset, *best))) {
            best = f.subset;
        }
    }
    return best;
}

}  // namespace ttc_lab
