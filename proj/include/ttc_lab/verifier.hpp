// Decides whether TTC is the only mechanism on a (possibly heterogeneous)
// domain that is individually rational, efficient (pair or Pareto) and
// strategyproof.
//
// The mechanism is modelled as one CSP variable per profile whose values are
// the allocations passing IR and the efficiency filter there. Two profiles
// that differ only in agent i's report are linked by the strategyproofness
// constraint in both directions:
//     x_p[i] R_i x_q[i]   (truth P_i at p cannot gain by reporting P_i')
//     x_q[i] R'_i x_p[i]  (truth P_i' at q cannot gain by reporting P_i)
// The all-TTC assignment is always a solution. The search looks for any
// other one: for each profile in turn it forbids the TTC value and runs
// arc consistency plus depth-first search; if no solution exists the
// profile is fixed to TTC for the rest of the run.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ttc_lab/axioms.hpp"
#include "ttc_lab/core.hpp"
#include "ttc_lab/domains.hpp"
#include "ttc_lab/mechanisms.hpp"
#include "ttc_lab/richness.hpp"
#include "ttc_lab/ttc.hpp"

namespace ttc_lab {

enum class Efficiency { Pair, Pareto };

inline std::string to_string(Efficiency e) { return e == Efficiency::Pair ? "pair" : "pareto"; }

inline Efficiency parse_efficiency(const std::string& s) {
    if (s == "pair") return Efficiency::Pair;
    if (s == "pareto") return Efficiency::Pareto;
    throw DomainError("unknown efficiency notion '" + s + "'");
}

inline constexpr int kMaxVerifierObjects = 6;

/// IR and efficient allocations at `profile`, lexicographic.
inline std::vector<Allocation> candidate_allocations(const Profile& profile, Efficiency efficiency) {
    if (profile.n() > kMaxVerifierObjects) {
        throw BudgetError("candidate enumeration limited to n <= " + std::to_string(kMaxVerifierObjects));
    }
    std::vector<Allocation> out;
    for (Allocation& x : all_allocations(profile.n())) {
        if (!is_ir(profile, x)) {
            continue;
        }
        const bool efficient =
            efficiency == Efficiency::Pair ? is_pair_efficient(profile, x) : is_pareto(profile, x);
        if (efficient) {
            out.push_back(std::move(x));
        }
    }
    return out;
}

enum class Status { UniqueTTC, Multiple, BudgetExceeded };

inline std::string to_string(Status s) {
    switch (s) {
        case Status::UniqueTTC: return "unique_ttc";
        case Status::Multiple: return "multiple";
        case Status::BudgetExceeded: return "budget_exceeded";
    }
    return "?";
}

struct SearchStats {
    std::uint64_t profiles = 0;
    std::uint64_t profiles_visited = 0;
    std::uint64_t nodes_expanded = 0;
    std::uint64_t revisions = 0;
    double wall_seconds = 0.0;
};

struct Classification {
    Status status = Status::UniqueTTC;
    /// Table mechanism, present iff status == Multiple.
    std::optional<Mechanism> witness;
    SearchStats stats;
    std::string note;
};

struct ClassifyOptions {
    std::uint64_t profile_cap = 10'000;
    std::uint64_t node_budget = 100'000'000;
};

namespace detail {

class SpCsp {
public:
    SpCsp(const ProfileSpace& space, Efficiency efficiency, std::uint64_t node_budget)
        : space_(space), n_(static_cast<std::size_t>(space.n())), node_budget_(node_budget) {
        allocations_ = all_allocations(space.n());
        build_preference_masks();
        build_candidates(efficiency);
    }

    /// Returns the witness assignment (allocation index per profile) or nullopt.
    std::optional<std::vector<std::uint16_t>> find_non_ttc(SearchStats& stats) {
        stats_ = &stats;
        if (!propagate_all()) {
            throw std::logic_error("arc consistency wiped out the all-TTC solution");
        }
        for (std::size_t p = 0; p < vars_; ++p) {
            if (size_[p] == 1) {
                continue;
            }
            ++stats.profiles_visited;
            const std::size_t mark = trail_.size();
            remove_value(p, ttc_value_[p]);
            if (propagate_from(p) && search()) {
                return assignment();
            }
            undo(mark);
            assign(p, ttc_value_[p]);
            if (!propagate_from(p)) {
                throw std::logic_error("fixing a profile to TTC broke consistency");
            }
        }
        return std::nullopt;
    }

    const std::vector<Allocation>& allocations() const { return allocations_; }

    struct BudgetExhausted {};

private:
    struct TrailEntry {
        std::uint32_t var;
        std::uint32_t word;
        std::uint64_t old_bits;
    };

    void build_preference_masks() {
        // below[a][k][o]: objects ranked at or below o by preference k of agent a
        // above[a][k][o]: objects ranked at or above o
        below_.resize(n_);
        above_.resize(n_);
        for (std::size_t a = 0; a < n_; ++a) {
            const Domain& d = space_.domain_of(a);
            below_[a].assign(d.size() * n_, 0);
            above_[a].assign(d.size() * n_, 0);
            for (std::size_t k = 0; k < d.size(); ++k) {
                const Preference& p = d[k];
                std::uint32_t seen = 0;
                for (int pos = 0; pos < p.size(); ++pos) {
                    seen |= bit_of(p.at(pos));
                    above_[a][k * n_ + static_cast<std::size_t>(p.at(pos).index - 1)] = seen;
                }
                for (int pos = 0; pos < p.size(); ++pos) {
                    const std::uint32_t at_or_above = above_[a][k * n_ + static_cast<std::size_t>(p.at(pos).index - 1)];
                    const std::uint32_t strictly_above = at_or_above & ~bit_of(p.at(pos));
                    below_[a][k * n_ + static_cast<std::size_t>(p.at(pos).index - 1)] =
                        SubsetO::full(p.size()).mask() & ~strictly_above;
                }
            }
        }
    }

    void build_candidates(Efficiency efficiency) {
        vars_ = static_cast<std::size_t>(space_.size());
        cand_.resize(vars_);
        ttc_value_.resize(vars_);
        std::size_t widest = 1;
        for (std::size_t p = 0; p < vars_; ++p) {
            const Profile profile = space_.profile_at(p);
            const Allocation t = ttc(profile);
            for (std::size_t x = 0; x < allocations_.size(); ++x) {
                const Allocation& alloc = allocations_[x];
                if (!is_ir(profile, alloc)) {
                    continue;
                }
                const bool efficient = efficiency == Efficiency::Pair ? is_pair_efficient(profile, alloc)
                                                                      : is_pareto(profile, alloc);
                if (!efficient) {
                    continue;
                }
                if (alloc == t) {
                    ttc_value_[p] = static_cast<std::uint16_t>(cand_[p].size());
                }
                cand_[p].push_back(static_cast<std::uint16_t>(x));
            }
            widest = std::max(widest, cand_[p].size());
        }
        words_ = (widest + 63) / 64;
        bits_.assign(vars_ * words_, 0);
        size_.assign(vars_, 0);
        for (std::size_t p = 0; p < vars_; ++p) {
            for (std::size_t v = 0; v < cand_[p].size(); ++v) {
                bits_[p * words_ + v / 64] |= std::uint64_t{1} << (v % 64);
            }
            size_[p] = static_cast<std::uint32_t>(cand_[p].size());
        }
        in_queue_.assign(vars_, 0);
    }

    ObjectId object_of(std::size_t var, std::size_t value, std::size_t agent) const {
        return allocations_[cand_[var][value]][agent];
    }

    bool has(std::size_t var, std::size_t value) const {
        return (bits_[var * words_ + value / 64] >> (value % 64)) & 1U;
    }

    void set_word(std::size_t var, std::size_t w, std::uint64_t bits) {
        std::uint64_t& slot = bits_[var * words_ + w];
        trail_.push_back({static_cast<std::uint32_t>(var), static_cast<std::uint32_t>(w), slot});
        size_[var] -= static_cast<std::uint32_t>(std::popcount(slot & ~bits));
        size_[var] += static_cast<std::uint32_t>(std::popcount(bits & ~slot));
        slot = bits;
    }

    void remove_value(std::size_t var, std::size_t value) {
        const std::size_t w = value / 64;
        set_word(var, w, bits_[var * words_ + w] & ~(std::uint64_t{1} << (value % 64)));
    }

    void assign(std::size_t var, std::size_t value) {
        for (std::size_t w = 0; w < words_; ++w) {
            const std::uint64_t keep = w == value / 64 ? (std::uint64_t{1} << (value % 64)) : 0;
            if (bits_[var * words_ + w] != keep) {
                set_word(var, w, keep);
            }
        }
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            const TrailEntry e = trail_.back();
            trail_.pop_back();
            std::uint64_t& slot = bits_[e.var * words_ + e.word];
            size_[e.var] += static_cast<std::uint32_t>(std::popcount(e.old_bits & ~slot));
            size_[e.var] -= static_cast<std::uint32_t>(std::popcount(slot & ~e.old_bits));
            slot = e.old_bits;
        }
    }

    /// Objects agent `agent` can still receive at `var`.
    std::uint32_t reachable_objects(std::size_t var, std::size_t agent) const {
        std::uint32_t out = 0;
        for (std::size_t w = 0; w < words_; ++w) {
            for (std::uint64_t m = bits_[var * words_ + w]; m != 0; m &= m - 1) {
                const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(m));
                out |= bit_of(object_of(var, v, agent));
            }
        }
        return out;
    }

    /// Remove values of `p` without support at neighbour `q` (which differs
    /// from p only in `agent`'s report). Returns false on wipe-out.
    bool revise(std::size_t p, std::size_t q, std::size_t agent, bool& changed) {
        ++stats_->revisions;
        const std::uint32_t support = reachable_objects(q, agent);
        const std::size_t kp = space_.choice(p, agent);
        const std::size_t kq = space_.choice(q, agent);
        const std::uint32_t* below_p = &below_[agent][kp * n_];
        const std::uint32_t* above_q = &above_[agent][kq * n_];
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t bits = bits_[p * words_ + w];
            const std::uint64_t before = bits;
            for (std::uint64_t m = before; m != 0; m &= m - 1) {
                const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(m));
                const std::size_t o = static_cast<std::size_t>(object_of(p, v, agent).index - 1);
                if ((support & below_p[o] & above_q[o]) == 0) {
                    bits &= ~(std::uint64_t{1} << (v % 64));
                }
            }
            if (bits != before) {
                set_word(p, w, bits);
                changed = true;
            }
        }
        return size_[p] != 0;
    }

    void enqueue(std::size_t var) {
        if (!in_queue_[var]) {
            in_queue_[var] = 1;
            queue_.push_back(static_cast<std::uint32_t>(var));
        }
    }

    bool drain() {
        std::size_t head = 0;
        while (head < queue_.size()) {
            const std::size_t q = queue_[head++];
            in_queue_[q] = 0;
            for (std::size_t agent = 0; agent < n_; ++agent) {
                const std::size_t dsize = space_.domain_of(agent).size();
                const std::size_t own = space_.choice(q, agent);
                for (std::size_t k = 0; k < dsize; ++k) {
                    if (k == own) {
                        continue;
                    }
                    const std::size_t p = static_cast<std::size_t>(space_.deviate(q, agent, k));
                    bool changed = false;
                    if (!revise(p, q, agent, changed)) {
                        for (std::size_t i = head; i < queue_.size(); ++i) {
                            in_queue_[queue_[i]] = 0;
                        }
                        queue_.clear();
                        return false;
                    }
                    if (changed) {
                        enqueue(p);
                    }
                }
            }
        }
        queue_.clear();
        return true;
    }

    bool propagate_all() {
        for (std::size_t p = 0; p < vars_; ++p) {
            enqueue(p);
        }
        return drain();
    }

    bool propagate_from(std::size_t var) {
        enqueue(var);
        return drain();
    }

    bool search() {
        if (++stats_->nodes_expanded > node_budget_) {
            throw BudgetExhausted{};
        }
        // most constrained open variable, lowest index on ties
        std::size_t best = vars_;
        for (std::size_t p = 0; p < vars_; ++p) {
            if (size_[p] > 1 && (best == vars_ || size_[p] < size_[best])) {
                best = p;
                if (size_[p] == 2) {
                    break;
                }
            }
        }
        if (best == vars_) {
            return true;
        }
        std::vector<std::size_t> order;
        if (has(best, ttc_value_[best])) {
            order.push_back(ttc_value_[best]);
        }
        for (std::size_t v = 0; v < cand_[best].size(); ++v) {
            if (v != ttc_value_[best] && has(best, v)) {
                order.push_back(v);
            }
        }
        for (std::size_t v : order) {
            const std::size_t mark = trail_.size();
            assign(best, v);
            if (propagate_from(best) && search()) {
                return true;
            }
            undo(mark);
        }
        return false;
    }

    std::vector<std::uint16_t> assignment() const {
        std::vector<std::uint16_t> out(vars_);
        for (std::size_t p = 0; p < vars_; ++p) {
            for (std::size_t v = 0; v < cand_[p].size(); ++v) {
                if (has(p, v)) {
                    out[p] = cand_[p][v];
                    break;
                }
            }
        }
        return out;
    }

    const ProfileSpace& space_;
    std::size_t n_;
    std::uint64_t node_budget_;
    std::vector<Allocation> allocations_;
    std::vector<std::vector<std::uint32_t>> below_;
    std::vector<std::vector<std::uint32_t>> above_;
    std::size_t vars_ = 0;
    std::size_t words_ = 1;
    std::vector<std::vector<std::uint16_t>> cand_;
    std::vector<std::uint16_t> ttc_value_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint32_t> size_;
    std::vector<TrailEntry> trail_;
    std::vector<std::uint32_t> queue_;
    std::vector<char> in_queue_;
    SearchStats* stats_ = nullptr;
};

}  // namespace detail

/// Is TTC the unique IR + efficient + strategyproof mechanism on `space`?
inline Classification classify(const ProfileSpace& space, Efficiency efficiency, ClassifyOptions options = {}) {
    const auto start = std::chrono::steady_clock::now();
    Classification out;
    out.stats.profiles = space.size();
    auto finish = [&]() {
        out.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return out;
    };
    if (space.n() > kMaxVerifierObjects) {
        out.status = Status::BudgetExceeded;
        out.note = "n exceeds " + std::to_string(kMaxVerifierObjects);
        return finish();
    }
    if (space.size() > options.profile_cap) {
        out.status = Status::BudgetExceeded;
        out.note = std::to_string(space.size()) + " profiles exceed the cap of " + std::to_string(options.profile_cap);
        return finish();
    }
    detail::SpCsp csp(space, efficiency, options.node_budget);
    std::optional<std::vector<std::uint16_t>> solution;
    try {
        solution = csp.find_non_ttc(out.stats);
    } catch (const detail::SpCsp::BudgetExhausted&) {
        out.status = Status::BudgetExceeded;
        out.note = "node budget of " + std::to_string(options.node_budget) + " exhausted";
        return finish();
    }
    if (!solution) {
        out.status = Status::UniqueTTC;
        return finish();
    }
    std::map<Profile, Allocation> table;
    for (std::uint64_t idx = 0; idx < space.size(); ++idx) {
        table.emplace(space.profile_at(idx), csp.allocations()[(*solution)[static_cast<std::size_t>(idx)]]);
    }
    out.status = Status::Multiple;
    out.witness = table_mechanism(std::move(table));
    return finish();
}

inline Classification classify(const Domain& domain, Efficiency efficiency, ClassifyOptions options = {}) {
    return classify(ProfileSpace::common(domain), efficiency, options);
}

inline Classification classify(const std::vector<Domain>& per_agent, Efficiency efficiency,
                               ClassifyOptions options = {}) {
    return classify(ProfileSpace(per_agent), efficiency, options);
}

// ---------------------------------------------------------------------------
// Equivalence sweeps
// ---------------------------------------------------------------------------

struct NamedDomain {
    std::string name;
    Domain domain;
};

struct CorollaryRow {
    std::string name;
    Domain domain;
    bool top_two = false;
    Status pair = Status::UniqueTTC;
    Status pareto = Status::UniqueTTC;
    bool inconclusive = false;
    /// top-two <=> unique under pair <=> unique under Pareto (when conclusive).
    bool consistent = true;
};

struct CorollaryReport {
    std::vector<CorollaryRow> rows;

    bool all_consistent() const {
        return std::all_of(rows.begin(), rows.end(), [](const CorollaryRow& r) { return r.consistent; });
    }
    std::size_t inconclusive() const {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const CorollaryRow& r) { return r.inconclusive; }));
    }
};

/// Every nonempty subset of the unrestricted domain over n objects, ordered
/// by bitmask over the lexicographic permutation list.
inline std::vector<NamedDomain> all_domains(int n) {
    const Domain full = unrestricted(n);
    if (full.size() > 20) {
        throw BudgetError("exhaustive domain sweep limited to n <= 3");
    }
    std::vector<NamedDomain> out;
    const std::uint32_t limit = std::uint32_t{1} << full.size();
    for (std::uint32_t m = 1; m < limit; ++m) {
        std::vector<Preference> prefs;
        for (std::size_t i = 0; i < full.size(); ++i) {
            if ((m >> i) & 1U) {
                prefs.push_back(full[i]);
            }
        }
        Domain d(std::move(prefs));
        out.push_back(NamedDomain{"{" + emit_domain(d) + "}", std::move(d)});
    }
    return out;
}

inline CorollaryRow evaluate_row(const NamedDomain& nd, ClassifyOptions options) {
    CorollaryRow row{nd.name, nd.domain};
    row.top_two = check_top_two(nd.domain).satisfied;
    row.pair = classify(nd.domain, Efficiency::Pair, options).status;
    row.pareto = classify(nd.domain, Efficiency::Pareto, options).status;
    row.inconclusive = row.pair == Status::BudgetExceeded || row.pareto == Status::BudgetExceeded;
    if (!row.inconclusive) {
        const bool pair_unique = row.pair == Status::UniqueTTC;
        const bool pareto_unique = row.pareto == Status::UniqueTTC;
        row.consistent = row.top_two == pair_unique && pair_unique == pareto_unique;
    }
    return row;
}

/// Check top-two <=> unique(pair) <=> unique(Pareto) on each domain. Domains
/// are spread over `jobs` threads; rows come back in input order.
inline CorollaryReport verify_equivalence(const std::vector<NamedDomain>& domains, ClassifyOptions options = {},
                                          unsigned jobs = 1) {
    CorollaryReport report;
    report.rows.resize(domains.size(), CorollaryRow{"", domains.empty() ? Domain({Preference::of({1})}) : domains[0].domain});
    jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, domains.size()))));
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w]() {
            for (std::size_t i = w; i < domains.size(); i += jobs) {
                report.rows[i] = evaluate_row(domains[i], options);
            }
        });
    }
    for (std::thread& t : workers) {
        t.join();
    }
    return report;
}

/// Random acyclic dominance relations over n objects whose partial agreement
/// domains have between 2 and `max_domain_size` members; distinct domains only.
/// Uses raw mt19937 output so the sample is identical on every platform.
inline std::vector<PartialOrderSpec> sample_partial_orders(int n, std::size_t count, std::uint32_t seed,
                                                           std::size_t max_domain_size) {
    std::mt19937 rng(seed);
    std::vector<PartialOrderSpec> out;
    std::vector<Domain> seen;
    for (std::size_t attempt = 0; out.size() < count && attempt < 100'000; ++attempt) {
        std::vector<int> topo(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            topo[static_cast<std::size_t>(i)] = i + 1;
        }
        for (int i = n - 1; i > 0; --i) {
            std::swap(topo[static_cast<std::size_t>(i)], topo[rng() % static_cast<std::uint32_t>(i + 1)]);
        }
        std::vector<std::pair<ObjectId, ObjectId>> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng() & 1U) {
                    edges.emplace_back(ObjectId{topo[static_cast<std::size_t>(i)]}, ObjectId{topo[static_cast<std::size_t>(j)]});
                }
            }
        }
        PartialOrderSpec spec(n, std::move(edges));
        Domain d = partial_agreement(spec);
        if (d.size() < 2 || d.size() > max_domain_size || std::find(seen.begin(), seen.end(), d) != seen.end()) {
            continue;
        }
        seen.push_back(std::move(d));
        out.push_back(std::move(spec));
    }
    return out;
}

inline constexpr std::uint32_t kCatalogSeed = 20240601;

/// The n = 4 whitelist: the named catalog domains, 20 sampled partial
/// agreement domains small enough for the default profile cap, and D3.
inline std::vector<NamedDomain> catalog_whitelist_n4() {
    std::vector<NamedDomain> out;
    out.push_back({"single_dipped(4)", single_dipped(4)});
    for (int p = 1; p <= 3; ++p) {
        out.push_back({"single_peaked_two_adjacent(4," + std::to_string(p) + ")", single_peaked_two_adjacent(4, p)});
    }
    std::size_t k = 0;
    for (const PartialOrderSpec& spec : sample_partial_orders(4, 20, kCatalogSeed, 10)) {
        std::string edges;
        for (auto [a, b] : spec.edges()) {
            edges += (edges.empty() ? "" : ",") + std::to_string(a.index) + ">" + std::to_string(b.index);
        }
        out.push_back({"partial_agreement(4)#" + std::to_string(k++) + "[" + edges + "]", partial_agreement(spec)});
    }
    out.push_back({"single_peaked(4)", single_peaked(4)});
    out.push_back({"circular(4)", circular(4)});
    out.push_back({"D3", Domain({Preference::of({1, 2, 3, 4}), Preference::of({1, 3, 2, 4}),
                                 Preference::of({2, 1, 4, 3}), Preference::of({2, 4, 3, 1})})});
    return out;
}

/// n = 3: all 63 nonempty domains. n = 4: the catalog whitelist.
inline CorollaryReport verify_corollary(int n = 3, ClassifyOptions options = {}, unsigned jobs = 1) {
    if (n == 3) {
        return verify_equivalence(all_domains(3), options, jobs);
    }
    if (n == 4) {
        return verify_equivalence(catalog_whitelist_n4(), options, jobs);
    }
    throw PreconditionError("corollary sweep is defined for n = 3 (exhaustive) and n = 4 (whitelist)");
}

}  // namespace ttc_lab
