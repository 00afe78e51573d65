// Preferences, domains, profiles and allocations for the object reallocation
// problem. Agent i is always endowed with object o_i.
#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ttc_lab {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid object ids, mismatched sizes, malformed domains.
class DomainError : public Error {
public:
    using Error::Error;
};

class RankOutOfBounds : public Error {
public:
    using Error::Error;
};

class RestrictionError : public Error {
public:
    using Error::Error;
};

/// Text that is not a valid preference; `position()` is the 0-based offset
/// of the offending character or token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class BudgetError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Upper bound on n imposed by the bitmask representation of object sets.
inline constexpr int kMaxObjects = 32;

/// Object o_index, 1-based.
struct ObjectId {
    int index = 0;
    friend constexpr auto operator<=>(ObjectId, ObjectId) = default;
};

/// Agent index, 1-based. Agent i owns object o_i.
struct AgentId {
    int index = 0;
    friend constexpr auto operator<=>(AgentId, AgentId) = default;
};

constexpr ObjectId endowment_of(AgentId a) { return ObjectId{a.index}; }
constexpr AgentId owner_of(ObjectId o) { return AgentId{o.index}; }
constexpr std::uint32_t bit_of(ObjectId o) { return std::uint32_t{1} << (o.index - 1); }

// ---------------------------------------------------------------------------
// SubsetO
// ---------------------------------------------------------------------------

/// A set of objects stored as a bitmask (bit k-1 is object o_k).
class SubsetO {
public:
    SubsetO() = default;

    SubsetO(std::initializer_list<ObjectId> members) {
        for (ObjectId o : members) {
            insert_checked(o);
        }
    }

    explicit SubsetO(std::span<const ObjectId> members) {
        for (ObjectId o : members) {
            insert_checked(o);
        }
    }

    static SubsetO full(int n) {
        if (n < 1 || n > kMaxObjects) {
            throw DomainError("object count " + std::to_string(n) + " out of range");
        }
        SubsetO s;
        s.mask_ = n == 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << n) - 1);
        return s;
    }

    static SubsetO from_mask(std::uint32_t mask) {
        SubsetO s;
        s.mask_ = mask;
        return s;
    }

    std::uint32_t mask() const noexcept { return mask_; }
    bool empty() const noexcept { return mask_ == 0; }
    int size() const noexcept { return std::popcount(mask_); }
    bool contains(ObjectId o) const noexcept {
        return o.index >= 1 && o.index <= kMaxObjects && (mask_ & bit_of(o)) != 0;
    }

    /// Largest object index present, 0 if empty.
    int max_index() const noexcept { return mask_ == 0 ? 0 : 32 - std::countl_zero(mask_); }

    std::vector<ObjectId> members() const {
        std::vector<ObjectId> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (std::uint32_t m = mask_; m != 0; m &= m - 1) {
            out.push_back(ObjectId{std::countr_zero(m) + 1});
        }
        return out;
    }

    SubsetO with(ObjectId o) const {
        SubsetO s = *this;
        s.insert_checked(o);
        return s;
    }

    SubsetO without(ObjectId o) const {
        SubsetO s = *this;
        if (contains(o)) {
            s.mask_ &= ~bit_of(o);
        }
        return s;
    }

    bool is_subset_of(SubsetO other) const noexcept { return (mask_ & ~other.mask_) == 0; }

    friend bool operator==(SubsetO, SubsetO) = default;

    /// Size first, then lexicographic on the sorted member sequence.
    friend bool size_then_lex_less(SubsetO a, SubsetO b) {
        if (a.size() != b.size()) {
            return a.size() < b.size();
        }
        return a.members() < b.members();
    }

private:
    void insert_checked(ObjectId o) {
        if (o.index < 1 || o.index > kMaxObjects) {
            throw DomainError("object id o" + std::to_string(o.index) + " out of range");
        }
        mask_ |= bit_of(o);
    }

    std::uint32_t mask_ = 0;
};

// ---------------------------------------------------------------------------
// Preference
// ---------------------------------------------------------------------------

/// A strict linear order over o_1..o_n, most preferred first.
class Preference {
public:
    Preference() = default;

    explicit Preference(std::vector<ObjectId> order) : order_(std::move(order)) {
        const int n = static_cast<int>(order_.size());
        if (n < 1 || n > kMaxObjects) {
            throw DomainError("preference length " + std::to_string(n) + " out of range");
        }
        position_.assign(static_cast<std::size_t>(n), -1);
        for (int pos = 0; pos < n; ++pos) {
            const int idx = order_[static_cast<std::size_t>(pos)].index;
            if (idx < 1 || idx > n) {
                throw DomainError("object o" + std::to_string(idx) + " not in 1.." + std::to_string(n));
            }
            if (position_[static_cast<std::size_t>(idx - 1)] != -1) {
                throw DomainError("object o" + std::to_string(idx) + " listed twice");
            }
            position_[static_cast<std::size_t>(idx - 1)] = pos;
        }
    }

    /// Convenience: Preference::of({2, 3, 1}) is o2 > o3 > o1.
    static Preference of(std::initializer_list<int> indices) {
        std::vector<ObjectId> order;
        order.reserve(indices.size());
        for (int i : indices) {
            order.push_back(ObjectId{i});
        }
        return Preference(std::move(order));
    }

    int size() const noexcept { return static_cast<int>(order_.size()); }
    std::span<const ObjectId> order() const noexcept { return order_; }
    ObjectId top() const { return order_.front(); }
    ObjectId at(int pos) const { return order_[static_cast<std::size_t>(pos)]; }

    /// 0-based position of `o` (0 = most preferred).
    int position(ObjectId o) const { return position_[static_cast<std::size_t>(o.index - 1)]; }

    bool prefers(ObjectId a, ObjectId b) const { return position(a) < position(b); }
    bool weakly_prefers(ObjectId a, ObjectId b) const { return position(a) <= position(b); }

    /// Most preferred object among `mask`; mask must intersect 1..n.
    ObjectId top_within(std::uint32_t mask) const {
        for (ObjectId o : order_) {
            if ((mask & bit_of(o)) != 0) {
                return o;
            }
        }
        return ObjectId{0};
    }

    friend bool operator==(const Preference& a, const Preference& b) { return a.order_ == b.order_; }
    friend auto operator<=>(const Preference& a, const Preference& b) { return a.order_ <=> b.order_; }

private:
    std::vector<ObjectId> order_;
    std::vector<int> position_;
};

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

/// Nonempty, duplicate-free, insertion-ordered set of preferences over the
/// same n objects.
class Domain {
public:
    explicit Domain(std::vector<Preference> prefs) : prefs_(std::move(prefs)) {
        if (prefs_.empty()) {
            throw DomainError("domain must be nonempty");
        }
        n_ = prefs_.front().size();
        for (std::size_t i = 0; i < prefs_.size(); ++i) {
            if (prefs_[i].size() != n_) {
                throw DomainError("domain mixes preferences over different object counts");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (prefs_[j] == prefs_[i]) {
                    throw DomainError("domain contains a duplicate preference");
                }
            }
        }
    }

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return prefs_.size(); }
    std::span<const Preference> prefs() const noexcept { return prefs_; }
    const Preference& operator[](std::size_t i) const { return prefs_[i]; }
    auto begin() const noexcept { return prefs_.begin(); }
    auto end() const noexcept { return prefs_.end(); }

    std::optional<std::size_t> index_of(const Preference& p) const {
        for (std::size_t i = 0; i < prefs_.size(); ++i) {
            if (prefs_[i] == p) {
                return i;
            }
        }
        return std::nullopt;
    }
    bool contains(const Preference& p) const { return index_of(p).has_value(); }

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    int n_ = 0;
    std::vector<Preference> prefs_;
};

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

/// One reported preference per agent; entry i-1 belongs to agent i.
class Profile {
public:
    Profile() = default;

    explicit Profile(std::vector<Preference> prefs) : prefs_(std::move(prefs)) {
        const int n = static_cast<int>(prefs_.size());
        if (n < 1 || n > kMaxObjects) {
            throw DomainError("profile length " + std::to_string(n) + " out of range");
        }
        for (const Preference& p : prefs_) {
            if (p.size() != n) {
                throw DomainError("profile of " + std::to_string(n) + " agents holds a preference over " +
                                  std::to_string(p.size()) + " objects");
            }
        }
    }

    int n() const noexcept { return static_cast<int>(prefs_.size()); }
    const Preference& operator[](std::size_t i) const { return prefs_[i]; }
    const Preference& of(AgentId a) const { return prefs_[static_cast<std::size_t>(a.index - 1)]; }
    std::span<const Preference> prefs() const noexcept { return prefs_; }

    /// The profile (p, P_{-agent}).
    Profile with(AgentId agent, Preference p) const {
        Profile out = *this;
        if (p.size() != n()) {
            throw DomainError("replacement preference has the wrong object count");
        }
        out.prefs_[static_cast<std::size_t>(agent.index - 1)] = std::move(p);
        return out;
    }

    friend bool operator==(const Profile&, const Profile&) = default;
    friend auto operator<=>(const Profile& a, const Profile& b) { return a.prefs_ <=> b.prefs_; }

private:
    std::vector<Preference> prefs_;
};

// ---------------------------------------------------------------------------
// Allocation
// ---------------------------------------------------------------------------

/// A bijection agents -> objects; entry i-1 is agent i's assignment.
class Allocation {
public:
    Allocation() = default;

    explicit Allocation(std::vector<ObjectId> assign) : assign_(std::move(assign)) {
        const int n = static_cast<int>(assign_.size());
        if (n < 1 || n > kMaxObjects) {
            throw DomainError("allocation length " + std::to_string(n) + " out of range");
        }
        std::uint32_t seen = 0;
        for (ObjectId o : assign_) {
            if (o.index < 1 || o.index > n || (seen & bit_of(o)) != 0) {
                throw DomainError("allocation is not a bijection");
            }
            seen |= bit_of(o);
        }
    }

    static Allocation of(std::initializer_list<int> indices) {
        std::vector<ObjectId> v;
        for (int i : indices) {
            v.push_back(ObjectId{i});
        }
        return Allocation(std::move(v));
    }

    static Allocation endowment(int n) {
        std::vector<ObjectId> v;
        for (int i = 1; i <= n; ++i) {
            v.push_back(ObjectId{i});
        }
        return Allocation(std::move(v));
    }

    int n() const noexcept { return static_cast<int>(assign_.size()); }
    ObjectId operator[](std::size_t i) const { return assign_[i]; }
    ObjectId of(AgentId a) const { return assign_[static_cast<std::size_t>(a.index - 1)]; }
    std::span<const ObjectId> assignment() const noexcept { return assign_; }

    friend bool operator==(const Allocation&, const Allocation&) = default;
    friend auto operator<=>(const Allocation& a, const Allocation& b) { return a.assign_ <=> b.assign_; }

private:
    std::vector<ObjectId> assign_;
};

// ---------------------------------------------------------------------------
// Rank queries
// ---------------------------------------------------------------------------

namespace detail {

inline void check_subset_for(int n, SubsetO subset) {
    if (subset.empty()) {
        throw DomainError("object subset is empty");
    }
    if (subset.max_index() > n) {
        throw DomainError("object subset contains o" + std::to_string(subset.max_index()) + " but n = " +
                          std::to_string(n));
    }
}

/// k-th (1-based) object of `pref` among `mask`, no validation.
inline ObjectId rank_unchecked(const Preference& pref, std::uint32_t mask, int k) {
    for (ObjectId o : pref.order()) {
        if ((mask & bit_of(o)) != 0 && --k == 0) {
            return o;
        }
    }
    return ObjectId{0};
}

}  // namespace detail

/// The object ranked k-th by `pref` once objects outside `subset` are deleted.
inline ObjectId rank(const Preference& pref, SubsetO subset, int k) {
    detail::check_subset_for(pref.size(), subset);
    if (k < 1 || k > subset.size()) {
        throw RankOutOfBounds("rank " + std::to_string(k) + " outside 1.." + std::to_string(subset.size()));
    }
    return detail::rank_unchecked(pref, subset.mask(), k);
}

/// Every object some member of `domain` ranks k-th within `subset`.
inline SubsetO top_set(const Domain& domain, SubsetO subset, int k) {
    detail::check_subset_for(domain.n(), subset);
    if (k < 1 || k > subset.size()) {
        throw RankOutOfBounds("rank " + std::to_string(k) + " outside 1.." + std::to_string(subset.size()));
    }
    std::uint32_t out = 0;
    for (const Preference& p : domain) {
        out |= bit_of(detail::rank_unchecked(p, subset.mask(), k));
    }
    return SubsetO::from_mask(out);
}

/// `pref` with objects outside `subset` deleted, relabelled so the j-th
/// smallest member of `subset` becomes object j.
inline Preference restrict_preference(const Preference& pref, SubsetO subset) {
    detail::check_subset_for(pref.size(), subset);
    std::vector<int> local(static_cast<std::size_t>(pref.size()) + 1, 0);
    int next = 1;
    for (ObjectId o : subset.members()) {
        local[static_cast<std::size_t>(o.index)] = next++;
    }
    std::vector<ObjectId> order;
    order.reserve(static_cast<std::size_t>(subset.size()));
    for (ObjectId o : pref.order()) {
        if (subset.contains(o)) {
            order.push_back(ObjectId{local[static_cast<std::size_t>(o.index)]});
        }
    }
    return Preference(std::move(order));
}

/// Restriction of every member of `domain` to `subset` (local labels),
/// duplicates dropped, first occurrence order kept.
inline Domain restrict_domain(const Domain& domain, SubsetO subset) {
    std::vector<Preference> out;
    for (const Preference& p : domain) {
        Preference r = restrict_preference(p, subset);
        if (std::find(out.begin(), out.end(), r) == out.end()) {
            out.push_back(std::move(r));
        }
    }
    return Domain(std::move(out));
}

// ---------------------------------------------------------------------------
// Sub-economies
// ---------------------------------------------------------------------------

/// A set of agents together with their endowments. Local agent j (1-based,
/// in increasing original order) owns local object j, which is original
/// object `objects[j-1]`.
struct SubEconomy {
    std::vector<AgentId> agents;
    std::vector<ObjectId> objects;
    Profile profile;

    ObjectId original_object(ObjectId local) const { return objects[static_cast<std::size_t>(local.index - 1)]; }
    AgentId original_agent(AgentId local) const { return agents[static_cast<std::size_t>(local.index - 1)]; }
};

/// Restrict `profile` to `agents` and their endowments `objects`.
inline SubEconomy restrict(const Profile& profile, std::span<const AgentId> agents, SubsetO objects) {
    if (static_cast<int>(agents.size()) != objects.size()) {
        throw RestrictionError("restriction to " + std::to_string(agents.size()) + " agents and " +
                               std::to_string(objects.size()) + " objects");
    }
    detail::check_subset_for(profile.n(), objects);
    SubEconomy sub;
    sub.agents.assign(agents.begin(), agents.end());
    std::sort(sub.agents.begin(), sub.agents.end());
    if (std::adjacent_find(sub.agents.begin(), sub.agents.end()) != sub.agents.end()) {
        throw RestrictionError("agent listed twice in restriction");
    }
    for (AgentId a : sub.agents) {
        if (a.index < 1 || a.index > profile.n()) {
            throw RestrictionError("agent " + std::to_string(a.index) + " out of range");
        }
        if (!objects.contains(endowment_of(a))) {
            throw RestrictionError("endowment of agent " + std::to_string(a.index) + " is not retained");
        }
    }
    sub.objects = objects.members();
    std::vector<Preference> prefs;
    prefs.reserve(sub.agents.size());
    for (AgentId a : sub.agents) {
        prefs.push_back(restrict_preference(profile.of(a), objects));
    }
    sub.profile = Profile(std::move(prefs));
    return sub;
}

inline SubEconomy restrict(const Profile& profile, std::initializer_list<AgentId> agents, SubsetO objects) {
    return restrict(profile, std::span<const AgentId>(agents.begin(), agents.size()), objects);
}

/// Owners of the objects in `objects`, ascending.
inline std::vector<AgentId> owners(SubsetO objects) {
    std::vector<AgentId> out;
    for (ObjectId o : objects.members()) {
        out.push_back(owner_of(o));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Profile spaces
// ---------------------------------------------------------------------------

/// The Cartesian product of per-agent domains, indexed in lexicographic order
/// of per-agent preference indices (agent 1 most significant).
class ProfileSpace {
public:
    explicit ProfileSpace(std::vector<Domain> per_agent) : domains_(std::move(per_agent)) {
        if (domains_.empty()) {
            throw DomainError("profile space needs at least one agent");
        }
        const int n = static_cast<int>(domains_.size());
        for (const Domain& d : domains_) {
            if (d.n() != n) {
                throw DomainError("agent domain over " + std::to_string(d.n()) + " objects in a " +
                                  std::to_string(n) + "-agent economy");
            }
        }
        strides_.assign(domains_.size(), 1);
        std::uint64_t total = 1;
        for (std::size_t i = domains_.size(); i-- > 0;) {
            strides_[i] = total;
            const std::uint64_t s = domains_[i].size();
            if (total > std::numeric_limits<std::uint64_t>::max() / s) {
                throw DomainError("profile space too large to index");
            }
            total *= s;
        }
        size_ = total;
    }

    static ProfileSpace common(const Domain& d) {
        return ProfileSpace(std::vector<Domain>(static_cast<std::size_t>(d.n()), d));
    }

    int n() const noexcept { return static_cast<int>(domains_.size()); }
    std::uint64_t size() const noexcept { return size_; }
    const Domain& domain_of(std::size_t agent0) const { return domains_[agent0]; }
    std::span<const Domain> domains() const noexcept { return domains_; }
    std::uint64_t stride(std::size_t agent0) const { return strides_[agent0]; }

    bool is_common() const {
        return std::all_of(domains_.begin(), domains_.end(), [&](const Domain& d) { return d == domains_[0]; });
    }

    /// Index of agent `agent0`'s preference within its domain at profile `idx`.
    std::size_t choice(std::uint64_t idx, std::size_t agent0) const {
        return static_cast<std::size_t>((idx / strides_[agent0]) % domains_[agent0].size());
    }

    std::vector<std::size_t> choices_at(std::uint64_t idx) const {
        std::vector<std::size_t> out(domains_.size());
        for (std::size_t i = 0; i < domains_.size(); ++i) {
            out[i] = choice(idx, i);
        }
        return out;
    }

    Profile profile_at(std::uint64_t idx) const {
        std::vector<Preference> prefs;
        prefs.reserve(domains_.size());
        for (std::size_t i = 0; i < domains_.size(); ++i) {
            prefs.push_back(domains_[i][choice(idx, i)]);
        }
        return Profile(std::move(prefs));
    }

    /// Index of the profile obtained from `idx` by switching agent `agent0` to
    /// preference `pref_index` of its domain.
    std::uint64_t deviate(std::uint64_t idx, std::size_t agent0, std::size_t pref_index) const {
        const std::uint64_t current = choice(idx, agent0);
        return idx - current * strides_[agent0] + pref_index * strides_[agent0];
    }

    std::optional<std::uint64_t> index_of(const Profile& p) const {
        if (p.n() != n()) {
            return std::nullopt;
        }
        std::uint64_t idx = 0;
        for (std::size_t i = 0; i < domains_.size(); ++i) {
            auto c = domains_[i].index_of(p[i]);
            if (!c) {
                return std::nullopt;
            }
            idx += *c * strides_[i];
        }
        return idx;
    }

private:
    std::vector<Domain> domains_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t size_ = 0;
};

/// Every profile of the product of `domains`, in lexicographic index order.
inline std::vector<Profile> enumerate_profiles(const std::vector<Domain>& domains) {
    ProfileSpace space(domains);
    std::vector<Profile> out;
    out.reserve(static_cast<std::size_t>(space.size()));
    for (std::uint64_t i = 0; i < space.size(); ++i) {
        out.push_back(space.profile_at(i));
    }
    return out;
}

/// All n! allocations in lexicographic order.
inline std::vector<Allocation> all_allocations(int n) {
    if (n < 1 || n > 9) {
        throw BudgetError("allocation enumeration limited to 1 <= n <= 9");
    }
    std::vector<ObjectId> v;
    for (int i = 1; i <= n; ++i) {
        v.push_back(ObjectId{i});
    }
    std::vector<Allocation> out;
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

}  // namespace ttc_lab
