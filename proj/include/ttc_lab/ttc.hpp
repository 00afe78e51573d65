// Top Trading Cycles. Every remaining agent points to the owner of its most
// preferred remaining object; all cycles of that functional graph trade at
// once; repeat until nobody is left.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ttc_lab/core.hpp"

namespace ttc_lab {

struct TtcRound {
    std::vector<AgentId> remaining_agents;
    /// Each cycle starts at its smallest agent and follows the pointers;
    /// cycles are ordered by that smallest agent.
    std::vector<std::vector<AgentId>> cycles;
};

struct TtcTrace {
    std::vector<TtcRound> rounds;
    Allocation result;
};

namespace detail {

/// One round: pointer[i] for every remaining agent, then every cycle of the
/// functional graph, discovered by successor walking with visit stamps.
/// Indices are 0-based.
inline std::vector<std::vector<int>> ttc_round_cycles(const Profile& profile, std::uint32_t remaining_mask,
                                                     std::vector<int>& pointer) {
    const int n = profile.n();
    for (int i = 0; i < n; ++i) {
        if ((remaining_mask >> i) & 1U) {
            pointer[static_cast<std::size_t>(i)] = profile[static_cast<std::size_t>(i)].top_within(remaining_mask).index - 1;
        }
    }
    std::vector<int> stamp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> cycles;
    for (int start = 0; start < n; ++start) {
        if (((remaining_mask >> start) & 1U) == 0 || stamp[static_cast<std::size_t>(start)] != -1) {
            continue;
        }
        int v = start;
        while (stamp[static_cast<std::size_t>(v)] == -1) {
            stamp[static_cast<std::size_t>(v)] = start;
            v = pointer[static_cast<std::size_t>(v)];
        }
        if (stamp[static_cast<std::size_t>(v)] != start) {
            continue;  // ran into a path explored from an earlier start
        }
        std::vector<int> cycle;
        int u = v;
        do {
            cycle.push_back(u);
            u = pointer[static_cast<std::size_t>(u)];
        } while (u != v);
        std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
        cycles.push_back(std::move(cycle));
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

}  // namespace detail

inline TtcTrace ttc_trace(const Profile& profile) {
    const int n = profile.n();
    std::uint32_t remaining = SubsetO::full(n).mask();
    std::vector<int> pointer(static_cast<std::size_t>(n), -1);
    std::vector<ObjectId> assign(static_cast<std::size_t>(n));
    TtcTrace trace;
    while (remaining != 0) {
        TtcRound round;
        for (int i = 0; i < n; ++i) {
            if ((remaining >> i) & 1U) {
                round.remaining_agents.push_back(AgentId{i + 1});
            }
        }
        for (const auto& cycle : detail::ttc_round_cycles(profile, remaining, pointer)) {
            std::vector<AgentId> agents;
            for (int i : cycle) {
                agents.push_back(AgentId{i + 1});
                assign[static_cast<std::size_t>(i)] = ObjectId{pointer[static_cast<std::size_t>(i)] + 1};
            }
            round.cycles.push_back(std::move(agents));
        }
        for (const auto& cycle : round.cycles) {
            for (AgentId a : cycle) {
                remaining &= ~bit_of(endowment_of(a));
            }
        }
        trace.rounds.push_back(std::move(round));
    }
    trace.result = Allocation(std::move(assign));
    return trace;
}

/// TTC(P). Same algorithm as ttc_trace without recording rounds.
inline Allocation ttc(const Profile& profile) {
    const int n = profile.n();
    std::uint32_t remaining = SubsetO::full(n).mask();
    std::vector<int> pointer(static_cast<std::size_t>(n), -1);
    std::vector<ObjectId> assign(static_cast<std::size_t>(n));
    while (remaining != 0) {
        for (const auto& cycle : detail::ttc_round_cycles(profile, remaining, pointer)) {
            for (int i : cycle) {
                assign[static_cast<std::size_t>(i)] = ObjectId{pointer[static_cast<std::size_t>(i)] + 1};
                remaining &= ~(std::uint32_t{1} << i);
            }
        }
    }
    return Allocation(std::move(assign));
}

/// Re-run the trace's cycles against the original endowments.
inline Allocation replay(const TtcTrace& trace, int n) {
    std::vector<ObjectId> assign(static_cast<std::size_t>(n));
    for (const TtcRound& round : trace.rounds) {
        for (const auto& cycle : round.cycles) {
            for (std::size_t k = 0; k < cycle.size(); ++k) {
                const AgentId next = cycle[(k + 1) % cycle.size()];
                assign[static_cast<std::size_t>(cycle[k].index - 1)] = endowment_of(next);
            }
        }
    }
    return Allocation(std::move(assign));
}

}  // namespace ttc_lab
