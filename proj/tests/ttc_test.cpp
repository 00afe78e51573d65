#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ttc_lab/domains.hpp"
#include "ttc_lab/serialize.hpp"
#include "ttc_lab/ttc.hpp"

using namespace ttc_lab;

namespace {

Profile prof(std::initializer_list<const char*> prefs) {
    std::vector<Preference> v;
    for (const char* p : prefs) v.push_back(parse_pref(p));
    return Profile(std::move(v));
}

}  // namespace

TEST(Ttc, AllSelfLoops) {
    const Profile p = prof({"123", "213", "312"});
    const TtcTrace t = ttc_trace(p);
    EXPECT_EQ(emit_allocation(t.result), "123");
    ASSERT_EQ(t.rounds.size(), 1U);
    EXPECT_EQ(t.rounds[0].cycles.size(), 3U);
}

TEST(Ttc, ThreeCycle) {
    const TtcTrace t = ttc_trace(prof({"231", "312", "123"}));
    EXPECT_EQ(emit_allocation(t.result), "231");
    ASSERT_EQ(t.rounds.size(), 1U);
    ASSERT_EQ(t.rounds[0].cycles.size(), 1U);
    EXPECT_EQ(t.rounds[0].cycles[0], (std::vector<AgentId>{AgentId{1}, AgentId{2}, AgentId{3}}));
}

TEST(Ttc, ThreeRounds) {
    const TtcTrace t = ttc_trace(prof({"213", "213", "123"}));
    EXPECT_EQ(emit_allocation(t.result), "123");
    ASSERT_EQ(t.rounds.size(), 3U);
    EXPECT_EQ(t.rounds[0].cycles[0], std::vector<AgentId>{AgentId{2}});
    EXPECT_EQ(t.rounds[1].cycles[0], std::vector<AgentId>{AgentId{1}});
    EXPECT_EQ(t.rounds[2].cycles[0], std::vector<AgentId>{AgentId{3}});
}

TEST(Ttc, TraceInvariants) {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 9);
        const Profile p = oracle::random_profile(n, rng);
        const TtcTrace t = ttc_trace(p);
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (const TtcRound& r : t.rounds) {
            for (const auto& c : r.cycles) {
                for (AgentId a : c) ++seen[static_cast<std::size_t>(a.index - 1)];
            }
        }
        for (int s : seen) EXPECT_EQ(s, 1);
        EXPECT_EQ(replay(t, n), t.result);
        EXPECT_EQ(ttc(p), t.result);
        EXPECT_EQ(ttc_trace(p).result, t.result);
    }
}

TEST(Ttc, CycleOrderDoesNotMatter) {
    std::mt19937 rng(47);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 7);
        const Profile p = oracle::random_profile(n, rng);
        const auto expected = oracle::as_vector(ttc(p));
        EXPECT_EQ(oracle::ttc_one_cycle_at_a_time(p, [](const auto&) { return std::size_t{0}; }), expected);
        EXPECT_EQ(oracle::ttc_one_cycle_at_a_time(p, [](const auto& cs) { return cs.size() - 1; }), expected);
    }
}

TEST(Ttc, UniqueCoreOracle) {
    for (int n = 1; n <= 3; ++n) {
        for (const Profile& p : enumerate_profiles(std::vector<Domain>(static_cast<std::size_t>(n), unrestricted(n)))) {
            const auto core = oracle::core_allocations(p);
            ASSERT_EQ(core.size(), 1U);
            EXPECT_EQ(core[0], oracle::as_vector(ttc(p)));
        }
    }
}
