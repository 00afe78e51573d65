#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ttc_lab/axioms.hpp"
#include "ttc_lab/domains.hpp"
#include "ttc_lab/mechanisms.hpp"
#include "ttc_lab/serialize.hpp"
#include "ttc_lab/ttc.hpp"

using namespace ttc_lab;

namespace {

Profile prof(std::initializer_list<const char*> prefs) {
    std::vector<Preference> v;
    for (const char* p : prefs) v.push_back(parse_pref(p));
    return Profile(std::move(v));
}

const std::vector<Domain> kHeteroFootnote{parse_domain("213"), parse_domain("321"), parse_domain("132")};

}  // namespace

TEST(IndividualRationality, Examples) {
    EXPECT_TRUE(is_ir(prof({"231", "312", "123"}), Allocation::endowment(3)));
    EXPECT_TRUE(is_ir(prof({"213", "213", "123"}), Allocation::of({2, 1, 3})) == false);
    EXPECT_FALSE(is_ir(prof({"123", "123", "123"}), Allocation::of({2, 1, 3})));
    EXPECT_EQ(ir_witness(prof({"123", "123", "123"}), Allocation::of({2, 1, 3})), AgentId{1});
    EXPECT_THROW(is_ir(prof({"12", "12"}), Allocation::of({1, 2, 3})), DomainError);
}

TEST(IndividualRationality, AgentTopsWhatItGets) {
    // agent 1 tops o2 and receives it; agent 2 receives o1 which ranks below o2
    const Profile p = prof({"213", "213", "123"});
    EXPECT_FALSE(ir_witness(p, Allocation::of({2, 1, 3})) == AgentId{1});
}

TEST(PairEfficiency, Examples) {
    const auto w = pair_witness(prof({"21", "12"}), Allocation::endowment(2));
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(*w, std::make_pair(AgentId{1}, AgentId{2}));
    EXPECT_TRUE(is_pair_efficient(prof({"1"}), Allocation::endowment(1)));
    std::mt19937 rng(53);
    for (int trial = 0; trial < 300; ++trial) {
        const Profile p = oracle::random_profile(1 + static_cast<int>(rng() % 6), rng);
        EXPECT_TRUE(is_pair_efficient(p, ttc(p)));
    }
}

TEST(Pareto, Examples) {
    const Profile cyc = prof({"231", "312", "123"});
    const auto y = pareto_improvement(cyc, Allocation::endowment(3));
    ASSERT_TRUE(y.has_value());
    EXPECT_TRUE(pareto_dominates(cyc, *y, Allocation::endowment(3)));
    EXPECT_TRUE(is_pareto(cyc, ttc(cyc)));
}

TEST(Pareto, ImpliesPairAndMatchesBruteForce) {
    std::mt19937 rng(59);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const Profile p = oracle::random_profile(n, rng);
        const Allocation x = oracle::random_allocation(n, rng);
        const bool pareto = is_pareto(p, x);
        if (pareto) {
            EXPECT_TRUE(is_pair_efficient(p, x));
        }
        ASSERT_EQ(pareto, !oracle::pareto_dominated(p, x));
        if (auto y = pareto_improvement(p, x)) {
            EXPECT_TRUE(pareto_dominates(p, *y, x));
        }
    }
}

TEST(Strategyproofness, TtcOnCatalog) {
    for (const Domain& d : {unrestricted(3), single_peaked(4), circular(4), single_dipped(4)}) {
        EXPECT_TRUE(is_strategyproof(ttc_mechanism(), ProfileSpace::common(d)));
    }
}

TEST(Strategyproofness, PerturbedTableIsCaught) {
    const ProfileSpace space = ProfileSpace::common(unrestricted(3));
    Mechanism table = tabulate(ttc_mechanism(), space);
    auto entries = std::get<TableRule>(table.rule()).entries;
    // at the 3-cycle profile hand agents 1 and 2 each other's TTC object
    const Profile target = prof({"231", "312", "123"});
    entries[target] = Allocation::of({3, 2, 1});
    const Mechanism bad = table_mechanism(entries);
    const auto v = strategyproofness_violation(bad, space);
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->kind, Axiom::SP);
    EXPECT_TRUE(replays(*v, bad));
}

TEST(Strategyproofness, MissingTableEntry) {
    const ProfileSpace space = ProfileSpace::common(unrestricted(2));
    const Mechanism partial = table_mechanism({{prof({"12", "12"}), Allocation::endowment(2)}});
    EXPECT_THROW(is_strategyproof(partial, space), EvaluationError);
}

TEST(GroupStrategyproofness, Examples) {
    EXPECT_TRUE(is_group_strategyproof(ttc_mechanism(), ProfileSpace::common(unrestricted(3))));
    EXPECT_TRUE(is_group_strategyproof(endowment_mechanism(), ProfileSpace(kHeteroFootnote)));
    EXPECT_TRUE(check_mechanism(endowment_mechanism(), ProfileSpace(kHeteroFootnote), {Axiom::IR, Axiom::Pair, Axiom::SP})
                    .clean());
    // the single profile admits a three-way trade, so endowments are not Pareto efficient
    EXPECT_FALSE(check_mechanism(endowment_mechanism(), ProfileSpace(kHeteroFootnote), {Axiom::Pareto}).clean());
    EXPECT_THROW(is_group_strategyproof(ttc_mechanism(), ProfileSpace::common(unrestricted(5))), BudgetError);
}

TEST(GroupStrategyproofness, ImpliesSpOnRandomTables) {
    std::mt19937 rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const Domain d = oracle::random_domain(3, 3, rng);
        const ProfileSpace space = ProfileSpace::common(d);
        std::map<Profile, Allocation> entries;
        for (std::uint64_t i = 0; i < space.size(); ++i) {
            const Profile p = space.profile_at(i);
            entries.emplace(p, rng() % 3 == 0 ? oracle::random_allocation(3, rng) : ttc(p));
        }
        const Mechanism m = table_mechanism(entries);
        const auto gsp = group_strategyproofness_violation(m, space);
        const auto sp = strategyproofness_violation(m, space);
        if (!gsp) {
            EXPECT_FALSE(sp.has_value());
        } else {
            EXPECT_TRUE(replays(*gsp, m));
        }
        if (sp) {
            EXPECT_TRUE(replays(*sp, m));
        }
    }
}

TEST(CheckMechanism, Examples) {
    const ProfileSpace u3 = ProfileSpace::common(unrestricted(3));
    EXPECT_TRUE(check_mechanism(ttc_mechanism(), u3, all_axioms()).clean());

    const AxiomReport endow = check_mechanism(endowment_mechanism(), u3, {Axiom::IR, Axiom::Pair, Axiom::SP});
    EXPECT_FALSE(endow.clean());
    EXPECT_TRUE(endow.find(Axiom::IR)->passed);
    EXPECT_TRUE(endow.find(Axiom::SP)->passed);
    ASSERT_FALSE(endow.find(Axiom::Pair)->passed);
    EXPECT_TRUE(replays(*endow.find(Axiom::Pair)->violation, endowment_mechanism()));
    EXPECT_EQ(endow.find(Axiom::Pareto), nullptr);
}

TEST(CheckMechanism, EveryViolationReplays) {
    std::mt19937 rng(67);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const ProfileSpace space = ProfileSpace::common(oracle::random_domain(n, 4, rng));
        std::map<Profile, Allocation> entries;
        for (std::uint64_t i = 0; i < space.size(); ++i) {
            entries.emplace(space.profile_at(i), oracle::random_allocation(n, rng));
        }
        const Mechanism m = table_mechanism(entries);
        for (const AxiomResult& r : check_mechanism(m, space, all_axioms()).results) {
            EXPECT_EQ(r.passed, !r.violation.has_value());
            if (r.violation) {
                EXPECT_EQ(r.violation->kind, r.axiom);
                EXPECT_TRUE(replays(*r.violation, m)) << to_string(r.axiom);
            }
        }
    }
}

TEST(FactOne, TtcOnRandomDomains) {
    std::mt19937 rng(71);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const ProfileSpace space = ProfileSpace::common(oracle::random_domain(n, n == 4 ? 4 : 6, rng));
        EXPECT_TRUE(check_mechanism(ttc_mechanism(), space, all_axioms()).clean());
    }
}
