#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ttc_lab/domains.hpp"
#include "ttc_lab/richness.hpp"
#include "ttc_lab/serialize.hpp"

using namespace ttc_lab;

namespace {

const Domain kD1 = parse_domain("123,231,213");
const Domain kD2 = parse_domain("123,231,132");
const Domain kD3 = parse_domain("1234,1324,2143,2431");

SubsetO set_of(std::initializer_list<int> xs) {
    SubsetO s;
    for (int x : xs) s = s.with(ObjectId{x});
    return s;
}

/// Top-two by definition: for each subset, each ordered pair of distinct
/// possible tops, some preference ranks them first and second.
bool top_two_oracle(const Domain& d) {
    const int n = d.n();
    for (std::uint32_t m = 1; m < (1U << n); ++m) {
        std::vector<int> keep;
        for (int i = 0; i < n; ++i) {
            if ((m >> i) & 1U) keep.push_back(i + 1);
        }
        if (keep.size() < 2) continue;
        std::vector<std::vector<int>> restricted;
        for (const Preference& p : d) restricted.push_back(oracle::delete_outside(oracle::as_vector(p), keep));
        std::vector<int> tops;
        for (const auto& r : restricted) {
            if (std::find(tops.begin(), tops.end(), r[0]) == tops.end()) tops.push_back(r[0]);
        }
        for (int a : tops) {
            for (int b : tops) {
                if (a == b) continue;
                bool found = false;
                for (const auto& r : restricted) found = found || (r[0] == a && r[1] == b);
                if (!found) return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST(TopTwo, PaperExamples) {
    EXPECT_TRUE(check_top_two(kD1).satisfied);

    const TopTwoReport r2 = check_top_two(kD2);
    ASSERT_FALSE(r2.satisfied);
    const auto at_o = failures_at(r2, SubsetO::full(3));
    ASSERT_EQ(at_o.size(), 1U);
    EXPECT_EQ(at_o[0].a, ObjectId{2});
    EXPECT_EQ(at_o[0].b, ObjectId{1});

    const TopTwoReport r3 = check_top_two(kD3);
    ASSERT_FALSE(r3.satisfied);
    const auto at_134 = failures_at(r3, set_of({1, 3, 4}));
    ASSERT_EQ(at_134.size(), 1U);
    EXPECT_EQ(at_134[0].a, ObjectId{4});
    EXPECT_EQ(at_134[0].b, ObjectId{1});
}

TEST(TopTwo, SmallNAlwaysSatisfied) {
    EXPECT_TRUE(check_top_two(parse_domain("1")).satisfied);
    EXPECT_TRUE(check_top_two(parse_domain("12")).satisfied);
    EXPECT_TRUE(check_top_two(parse_domain("12,21")).satisfied);
}

TEST(TopTwo, FailureInvariants) {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 2);
        const Domain d = oracle::random_domain(n, 8, rng);
        const TopTwoReport r = check_top_two(d);
        EXPECT_EQ(r.satisfied, r.failures.empty());
        EXPECT_EQ(r.satisfied, top_two_oracle(d));
        for (const TopTwoFailure& f : r.failures) {
            EXPECT_NE(f.a, f.b);
            const SubsetO tops = top_set(d, f.subset, 1);
            EXPECT_TRUE(tops.contains(f.a) && tops.contains(f.b));
            for (const Preference& p : d) {
                EXPECT_FALSE(rank(p, f.subset, 1) == f.a && rank(p, f.subset, 2) == f.b);
            }
        }
    }
}

TEST(TopTwo, CatalogClassifications) {
    for (int n = 3; n <= 6; ++n) {
        EXPECT_TRUE(check_top_two(single_dipped(n)).satisfied) << n;
        for (int p = 1; p < n; ++p) {
            EXPECT_TRUE(check_top_two(single_peaked_two_adjacent(n, p)).satisfied) << n << "," << p;
        }
    }
    for (int n = 3; n <= 6; ++n) {
        const TopTwoReport r = check_top_two(single_peaked(n));
        // every axis triple fails with its two extremes
        for (int a = 1; a <= n; ++a) {
            for (int b = a + 1; b <= n; ++b) {
                for (int c = b + 1; c <= n; ++c) {
                    const auto fs = failures_at(r, set_of({a, b, c}));
                    bool extremes = false;
                    for (const auto& f : fs) {
                        extremes = extremes || (f.a == ObjectId{a} && f.b == ObjectId{c}) ||
                                   (f.a == ObjectId{c} && f.b == ObjectId{a});
                    }
                    EXPECT_TRUE(extremes) << a << b << c;
                }
            }
        }
    }
    for (int n = 4; n <= 6; ++n) {
        const TopTwoReport r = check_top_two(circular(n));
        bool quad = false;
        for (const auto& f : r.failures) quad = quad || f.subset.size() == 4;
        EXPECT_TRUE(quad) << n;
    }
}

TEST(TopTwo, PartialAgreementAlwaysSatisfied) {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        std::vector<std::pair<ObjectId, ObjectId>> edges;
        const auto topo = oracle::permutations(n)[rng() % oracle::permutations(n).size()];
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng() & 1U) edges.emplace_back(ObjectId{topo[static_cast<std::size_t>(i)]}, ObjectId{topo[static_cast<std::size_t>(j)]});
            }
        }
        EXPECT_TRUE(check_top_two(partial_agreement(PartialOrderSpec(n, edges))).satisfied);
    }
}

TEST(TopK, AgreesWithTopTwoAtTwo) {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const Domain d = oracle::random_domain(n, 10, rng);
        const TopTwoReport two = check_top_two(d);
        const TopKReport k2 = check_top_k(d, 2);
        ASSERT_EQ(two.satisfied, k2.satisfied);
        ASSERT_EQ(two.failures.size(), k2.failures.size());
        for (std::size_t i = 0; i < two.failures.size(); ++i) {
            EXPECT_EQ(two.failures[i].subset, k2.failures[i].subset);
            EXPECT_EQ(two.failures[i].a, k2.failures[i].tuple[0]);
            EXPECT_EQ(two.failures[i].b, k2.failures[i].tuple[1]);
        }
    }
}

TEST(TopK, UnrestrictedAndVacuousCases) {
    for (int n = 2; n <= 5; ++n) {
        for (int k = 2; k <= n; ++k) {
            EXPECT_TRUE(check_top_k(unrestricted(n), k).satisfied);
        }
    }
    // at most two objects can ever be on top, so no triple exists
    EXPECT_TRUE(check_top_k(single_dipped(4), 3).satisfied);
    EXPECT_FALSE(check_top_k(circular(4), 3).satisfied);
    EXPECT_THROW(check_top_k(unrestricted(3), 1), DomainError);
    EXPECT_THROW(check_top_k(unrestricted(3), 4), DomainError);
}

TEST(MaximalFailingSubset, Examples) {
    EXPECT_EQ(maximal_failing_subset(kD2), SubsetO::full(3));
    EXPECT_EQ(maximal_failing_subset(kD3), set_of({1, 3, 4}));
    EXPECT_FALSE(maximal_failing_subset(kD1).has_value());
    EXPECT_EQ(maximal_failing_subset(circular(4)), SubsetO::full(4));
}
