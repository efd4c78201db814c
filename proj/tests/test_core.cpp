#include <gtest/gtest.h>

#include <random>

#include "batchpost/core.hpp"

using namespace batchpost;

TEST(RoundCost, Examples) {
    auto cost = round_cost(100, 5, 3, 2);
    EXPECT_DOUBLE_EQ(cost.posting, 300);
    EXPECT_DOUBLE_EQ(cost.delay, 8);
    EXPECT_DOUBLE_EQ(cost.total, 308);

    cost = round_cost(10, 4, 4, 1);
    EXPECT_DOUBLE_EQ(cost.posting, 40);
    EXPECT_DOUBLE_EQ(cost.delay, 0);
    EXPECT_DOUBLE_EQ(cost.total, 40);

    cost = round_cost(10, 4, 0, 1);
    EXPECT_DOUBLE_EQ(cost.posting, 0);
    EXPECT_DOUBLE_EQ(cost.delay, 16);
    EXPECT_DOUBLE_EQ(cost.total, 16);
}

TEST(RoundCost, RejectsPostingMoreThanQueued) {
    EXPECT_THROW(round_cost(10, 3, 4, 1), InvalidAction);
}

TEST(StepQueue, Examples) {
    EXPECT_EQ(step_queue(5, 3), 3u);
    EXPECT_EQ(step_queue(0, 0), 1u);
    EXPECT_EQ(step_queue(7, 7), 1u);
    EXPECT_THROW(step_queue(2, 3), InvalidAction);
}

TEST(ValidateDecision, Examples) {
    EXPECT_TRUE(validate_decision({3, 10.0}, 3));
    EXPECT_FALSE(validate_decision({3, 10.0}, 4));
    EXPECT_TRUE(validate_decision({0, 10.0}, 0));
}

TEST(CostParams, Validation) {
    EXPECT_NO_THROW((CostParams{1.0, 0.99}.validate()));
    EXPECT_THROW((CostParams{0.0, 0.5}.validate()), std::invalid_argument);
    EXPECT_THROW((CostParams{1.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((CostParams{1.0, 0.0}.validate()), std::invalid_argument);
}

TEST(RoundCost, PropertyTotalIsSumAndNonNegative) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> price(0.01, 1000.0);
    std::uniform_real_distribution<double> weight(0.001, 50.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t q = rng() % 50;
        const std::size_t n = rng() % (q + 1);
        const double p = price(rng);
        const double c = weight(rng);
        const auto cost = round_cost(p, q, n, c);
        EXPECT_GE(cost.posting, 0.0);
        EXPECT_GE(cost.delay, 0.0);
        EXPECT_DOUBLE_EQ(cost.total, cost.posting + cost.delay);
        EXPECT_EQ(step_queue(q, n), q - n + 1);
    }
}

TEST(MyopicAction, MatchesExhaustiveArgmin) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> price(0.1, 200.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t q = rng() % 40;
        const double p = price(rng);
        const double c = 1.0 + static_cast<double>(rng() % 5);
        std::size_t best = 0;
        for (std::size_t a = 1; a <= q; ++a) {
            if (round_cost(p, q, a, c).total <= round_cost(p, q, best, c).total) {
                best = a;
            }
        }
        EXPECT_EQ(myopic_action(p, q, c), best) << "q=" << q << " p=" << p << " c=" << c;
    }
}

TEST(MyopicAction, TieGoesToLargerAction) {
    // q=2, p=3, c=1: a=1 costs 3+1=4, a=2 costs 6, a=0 costs 4.
    EXPECT_EQ(myopic_action(3.0, 2, 1.0), 1u);
    // q=1, p=1, c=1: a=0 costs 1, a=1 costs 1.
    EXPECT_EQ(myopic_action(1.0, 1, 1.0), 1u);
}
