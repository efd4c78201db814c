#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "batchpost/policies.hpp"
#include "batchpost/qsolver.hpp"
#include "oracles.hpp"

using namespace batchpost;

namespace {

// Queue of `ages` (oldest first) observed at round 1000.
struct AgedQueue {
    std::vector<Round> created;
    QueueView view() const { return {created, 1000}; }

    explicit AgedQueue(const std::vector<Round>& ages) {
        for (auto age : ages) {
            created.push_back(1000 - age);
        }
    }
    static AgedQueue fresh(std::size_t n) {
        std::vector<Round> ages;
        for (std::size_t k = 0; k < n; ++k) {
            ages.push_back(n - 1 - k);
        }
        return AgedQueue(ages);
    }
};

std::size_t decide_fresh(const PolicySpec& spec, double price, std::size_t queueLen) {
    const auto queue = AgedQueue::fresh(queueLen);
    return decide(spec, price, queue.view());
}

}  // namespace

TEST(Trivial, PostsEverything) {
    for (double price : {0.5, 30.0, 1e6}) {
        EXPECT_EQ(decide_fresh(TrivialPolicy{}, price, 4), 4u);
    }
}

TEST(PriceMin, Examples) {
    const PolicySpec spec = PriceMinPolicy{80};
    EXPECT_EQ(decide_fresh(spec, 81, 7), 0u);
    EXPECT_EQ(decide_fresh(spec, 80, 7), 7u);
    EXPECT_EQ(decide_fresh(spec, 79.9, 7), 7u);
}

TEST(QThreshold, Examples) {
    EXPECT_EQ(q_threshold_decide(60, 2, QThresholdVariant::literal, 40, 9), 9u);
    EXPECT_EQ(q_threshold_decide(60, 2, QThresholdVariant::literal, 160, 10), 4u);
    EXPECT_EQ(q_threshold_decide(60, 2, QThresholdVariant::literal, 160, 3), 0u);
    EXPECT_EQ(q_threshold_decide(60, 2, QThresholdVariant::toThreshold, 160, 10), 5u);
    // At Tp exactly the post-all branch no longer applies: t = 0.
    EXPECT_EQ(q_threshold_decide(60, 2, QThresholdVariant::literal, 60, 5), 4u);
    EXPECT_EQ(decide_fresh(QThresholdPolicy{60, 2, QThresholdVariant::literal}, 160, 10), 4u);
}

TEST(Arb, AcceptablePrice) {
    EXPECT_DOUBLE_EQ(arb_acceptable_price(96, 2, 120, 250, ArbMode::step), 384);
    EXPECT_DOUBLE_EQ(arb_acceptable_price(96, 2, 120, 120, ArbMode::smooth), 192);
    EXPECT_DOUBLE_EQ(arb_acceptable_price(96, 2, 120, 0, ArbMode::step), 96);
    EXPECT_DOUBLE_EQ(arb_acceptable_price(96, 2, 120, 0, ArbMode::smooth), 96);
    EXPECT_NEAR(arb_acceptable_price(96, 2, 120, 60, ArbMode::smooth), 96 * std::sqrt(2.0), 1e-9);
    EXPECT_DOUBLE_EQ(arb_acceptable_price(96, 2, 120, 119, ArbMode::step), 96);
}

TEST(Arb, DecideExamples) {
    const ArbPolicy policy{96, 2, 120, ArbMode::step};
    EXPECT_EQ(decide(policy, 100, AgedQueue({130, 10}).view()), 1u);
    EXPECT_EQ(decide(policy, 96, AgedQueue({10, 0}).view()), 2u);
    EXPECT_EQ(decide(policy, 500, AgedQueue({130, 10}).view()), 0u);
}

TEST(Arb, PostableSetIsPrefix) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> price(1, 400);
    for (int trial = 0; trial < 300; ++trial) {
        const ArbPolicy policy{10.0 + static_cast<double>(rng() % 50), 1.05 + static_cast<double>(rng() % 10) / 10,
                               1.0 + static_cast<double>(rng() % 90), trial % 2 ? ArbMode::smooth : ArbMode::step};
        std::vector<Round> ages;
        Round age = 500;
        for (std::size_t k = 0; k < 1 + rng() % 30; ++k) {
            ages.push_back(age);
            age -= std::min<Round>(age, rng() % 40);
        }
        const AgedQueue queue(ages);
        const double p = price(rng);
        const auto n = decide(policy, p, queue.view());
        for (std::size_t k = 0; k < ages.size(); ++k) {
            const bool acceptable = arb_acceptable_price(policy.ap, policy.e, policy.ut, ages[k], policy.mode) >= p;
            EXPECT_EQ(acceptable, k < n);
        }
    }
}

TEST(Learned, AllPostTableAndOverflow) {
    const PriceGrid grid{5, 10, 50};
    auto table = std::make_shared<PolicyTable>(5, 4);
    for (std::size_t q = 0; q <= 4; ++q) {
        for (std::size_t p = 0; p < 5; ++p) {
            table->at(q, p) = static_cast<std::uint32_t>(q);
        }
    }
    const LearnedPolicy learned{table, grid};
    for (std::size_t q = 0; q <= 4; ++q) {
        EXPECT_EQ(decide_fresh(learned, 33, q), q);
    }
    table->at(4, 2) = 1;
    EXPECT_EQ(learned_decide(*table, grid, 30, 7), 1u + 3u);
    EXPECT_EQ(decide_fresh(learned, 30, 7), 4u);
}

TEST(Learned, FollowsOracleArgmin) {
    const auto preset = solver_preset("micro");
    const auto kernel = build_kernel(preset.grid, minute_factor_distribution());
    const auto result = solve(preset.config, preset.grid, kernel);
    std::vector<double> prices;
    for (std::size_t p = 0; p < preset.grid.numPoints; ++p) {
        prices.push_back(index_to_price(preset.grid, p));
    }
    const auto dp = oracle::finite_horizon(prices, oracle::dense_kernel(kernel), preset.config.maxQueue, 1.0, 0.9,
                                           oracle::horizon_for(0.9, 6000.0 * 4 + 16));
    const LearnedPolicy learned{std::make_shared<PolicyTable>(result.policy), preset.grid};
    for (std::size_t q = 0; q <= preset.config.maxQueue; ++q) {
        for (std::size_t p = 0; p < prices.size(); ++p) {
            if (dp.gap(q, p) > 1e-6) {
                EXPECT_EQ(decide_fresh(learned, prices[p], q), dp.best_action(q, p)) << q << "," << p;
            }
        }
    }
}

TEST(Policies, ThresholdRulesAreMonotone) {
    const std::vector<PolicySpec> specs{PriceMinPolicy{60}, QThresholdPolicy{60, 2, QThresholdVariant::literal},
                                        QThresholdPolicy{25, 0.5, QThresholdVariant::toThreshold}};
    for (const auto& spec : specs) {
        for (double price = 1; price < 400; price += 3.7) {
            for (std::size_t q = 0; q < 40; ++q) {
                const auto here = decide_fresh(spec, price, q);
                EXPECT_TRUE(validate_decision({q, price}, here));
                EXPECT_LE(here, decide_fresh(spec, price, q + 1));
                EXPECT_GE(here, decide_fresh(spec, price + 3.7, q));
            }
        }
    }
}

TEST(QThreshold, LiteralQueueBound) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 5000; ++trial) {
        const double tp = 10 + 100 * u(rng);
        const double d = 0.1 + 4 * u(rng);
        const double price = tp + 500 * u(rng);
        const std::size_t q = rng() % 300;
        const auto n = q_threshold_decide(tp, d, QThresholdVariant::literal, price, q);
        ASSERT_LE(n, q);
        EXPECT_LE(q - n, static_cast<std::size_t>(std::floor(std::sqrt(price - tp) / d)) + 1);
    }
}

TEST(Policies, Validation) {
    EXPECT_THROW(validate_policy(PriceMinPolicy{0}), std::invalid_argument);
    EXPECT_THROW(validate_policy(QThresholdPolicy{60, 0}), std::invalid_argument);
    EXPECT_THROW(validate_policy(ArbPolicy{96, 1.0, 60}), std::invalid_argument);
    EXPECT_THROW(validate_policy(ArbPolicy{96, 2.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(validate_policy(LearnedPolicy{}), std::invalid_argument);
    EXPECT_NO_THROW(validate_policy(ArbPolicy{96, 2.0, 120, ArbMode::smooth}));
    EXPECT_EQ(policy_kind(ArbPolicy{96, 2.0, 120, ArbMode::smooth}), "arbSmooth");
    EXPECT_EQ(policy_kind(TrivialPolicy{}), "trivial");
}

TEST(AutoThreshold, NearestRankPercentile) {
    PriceSeries series;
    for (int i = 1; i <= 100; ++i) {
        series.prices.push_back(i);
    }
    EXPECT_DOUBLE_EQ(auto_threshold_price(series), 80);
    EXPECT_DOUBLE_EQ(auto_threshold_price(series, 0.5), 50);
}
