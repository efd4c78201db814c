#include "batchpost/dp_offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "batchpost/core.hpp"

namespace batchpost {

void DPInstance::validate() const {
    if (prices.empty()) {
        throw std::invalid_argument("fixed-price instance needs at least one round");
    }
    for (const double p : prices) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("fixed-price instance prices must be positive");
        }
    }
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("cost weight c must be positive");
    }
}

Schedule solve_fixed_prices(const DPInstance& instance) {
    instance.validate();
    const std::size_t n = instance.prices.size();
    constexpr double kUnreached = std::numeric_limits<double>::infinity();

    std::vector<std::vector<double>> best(n + 1);
    std::vector<std::vector<std::size_t>> take(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        best[i].assign(i + 1, kUnreached);
        take[i].assign(i + 1, 0);
    }
    best[0][0] = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double price = instance.prices[i];
        for (std::size_t j = 0; j <= i; ++j) {
            if (best[i][j] == kUnreached) {
                continue;
            }
            for (std::size_t t = 0; t <= i + 1 - j; ++t) {
                const auto left = static_cast<double>(i + 1 - j - t);
                const double cost =
                    best[i][j] + price * static_cast<double>(t) + instance.c * left * left;
                double& slot = best[i + 1][j + t];
                if (cost < slot || (cost == slot && t > take[i + 1][j + t])) {
                    slot = cost;
                    take[i + 1][j + t] = t;
                }
            }
        }
    }

    Schedule schedule;
    schedule.totalCost = best[n][n];
    schedule.nPost.assign(n, 0);
    std::size_t posted = n;
    for (std::size_t i = n; i > 0; --i) {
        const std::size_t t = take[i][posted];
        schedule.nPost[i - 1] = t;
        posted -= t;
    }
    return schedule;
}

namespace {

struct Enumerator {
    const DPInstance& instance;
    std::vector<std::size_t> current;
    Schedule best;

    void visit(std::size_t round, std::size_t queueBefore, double costSoFar) {
        const std::size_t n = instance.prices.size();
        const std::size_t queue = queueBefore + 1;
        const bool last = round + 1 == n;
        for (std::size_t t = last ? queue : 0; t <= queue; ++t) {
            const double cost = costSoFar + round_cost(instance.prices[round], queue, t, instance.c).total;
            current[round] = t;
            if (last) {
                if (cost < best.totalCost) {
                    best.totalCost = cost;
                    best.nPost = current;
                }
            } else {
                visit(round + 1, queue - t, cost);
            }
        }
    }
};

}  // namespace

Schedule brute_force_schedule(const DPInstance& instance) {
    instance.validate();
    if (instance.prices.size() > kBruteForceMaxRounds) {
        throw std::invalid_argument("brute-force enumeration is limited to " +
                                    std::to_string(kBruteForceMaxRounds) + " rounds");
    }
    Enumerator enumerator{instance, std::vector<std::size_t>(instance.prices.size(), 0), {}};
    enumerator.best.totalCost = std::numeric_limits<double>::infinity();
    enumerator.visit(0, 0, 0.0);
    return enumerator.best;
}

double schedule_cost(const DPInstance& instance, const std::vector<std::size_t>& nPost) {
    if (nPost.size() != instance.prices.size()) {
        throw std::invalid_argument("schedule length does not match the instance");
    }
    double total = 0.0;
    std::size_t queue = 0;
    for (std::size_t i = 0; i < nPost.size(); ++i) {
        ++queue;
        total += round_cost(instance.prices[i], queue, nPost[i], instance.c).total;
        queue -= nPost[i];
    }
    if (queue != 0) {
        throw InvalidAction("schedule leaves " + std::to_string(queue) + " batches unposted");
    }
    return total;
}

double zero_or_all_fraction(const Schedule& schedule) {
    if (schedule.nPost.empty()) {
        return 1.0;
    }
    std::size_t queue = 0;
    std::size_t extreme = 0;
    for (const std::size_t posted : schedule.nPost) {
        ++queue;
        if (posted == 0 || posted == queue) {
            ++extreme;
        }
        queue -= std::min(posted, queue);
    }
    return static_cast<double>(extreme) / static_cast<double>(schedule.nPost.size());
}

}  // namespace batchpost
