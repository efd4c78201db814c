#include "batchpost/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace batchpost {

namespace {

BacktestRun replay(const PolicySpec& policy, const PriceSeries& series, const BacktestConfig& config,
                   bool keepTrace) {
    if (series.empty()) {
        throw DataError("back-test needs a non-empty price series");
    }
    if (config.tips && config.tips->size() != series.size()) {
        throw DataError("tip series has " + std::to_string(config.tips->size()) + " entries, price series has " +
                        std::to_string(series.size()));
    }
    if (!(config.c > 0.0)) {
        throw std::invalid_argument("cost weight c must be positive");
    }
    validate_policy(policy);

    BacktestRun out;
    BacktestReport& report = out.report;
    report.c = config.c;
    report.includeUnposted = config.includeUnpostedInDelayStats;
    if (keepTrace) {
        out.trace.reserve(series.size());
    }

    std::vector<Round> queue;  // creation rounds; live entries start at `head`
    std::size_t head = 0;
    double delaySum = 0.0;
    const std::size_t n = series.size();

    for (std::size_t i = 0; i < n; ++i) {
        const auto now = static_cast<Round>(i);
        queue.push_back(now);
        const std::size_t queueLen = queue.size() - head;
        const double price = series.prices[i] + (config.tips ? (*config.tips)[i] : 0.0);

        const QueueView view{std::span<const Round>(queue.data() + head, queueLen), now};
        std::size_t nPost = decide(policy, price, view);
        if (config.flushAtEnd && i + 1 == n) {
            nPost = queueLen;
        }
        if (!validate_decision({queueLen, price}, nPost)) {
            throw InvalidAction("policy '" + policy_kind(policy) + "' posted " + std::to_string(nPost) +
                                " of " + std::to_string(queueLen) + " batches");
        }

        const RoundCost cost = round_cost(price, queueLen, nPost, config.c);
        report.publishingCost += cost.posting;
        report.delayCost += cost.delay;
        report.maxPostedInOneRound = std::max(report.maxPostedInOneRound, nPost);
        report.maxQueueAfterPosting = std::max(report.maxQueueAfterPosting, queueLen - nPost);
        for (std::size_t k = 0; k < nPost; ++k) {
            const Round delay = now - queue[head + k];
            report.maxDelay = std::max(report.maxDelay, delay);
            delaySum += static_cast<double>(delay);
        }
        head += nPost;
        report.batchesPosted += nPost;
        if (keepTrace) {
            out.trace.push_back({now, price, queueLen, nPost, cost.posting, cost.delay});
        }

        if (head > 4096 && head * 2 > queue.size()) {
            queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(head));
            head = 0;
        }
    }

    report.rounds = n;
    report.batchesCreated = n;
    report.finalQueueLen = queue.size() - head;
    std::size_t denominator = report.batchesPosted;
    if (config.includeUnpostedInDelayStats) {
        const auto lastRound = static_cast<Round>(n - 1);
        for (std::size_t k = head; k < queue.size(); ++k) {
            const Round age = lastRound - queue[k];
            report.maxDelay = std::max(report.maxDelay, age);
            delaySum += static_cast<double>(age);
        }
        denominator = report.batchesCreated;
    }
    report.avgDelay = denominator > 0 ? delaySum / static_cast<double>(denominator) : 0.0;
    return out;
}

}  // namespace

BacktestReport run(const PolicySpec& policy, const PriceSeries& series, const BacktestConfig& config) {
    return replay(policy, series, config, false).report;
}

BacktestRun run_traced(const PolicySpec& policy, const PriceSeries& series, const BacktestConfig& config) {
    return replay(policy, series, config, true);
}

}  // namespace batchpost
