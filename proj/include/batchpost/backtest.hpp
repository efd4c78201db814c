#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "batchpost/core.hpp"
#include "batchpost/policies.hpp"
#include "batchpost/price_model.hpp"

namespace batchpost {

struct BacktestConfig {
    double c = 1.0;
    /// Added to the base fee of the same round when present.
    std::optional<std::vector<double>> tips;
    /// Batches still queued at the end count toward max/avg delay with their
    /// final age.
    bool includeUnpostedInDelayStats = true;
    /// Post whatever is left in the last round.
    bool flushAtEnd = false;
};

/// Delays are in rounds. avgDelay divides by batchesCreated when unposted
/// batches are included and by batchesPosted otherwise.
struct BacktestReport {
    double publishingCost = 0.0;
    double delayCost = 0.0;
    Round maxDelay = 0;
    double avgDelay = 0.0;
    std::size_t maxPostedInOneRound = 0;
    std::size_t rounds = 0;
    std::size_t batchesCreated = 0;
    std::size_t batchesPosted = 0;
    std::size_t finalQueueLen = 0;
    std::size_t maxQueueAfterPosting = 0;
    double c = 1.0;
    bool includeUnposted = true;

    bool operator==(const BacktestReport&) const = default;
};

struct TraceRow {
    Round round = 0;
    double price = 0.0;
    std::size_t queueBefore = 0;
    std::size_t nPost = 0;
    double postingCost = 0.0;
    double delayCost = 0.0;
};

struct BacktestRun {
    BacktestReport report;
    std::vector<TraceRow> trace;
};

/// Replays `series` one round per price. Each round a batch arrives, the
/// policy sees the effective price (base fee plus tip) and the FIFO queue,
/// and the oldest nPost batches are posted.
BacktestReport run(const PolicySpec& policy, const PriceSeries& series, const BacktestConfig& config);

/// Same as run() and keeps one TraceRow per round.
BacktestRun run_traced(const PolicySpec& policy, const PriceSeries& series, const BacktestConfig& config);

}  // namespace batchpost
