#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "batchpost/core.hpp"
#include "batchpost/price_model.hpp"
#include "batchpost/qsolver.hpp"

namespace batchpost {

/// Posts every batch as soon as it exists.
struct TrivialPolicy {};

/// Holds everything until price <= threshold, then flushes the queue.
struct PriceMinPolicy {
    double threshold = 0.0;
};

enum class QThresholdVariant : std::uint8_t {
    literal,      // post q - t - 1: the next round starts at t + 2 if nothing else changes
    toThreshold,  // post q - t: leave exactly t batches behind
};

/// Below thresholdPrice post everything; above it keep about
/// sqrt(price - thresholdPrice) / d batches queued.
struct QThresholdPolicy {
    double thresholdPrice = 0.0;
    double d = 1.0;
    QThresholdVariant variant = QThresholdVariant::literal;
};

enum class ArbMode : std::uint8_t { step, smooth };

/// Per-batch acceptable price that starts at `ap` and grows by a factor `e`
/// every `ut` rounds of waiting (in jumps or continuously).
struct ArbPolicy {
    double ap = 0.0;
    double e = 2.0;
    double ut = 1.0;
    ArbMode mode = ArbMode::step;
};

/// A solver policy table looked up at the nearest grid price.
struct LearnedPolicy {
    std::shared_ptr<const PolicyTable> table;
    PriceGrid grid;
};

using PolicySpec = std::variant<TrivialPolicy, PriceMinPolicy, QThresholdPolicy, ArbPolicy, LearnedPolicy>;

/// Throws std::invalid_argument when a parameter is out of range.
void validate_policy(const PolicySpec& spec);

std::string policy_kind(const PolicySpec& spec);

/// FIFO queue seen by a policy: creation rounds of the queued batches,
/// oldest first, and the current round.
struct QueueView {
    std::span<const Round> createdRounds;
    Round now = 0;

    std::size_t size() const { return createdRounds.size(); }
    Round age(std::size_t k) const { return now - createdRounds[k]; }
};

std::size_t decide(const PolicySpec& spec, double price, const QueueView& queue);

std::size_t q_threshold_decide(double thresholdPrice, double d, QThresholdVariant variant, double price,
                               std::size_t queueLen);

double arb_acceptable_price(double ap, double e, double ut, Round age, ArbMode mode);

/// Number of queued batches whose acceptable price is at least `price`.
/// Those batches always form a prefix of the FIFO queue; std::logic_error is
/// thrown otherwise.
std::size_t arb_decide(const ArbPolicy& policy, double price, const QueueView& queue);

/// Table action at (min(queueLen, maxQueue), nearest price); batches beyond
/// the table's queue bound are posted on top of the cap-row action.
std::size_t learned_decide(const PolicyTable& table, const PriceGrid& grid, double price, std::size_t queueLen);

/// Threshold price for QThresholdPolicy taken as a nearest-rank percentile
/// of observed prices (0.8 by default).
double auto_threshold_price(const PriceSeries& series, double quantile = 0.8);

}  // namespace batchpost
