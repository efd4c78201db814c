#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "batchpost/core.hpp"
#include "batchpost/price_model.hpp"

namespace batchpost {

/// Raised when the requested tables would not fit in the configured budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    std::size_t numPrices = 40;
    std::size_t maxQueue = 30;
    CostParams cost{1.0, 0.99};
    double alpha = 0.5;
    double epsilon = 1e-3;
    std::size_t maxIterations = 100000;
    unsigned threads = 1;  // 0 = hardware concurrency
    std::size_t memoryBudgetBytes = std::size_t{4} << 30;

    void validate() const;

    /// 5 prices, queue bound 4, delta 0.9, alpha 1.
    static SolverConfig micro();
    /// 40 prices, queue bound 30, delta 0.99, alpha 0.5, epsilon 1e-3.
    static SolverConfig desk();
    /// 400 prices, queue bound 300, delta 0.999, alpha 0.1, epsilon 0.01.
    static SolverConfig full_scale();
};

/// Cost-to-go per (queue length, price index, action). Actions at queue
/// length q range over 0..q, so the table is stored ragged.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::size_t numPrices, std::size_t maxQueue);

    static std::size_t entry_count(std::size_t numPrices, std::size_t maxQueue);

    std::size_t num_prices() const { return numPrices_; }
    std::size_t max_queue() const { return maxQueue_; }

    std::span<double> actions(std::size_t queueLen, std::size_t priceIndex) {
        return {data_.data() + offset(queueLen, priceIndex), queueLen + 1};
    }
    std::span<const double> actions(std::size_t queueLen, std::size_t priceIndex) const {
        return {data_.data() + offset(queueLen, priceIndex), queueLen + 1};
    }
    double& at(std::size_t q, std::size_t p, std::size_t a) { return data_[offset(q, p) + a]; }
    double at(std::size_t q, std::size_t p, std::size_t a) const { return data_[offset(q, p) + a]; }

    const std::vector<double>& raw() const { return data_; }

    bool operator==(const ValueTable&) const = default;

private:
    std::size_t offset(std::size_t q, std::size_t p) const {
        return numPrices_ * (q * (q + 1) / 2) + p * (q + 1);
    }

    std::size_t numPrices_ = 0;
    std::size_t maxQueue_ = 0;
    std::vector<double> data_;
};

/// Chosen action per (queue length, price index).
class PolicyTable {
public:
    PolicyTable() = default;
    PolicyTable(std::size_t numPrices, std::size_t maxQueue);

    std::size_t num_prices() const { return numPrices_; }
    std::size_t max_queue() const { return maxQueue_; }

    std::uint32_t& at(std::size_t q, std::size_t p) { return data_[q * numPrices_ + p]; }
    std::uint32_t at(std::size_t q, std::size_t p) const { return data_[q * numPrices_ + p]; }

    /// Throws std::invalid_argument if any entry exceeds its queue length.
    void validate() const;

    bool operator==(const PolicyTable&) const = default;

private:
    std::size_t numPrices_ = 0;
    std::size_t maxQueue_ = 0;
    std::vector<std::uint32_t> data_;
};

/// A solver configuration together with the price grid it is meant for. All
/// presets use a linear grid over [15, 6000] GWEI; they differ in resolution.
struct SolverPreset {
    SolverConfig config;
    PriceGrid grid;
};

/// "micro", "desk" or "full".
SolverPreset solver_preset(const std::string& name);

struct Tables {
    ValueTable values;
    PolicyTable policy;
};

struct SweepResult {
    ValueTable values;
    double maxDelta = 0.0;
};

struct SolveResult {
    ValueTable values;
    PolicyTable policy;
    std::size_t iterations = 0;
    double finalDelta = 0.0;
    bool converged = false;
};

/// Value assigned to actions that would push the queue past its bound.
double infeasible_value(const SolverConfig& config, const PriceGrid& grid);

/// Values start at the one-round cost of each action; the policy posts the
/// whole queue everywhere.
Tables init_tables(const SolverConfig& config, const PriceGrid& grid);

/// One synchronous damped Bellman update of every table entry:
///   new = (1 - alpha) * old + alpha * (cost + delta * E[old(q', p', policy(q', p'))])
/// with q' = q - a + 1 and the expectation over kernel row p. Entries whose
/// q' exceeds the queue bound are pinned at infeasible_value() and do not
/// count toward maxDelta.
SweepResult sweep(const ValueTable& values, const PolicyTable& policy, const TransitionKernel& kernel,
                  const PriceGrid& grid, const SolverConfig& config);

/// Per-state argmin over actions; ties go to the larger action.
PolicyTable extract_policy(const ValueTable& values);

/// Sweeps and re-extracts the policy until maxDelta < epsilon or the
/// iteration cap is hit. `converged` tells the two apart.
SolveResult solve(const SolverConfig& config, const PriceGrid& grid, const TransitionKernel& kernel);

struct StatePair {
    std::size_t queueLen = 0;
    std::size_t priceIndex = 0;
    std::size_t otherQueueLen = 0;
    std::size_t otherPriceIndex = 0;

    bool operator==(const StatePair&) const = default;
};

/// Adjacent state pairs where the policy decreases in queue length or
/// increases in price. Only price indices below `priceLimit` are checked
/// when it is given.
std::vector<StatePair> monotonicity_check(const PolicyTable& policy,
                                          std::optional<std::size_t> priceLimit = std::nullopt);

enum class ThresholdRule : std::uint8_t {
    postAll,      // price below the threshold price: the whole queue is posted
    holdBelow,    // queue at or below T_Q(p): nothing is posted
    postExcess,   // queue above T_Q(p): exactly q - T_Q(p) is posted
};

struct StructureViolation {
    std::size_t queueLen = 0;
    std::size_t priceIndex = 0;
    ThresholdRule rule = ThresholdRule::postAll;
    std::uint32_t expected = 0;
    std::uint32_t actual = 0;
};

struct ThresholdOptions {
    /// Fraction of the highest price rows left out of the structure check and
    /// the fits; the truncated kernel distorts decisions there.
    double excludeTopFraction = 0.0;
    /// Largest tolerated fraction of inconsistent states.
    double tolerance = 0.02;
};

/// Threshold structure of a policy table.
///
/// thresholdPriceIndex is the largest index p* such that every price index
/// up to p* posts the full queue (absent if even index 0 does not).
/// thresholdPrice is the grid price right above it, the point where posting
/// everything stops. For each analyzed index p above p*, queueThresholds
/// holds T_Q(p), the largest queue length the policy leaves untouched.
/// The square-root law T_Q(p) ~ sqrt(price(p) - thresholdPrice) / d is fit by
/// least squares (fittedD, fitResidual as RMS); linearResidual is the RMS of
/// the best proportional fit T_Q(p) ~ b * (price(p) - thresholdPrice).
struct ThresholdSummary {
    std::optional<std::size_t> thresholdPriceIndex;
    double thresholdPrice = 0.0;
    std::size_t firstAnalyzedIndex = 0;  // queueThresholds[k] belongs to index firstAnalyzedIndex + k
    std::vector<std::size_t> queueThresholds;
    std::optional<double> fittedD;
    double fitResidual = 0.0;
    double linearResidual = 0.0;
    std::size_t analyzedPriceRows = 0;
    std::size_t checkedStates = 0;
    std::vector<StructureViolation> violations;
    double consistentFraction = 1.0;
    bool structureOk = true;
};

ThresholdSummary analyze_thresholds(const PolicyTable& policy, const PriceGrid& grid,
                                    const ThresholdOptions& options = {});

}  // namespace batchpost
