#include "batchpost/qsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "batchpost/parallel.hpp"

namespace batchpost {

void SolverConfig::validate() const {
    if (numPrices < 2) {
        throw std::invalid_argument("solver needs at least two price points");
    }
    if (maxQueue < 1) {
        throw std::invalid_argument("solver queue bound must be at least 1");
    }
    if (!(cost.c > 0.0) || !std::isfinite(cost.c)) {
        throw std::invalid_argument("cost weight c must be positive");
    }
    // delta = 0 is accepted here: it reduces the solver to the one-round argmin.
    if (!(cost.delta >= 0.0 && cost.delta < 1.0)) {
        throw std::invalid_argument("discount delta must lie in [0, 1)");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("learning rate alpha must lie in (0, 1]");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("convergence threshold epsilon must be positive");
    }
}

SolverConfig SolverConfig::micro() {
    SolverConfig config;
    config.numPrices = 5;
    config.maxQueue = 4;
    config.cost = {1.0, 0.9};
    config.alpha = 1.0;
    config.epsilon = 1e-6;
    config.maxIterations = 10000;
    return config;
}

SolverConfig SolverConfig::desk() {
    SolverConfig config;
    config.numPrices = 40;
    config.maxQueue = 30;
    config.cost = {1.0, 0.99};
    config.alpha = 0.5;
    config.epsilon = 1e-3;
    config.maxIterations = 100000;
    return config;
}

SolverConfig SolverConfig::full_scale() {
    SolverConfig config;
    config.numPrices = 400;
    config.maxQueue = 300;
    config.cost = {1.0, 0.999};
    config.alpha = 0.1;
    config.epsilon = 0.01;
    config.maxIterations = 1000000;
    return config;
}

SolverPreset solver_preset(const std::string& name) {
    SolverPreset preset;
    if (name == "micro") {
        preset.config = SolverConfig::micro();
    } else if (name == "desk") {
        preset.config = SolverConfig::desk();
    } else if (name == "full") {
        preset.config = SolverConfig::full_scale();
    } else {
        throw std::invalid_argument("unknown solver preset '" + name + "' (expected micro, desk or full)");
    }
    preset.grid = PriceGrid{preset.config.numPrices, 15.0, 6000.0};
    return preset;
}

ValueTable::ValueTable(std::size_t numPrices, std::size_t maxQueue)
    : numPrices_(numPrices), maxQueue_(maxQueue), data_(entry_count(numPrices, maxQueue), 0.0) {}

std::size_t ValueTable::entry_count(std::size_t numPrices, std::size_t maxQueue) {
    return numPrices * ((maxQueue + 1) * (maxQueue + 2) / 2);
}

PolicyTable::PolicyTable(std::size_t numPrices, std::size_t maxQueue)
    : numPrices_(numPrices), maxQueue_(maxQueue), data_(numPrices * (maxQueue + 1), 0) {}

void PolicyTable::validate() const {
    for (std::size_t q = 0; q <= maxQueue_; ++q) {
        for (std::size_t p = 0; p < numPrices_; ++p) {
            if (at(q, p) > q) {
                throw std::invalid_argument("policy posts " + std::to_string(at(q, p)) +
                                            " batches from a queue of " + std::to_string(q));
            }
        }
    }
}

double infeasible_value(const SolverConfig& config, const PriceGrid& grid) {
    const auto bound = static_cast<double>(config.maxQueue);
    const double worstRound = std::max(grid.pMax * bound, config.cost.c * bound * bound);
    return 1e12 * worstRound;
}

namespace {

void check_dimensions(const SolverConfig& config, const PriceGrid& grid) {
    if (grid.numPoints != config.numPrices) {
        throw std::invalid_argument("price grid has " + std::to_string(grid.numPoints) +
                                    " points but the solver expects " + std::to_string(config.numPrices));
    }
}

std::vector<double> grid_prices(const PriceGrid& grid) {
    std::vector<double> prices(grid.numPoints);
    for (std::size_t p = 0; p < grid.numPoints; ++p) {
        prices[p] = index_to_price(grid, p);
    }
    return prices;
}

}  // namespace

Tables init_tables(const SolverConfig& config, const PriceGrid& grid) {
    config.validate();
    grid.validate();
    check_dimensions(config, grid);
    const std::size_t bytes = ValueTable::entry_count(config.numPrices, config.maxQueue) * sizeof(double) +
                              config.numPrices * (config.maxQueue + 1) * sizeof(std::uint32_t);
    if (bytes > config.memoryBudgetBytes) {
        throw ResourceError("solver tables need " + std::to_string(bytes) + " bytes, budget is " +
                            std::to_string(config.memoryBudgetBytes));
    }

    Tables tables{ValueTable(config.numPrices, config.maxQueue), PolicyTable(config.numPrices, config.maxQueue)};
    const auto prices = grid_prices(grid);
    for (std::size_t q = 0; q <= config.maxQueue; ++q) {
        for (std::size_t p = 0; p < config.numPrices; ++p) {
            auto row = tables.values.actions(q, p);
            for (std::size_t a = 0; a <= q; ++a) {
                row[a] = round_cost(prices[p], q, a, config.cost.c).total;
            }
            tables.policy.at(q, p) = static_cast<std::uint32_t>(q);
        }
    }
    return tables;
}

SweepResult sweep(const ValueTable& values, const PolicyTable& policy, const TransitionKernel& kernel,
                  const PriceGrid& grid, const SolverConfig& config) {
    const std::size_t numPrices = values.num_prices();
    const std::size_t maxQueue = values.max_queue();
    if (policy.num_prices() != numPrices || policy.max_queue() != maxQueue || kernel.size() != numPrices ||
        grid.numPoints != numPrices) {
        throw std::invalid_argument("sweep inputs have inconsistent dimensions");
    }
    const auto prices = grid_prices(grid);
    const double alpha = config.alpha;
    const double delta = config.cost.delta;
    const double c = config.cost.c;
    const double blocked = infeasible_value(config, grid);

    // expected[q' * numPrices + p] = E[ values(q', p', policy(q', p')) | price index p ]
    std::vector<double> expected((maxQueue + 1) * numPrices, 0.0);
    parallel_for(maxQueue, config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin + 1; q <= end; ++q) {
            for (std::size_t p = 0; p < numPrices; ++p) {
                double sum = 0.0;
                for (const auto& entry : kernel.rows[p]) {
                    sum += entry.prob * values.at(q, entry.index, policy.at(q, entry.index));
                }
                expected[q * numPrices + p] = sum;
            }
        }
    });

    SweepResult result{ValueTable(numPrices, maxQueue), 0.0};
    std::vector<double> chunkDelta(maxQueue + 1, 0.0);
    parallel_for(maxQueue + 1, config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            double localDelta = 0.0;
            for (std::size_t p = 0; p < numPrices; ++p) {
                const auto before = values.actions(q, p);
                auto after = result.values.actions(q, p);
                for (std::size_t a = 0; a <= q; ++a) {
                    const std::size_t next = q - a + 1;
                    if (next > maxQueue) {
                        after[a] = blocked;
                        continue;
                    }
                    const auto left = static_cast<double>(q - a);
                    const double cost = prices[p] * static_cast<double>(a) + c * left * left;
                    const double target = cost + delta * expected[next * numPrices + p];
                    after[a] = (1.0 - alpha) * before[a] + alpha * target;
                    localDelta = std::max(localDelta, std::abs(after[a] - before[a]));
                }
            }
            chunkDelta[q] = localDelta;
        }
    });
    result.maxDelta = *std::max_element(chunkDelta.begin(), chunkDelta.end());
    return result;
}

PolicyTable extract_policy(const ValueTable& values) {
    PolicyTable policy(values.num_prices(), values.max_queue());
    for (std::size_t q = 0; q <= values.max_queue(); ++q) {
        for (std::size_t p = 0; p < values.num_prices(); ++p) {
            const auto row = values.actions(q, p);
            std::size_t best = 0;
            for (std::size_t a = 1; a <= q; ++a) {
                if (row[a] <= row[best]) {
                    best = a;
                }
            }
            policy.at(q, p) = static_cast<std::uint32_t>(best);
        }
    }
    return policy;
}

SolveResult solve(const SolverConfig& config, const PriceGrid& grid, const TransitionKernel& kernel) {
    auto [values, policy] = init_tables(config, grid);
    if (kernel.size() != config.numPrices) {
        throw std::invalid_argument("kernel size does not match the solver's price count");
    }
    SolveResult result;
    double delta = std::numeric_limits<double>::infinity();
    std::size_t iteration = 0;
    while (iteration < config.maxIterations) {
        auto step = sweep(values, policy, kernel, grid, config);
        values = std::move(step.values);
        policy = extract_policy(values);
        delta = step.maxDelta;
        ++iteration;
        if (delta < config.epsilon) {
            break;
        }
    }
    result.values = std::move(values);
    result.policy = std::move(policy);
    result.iterations = iteration;
    result.finalDelta = delta;
    result.converged = delta < config.epsilon;
    return result;
}

std::vector<StatePair> monotonicity_check(const PolicyTable& policy, std::optional<std::size_t> priceLimit) {
    const std::size_t limit = std::min(priceLimit.value_or(policy.num_prices()), policy.num_prices());
    std::vector<StatePair> violations;
    for (std::size_t q = 0; q <= policy.max_queue(); ++q) {
        for (std::size_t p = 0; p < limit; ++p) {
            if (q + 1 <= policy.max_queue() && policy.at(q + 1, p) < policy.at(q, p)) {
                violations.push_back({q, p, q + 1, p});
            }
            if (p + 1 < limit && policy.at(q, p + 1) > policy.at(q, p)) {
                violations.push_back({q, p, q, p + 1});
            }
        }
    }
    return violations;
}

namespace {

bool posts_everything(const PolicyTable& policy, std::size_t p) {
    for (std::size_t q = 0; q <= policy.max_queue(); ++q) {
        if (policy.at(q, p) != q) {
            return false;
        }
    }
    return true;
}

}  // namespace

ThresholdSummary analyze_thresholds(const PolicyTable& policy, const PriceGrid& grid,
                                    const ThresholdOptions& options) {
    grid.validate();
    if (grid.numPoints != policy.num_prices()) {
        throw std::invalid_argument("price grid does not match the policy table");
    }
    const std::size_t numPrices = policy.num_prices();
    const std::size_t maxQueue = policy.max_queue();
    const auto excluded = static_cast<std::size_t>(
        std::ceil(std::clamp(options.excludeTopFraction, 0.0, 1.0) * static_cast<double>(numPrices)));
    const std::size_t limit = numPrices - std::min(excluded, numPrices - 1);

    ThresholdSummary summary;
    std::size_t firstNonPosting = 0;
    while (firstNonPosting < numPrices && posts_everything(policy, firstNonPosting)) {
        ++firstNonPosting;
    }
    if (firstNonPosting > 0) {
        summary.thresholdPriceIndex = firstNonPosting - 1;
    }
    summary.thresholdPrice = firstNonPosting < numPrices ? index_to_price(grid, firstNonPosting) : grid.pMax;
    summary.firstAnalyzedIndex = firstNonPosting;
    summary.analyzedPriceRows = limit;

    std::size_t consistent = 0;
    for (std::size_t p = 0; p < std::min(firstNonPosting, limit); ++p) {
        consistent += maxQueue + 1;
    }
    summary.checkedStates = consistent;

    double sumYs = 0.0, sumSs = 0.0, sumYx = 0.0, sumXx = 0.0;
    std::vector<std::pair<double, double>> points;  // (price offset, T_Q)
    for (std::size_t p = firstNonPosting; p < limit; ++p) {
        std::size_t threshold = 0;
        for (std::size_t q = 0; q <= maxQueue; ++q) {
            if (policy.at(q, p) == 0) {
                threshold = q;
            }
        }
        summary.queueThresholds.push_back(threshold);

        for (std::size_t q = 0; q <= maxQueue; ++q) {
            const bool hold = q <= threshold;
            const auto expected = static_cast<std::uint32_t>(hold ? 0 : q - threshold);
            const auto actual = policy.at(q, p);
            ++summary.checkedStates;
            if (actual == expected) {
                ++consistent;
            } else {
                summary.violations.push_back(
                    {q, p, hold ? ThresholdRule::holdBelow : ThresholdRule::postExcess, expected, actual});
            }
        }

        const double x = index_to_price(grid, p) - summary.thresholdPrice;
        const double s = std::sqrt(std::max(0.0, x));
        const auto y = static_cast<double>(threshold);
        sumYs += y * s;
        sumSs += s * s;
        sumYx += y * x;
        sumXx += x * x;
        points.emplace_back(x, y);
    }

    if (summary.checkedStates > 0) {
        summary.consistentFraction =
            static_cast<double>(consistent) / static_cast<double>(summary.checkedStates);
    }
    summary.structureOk = 1.0 - summary.consistentFraction <= options.tolerance;

    if (sumSs > 0.0 && sumYs > 0.0) {
        const double slope = sumYs / sumSs;
        const double linearSlope = sumYx / sumXx;
        double sq = 0.0, lin = 0.0;
        for (const auto& [x, y] : points) {
            const double rs = y - slope * std::sqrt(std::max(0.0, x));
            const double rl = y - linearSlope * x;
            sq += rs * rs;
            lin += rl * rl;
        }
        const auto n = static_cast<double>(points.size());
        summary.fittedD = 1.0 / slope;
        summary.fitResidual = std::sqrt(sq / n);
        summary.linearResidual = std::sqrt(lin / n);
    }
    return summary;
}

}  // namespace batchpost
