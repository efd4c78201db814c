#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace batchpost {

/// Discrete law of a multiplicative price change: price_next = price * factor.
struct FactorDistribution {
    std::vector<double> factors;  // strictly ascending, > 0
    std::vector<double> probs;

    void validate() const;
    double mean() const;
    double mean_log() const;
    double variance_log() const;
    /// Smallest factor whose cumulative probability reaches 1/2.
    double median() const;
};

/// Bounds of a single block's base-fee move: the fee changes by at most 1/8.
inline constexpr double kBlockFactorMin = 0.875;
inline constexpr double kBlockFactorMax = 1.125;
inline constexpr std::size_t kDefaultConvolutionBins = 4096;

/// Evenly spaced price points in [pMin, pMax].
struct PriceGrid {
    std::size_t numPoints = 2;
    double pMin = 1.0;
    double pMax = 2.0;

    void validate() const;
    double spacing() const { return (pMax - pMin) / static_cast<double>(numPoints - 1); }

    /// 400 points spanning a 6000 GWEI range, i.e. one grid step per 15 GWEI.
    static PriceGrid full_scale();
};

std::size_t price_to_index(const PriceGrid& grid, double price);
double index_to_price(const PriceGrid& grid, std::size_t index);

struct KernelEntry {
    std::size_t index = 0;
    double prob = 0.0;

    bool operator==(const KernelEntry&) const = default;
};

/// Row i holds the distribution of the next price index given price index i,
/// sorted by index with no duplicate or zero entries.
struct TransitionKernel {
    std::vector<std::vector<KernelEntry>> rows;

    std::size_t size() const { return rows.size(); }
    void validate() const;
};

struct PriceSeries {
    std::vector<std::int64_t> timestamps;  // empty, or one per price
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }
    bool empty() const { return prices.empty(); }
    void validate() const;
};

/// Single-block factor law: `nBins` equal-probability atoms at the bin
/// midpoints of [0.875, 1.125].
FactorDistribution block_factor_distribution(std::size_t nBins);

/// Law of the product of `nSteps` independent block factors.
///
/// The convolution runs on a uniform log-factor grid of `convolutionBins`
/// cells per step. Every cell carries its probability mass and its
/// conditional mean factor, so the product's mean is preserved exactly
/// (E[XY] = E[X]E[Y] cell by cell). The result is re-binned into `nBins`
/// equal-width log cells over [0.875^nSteps, 1.125^nSteps], each atom placed
/// at its cell's conditional mean; empty cells are dropped.
FactorDistribution minute_factor_distribution(std::size_t nSteps = 5, std::size_t nBins = 200,
                                              std::size_t convolutionBins = kDefaultConvolutionBins);

/// Histogram of consecutive price ratios with `nBins` equal-width cells over
/// the observed ratio range; atoms sit at each cell's mean ratio.
FactorDistribution empirical_factor_distribution(const PriceSeries& series, std::size_t nBins);

/// Discretizes `dist` onto `grid`: each atom of row p goes to the grid index
/// nearest p * factor, clamped to the grid's end points. Rows are renormalized.
TransitionKernel build_kernel(const PriceGrid& grid, const FactorDistribution& dist,
                              unsigned threads = 1);

/// Multiplicative random walk p[i+1] = max(floor, p[i] * f[i]) with f drawn
/// i.i.d. from `dist`, reproducible for a given seed.
PriceSeries sample_path(const FactorDistribution& dist, double p0, std::size_t length,
                        std::uint64_t seed, double floor);

}  // namespace batchpost
