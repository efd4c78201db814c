#include "batchpost/price_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "batchpost/core.hpp"
#include "batchpost/parallel.hpp"

namespace batchpost {

namespace {

constexpr double kProbTolerance = 1e-9;

}  // namespace

void FactorDistribution::validate() const {
    if (factors.empty() || factors.size() != probs.size()) {
        throw std::invalid_argument("factor distribution needs equally sized, non-empty factors and probs");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (!(factors[i] > 0.0) || !std::isfinite(factors[i])) {
            throw std::invalid_argument("factors must be positive and finite");
        }
        if (i > 0 && !(factors[i] > factors[i - 1])) {
            throw std::invalid_argument("factors must be strictly ascending");
        }
        if (!(probs[i] >= 0.0)) {
            throw std::invalid_argument("probabilities must be non-negative");
        }
        total += probs[i];
    }
    if (std::abs(total - 1.0) > kProbTolerance) {
        throw std::invalid_argument("probabilities must sum to 1");
    }
}

double FactorDistribution::mean() const {
    return std::inner_product(factors.begin(), factors.end(), probs.begin(), 0.0);
}

double FactorDistribution::mean_log() const {
    double m = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        m += probs[i] * std::log(factors[i]);
    }
    return m;
}

double FactorDistribution::variance_log() const {
    const double m = mean_log();
    double v = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const double d = std::log(factors[i]) - m;
        v += probs[i] * d * d;
    }
    return v;
}

double FactorDistribution::median() const {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        cumulative += probs[i];
        if (cumulative >= 0.5) {
            return factors[i];
        }
    }
    return factors.back();
}

void PriceGrid::validate() const {
    if (numPoints < 2) {
        throw std::invalid_argument("price grid needs at least two points");
    }
    if (!(pMin > 0.0) || !(pMax > pMin) || !std::isfinite(pMax)) {
        throw std::invalid_argument("price grid needs 0 < pMin < pMax");
    }
}

PriceGrid PriceGrid::full_scale() { return PriceGrid{400, 15.0, 6000.0}; }

std::size_t price_to_index(const PriceGrid& grid, double price) {
    const double position = (price - grid.pMin) / grid.spacing();
    if (!(position > 0.0)) {
        return 0;
    }
    const double last = static_cast<double>(grid.numPoints - 1);
    if (position >= last) {
        return grid.numPoints - 1;
    }
    return static_cast<std::size_t>(std::llround(position));
}

double index_to_price(const PriceGrid& grid, std::size_t index) {
    if (index >= grid.numPoints) {
        throw std::out_of_range("price index " + std::to_string(index) + " outside grid");
    }
    if (index == grid.numPoints - 1) {
        return grid.pMax;
    }
    return grid.pMin + grid.spacing() * static_cast<double>(index);
}

void TransitionKernel::validate() const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double total = 0.0;
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            const auto& entry = rows[r][k];
            if (entry.index >= rows.size()) {
                throw std::invalid_argument("kernel row " + std::to_string(r) + " points outside the grid");
            }
            if (k > 0 && !(entry.index > rows[r][k - 1].index)) {
                throw std::invalid_argument("kernel row " + std::to_string(r) + " is not sorted");
            }
            if (!(entry.prob >= 0.0)) {
                throw std::invalid_argument("kernel row " + std::to_string(r) + " has a negative entry");
            }
            total += entry.prob;
        }
        if (std::abs(total - 1.0) > kProbTolerance) {
            throw std::invalid_argument("kernel row " + std::to_string(r) + " does not sum to 1");
        }
    }
}

void PriceSeries::validate() const {
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw DataError("price at position " + std::to_string(i) + " is not positive");
        }
    }
    if (!timestamps.empty()) {
        if (timestamps.size() != prices.size()) {
            throw DataError("timestamps and prices differ in length");
        }
        for (std::size_t i = 1; i < timestamps.size(); ++i) {
            if (timestamps[i] <= timestamps[i - 1]) {
                throw DataError("timestamps must be strictly increasing (position " + std::to_string(i) + ")");
            }
        }
    }
}

FactorDistribution block_factor_distribution(std::size_t nBins) {
    if (nBins < 2) {
        throw std::invalid_argument("block factor distribution needs at least two bins");
    }
    FactorDistribution dist;
    dist.factors.resize(nBins);
    dist.probs.assign(nBins, 1.0 / static_cast<double>(nBins));
    const double width = (kBlockFactorMax - kBlockFactorMin) / static_cast<double>(nBins);
    for (std::size_t i = 0; i < nBins; ++i) {
        dist.factors[i] = kBlockFactorMin + width * (static_cast<double>(i) + 0.5);
    }
    return dist;
}

namespace {

// Mass and first moment (mass * conditional mean factor) per log cell.
struct MomentCells {
    std::vector<double> mass;
    std::vector<double> moment;
};

MomentCells convolve(const MomentCells& lhs, const MomentCells& rhs) {
    MomentCells out;
    const std::size_t n = lhs.mass.size() + rhs.mass.size() - 1;
    out.mass.assign(n, 0.0);
    out.moment.assign(n, 0.0);
    for (std::size_t i = 0; i < lhs.mass.size(); ++i) {
        const double m = lhs.mass[i];
        const double mo = lhs.moment[i];
        if (m == 0.0) {
            continue;
        }
        double* outMass = out.mass.data() + i;
        double* outMoment = out.moment.data() + i;
        for (std::size_t j = 0; j < rhs.mass.size(); ++j) {
            outMass[j] += m * rhs.mass[j];
            outMoment[j] += mo * rhs.moment[j];
        }
    }
    return out;
}

}  // namespace

FactorDistribution minute_factor_distribution(std::size_t nSteps, std::size_t nBins,
                                              std::size_t convolutionBins) {
    if (nSteps < 1) {
        throw std::invalid_argument("minute factor distribution needs at least one step");
    }
    if (nBins < 2 || convolutionBins < 2) {
        throw std::invalid_argument("minute factor distribution needs at least two bins");
    }
    const double logMin = std::log(kBlockFactorMin);
    const double logMax = std::log(kBlockFactorMax);
    const double cell = (logMax - logMin) / static_cast<double>(convolutionBins);
    const double width = kBlockFactorMax - kBlockFactorMin;

    MomentCells step;
    step.mass.resize(convolutionBins);
    step.moment.resize(convolutionBins);
    for (std::size_t i = 0; i < convolutionBins; ++i) {
        const double lo = i == 0 ? kBlockFactorMin : std::exp(logMin + cell * static_cast<double>(i));
        const double hi = i + 1 == convolutionBins ? kBlockFactorMax
                                                   : std::exp(logMin + cell * static_cast<double>(i + 1));
        step.mass[i] = (hi - lo) / width;
        step.moment[i] = step.mass[i] * 0.5 * (lo + hi);
    }

    MomentCells product = step;
    for (std::size_t s = 1; s < nSteps; ++s) {
        product = convolve(product, step);
    }

    const double n = static_cast<double>(nSteps);
    const double outLo = n * logMin;
    const double outWidth = n * (logMax - logMin) / static_cast<double>(nBins);
    std::vector<double> mass(nBins, 0.0);
    std::vector<double> moment(nBins, 0.0);
    for (std::size_t k = 0; k < product.mass.size(); ++k) {
        if (product.mass[k] <= 0.0) {
            continue;
        }
        const double representative = product.moment[k] / product.mass[k];
        const double position = (std::log(representative) - outLo) / outWidth;
        const auto bin = static_cast<std::size_t>(
            std::clamp(std::floor(position), 0.0, static_cast<double>(nBins - 1)));
        mass[bin] += product.mass[k];
        moment[bin] += product.moment[k];
    }

    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    FactorDistribution dist;
    for (std::size_t b = 0; b < nBins; ++b) {
        if (mass[b] > 0.0) {
            dist.factors.push_back(moment[b] / mass[b]);
            dist.probs.push_back(mass[b] / total);
        }
    }
    return dist;
}

FactorDistribution empirical_factor_distribution(const PriceSeries& series, std::size_t nBins) {
    if (series.size() < 2) {
        throw DataError("empirical factor distribution needs at least two prices");
    }
    if (nBins < 1) {
        throw std::invalid_argument("empirical factor distribution needs at least one bin");
    }
    std::vector<double> ratios(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        ratios[i] = series.prices[i + 1] / series.prices[i];
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double rMin = *lo;
    const double rMax = *hi;

    FactorDistribution dist;
    if (!(rMax > rMin)) {
        dist.factors = {rMin};
        dist.probs = {1.0};
        return dist;
    }
    const double width = (rMax - rMin) / static_cast<double>(nBins);
    std::vector<double> count(nBins, 0.0);
    std::vector<double> sum(nBins, 0.0);
    for (const double r : ratios) {
        const auto bin = std::min(nBins - 1, static_cast<std::size_t>((r - rMin) / width));
        count[bin] += 1.0;
        sum[bin] += r;
    }
    const auto total = static_cast<double>(ratios.size());
    for (std::size_t b = 0; b < nBins; ++b) {
        if (count[b] > 0.0) {
            dist.factors.push_back(sum[b] / count[b]);
            dist.probs.push_back(count[b] / total);
        }
    }
    return dist;
}

TransitionKernel build_kernel(const PriceGrid& grid, const FactorDistribution& dist, unsigned threads) {
    grid.validate();
    dist.validate();
    TransitionKernel kernel;
    kernel.rows.resize(grid.numPoints);
    parallel_for(grid.numPoints, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> dense(grid.numPoints);
        for (std::size_t row = begin; row < end; ++row) {
            std::fill(dense.begin(), dense.end(), 0.0);
            const double price = index_to_price(grid, row);
            double total = 0.0;
            for (std::size_t k = 0; k < dist.factors.size(); ++k) {
                dense[price_to_index(grid, price * dist.factors[k])] += dist.probs[k];
                total += dist.probs[k];
            }
            auto& out = kernel.rows[row];
            for (std::size_t j = 0; j < grid.numPoints; ++j) {
                if (dense[j] > 0.0) {
                    out.push_back({j, dense[j] / total});
                }
            }
        }
    });
    return kernel;
}

PriceSeries sample_path(const FactorDistribution& dist, double p0, std::size_t length,
                        std::uint64_t seed, double floor) {
    dist.validate();
    if (!(p0 > 0.0)) {
        throw std::invalid_argument("starting price must be positive");
    }
    if (length < 1) {
        throw std::invalid_argument("path length must be at least 1");
    }
    std::vector<double> cdf(dist.probs.size());
    std::partial_sum(dist.probs.begin(), dist.probs.end(), cdf.begin());
    cdf.back() = 1.0;

    std::mt19937_64 rng(seed);
    PriceSeries series;
    series.prices.resize(length);
    series.prices[0] = p0;
    for (std::size_t i = 1; i < length; ++i) {
        // 53 random bits mapped to [0, 1); independent of the standard
        // library's distribution implementations.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto pick = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
            cdf.size() - 1);
        series.prices[i] = std::max(floor, series.prices[i - 1] * dist.factors[pick]);
    }
    return series;
}

}  // namespace batchpost
