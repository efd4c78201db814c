#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "batchpost/price_model.hpp"

namespace batchpost {

enum class FeeUnit { wei, gwei };

/// Columns to read from a base-fee CSV. An empty timestamp column means the
/// file carries prices only.
struct CsvSchema {
    std::string timestampColumn = "timestamp";
    std::string feeColumn = "price";
    FeeUnit unit = FeeUnit::gwei;
};

FeeUnit parse_fee_unit(const std::string& text);

/// Histogram over cells [binEdges[k], binEdges[k+1]).
struct Histogram {
    std::vector<double> binEdges;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
};

/// Parses a header-first CSV. Rows are numbered by file line (header = 1) in
/// every diagnostic. If the timestamp column is named but missing from the
/// header the series is loaded without timestamps only when the name is the
/// default "timestamp"; an explicitly requested column must exist.
PriceSeries read_csv(std::istream& in, const CsvSchema& schema);
PriceSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Writes `timestamp,price` (or just `price` without timestamps) in GWEI with
/// round-trip precision.
void write_csv(std::ostream& out, const PriceSeries& series);
void write_csv(const std::filesystem::path& path, const PriceSeries& series);

/// Keeps every `stride`-th observation starting at index 0.
PriceSeries resample_per_minute(const PriceSeries& blockSeries, std::size_t stride = 5);

/// Histogram of consecutive price ratios with cells aligned to multiples of
/// `binWidth`, covering the observed range.
Histogram ratio_histogram(const PriceSeries& series, double binWidth);

/// Nearest-rank percentile of the prices; q in [0, 1].
double percentile(const PriceSeries& series, double q);

/// Divides every price by `factor` (e.g. to map raw GWEI onto grid units).
PriceSeries scale_series(const PriceSeries& series, double factor);

}  // namespace batchpost
