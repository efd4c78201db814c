#include "batchpost/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "batchpost/core.hpp"

namespace batchpost {

namespace {

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                              : comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

std::string where(std::size_t row, const std::string& column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_double(const std::string& field, std::size_t row, const std::string& column) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw DataError("parse error at " + where(row, column) + ": '" + field + "' is not a number");
    }
    return value;
}

std::int64_t parse_timestamp(const std::string& field, std::size_t row, const std::string& column) {
    std::int64_t value = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ptr == end && ec == std::errc{} && !field.empty()) {
        return value;
    }
    // Accept integral values written in floating notation, e.g. 1.6e9.
    const double asDouble = parse_double(field, row, column);
    if (asDouble != std::floor(asDouble) || std::abs(asDouble) > 9.2e18) {
        throw DataError("parse error at " + where(row, column) + ": timestamp must be an integer");
    }
    return static_cast<std::int64_t>(asDouble);
}

}  // namespace

FeeUnit parse_fee_unit(const std::string& text) {
    if (text == "wei") {
        return FeeUnit::wei;
    }
    if (text == "gwei") {
        return FeeUnit::gwei;
    }
    throw DataError("unknown fee unit '" + text + "' (expected wei or gwei)");
}

PriceSeries read_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (!trim(line).empty()) {
            header = split_fields(line);
            break;
        }
    }
    if (header.empty()) {
        throw DataError("empty file: no header row");
    }

    auto find_column = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto feeIndex = find_column(schema.feeColumn);
    if (feeIndex < 0) {
        throw DataError("header has no fee column '" + schema.feeColumn + "'");
    }
    std::ptrdiff_t tsIndex = -1;
    if (!schema.timestampColumn.empty()) {
        tsIndex = find_column(schema.timestampColumn);
        if (tsIndex < 0 && schema.timestampColumn != CsvSchema{}.timestampColumn) {
            throw DataError("header has no timestamp column '" + schema.timestampColumn + "'");
        }
    }
    const double scale = schema.unit == FeeUnit::wei ? 1e-9 : 1.0;

    PriceSeries series;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError("parse error at row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        const double fee = parse_double(fields[feeIndex], row, schema.feeColumn) * scale;
        if (!(fee > 0.0) || !std::isfinite(fee)) {
            throw DataError("non-positive fee at " + where(row, schema.feeColumn));
        }
        if (tsIndex >= 0) {
            const auto ts = parse_timestamp(fields[tsIndex], row, schema.timestampColumn);
            if (!series.timestamps.empty() && ts <= series.timestamps.back()) {
                throw DataError("timestamps must increase strictly at " + where(row, schema.timestampColumn));
            }
            series.timestamps.push_back(ts);
        }
        series.prices.push_back(fee);
    }
    if (series.empty()) {
        throw DataError("empty file: header but no data rows");
    }
    return series;
}

PriceSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    try {
        return read_csv(in, schema);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_csv(std::ostream& out, const PriceSeries& series) {
    const bool withTimestamps = !series.timestamps.empty();
    out << (withTimestamps ? "timestamp,price\n" : "price\n");
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (withTimestamps) {
            out << series.timestamps[i] << ',';
        }
        out << series.prices[i] << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

void write_csv(const std::filesystem::path& path, const PriceSeries& series) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_csv(out, series);
}

PriceSeries resample_per_minute(const PriceSeries& blockSeries, std::size_t stride) {
    if (stride < 1) {
        throw std::invalid_argument("resampling stride must be at least 1");
    }
    PriceSeries out;
    for (std::size_t i = 0; i < blockSeries.size(); i += stride) {
        out.prices.push_back(blockSeries.prices[i]);
        if (!blockSeries.timestamps.empty()) {
            out.timestamps.push_back(blockSeries.timestamps[i]);
        }
    }
    return out;
}

Histogram ratio_histogram(const PriceSeries& series, double binWidth) {
    if (series.size() < 2) {
        throw DataError("ratio histogram needs at least two prices");
    }
    if (!(binWidth > 0.0)) {
        throw std::invalid_argument("histogram bin width must be positive");
    }
    std::vector<double> ratios(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        ratios[i] = series.prices[i + 1] / series.prices[i];
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    auto first = static_cast<long long>(std::floor(*lo / binWidth));
    auto last = static_cast<long long>(std::floor(*hi / binWidth)) + 1;
    // Edge rounding may put the extremes just outside [k * w, (k + 1) * w).
    if (static_cast<double>(first) * binWidth > *lo) {
        --first;
    }
    if (static_cast<double>(last) * binWidth <= *hi) {
        ++last;
    }

    Histogram hist;
    for (long long k = first; k <= last; ++k) {
        hist.binEdges.push_back(static_cast<double>(k) * binWidth);
    }
    hist.counts.assign(hist.binEdges.size() - 1, 0);
    for (const double r : ratios) {
        const auto it = std::upper_bound(hist.binEdges.begin(), hist.binEdges.end(), r);
        const auto bin = static_cast<std::size_t>(it - hist.binEdges.begin()) - 1;
        ++hist.counts[std::min(bin, hist.counts.size() - 1)];
    }
    hist.total = ratios.size();
    return hist;
}

double percentile(const PriceSeries& series, double q) {
    if (series.empty()) {
        throw DataError("percentile of an empty series");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("percentile rank must lie in [0, 1]");
    }
    std::vector<double> sorted = series.prices;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
    return sorted[std::clamp<std::size_t>(rank, 1, n) - 1];
}

PriceSeries scale_series(const PriceSeries& series, double factor) {
    if (!(factor > 0.0)) {
        throw std::invalid_argument("scale factor must be positive");
    }
    PriceSeries out = series;
    for (auto& p : out.prices) {
        p /= factor;
    }
    return out;
}

}  // namespace batchpost
