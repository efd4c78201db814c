#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "batchpost/backtest.hpp"
#include "batchpost/policies.hpp"

namespace batchpost {

/// Cartesian product of parameter values for one policy family. Parameter
/// names per family, in iteration order (first name varies slowest):
///   trivial: none; priceMin: T; qThreshold: Tp, d;
///   arbStep / arbSmooth: e, ap, ut.
struct ParamGrid {
    std::string family;
    std::vector<std::pair<std::string, std::vector<double>>> params;
    QThresholdVariant variant = QThresholdVariant::literal;

    std::size_t size() const;
};

std::vector<std::string> family_parameters(const std::string& family);

/// Builds and validates a policy of `family` from named parameter values.
PolicySpec make_policy(const std::string& family, const std::vector<std::pair<std::string, double>>& values,
                       QThresholdVariant variant = QThresholdVariant::literal);

struct SweepRow {
    std::vector<std::pair<std::string, double>> params;
    std::optional<PolicySpec> spec;
    std::optional<BacktestReport> report;
    std::string error;  // set when the grid point failed

    bool ok() const { return report.has_value(); }
};

struct ParetoFrontier {
    std::vector<std::size_t> members;  // indices into the sweep rows, by publishing cost
};

/// One back-test per grid point in lexicographic grid order. A failing point
/// yields a row with `error` set; the rest of the sweep continues.
std::vector<SweepRow> grid_sweep(const ParamGrid& grid, const PriceSeries& series, const BacktestConfig& config,
                                 unsigned threads = 1);

/// Rows not dominated in (publishingCost, delayCost). Among rows with
/// identical costs only the earliest is kept. Failed rows are ignored.
ParetoFrontier pareto(const std::vector<SweepRow>& rows);

/// Percentage saved on publishing cost relative to the trivial policy.
double improvement_vs_trivial(const BacktestReport& report, const BacktestReport& trivialReport);

}  // namespace batchpost
