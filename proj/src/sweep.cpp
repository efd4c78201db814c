#include "batchpost/sweep.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "batchpost/parallel.hpp"

namespace batchpost {

std::size_t ParamGrid::size() const {
    std::size_t total = 1;
    for (const auto& [name, values] : params) {
        total *= values.size();
    }
    return total;
}

std::vector<std::string> family_parameters(const std::string& family) {
    if (family == "trivial") {
        return {};
    }
    if (family == "priceMin") {
        return {"T"};
    }
    if (family == "qThreshold") {
        return {"Tp", "d"};
    }
    if (family == "arbStep" || family == "arbSmooth") {
        return {"e", "ap", "ut"};
    }
    throw std::invalid_argument("unknown policy family '" + family + "'");
}

PolicySpec make_policy(const std::string& family, const std::vector<std::pair<std::string, double>>& values,
                       QThresholdVariant variant) {
    const auto names = family_parameters(family);
    auto get = [&](const std::string& name) {
        for (const auto& [key, value] : values) {
            if (key == name) {
                return value;
            }
        }
        throw std::invalid_argument("policy family '" + family + "' needs parameter '" + name + "'");
    };
    for (const auto& [key, value] : values) {
        if (std::find(names.begin(), names.end(), key) == names.end()) {
            throw std::invalid_argument("policy family '" + family + "' has no parameter '" + key + "'");
        }
    }

    PolicySpec spec;
    if (family == "trivial") {
        spec = TrivialPolicy{};
    } else if (family == "priceMin") {
        spec = PriceMinPolicy{get("T")};
    } else if (family == "qThreshold") {
        spec = QThresholdPolicy{get("Tp"), get("d"), variant};
    } else {
        spec = ArbPolicy{get("ap"), get("e"), get("ut"), family == "arbStep" ? ArbMode::step : ArbMode::smooth};
    }
    validate_policy(spec);
    return spec;
}

std::vector<SweepRow> grid_sweep(const ParamGrid& grid, const PriceSeries& series, const BacktestConfig& config,
                                 unsigned threads) {
    const auto names = family_parameters(grid.family);
    if (grid.params.size() != names.size()) {
        throw std::invalid_argument("grid for '" + grid.family + "' must list exactly its parameters");
    }
    const std::size_t total = grid.size();
    if (total == 0) {
        throw std::invalid_argument("parameter grid is empty");
    }

    std::vector<SweepRow> rows(total);
    for (std::size_t index = 0; index < total; ++index) {
        // Mixed-radix decode; the last parameter varies fastest.
        std::size_t rest = index;
        auto& params = rows[index].params;
        params.resize(grid.params.size());
        for (std::size_t k = grid.params.size(); k-- > 0;) {
            const auto& [name, values] = grid.params[k];
            params[k] = {name, values[rest % values.size()]};
            rest /= values.size();
        }
    }

    parallel_for(total, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t index = begin; index < end; ++index) {
            auto& row = rows[index];
            try {
                row.spec = make_policy(grid.family, row.params, grid.variant);
                row.report = run(*row.spec, series, config);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    });
    return rows;
}

ParetoFrontier pareto(const std::vector<SweepRow>& rows) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok()) {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = *rows[a].report;
        const auto& rb = *rows[b].report;
        if (ra.publishingCost != rb.publishingCost) {
            return ra.publishingCost < rb.publishingCost;
        }
        return ra.delayCost < rb.delayCost;
    });

    ParetoFrontier frontier;
    bool first = true;
    double bestDelay = 0.0;
    for (const std::size_t i : order) {
        const double delay = rows[i].report->delayCost;
        if (first || delay < bestDelay) {
            frontier.members.push_back(i);
            bestDelay = delay;
            first = false;
        }
    }
    return frontier;
}

double improvement_vs_trivial(const BacktestReport& report, const BacktestReport& trivialReport) {
    if (!(trivialReport.publishingCost > 0.0)) {
        throw std::invalid_argument("trivial publishing cost must be positive");
    }
    return 100.0 * (trivialReport.publishingCost - report.publishingCost) / trivialReport.publishingCost;
}

}  // namespace batchpost
