#include "batchpost/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "batchpost/ingest.hpp"

namespace batchpost {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(name) + " must be positive");
    }
}

}  // namespace

void validate_policy(const PolicySpec& spec) {
    std::visit(Overloaded{
                   [](const TrivialPolicy&) {},
                   [](const PriceMinPolicy& p) { require_positive(p.threshold, "price threshold T"); },
                   [](const QThresholdPolicy& p) {
                       require_positive(p.thresholdPrice, "threshold price Tp");
                       require_positive(p.d, "threshold divisor d");
                   },
                   [](const ArbPolicy& p) {
                       require_positive(p.ap, "acceptable price ap");
                       if (!(p.e > 1.0) || !std::isfinite(p.e)) {
                           throw std::invalid_argument("escalation factor e must exceed 1");
                       }
                       if (!(p.ut >= 1.0) || !std::isfinite(p.ut)) {
                           throw std::invalid_argument("update time ut must be at least 1");
                       }
                   },
                   [](const LearnedPolicy& p) {
                       if (!p.table) {
                           throw std::invalid_argument("learned policy has no table");
                       }
                       p.grid.validate();
                       if (p.grid.numPoints != p.table->num_prices()) {
                           throw std::invalid_argument("learned policy grid does not match its table");
                       }
                   },
               },
               spec);
}

std::string policy_kind(const PolicySpec& spec) {
    return std::visit(Overloaded{
                          [](const TrivialPolicy&) -> std::string { return "trivial"; },
                          [](const PriceMinPolicy&) -> std::string { return "priceMin"; },
                          [](const QThresholdPolicy&) -> std::string { return "qThreshold"; },
                          [](const ArbPolicy& p) -> std::string {
                              return p.mode == ArbMode::step ? "arbStep" : "arbSmooth";
                          },
                          [](const LearnedPolicy&) -> std::string { return "learned"; },
                      },
                      spec);
}

std::size_t q_threshold_decide(double thresholdPrice, double d, QThresholdVariant variant, double price,
                               std::size_t queueLen) {
    if (price < thresholdPrice) {
        return queueLen;
    }
    const auto keep = static_cast<std::size_t>(std::floor(std::sqrt(price - thresholdPrice) / d)) +
                      (variant == QThresholdVariant::literal ? 1 : 0);
    return queueLen > keep ? queueLen - keep : 0;
}

double arb_acceptable_price(double ap, double e, double ut, Round age, ArbMode mode) {
    const double periods = static_cast<double>(age) / ut;
    return ap * std::pow(e, mode == ArbMode::step ? std::floor(periods) : periods);
}

std::size_t arb_decide(const ArbPolicy& policy, double price, const QueueView& queue) {
    std::size_t postable = 0;
    while (postable < queue.size() &&
           arb_acceptable_price(policy.ap, policy.e, policy.ut, queue.age(postable), policy.mode) >= price) {
        ++postable;
    }
    for (std::size_t k = postable; k < queue.size(); ++k) {
        if (arb_acceptable_price(policy.ap, policy.e, policy.ut, queue.age(k), policy.mode) >= price) {
            throw std::logic_error("postable batches do not form a FIFO prefix");
        }
    }
    return postable;
}

std::size_t learned_decide(const PolicyTable& table, const PriceGrid& grid, double price, std::size_t queueLen) {
    const std::size_t row = std::min(queueLen, table.max_queue());
    const std::size_t excess = queueLen - row;
    return table.at(row, price_to_index(grid, price)) + excess;
}

std::size_t decide(const PolicySpec& spec, double price, const QueueView& queue) {
    const std::size_t queueLen = queue.size();
    return std::visit(Overloaded{
                          [&](const TrivialPolicy&) { return queueLen; },
                          [&](const PriceMinPolicy& p) { return price <= p.threshold ? queueLen : 0; },
                          [&](const QThresholdPolicy& p) {
                              return q_threshold_decide(p.thresholdPrice, p.d, p.variant, price, queueLen);
                          },
                          [&](const ArbPolicy& p) { return arb_decide(p, price, queue); },
                          [&](const LearnedPolicy& p) { return learned_decide(*p.table, p.grid, price, queueLen); },
                      },
                      spec);
}

double auto_threshold_price(const PriceSeries& series, double quantile) {
    return percentile(series, quantile);
}

}  // namespace batchpost
