#include "batchpost/core.hpp"

#include <cmath>
#include <string>

namespace batchpost {

void CostParams::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("cost weight c must be positive and finite");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("discount delta must lie in (0, 1)");
    }
}

namespace {

void require_valid(std::size_t queueLen, std::size_t nPost) {
    if (nPost > queueLen) {
        throw InvalidAction("cannot post " + std::to_string(nPost) + " batches from a queue of " +
                            std::to_string(queueLen));
    }
}

}  // namespace

RoundCost round_cost(double price, std::size_t queueLen, std::size_t nPost, double c) {
    require_valid(queueLen, nPost);
    const auto remaining = static_cast<double>(queueLen - nPost);
    RoundCost cost;
    cost.posting = price * static_cast<double>(nPost);
    cost.delay = c * remaining * remaining;
    cost.total = cost.posting + cost.delay;
    return cost;
}

std::size_t step_queue(std::size_t queueLen, std::size_t nPost) {
    require_valid(queueLen, nPost);
    return queueLen - nPost + 1;
}

bool validate_decision(const SimState& state, std::size_t nPost) noexcept {
    return nPost <= state.queueLen;
}

std::size_t myopic_action(double price, std::size_t queueLen, double c) {
    std::size_t best = 0;
    double bestCost = round_cost(price, queueLen, 0, c).total;
    for (std::size_t a = 1; a <= queueLen; ++a) {
        const double cost = round_cost(price, queueLen, a, c).total;
        if (cost <= bestCost) {
            best = a;
            bestCost = cost;
        }
    }
    return best;
}

}  // namespace batchpost
