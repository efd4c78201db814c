#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace batchpost {

using Round = std::uint64_t;

/// Raised when a posting decision violates 0 <= nPost <= queueLen.
class InvalidAction : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed or inconsistent input data (files, series, alignments).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Weights of the per-round objective.
///
/// `c` scales the quadratic delay term and `delta` discounts the cost of
/// the next round relative to the current one.
struct CostParams {
    double c = 1.0;
    double delta = 0.99;

    void validate() const;
};

/// Cost of one round split into its two components.
struct RoundCost {
    double posting = 0.0;
    double delay = 0.0;
    double total = 0.0;
};

struct SimState {
    std::size_t queueLen = 0;
    double price = 0.0;
};

struct BatchRecord {
    Round createdRound = 0;
    std::optional<Round> postedRound;
};

/// Cost of posting `nPost` of `queueLen` queued batches at `price`:
/// posting = price * nPost, delay = c * (queueLen - nPost)^2.
RoundCost round_cost(double price, std::size_t queueLen, std::size_t nPost, double c);

/// Queue length at the start of the next round, including its new arrival.
std::size_t step_queue(std::size_t queueLen, std::size_t nPost);

bool validate_decision(const SimState& state, std::size_t nPost) noexcept;

/// One-round argmin of round_cost over nPost in [0, queueLen]; ties go to the
/// larger action.
std::size_t myopic_action(double price, std::size_t queueLen, double c);

}  // namespace batchpost
