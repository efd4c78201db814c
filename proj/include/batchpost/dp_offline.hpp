#pragma once

#include <cstddef>
#include <vector>

namespace batchpost {

/// Finite horizon with prices known in advance. Batch i arrives in round i
/// and whatever is still queued after the last round's decision is not
/// allowed: the last round flushes the queue.
struct DPInstance {
    std::vector<double> prices;
    double c = 1.0;

    void validate() const;
};

struct Schedule {
    std::vector<std::size_t> nPost;
    double totalCost = 0.0;
};

inline constexpr std::size_t kBruteForceMaxRounds = 12;

/// Exact optimum in O(n^3). best[i][j] is the least cost of the first i
/// rounds having posted exactly j batches; round i+1 moves from (i, j) to
/// (i+1, j+take) at cost take * price[i] + c * (i+1-j-take)^2. The answer is
/// best[n][n]; the schedule is recovered by backtracking the recorded takes.
/// Ties prefer the larger take.
Schedule solve_fixed_prices(const DPInstance& instance);

/// Enumerates every feasible schedule (n <= 12) and returns a cheapest one.
Schedule brute_force_schedule(const DPInstance& instance);

/// Recomputes the cost of a schedule round by round. Throws InvalidAction if
/// it posts batches that do not exist yet or leaves any unposted.
double schedule_cost(const DPInstance& instance, const std::vector<std::size_t>& nPost);

/// Fraction of rounds that post nothing or the entire queue.
double zero_or_all_fraction(const Schedule& schedule);

}  // namespace batchpost
