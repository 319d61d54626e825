#pragma once

#include <cstddef>
#include <vector>

namespace formeclust {

/// Minimum-cost perfect assignment on a square cost matrix (shortest
/// augmenting paths with potentials, O(n^3)). Returns the column assigned to
/// each row. Rectangular problems are padded with zeros by the caller.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<long long>>& cost);

}  // namespace formeclust
