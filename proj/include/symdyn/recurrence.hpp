#pragma once

// Multiple recurrence of the identity ball: the smallest n with
// sigma^{jn} x in B_{1/m}(x) for every j = 1 .. d.

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"
#include "symdyn/symbolic.hpp"

namespace symdyn::rec {

struct RecurrenceResult {
    std::size_t d = 0;
    std::size_t depth = 0;            // m
    double epsilon = 0.0;             // 1/m
    std::optional<std::size_t> n;     // none: no witness n <= horizon
    std::vector<double> gaps;         // d(sigma^{jn} x, x) for j = 1 .. d, "<= 1/K" read as 1/K
    std::size_t horizon = 0;
};

// Exhaustive search over n in [1, N]. Needs d*N + K symbols and K > m.
RecurrenceResult multi_recurrence_search(const SymbolicSequence& x, std::size_t d, std::size_t m,
                                         std::size_t horizon, std::size_t depth_cap = kDefaultDepthCap);

nlohmann::json to_json(const RecurrenceResult& r);

}  // namespace symdyn::rec
