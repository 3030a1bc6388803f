#include "symdyn/recurrence.hpp"

#include <cstring>

#include "symdyn/errors.hpp"

namespace symdyn::rec {

RecurrenceResult multi_recurrence_search(const SymbolicSequence& x, std::size_t d, std::size_t m,
                                         std::size_t horizon, std::size_t depth_cap) {
    if (d == 0) throw ArgumentError("multi_recurrence_search: d must be >= 1");
    if (m == 0) throw ArgumentError("multi_recurrence_search: depth must be >= 1");
    if (horizon == 0) throw ArgumentError("multi_recurrence_search: horizon must be >= 1");
    if (depth_cap <= m) throw ArgumentError("multi_recurrence_search: depth cap must exceed m");
    const std::size_t need = d * horizon + depth_cap;
    if (x.length() < need) {
        throw HorizonError("multi_recurrence_search: " + x.generator_id() + " holds " + std::to_string(x.length()) +
                           " symbols, d*N + K = " + std::to_string(need));
    }
    RecurrenceResult r;
    r.d = d;
    r.depth = m;
    r.epsilon = 1.0 / static_cast<double>(m);
    r.horizon = horizon;

    const Symbol* data = x.buffer().data();
    for (std::size_t n = 1; n <= horizon; ++n) {
        bool ok = true;
        for (std::size_t j = 1; j <= d && ok; ++j) ok = std::memcmp(data + j * n, data, m) == 0;
        if (!ok) continue;
        r.n = n;
        const auto origin = x.view(0);
        for (std::size_t j = 1; j <= d; ++j) {
            r.gaps.push_back(metric_distance(x.view(j * n), origin, depth_cap).upper_bound());
        }
        break;
    }
    return r;
}

nlohmann::json to_json(const RecurrenceResult& r) {
    nlohmann::json j;
    j["d"] = r.d;
    j["depth"] = r.depth;
    j["epsilon"] = r.epsilon;
    j["horizon"] = r.horizon;
    if (r.n) {
        j["n"] = *r.n;
        j["gaps"] = r.gaps;
    } else {
        j["n"] = nullptr;
        j["gaps"] = nlohmann::json::array();
    }
    return j;
}

}  // namespace symdyn::rec
