#include "symdyn/densities.hpp"

#include <algorithm>

#include "symdyn/errors.hpp"

namespace symdyn::density {

IndexSet IndexSet::from_positions(std::size_t horizon, std::span<const std::size_t> positions) {
    Bitset bits(horizon);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto p = positions[i];
        if (p >= horizon) {
            throw ArgumentError("IndexSet: position " + std::to_string(p) + " outside [0, " + std::to_string(horizon) +
                                ")");
        }
        if (i > 0 && positions[i - 1] >= p) throw ArgumentError("IndexSet: positions must be strictly increasing");
        bits.set(p);
    }
    return IndexSet(std::move(bits));
}

std::vector<std::size_t> IndexSet::positions() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for (std::size_t i = 0; i < horizon(); ++i) {
        if (bits_.test(i)) out.push_back(i);
    }
    return out;
}

std::string to_string(DensityKind kind) { return kind == DensityKind::upper ? "upper" : "banach"; }

std::size_t tail_begin(DensityKind kind, std::size_t schedule_size) {
    if (schedule_size == 0) return 0;
    if (kind == DensityKind::upper) {
        const std::size_t tail = std::max<std::size_t>(1, (schedule_size + 3) / 4);
        return schedule_size - tail;
    }
    return schedule_size - std::min<std::size_t>(2, schedule_size);
}

double tail_statistic(DensityKind kind, std::span<const double> per_window) {
    if (per_window.empty()) throw ArgumentError("tail_statistic: empty schedule");
    const auto begin = tail_begin(kind, per_window.size());
    return *std::max_element(per_window.begin() + static_cast<std::ptrdiff_t>(begin), per_window.end());
}

namespace {

void check_schedule(std::span<const std::size_t> schedule, std::size_t horizon, const char* who) {
    if (schedule.empty()) throw ArgumentError(std::string(who) + ": empty schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] == 0 || schedule[i] > horizon) {
            throw ArgumentError(std::string(who) + ": window length " + std::to_string(schedule[i]) +
                                " outside [1, " + std::to_string(horizon) + "]");
        }
        if (i > 0 && schedule[i - 1] >= schedule[i]) {
            throw ArgumentError(std::string(who) + ": schedule must be strictly increasing");
        }
    }
}

}  // namespace

DensityEstimate upper_density(const IndexSet& f, std::span<const std::size_t> schedule) {
    check_schedule(schedule, f.horizon(), "upper_density");
    DensityEstimate est;
    est.kind = DensityKind::upper;
    est.horizon = f.horizon();
    est.window_lengths.assign(schedule.begin(), schedule.end());
    for (auto n : schedule) {
        const auto c = f.bits().count_prefix(n);
        est.counts.push_back(c);
        est.per_window.push_back(static_cast<double>(c) / static_cast<double>(n));
    }
    est.value = tail_statistic(est.kind, est.per_window);
    return est;
}

DensityEstimate banach_density(const IndexSet& f, std::span<const std::size_t> window_lengths) {
    check_schedule(window_lengths, f.horizon(), "banach_density");
    DensityEstimate est;
    est.kind = DensityKind::banach;
    est.horizon = f.horizon();
    est.window_lengths.assign(window_lengths.begin(), window_lengths.end());
    const auto& bits = f.bits();
    const std::size_t horizon = f.horizon();
    for (auto n : window_lengths) {
        // Running count over [M, M+n-1] as M slides from 0 to N-n.
        std::size_t running = bits.count_prefix(n);
        std::size_t best = running;
        std::size_t best_start = 0;
        for (std::size_t m = 1; m + n <= horizon; ++m) {
            running += static_cast<std::size_t>(bits.test(m + n - 1));
            running -= static_cast<std::size_t>(bits.test(m - 1));
            if (running > best) {
                best = running;
                best_start = m;
            }
        }
        est.counts.push_back(best);
        est.argmax_start.push_back(best_start);
        est.per_window.push_back(static_cast<double>(best) / static_cast<double>(n));
    }
    est.value = tail_statistic(est.kind, est.per_window);
    return est;
}

std::vector<std::size_t> default_upper_schedule(std::size_t horizon, std::size_t points) {
    if (horizon == 0 || points == 0) throw ArgumentError("default_upper_schedule: horizon and points must be >= 1");
    std::vector<std::size_t> out;
    for (std::size_t j = 1; j <= points; ++j) {
        const auto n = horizon / points * j + (horizon % points) * j / points;
        if (n > 0 && (out.empty() || out.back() < n)) out.push_back(n);
    }
    return out;
}

std::vector<std::size_t> default_banach_windows(std::size_t horizon) {
    std::vector<std::size_t> out;
    for (int j = 6; j >= 1; --j) {
        const auto n = horizon >> j;
        if (n > 0 && (out.empty() || out.back() < n)) out.push_back(n);
    }
    if (out.empty()) out.push_back(horizon);
    return out;
}

}  // namespace symdyn::density
