#pragma once

// Finite-window estimates of upper density and upper Banach density of
// subsets F of Z_+ observed on [0, N).
//
// Both are limsup quantities. At horizon N the reported value is a tail
// statistic of the per-window values: the maximum over the last quarter of
// the schedule (upper density) or over the two longest windows (Banach).
// These are estimates at horizon N, never limits.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "symdyn/bitset.hpp"

namespace symdyn::density {

class IndexSet {
public:
    explicit IndexSet(std::size_t horizon) : bits_(horizon) {}
    explicit IndexSet(Bitset bits) : bits_(std::move(bits)) {}

    // Sorted, duplicate-free positions, all < horizon.
    static IndexSet from_positions(std::size_t horizon, std::span<const std::size_t> positions);

    // Eagerly evaluates pred(i) for i in [0, horizon).
    template <typename Pred>
    static IndexSet from_predicate(std::size_t horizon, Pred&& pred) {
        Bitset bits(horizon);
        for (std::size_t i = 0; i < horizon; ++i) {
            if (pred(i)) bits.set(i);
        }
        return IndexSet(std::move(bits));
    }

    std::size_t horizon() const noexcept { return bits_.size(); }
    bool contains(std::size_t i) const noexcept { return i < bits_.size() && bits_.test(i); }
    std::size_t count() const noexcept { return bits_.count(); }
    const Bitset& bits() const noexcept { return bits_; }
    std::vector<std::size_t> positions() const;

private:
    Bitset bits_;
};

enum class DensityKind { upper, banach };

std::string to_string(DensityKind kind);

struct DensityEstimate {
    DensityKind kind = DensityKind::upper;
    std::size_t horizon = 0;
    std::vector<std::size_t> window_lengths;
    // upper: #F cap [0, n-1]; banach: max over M of #F cap [M, M+n-1].
    std::vector<std::size_t> counts;
    // banach only: a window start M attaining the maximum.
    std::vector<std::size_t> argmax_start;
    std::vector<double> per_window;
    double value = 0.0;
};

// Index of the first schedule entry included in the tail statistic.
std::size_t tail_begin(DensityKind kind, std::size_t schedule_size);

// max(per_window[tail_begin..]), the reported value.
double tail_statistic(DensityKind kind, std::span<const double> per_window);

DensityEstimate upper_density(const IndexSet& f, std::span<const std::size_t> schedule);
DensityEstimate banach_density(const IndexSet& f, std::span<const std::size_t> window_lengths);

// n_j = floor(N j / points), j = 1..points, deduplicated.
std::vector<std::size_t> default_upper_schedule(std::size_t horizon, std::size_t points = 16);
// floor(N / 2^j), j = 6..1, ascending.
std::vector<std::size_t> default_banach_windows(std::size_t horizon);

}  // namespace symdyn::density
