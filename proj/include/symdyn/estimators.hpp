#pragma once

// Finite-horizon estimators for the stability / sensitivity notions.
//
// The set X cap [w] is approximated by the orbit points sigma^q x with q an
// occurrence of w in the materialized prefix. This under-approximates the
// cylinder, so every diameter is a lower bound: equicontinuity-side verdicts
// are optimistic and sensitivity-side verdicts are conservative.
//
// Distances are resolved to depth K. "Agree through K" contributes 0 to
// averages; every averaged statistic carries the additive bias bound 1/K.
// Thresholds are strict: a statistic equal to its threshold fails.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "symdyn/densities.hpp"
#include "symdyn/generators.hpp"
#include "symdyn/symbolic.hpp"

namespace symdyn::est {

inline constexpr std::size_t kDefaultOccLimit = 100'000;
inline constexpr double kDefaultGamma = 0.25;

// ---------------------------------------------------------------------------
// Besicovitch average

struct BesicovitchResult {
    double average = 0.0;        // (1/N) sum_{i=1}^{N} d_K(sigma^i x, sigma^i y)
    double bias_bound = 0.0;     // 1/K
    std::size_t horizon = 0;
    std::size_t depth_cap = 0;
    std::size_t unresolved = 0;  // iterates that agreed through K
};

// Requires both views to expose N + K symbols.
BesicovitchResult besicovitch(const SequenceView& x, const SequenceView& y, std::size_t horizon,
                              std::size_t depth_cap = kDefaultDepthCap);

// ---------------------------------------------------------------------------
// Diameter series of T^i [w]

struct DiamSeries {
    FiniteWord word;
    std::size_t horizon = 0;
    std::size_t depth_cap = kDefaultDepthCap;
    // first_diff[i-1] for iterate i: j such that diam(T^i [w]) = 1/j, or 0 for "<= 1/K".
    std::vector<std::uint16_t> first_diff;
    std::size_t occurrences_found = 0;  // occurrences with room for N + K symbols
    std::size_t occurrence_count = 0;   // occurrences actually used (after thinning)
    bool thinned = false;
    bool insufficient_sample = false;   // fewer than two occurrences

    // Iterate i in [1, N]; "<= 1/K" reads as 0.
    double value(std::size_t i) const {
        const auto j = first_diff[i - 1];
        return j == 0 ? 0.0 : 1.0 / static_cast<double>(j);
    }
    // prefix[n] = sum_{i=1}^{n} value(i).
    std::vector<double> prefix_sums() const;
    double bias_bound() const { return 1.0 / static_cast<double>(depth_cap); }
};

// Occurrences q of w with q + N + K <= L, thinned to at most occ_limit by a uniform stride.
DiamSeries diam_series(const SymbolicSequence& x, const FiniteWord& w, std::size_t horizon,
                       std::size_t depth_cap = kDefaultDepthCap, std::size_t occ_limit = kDefaultOccLimit);

// Same computation over caller-chosen occurrence positions (each must start an occurrence of w).
DiamSeries diam_series_at(const SymbolicSequence& x, const FiniteWord& w, std::span<const std::size_t> positions,
                          std::size_t horizon, std::size_t depth_cap = kDefaultDepthCap);

// ---------------------------------------------------------------------------
// Verdicts

enum class Verdict { holds, fails, inconclusive };
std::string to_string(Verdict v);

struct StabilityVerdict {
    std::string test;
    nlohmann::json params = nlohmann::json::object();
    double statistic = 0.0;
    double bias = 0.0;
    Verdict verdict = Verdict::inconclusive;
    nlohmann::json evidence = nlohmann::json::object();
    std::string evidence_ref;
};

nlohmann::json to_json(const StabilityVerdict& v);

// limsup_N (1/N) sum diam(T^i B) < eps. Statistic: max over the tail of the
// upper-density schedule of the partial averages; the full-horizon average is
// in the evidence.
StabilityVerdict diam_mean_avg_test(const DiamSeries& series, double epsilon,
                                    std::optional<std::vector<std::size_t>> schedule = std::nullopt);

// Upper density of {i : diam(T^i B) > eta} < eta.
StabilityVerdict diam_mean_density_test(const DiamSeries& series, double eta,
                                        std::optional<std::vector<std::size_t>> schedule = std::nullopt);

// Max over sliding windows [M+1, M+n] of the window average, over the two
// longest scheduled lengths n, < eps.
StabilityVerdict banach_diam_mean_test(const DiamSeries& series, double epsilon,
                                       std::optional<std::vector<std::size_t>> windows = std::nullopt);

// sup_{n <= N} (1/n) sum_{i<=n} diam(T^i B) < eps.
StabilityVerdict stable_in_mean_test(const DiamSeries& series, double epsilon);

// Upper density of {i : diam(T^i B) > eps} <= 1 - gamma.
StabilityVerdict frequent_stability_test(const DiamSeries& series, double epsilon, double gamma = kDefaultGamma,
                                         std::optional<std::vector<std::size_t>> schedule = std::nullopt);

// Holds iff every cylinder in W has density of {i : diam > eps} above eps.
// An empty word list means all words of length `depth` present in x.
struct SensitivityOptions {
    std::size_t depth = 3;
    std::vector<FiniteWord> words;
    std::size_t occ_limit = kDefaultOccLimit;
};

StabilityVerdict diam_mean_sensitivity_test(const SymbolicSequence& x, std::size_t horizon, std::size_t depth_cap,
                                            double epsilon, const SensitivityOptions& options);

// ---------------------------------------------------------------------------
// Mean equicontinuity modulus: m -> max rho over sampled pairs agreeing on m symbols.

struct ModulusPoint {
    std::size_t depth = 0;
    double statistic = 0.0;
    std::size_t pairs = 0;
    bool shortfall = false;
    std::size_t worst_first = 0;
    std::size_t worst_second = 0;
};

struct ModulusCurve {
    std::size_t horizon = 0;
    std::size_t depth_cap = 0;
    std::size_t pair_budget = 0;
    std::vector<ModulusPoint> points;
};

ModulusCurve mean_eq_modulus(const SymbolicSequence& x, std::span<const std::size_t> depths,
                             std::size_t pair_budget, std::size_t horizon, std::size_t depth_cap = kDefaultDepthCap);

// Verdict at the deepest sampled depth: statistic < eps.
StabilityVerdict mean_eq_test(const ModulusCurve& curve, double epsilon);

// ---------------------------------------------------------------------------
// a_N = #{m <= N : some occurrence q of A_1 has x_{q+m} != 0}

struct ANStatistic {
    std::vector<std::size_t> levels;     // i
    std::vector<std::size_t> horizons;   // N = p_{i+1}
    std::vector<std::size_t> a;          // a_N
    std::vector<double> ratios;          // a_N / N
    std::vector<double> bounds;          // ratio_i of the construction
    std::size_t occurrence_count = 0;
};

// a_N at arbitrary horizons over one occurrence set (occurrences with room for max N).
std::vector<std::size_t> a_n_curve(const SymbolicSequence& x, const FiniteWord& w,
                                   std::span<const std::size_t> horizons, std::size_t* occurrence_count = nullptr);

ANStatistic a_n_statistic(const SymbolicSequence& x, const gen::PaperExampleMeta& meta, std::size_t i_first,
                          std::size_t i_last);

// ---------------------------------------------------------------------------
// Word-complexity entropy surrogate log(#factors_n) / n.

struct EntropyCurve {
    std::size_t limit = 0;
    std::vector<std::size_t> lengths;
    std::vector<std::size_t> counts;
    std::vector<double> values;
    bool non_increasing = true;
};

EntropyCurve entropy_complexity(const SymbolicSequence& x, std::size_t n_min, std::size_t n_max,
                                std::optional<std::size_t> limit = std::nullopt);

// ---------------------------------------------------------------------------
// Hierarchy classification

struct ClassifyParams {
    std::size_t depth = 8;           // ball B_{1/m}(x) = [x_1 .. x_m]
    std::optional<FiniteWord> word;  // overrides depth
    std::size_t horizon = 1 << 16;
    std::size_t depth_cap = kDefaultDepthCap;
    double epsilon = 0.1;
    double eta = 0.1;
    double gamma = kDefaultGamma;
    std::size_t sensitivity_depth = 0;  // 0: same as the ball depth
    std::vector<std::size_t> mean_eq_depths{2, 4, 8, 16};
    std::size_t pair_budget = 16;
    std::size_t occ_limit = kDefaultOccLimit;
};

struct Rung {
    std::string name;
    std::vector<std::string> tests;
    Verdict verdict = Verdict::inconclusive;
};

struct HierarchyReport {
    std::string system;
    FiniteWord word;
    std::vector<StabilityVerdict> verdicts;  // every component test
    std::vector<Rung> ladder;                // strongest first
    StabilityVerdict sensitivity;
    std::string level;                       // strongest rung that holds, or "none"
    bool dichotomy_consistent = true;        // not both diam-mean eq and sensitive
    DiamSeries series;
};

HierarchyReport classify_hierarchy(const SymbolicSequence& x, const std::string& system, const ClassifyParams& params);

nlohmann::json to_json(const HierarchyReport& report);

}  // namespace symdyn::est
