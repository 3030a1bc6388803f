#include "symdyn/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symdyn/bitset.hpp"
#include "symdyn/errors.hpp"

namespace symdyn::est {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Besicovitch

BesicovitchResult besicovitch(const SequenceView& x, const SequenceView& y, std::size_t horizon,
                              std::size_t depth_cap) {
    if (horizon == 0) throw ArgumentError("besicovitch: horizon must be >= 1");
    if (depth_cap == 0) throw ArgumentError("besicovitch: depth cap must be >= 1");
    const std::size_t need = horizon + depth_cap;
    if (x.length() < need || y.length() < need) {
        const bool first = x.length() < need;
        const auto& v = first ? x : y;
        throw HorizonError(std::string("besicovitch: ") + (first ? "x" : "y") + " (" + v.label() + " at offset " +
                           std::to_string(v.offset()) + ") exposes " + std::to_string(v.length()) +
                           " symbols, N + K = " + std::to_string(need));
    }
    const auto a = x.symbols();
    const auto b = y.symbols();
    // Walk t = N+K .. 2 keeping the smallest disagreement index >= t; iterate i = t - 1
    // sees d(sigma^i x, sigma^i y) = 1/(next - i).
    std::size_t next = 0;
    double sum = 0.0;
    std::size_t unresolved = 0;
    for (std::size_t t = need; t >= 2; --t) {
        if (a[t - 1] != b[t - 1]) next = t;
        const std::size_t i = t - 1;
        if (i > horizon) continue;
        if (next != 0 && next - i <= depth_cap) {
            sum += 1.0 / static_cast<double>(next - i);
        } else {
            ++unresolved;
        }
    }
    BesicovitchResult r;
    r.average = sum / static_cast<double>(horizon);
    r.bias_bound = 1.0 / static_cast<double>(depth_cap);
    r.horizon = horizon;
    r.depth_cap = depth_cap;
    r.unresolved = unresolved;
    return r;
}

// ---------------------------------------------------------------------------
// Diam series

std::vector<double> DiamSeries::prefix_sums() const {
    std::vector<double> prefix(horizon + 1, 0.0);
    for (std::size_t i = 1; i <= horizon; ++i) prefix[i] = prefix[i - 1] + value(i);
    return prefix;
}

namespace {

void check_series_args(std::size_t horizon, std::size_t depth_cap, const char* who) {
    if (horizon == 0) throw ArgumentError(std::string(who) + ": horizon must be >= 1");
    if (depth_cap == 0 || depth_cap > std::numeric_limits<std::uint16_t>::max()) {
        throw ArgumentError(std::string(who) + ": depth cap must be in [1, 65535]");
    }
}

}  // namespace

DiamSeries diam_series_at(const SymbolicSequence& x, const FiniteWord& w, std::span<const std::size_t> positions,
                          std::size_t horizon, std::size_t depth_cap) {
    check_series_args(horizon, depth_cap, "diam_series");
    const auto buf = x.buffer();
    const std::size_t span_len = horizon + depth_cap;
    for (auto q : positions) {
        if (q + std::max(span_len, w.size()) > buf.size()) {
            throw HorizonError("diam_series: occurrence " + std::to_string(q) + " + N + K exceeds prefix length " +
                               std::to_string(buf.size()) + " of " + x.generator_id());
        }
        if (!std::equal(w.symbols().begin(), w.symbols().end(), buf.begin() + static_cast<std::ptrdiff_t>(q))) {
            throw ArgumentError("diam_series: position " + std::to_string(q) + " is not an occurrence of " +
                                w.to_string());
        }
    }

    DiamSeries s;
    s.word = w;
    s.horizon = horizon;
    s.depth_cap = depth_cap;
    s.first_diff.assign(horizon, 0);
    s.occurrences_found = positions.size();
    s.occurrence_count = positions.size();
    if (positions.size() < 2) {
        s.insufficient_sample = true;
        return s;
    }

    // disagree[t] = 1 iff {x_{q+t} : q in positions} has more than one element, t in [1, N+K].
    std::vector<std::uint8_t> disagree(span_len + 1, 0);
    constexpr std::size_t kBlock = 4096;
    const Symbol* data = buf.data();
    const std::size_t q0 = positions.front();
    for (std::size_t t0 = 1; t0 <= span_len; t0 += kBlock) {
        const std::size_t len = std::min(kBlock, span_len - t0 + 1);
        const Symbol* ref = data + q0 + t0 - 1;
        std::uint8_t* c = disagree.data() + t0;
        for (std::size_t o = 1; o < positions.size(); ++o) {
            const Symbol* cur = data + positions[o] + t0 - 1;
            for (std::size_t u = 0; u < len; ++u) c[u] |= static_cast<std::uint8_t>(cur[u] != ref[u]);
            if ((o & 15) == 0 && std::all_of(c, c + len, [](std::uint8_t v) { return v != 0; })) break;
        }
    }

    std::size_t next = 0;
    for (std::size_t t = span_len; t >= 1; --t) {
        if (disagree[t]) next = t;
        const std::size_t i = t - 1;
        if (i >= 1 && i <= horizon && next != 0 && next - i <= depth_cap) {
            s.first_diff[i - 1] = static_cast<std::uint16_t>(next - i);
        }
    }
    return s;
}

DiamSeries diam_series(const SymbolicSequence& x, const FiniteWord& w, std::size_t horizon, std::size_t depth_cap,
                       std::size_t occ_limit) {
    check_series_args(horizon, depth_cap, "diam_series");
    if (occ_limit < 2) throw ArgumentError("diam_series: occurrence limit must be >= 2");
    const std::size_t span_len = horizon + depth_cap;
    if (x.length() < span_len + 1) {
        throw HorizonError("diam_series: " + x.generator_id() + " holds " + std::to_string(x.length()) +
                           " symbols, N + K = " + std::to_string(span_len));
    }
    const std::size_t room = x.length() - span_len;  // largest admissible q
    const std::size_t limit = std::min(x.length(), room + w.size());
    std::vector<std::size_t> found;
    if (w.size() <= limit) found = occurrences(x, w, limit).positions;

    std::vector<std::size_t> used;
    bool thinned = false;
    if (found.size() > occ_limit) {
        const std::size_t stride = (found.size() + occ_limit - 1) / occ_limit;
        for (std::size_t i = 0; i < found.size(); i += stride) used.push_back(found[i]);
        thinned = true;
    } else {
        used = found;
    }
    auto s = diam_series_at(x, w, used, horizon, depth_cap);
    s.occurrences_found = found.size();
    s.thinned = thinned;
    return s;
}

// ---------------------------------------------------------------------------
// Verdicts

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds-at-horizon";
        case Verdict::fails: return "fails-at-horizon";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

json to_json(const StabilityVerdict& v) {
    json j;
    j["test"] = v.test;
    j["params"] = v.params;
    j["statistic"] = v.statistic;
    j["bias"] = v.bias;
    j["verdict"] = to_string(v.verdict);
    j["evidence_ref"] = v.evidence_ref;
    j["evidence"] = v.evidence;
    return j;
}

namespace {

json series_params(const DiamSeries& s) {
    json p;
    p["word"] = s.word.to_string();
    p["depth"] = s.word.size();
    p["N"] = s.horizon;
    p["K"] = s.depth_cap;
    return p;
}

json series_evidence(const DiamSeries& s) {
    json e;
    e["occurrences_found"] = s.occurrences_found;
    e["occurrences_used"] = s.occurrence_count;
    e["thinned"] = s.thinned;
    e["insufficient_sample"] = s.insufficient_sample;
    e["approximation"] = "cylinder sampled by occurrence shifts of one orbit; diameters are lower bounds";
    e["horizon_note"] = "estimate at horizon N=" + std::to_string(s.horizon);
    return e;
}

Verdict decide(bool sample_ok, bool holds) {
    if (!sample_ok) return Verdict::inconclusive;
    return holds ? Verdict::holds : Verdict::fails;
}

void check_threshold(double v, const char* who) {
    if (!(v > 0.0) || v > 1.0) throw ArgumentError(std::string(who) + ": threshold must be in (0, 1]");
}

// Iterate i <-> index i - 1.
density::IndexSet exceedance_set(const DiamSeries& s, double threshold) {
    return density::IndexSet::from_predicate(s.horizon,
                                             [&](std::size_t idx) { return s.value(idx + 1) > threshold; });
}

// Exceedance sets are exact when the threshold is at least 1/K; below it the
// "<= 1/K" iterates are undetermined.
double exceedance_bias(const DiamSeries& s, double threshold) { return threshold >= s.bias_bound() ? 0.0 : 1.0; }

json density_json(const density::DensityEstimate& d) {
    json j;
    j["kind"] = density::to_string(d.kind);
    j["horizon"] = d.horizon;
    j["window_lengths"] = d.window_lengths;
    j["counts"] = d.counts;
    j["per_window"] = d.per_window;
    j["value"] = d.value;
    return j;
}

}  // namespace

StabilityVerdict diam_mean_avg_test(const DiamSeries& series, double epsilon,
                                    std::optional<std::vector<std::size_t>> schedule) {
    check_threshold(epsilon, "diam_mean_avg_test");
    const auto sched = schedule.value_or(density::default_upper_schedule(series.horizon));
    if (sched.empty()) throw ArgumentError("diam_mean_avg_test: empty schedule");
    const auto prefix = series.prefix_sums();
    std::vector<double> averages;
    for (auto n : sched) {
        if (n == 0 || n > series.horizon) throw ArgumentError("diam_mean_avg_test: schedule entry outside [1, N]");
        averages.push_back(prefix[n] / static_cast<double>(n));
    }
    StabilityVerdict v;
    v.test = "diam_mean_avg";
    v.params = series_params(series);
    v.params["epsilon"] = epsilon;
    v.statistic = density::tail_statistic(density::DensityKind::upper, averages);
    v.bias = series.bias_bound();
    v.verdict = decide(!series.insufficient_sample, v.statistic < epsilon);
    v.evidence = series_evidence(series);
    v.evidence["schedule"] = sched;
    v.evidence["partial_averages"] = averages;
    v.evidence["full_horizon_average"] = prefix[series.horizon] / static_cast<double>(series.horizon);
    return v;
}

StabilityVerdict diam_mean_density_test(const DiamSeries& series, double eta,
                                        std::optional<std::vector<std::size_t>> schedule) {
    check_threshold(eta, "diam_mean_density_test");
    const auto sched = schedule.value_or(density::default_upper_schedule(series.horizon));
    const auto est = density::upper_density(exceedance_set(series, eta), sched);
    StabilityVerdict v;
    v.test = "diam_mean_density";
    v.params = series_params(series);
    v.params["eta"] = eta;
    v.statistic = est.value;
    v.bias = exceedance_bias(series, eta);
    v.verdict = decide(!series.insufficient_sample, v.statistic < eta);
    v.evidence = series_evidence(series);
    v.evidence["density"] = density_json(est);
    return v;
}

StabilityVerdict banach_diam_mean_test(const DiamSeries& series, double epsilon,
                                       std::optional<std::vector<std::size_t>> windows) {
    check_threshold(epsilon, "banach_diam_mean_test");
    const auto lengths = windows.value_or(density::default_banach_windows(series.horizon));
    if (lengths.empty()) throw ArgumentError("banach_diam_mean_test: empty window schedule");
    const auto prefix = series.prefix_sums();
    std::vector<double> per_window;
    std::vector<std::size_t> argmax;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        const auto n = lengths[k];
        if (n == 0 || n > series.horizon || (k > 0 && lengths[k - 1] >= n)) {
            throw ArgumentError("banach_diam_mean_test: window lengths must increase within [1, N]");
        }
        double best = -1.0;
        std::size_t best_m = 0;
        for (std::size_t m = 0; m + n <= series.horizon; ++m) {
            const double avg = (prefix[m + n] - prefix[m]) / static_cast<double>(n);
            if (avg > best) {
                best = avg;
                best_m = m;
            }
        }
        per_window.push_back(best);
        argmax.push_back(best_m);
    }
    StabilityVerdict v;
    v.test = "banach_diam_mean";
    v.params = series_params(series);
    v.params["epsilon"] = epsilon;
    v.params["windows"] = lengths;
    v.statistic = density::tail_statistic(density::DensityKind::banach, per_window);
    v.bias = series.bias_bound();
    v.verdict = decide(!series.insufficient_sample, v.statistic < epsilon);
    v.evidence = series_evidence(series);
    v.evidence["per_window"] = per_window;
    v.evidence["window_start"] = argmax;
    return v;
}

StabilityVerdict stable_in_mean_test(const DiamSeries& series, double epsilon) {
    check_threshold(epsilon, "stable_in_mean_test");
    const auto prefix = series.prefix_sums();
    double best = 0.0;
    std::size_t best_n = 1;
    for (std::size_t n = 1; n <= series.horizon; ++n) {
        const double avg = prefix[n] / static_cast<double>(n);
        if (avg > best) {
            best = avg;
            best_n = n;
        }
    }
    StabilityVerdict v;
    v.test = "stable_in_mean";
    v.params = series_params(series);
    v.params["epsilon"] = epsilon;
    v.statistic = best;
    v.bias = series.bias_bound();
    v.verdict = decide(!series.insufficient_sample, v.statistic < epsilon);
    v.evidence = series_evidence(series);
    v.evidence["argmax_n"] = best_n;
    v.evidence["final_average"] = prefix[series.horizon] / static_cast<double>(series.horizon);
    return v;
}

StabilityVerdict frequent_stability_test(const DiamSeries& series, double epsilon, double gamma,
                                         std::optional<std::vector<std::size_t>> schedule) {
    check_threshold(epsilon, "frequent_stability_test");
    if (!(gamma > 0.0) || gamma > 1.0) throw ArgumentError("frequent_stability_test: margin must be in (0, 1]");
    const auto sched = schedule.value_or(density::default_upper_schedule(series.horizon));
    const auto est = density::upper_density(exceedance_set(series, epsilon), sched);
    StabilityVerdict v;
    v.test = "frequent_stability";
    v.params = series_params(series);
    v.params["epsilon"] = epsilon;
    v.params["gamma"] = gamma;
    v.statistic = est.value;
    v.bias = exceedance_bias(series, epsilon);
    v.verdict = decide(!series.insufficient_sample, v.statistic <= 1.0 - gamma);
    v.evidence = series_evidence(series);
    v.evidence["density"] = density_json(est);
    return v;
}

StabilityVerdict diam_mean_sensitivity_test(const SymbolicSequence& x, std::size_t horizon, std::size_t depth_cap,
                                            double epsilon, const SensitivityOptions& options) {
    check_threshold(epsilon, "diam_mean_sensitivity_test");
    check_series_args(horizon, depth_cap, "diam_mean_sensitivity_test");
    if (x.length() < horizon + depth_cap + 1) {
        throw HorizonError("diam_mean_sensitivity_test: prefix too short for N + K = " +
                           std::to_string(horizon + depth_cap));
    }
    std::vector<FiniteWord> words = options.words;
    std::size_t depth = options.depth;
    if (words.empty()) {
        if (depth == 0) throw ArgumentError("diam_mean_sensitivity_test: depth must be >= 1");
        const std::size_t room = x.length() - horizon - depth_cap;
        words = factors(x, depth, std::min(x.length(), room + depth));
    } else {
        depth = words.front().size();
    }

    const auto sched = density::default_upper_schedule(horizon);
    json per_word = json::array();
    json skipped = json::array();
    std::optional<double> min_density;
    std::string witness;
    bool any_insufficient = false;
    for (const auto& w : words) {
        const auto s = diam_series(x, w, horizon, depth_cap, options.occ_limit);
        if (s.occurrences_found == 0) {
            skipped.push_back(w.to_string());
            continue;
        }
        const auto est = density::upper_density(exceedance_set(s, epsilon), sched);
        json row;
        row["word"] = w.to_string();
        row["density"] = est.value;
        row["occurrences_used"] = s.occurrence_count;
        row["insufficient_sample"] = s.insufficient_sample;
        per_word.push_back(row);
        if (s.insufficient_sample) {
            any_insufficient = true;
            continue;
        }
        if (!min_density || est.value < *min_density) {
            min_density = est.value;
            witness = w.to_string();
        }
    }

    StabilityVerdict v;
    v.test = "diam_mean_sensitivity";
    v.params["depth"] = depth;
    v.params["N"] = horizon;
    v.params["K"] = depth_cap;
    v.params["epsilon"] = epsilon;
    v.params["words"] = words.size();
    v.statistic = min_density.value_or(0.0);
    v.bias = epsilon >= 1.0 / static_cast<double>(depth_cap) ? 0.0 : 1.0;
    if (!min_density) {
        v.verdict = Verdict::inconclusive;
    } else if (*min_density <= epsilon) {
        v.verdict = Verdict::fails;
    } else {
        v.verdict = any_insufficient ? Verdict::inconclusive : Verdict::holds;
    }
    v.evidence["minimizing_word"] = witness;
    v.evidence["per_word"] = per_word;
    v.evidence["skipped_missing"] = skipped;
    v.evidence["approximation"] = "cylinders sampled by occurrence shifts; densities are lower bounds";
    v.evidence["horizon_note"] = "estimate at horizon N=" + std::to_string(horizon);
    return v;
}

// ---------------------------------------------------------------------------
// Mean equicontinuity modulus

ModulusCurve mean_eq_modulus(const SymbolicSequence& x, std::span<const std::size_t> depths,
                             std::size_t pair_budget, std::size_t horizon, std::size_t depth_cap) {
    if (depths.empty()) throw ArgumentError("mean_eq_modulus: empty depth list");
    if (pair_budget == 0) throw ArgumentError("mean_eq_modulus: pair budget must be >= 1");
    if (x.length() < horizon + depth_cap + 2) {
        throw HorizonError("mean_eq_modulus: prefix too short for N + K = " + std::to_string(horizon + depth_cap));
    }
    // Admissible starts q satisfy q + N + K <= L.
    const std::size_t starts = x.length() - horizon - depth_cap + 1;
    ModulusCurve curve;
    curve.horizon = horizon;
    curve.depth_cap = depth_cap;
    curve.pair_budget = pair_budget;
    for (auto m : depths) {
        if (m == 0 || m >= starts) throw ArgumentError("mean_eq_modulus: depth outside [1, admissible starts)");
        ModulusPoint pt;
        pt.depth = m;
        for (std::size_t t = 0; t < pair_budget; ++t) {
            // Evenly spaced base points over the first half of the admissible range.
            const std::size_t s = (starts / 2) * t / pair_budget;
            const auto sym = x.buffer().subspan(s, m);
            const FiniteWord w(std::vector<Symbol>(sym.begin(), sym.end()), x.alphabet_size());
            const auto other = next_occurrence(x, w, s + 1, starts - 1 + m);
            if (!other) continue;
            const auto r = besicovitch(x.view(s), x.view(*other), horizon, depth_cap);
            if (pt.pairs == 0 || r.average > pt.statistic) {
                pt.statistic = r.average;
                pt.worst_first = s;
                pt.worst_second = *other;
            }
            ++pt.pairs;
        }
        pt.shortfall = pt.pairs < pair_budget;
        curve.points.push_back(pt);
    }
    return curve;
}

StabilityVerdict mean_eq_test(const ModulusCurve& curve, double epsilon) {
    check_threshold(epsilon, "mean_eq_test");
    if (curve.points.empty()) throw ArgumentError("mean_eq_test: empty modulus curve");
    const auto deepest = std::max_element(curve.points.begin(), curve.points.end(),
                                          [](const auto& a, const auto& b) { return a.depth < b.depth; });
    StabilityVerdict v;
    v.test = "mean_eq";
    v.params["N"] = curve.horizon;
    v.params["K"] = curve.depth_cap;
    v.params["epsilon"] = epsilon;
    v.params["pair_budget"] = curve.pair_budget;
    json depths = json::array(), stats = json::array(), pairs = json::array();
    for (const auto& p : curve.points) {
        depths.push_back(p.depth);
        stats.push_back(p.statistic);
        pairs.push_back(p.pairs);
    }
    v.params["depths"] = depths;
    v.statistic = deepest->statistic;
    v.bias = 1.0 / static_cast<double>(curve.depth_cap);
    v.verdict = decide(deepest->pairs > 0, v.statistic < epsilon);
    v.evidence["curve"] = stats;
    v.evidence["pairs"] = pairs;
    v.evidence["shortfall"] = deepest->shortfall;
    v.evidence["worst_pair"] = {deepest->worst_first, deepest->worst_second};
    v.evidence["horizon_note"] = "estimate at horizon N=" + std::to_string(curve.horizon);
    return v;
}

// ---------------------------------------------------------------------------
// a_N

std::vector<std::size_t> a_n_curve(const SymbolicSequence& x, const FiniteWord& w,
                                   std::span<const std::size_t> horizons, std::size_t* occurrence_count) {
    if (horizons.empty()) throw ArgumentError("a_n_curve: empty horizon list");
    const std::size_t n_max = *std::max_element(horizons.begin(), horizons.end());
    if (n_max == 0 || n_max > x.length()) {
        throw HorizonError("a_n_curve: horizon " + std::to_string(n_max) + " outside [1, " +
                           std::to_string(x.length()) + "]");
    }
    const std::size_t limit = std::min(x.length(), x.length() - n_max + w.size());
    const auto occ = w.size() <= limit ? occurrences(x, w, limit).positions : std::vector<std::size_t>{};
    constexpr double kWordOpBudget = 68'719'476'736.0;  // 2^36 word operations
    if (static_cast<double>(occ.size()) * static_cast<double>(n_max) / 64.0 > kWordOpBudget) {
        throw BudgetError("a_n_curve: " + std::to_string(occ.size()) + " occurrences x N = " + std::to_string(n_max) +
                          " exceeds the shifted-OR budget");
    }
    if (occurrence_count) *occurrence_count = occ.size();

    const auto buf = x.buffer();
    Bitset nonzero(buf.size());
    for (std::size_t b = 0; b < buf.size(); ++b) {
        if (buf[b] != 0) nonzero.set(b);
    }
    // bit m-1 of acc: some occurrence q has x_{q+m} != 0.
    Bitset acc(n_max);
    for (auto q : occ) acc.or_shifted(nonzero, q, n_max);

    std::vector<std::size_t> a;
    a.reserve(horizons.size());
    for (auto n : horizons) a.push_back(acc.count_prefix(n));
    return a;
}

ANStatistic a_n_statistic(const SymbolicSequence& x, const gen::PaperExampleMeta& meta, std::size_t i_first,
                          std::size_t i_last) {
    if (i_first < 1 || i_first > i_last) throw ArgumentError("a_n_statistic: need 1 <= i_first <= i_last");
    if (i_last + 1 > meta.k.size()) {
        throw ArgumentError("a_n_statistic: level " + std::to_string(i_last) + " needs i_max >= " +
                            std::to_string(i_last + 1) + ", built to " + std::to_string(meta.k.size()));
    }
    ANStatistic st;
    for (std::size_t i = i_first; i <= i_last; ++i) {
        st.levels.push_back(i);
        st.horizons.push_back(meta.p_at(i + 1));
        st.bounds.push_back(meta.ratio_at(i));
    }
    const FiniteWord a1({1, 1}, 4);
    st.a = a_n_curve(x, a1, st.horizons, &st.occurrence_count);
    for (std::size_t k = 0; k < st.a.size(); ++k) {
        st.ratios.push_back(static_cast<double>(st.a[k]) / static_cast<double>(st.horizons[k]));
    }
    return st;
}

// ---------------------------------------------------------------------------
// Entropy

EntropyCurve entropy_complexity(const SymbolicSequence& x, std::size_t n_min, std::size_t n_max,
                                std::optional<std::size_t> limit) {
    if (n_min < 1 || n_min > n_max) throw ArgumentError("entropy_complexity: need 1 <= n_min <= n_max");
    EntropyCurve c;
    c.limit = limit.value_or(x.length());
    if (c.limit < n_max) throw ArgumentError("entropy_complexity: limit below the largest word length");
    for (std::size_t n = n_min; n <= n_max; ++n) {
        const auto count = factor_count(x, n, c.limit);
        const double value = std::log(static_cast<double>(count)) / static_cast<double>(n);
        if (!c.values.empty() && value > c.values.back()) c.non_increasing = false;
        c.lengths.push_back(n);
        c.counts.push_back(count);
        c.values.push_back(value);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Hierarchy

namespace {

Verdict combine(const std::vector<const StabilityVerdict*>& parts) {
    bool failed = false;
    for (const auto* p : parts) {
        if (p->verdict == Verdict::inconclusive) return Verdict::inconclusive;
        if (p->verdict == Verdict::fails) failed = true;
    }
    return failed ? Verdict::fails : Verdict::holds;
}

const StabilityVerdict& find_test(const std::vector<StabilityVerdict>& vs, const std::string& name) {
    for (const auto& v : vs) {
        if (v.test == name) return v;
    }
    throw ArgumentError("classify_hierarchy: missing test " + name);
}

}  // namespace

HierarchyReport classify_hierarchy(const SymbolicSequence& x, const std::string& system,
                                   const ClassifyParams& params) {
    HierarchyReport r;
    r.system = system;
    r.word = params.word ? *params.word : cylinder_ball_identity(x, params.depth).word;
    r.series = diam_series(x, r.word, params.horizon, params.depth_cap, params.occ_limit);

    r.verdicts.push_back(diam_mean_avg_test(r.series, params.epsilon));
    r.verdicts.push_back(diam_mean_density_test(r.series, params.eta));
    r.verdicts.push_back(stable_in_mean_test(r.series, params.epsilon));
    r.verdicts.push_back(banach_diam_mean_test(r.series, params.epsilon));
    r.verdicts.push_back(frequent_stability_test(r.series, params.epsilon, params.gamma));
    const auto curve = mean_eq_modulus(x, params.mean_eq_depths, params.pair_budget, params.horizon, params.depth_cap);
    r.verdicts.push_back(mean_eq_test(curve, params.epsilon));

    SensitivityOptions sens;
    sens.depth = params.sensitivity_depth ? params.sensitivity_depth : r.word.size();
    sens.occ_limit = params.occ_limit;
    r.sensitivity = diam_mean_sensitivity_test(x, params.horizon, params.depth_cap, params.epsilon, sens);

    const std::vector<std::pair<std::string, std::vector<std::string>>> rungs = {
        {"diam-mean-equicontinuity-point", {"diam_mean_avg", "diam_mean_density"}},
        {"mean-equicontinuous+frequently-stable", {"mean_eq", "frequent_stability"}},
        {"mean-equicontinuous", {"mean_eq"}},
    };
    for (const auto& [name, tests] : rungs) {
        std::vector<const StabilityVerdict*> parts;
        for (const auto& t : tests) parts.push_back(&find_test(r.verdicts, t));
        r.ladder.push_back(Rung{name, tests, combine(parts)});
    }
    r.level = "none";
    for (const auto& rung : r.ladder) {
        if (rung.verdict == Verdict::holds) {
            r.level = rung.name;
            break;
        }
    }
    r.dichotomy_consistent =
        !(r.ladder.front().verdict == Verdict::holds && r.sensitivity.verdict == Verdict::holds);
    return r;
}

json to_json(const HierarchyReport& report) {
    json j;
    j["system"] = report.system;
    j["word"] = report.word.to_string();
    j["level"] = report.level;
    j["dichotomy_consistent"] = report.dichotomy_consistent;
    json ladder = json::array();
    for (const auto& rung : report.ladder) {
        ladder.push_back({{"rung", rung.name}, {"tests", rung.tests}, {"verdict", to_string(rung.verdict)}});
    }
    j["ladder"] = ladder;
    json verdicts = json::array();
    for (const auto& v : report.verdicts) verdicts.push_back(to_json(v));
    j["verdicts"] = verdicts;
    j["sensitivity"] = to_json(report.sensitivity);
    return j;
}

}  // namespace symdyn::est
