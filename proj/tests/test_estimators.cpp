#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "symdyn/errors.hpp"
#include "symdyn/estimators.hpp"
#include "symdyn/generators.hpp"
#include "symdyn/serialize.hpp"

using namespace symdyn;
using namespace symdyn::est;

namespace {

SymbolicSequence seq(const std::vector<Symbol>& v, unsigned k = 2) { return SymbolicSequence(k, v, "test", "{}"); }

SymbolicSequence repeat(const std::vector<Symbol>& period, std::size_t n, unsigned k = 2) {
    std::vector<Symbol> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = period[i % period.size()];
    return seq(v, k);
}

oracle::Bytes bytes_of(const SymbolicSequence& x) { return {x.buffer().begin(), x.buffer().end()}; }

double direct_besicovitch(const oracle::Bytes& x, std::size_t ox, const oracle::Bytes& y, std::size_t oy,
                          std::size_t N, std::size_t K) {
    double s = 0;
    for (std::size_t i = 1; i <= N; ++i) {
        const auto j = oracle::first_diff(x, ox + i, y, oy + i, K);
        if (j) s += 1.0 / static_cast<double>(j);
    }
    return s / static_cast<double>(N);
}

}  // namespace

TEST_SUITE("besicovitch") {
    TEST_CASE("identity is zero") {
        const auto x = gen::sturmian({}, 5000);
        CHECK(besicovitch(x.view(), x.view(), 4000, 64).average == 0.0);
    }

    TEST_CASE("zero vs alternating closed form") {
        const auto x = repeat({0}, 10100);
        const auto y = repeat({0, 1}, 10100);
        const auto r = besicovitch(x.view(), y.view(), 10000, 32);
        CHECK(std::abs(r.average - 0.75) <= 2.0 / 10000);
        CHECK(r.bias_bound == 1.0 / 32);
    }

    TEST_CASE("direct summation oracle, symmetry, truncation bias") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t N = 1 + rng() % 300, K = 1 + rng() % 40;
            auto xb = oracle::random_bytes(rng, N + K + 80, 2);
            auto yb = xb;
            for (auto& s : yb) {
                if (rng() % 7 == 0) s ^= 1;
            }
            const auto x = seq(xb), y = seq(yb);
            const std::size_t ox = rng() % 50, oy = rng() % 50;
            const auto a = besicovitch(x.view(ox), y.view(oy), N, K);
            CHECK(a.average == doctest::Approx(direct_besicovitch(xb, ox, yb, oy, N, K)).epsilon(1e-12));
            CHECK(a.average == besicovitch(y.view(oy), x.view(ox), N, K).average);
            const auto deep = besicovitch(x.view(ox), y.view(oy), N, K + 20);
            CHECK(deep.average >= a.average);
            CHECK(deep.average - a.average <= 1.0 / static_cast<double>(K) + 1e-12);
        }
    }

    TEST_CASE("nearby Sturmian points: small and decreasing in agreement depth") {
        const auto x = gen::sturmian({}, 300000);
        // Pairs at the next return of a depth-m word are rotations by ever smaller angles.
        double prev = 1.0;
        for (std::size_t m : {4, 16, 64}) {
            const auto w = cylinder_ball_identity(x, m).word;
            const auto next = next_occurrence(x, w, 1, x.length());
            REQUIRE(next.has_value());
            const auto r = besicovitch(x.view(0), x.view(*next), 100000, 64);
            CHECK(r.average < prev);
            prev = r.average;
        }
        CHECK(prev < 0.05);
    }

    TEST_CASE("horizon shortfall") {
        const auto x = repeat({0}, 100);
        CHECK_THROWS_AS(besicovitch(x.view(), x.view(), 90, 20), HorizonError);
    }
}

TEST_SUITE("diam series") {
    TEST_CASE("full-shift Champernowne: 1/2 inside the word, then 1") {
        const auto x = gen::full_shift_point({}, 200000);
        for (const char* w : {"00", "01", "10", "11"}) {
            const auto s = diam_series(x, FiniteWord::parse(w, 2), 5000, 64);
            CHECK(s.value(1) == 0.5);
            for (std::size_t i = 2; i <= 5000; ++i) REQUIRE(s.value(i) == 1.0);
        }
    }

    TEST_CASE("periodic orbit: one point per cylinder") {
        const auto x = repeat({0, 1}, 10000);
        const auto s = diam_series(x, FiniteWord::parse("01", 2), 2000, 64);
        CHECK(s.occurrence_count >= 2);
        CHECK(!s.insufficient_sample);
        for (std::size_t i = 1; i <= 2000; ++i) REQUIRE(s.first_diff[i - 1] == 0);
    }

    TEST_CASE("insufficient sample is flagged, series still emitted") {
        std::vector<Symbol> v(1000, 0);
        v[10] = 1;
        v[11] = 1;
        const auto s = diam_series(seq(v), FiniteWord::parse("11", 2), 100, 16);
        CHECK(s.insufficient_sample);
        CHECK(s.first_diff.size() == 100);
        const auto verdict = diam_mean_avg_test(s, 0.1);
        CHECK(verdict.verdict == Verdict::inconclusive);
    }

    TEST_CASE("matches the brute-force multiset scan") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 60; ++trial) {
            const unsigned k = 2 + rng() % 2;
            const std::size_t N = 50 + rng() % 200, K = 1 + rng() % 30;
            // Low-entropy source so long agreements are common.
            oracle::Bytes b(3000);
            for (auto& s : b) s = static_cast<Symbol>(rng() % 9 == 0 ? rng() % k : 0);
            const auto x = seq(b, k);
            const std::size_t m = 1 + rng() % 3;
            const auto w = cylinder_ball_identity(x, m).word;
            const auto s = diam_series(x, w, N, K);
            const oracle::Bytes wb(w.symbols().begin(), w.symbols().end());
            const auto occ = oracle::occurrences(b, wb, std::min(b.size(), b.size() - N - K + m));
            REQUIRE(occ.size() == s.occurrence_count);
            if (occ.size() < 2) continue;
            for (std::size_t i = 1; i <= N; ++i) REQUIRE(s.first_diff[i - 1] == oracle::diam_first_diff(b, occ, i, K));
        }
    }

    TEST_CASE("antitone in the occurrence sample") {
        std::mt19937_64 rng(17);
        const auto x = gen::sturmian({}, 60000);
        const auto w = FiniteWord::parse("1011", 2);
        const auto all = occurrences(x, w, 40000).positions;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<std::size_t> sub;
            for (auto q : all) {
                if (rng() % 3 == 0) sub.push_back(q);
            }
            if (sub.size() < 2) continue;
            const auto big = diam_series_at(x, w, all, 5000, 64);
            const auto small = diam_series_at(x, w, sub, 5000, 64);
            for (std::size_t i = 1; i <= 5000; ++i) REQUIRE(small.value(i) <= big.value(i));
        }
    }

    TEST_CASE("thinning respects the occurrence cap") {
        const auto x = gen::sturmian({}, 100000);
        const auto s = diam_series(x, FiniteWord::parse("1", 2), 1000, 64, 500);
        CHECK(s.thinned);
        CHECK(s.occurrence_count <= 500);
        CHECK(s.occurrences_found > 500);
    }

    TEST_CASE("zero-block example: long stretch reads as agree-through-K") {
        gen::PaperExampleParams p;
        p.i_max = 5;
        const auto [x, meta] = gen::build_paper_example(p);
        const auto s = diam_series(x, FiniteWord({1, 1}, 4), meta.p_at(5), 64);
        for (std::size_t i = 3; i <= 4; ++i) {
            for (auto t = meta.p_at(i) + 1; t + 64 <= meta.k_at(i) - meta.p_at(i); ++t) REQUIRE(s.first_diff[t - 1] == 0);
        }
    }

    TEST_CASE("bad arguments") {
        const auto x = repeat({0, 1}, 100);
        CHECK_THROWS_AS(diam_series(x, FiniteWord::parse("01", 2), 90, 20), HorizonError);
        CHECK_THROWS_AS(diam_series(x, FiniteWord::parse("01", 2), 10, 0), ArgumentError);
        const std::vector<std::size_t> bad{1};
        CHECK_THROWS_AS(diam_series_at(x, FiniteWord::parse("01", 2), bad, 10, 5), ArgumentError);
    }

    TEST_CASE("CSV export i,diam") {
        const auto x = gen::full_shift_point({}, 5000);
        const auto s = diam_series(x, FiniteWord::parse("01", 2), 3, 8);
        CHECK(io::diam_series_csv(s) == "i,diam\n1,0.5\n2,1\n3,1\n");
    }
}

TEST_SUITE("verdicts") {
    TEST_CASE("full shift fails, periodic holds") {
        const auto fs = gen::full_shift_point({}, 100000);
        const auto per = repeat({0, 0, 1}, 100000);
        const auto sf = diam_series(fs, FiniteWord::parse("01", 2), 10000, 64);
        const auto sp = diam_series(per, FiniteWord::parse("00", 2), 10000, 64);
        CHECK(diam_mean_avg_test(sf, 0.1).statistic > 0.9);
        CHECK(diam_mean_avg_test(sf, 0.1).verdict == Verdict::fails);
        CHECK(diam_mean_density_test(sf, 0.1).statistic == 1.0);
        CHECK(frequent_stability_test(sf, 0.1, 0.01).verdict == Verdict::fails);
        for (const auto& v : {diam_mean_avg_test(sp, 0.02), diam_mean_density_test(sp, 0.02),
                              banach_diam_mean_test(sp, 0.02), stable_in_mean_test(sp, 0.02),
                              frequent_stability_test(sp, 0.02)}) {
            CHECK(v.statistic <= v.bias);
            CHECK(v.verdict == Verdict::holds);
        }
    }

    TEST_CASE("strict thresholds: equality fails") {
        const auto fs = gen::full_shift_point({}, 100000);
        const auto s = diam_series(fs, FiniteWord::parse("0", 2), 1000, 64);
        CHECK(diam_mean_avg_test(s, 1.0).statistic == 1.0);
        CHECK(diam_mean_avg_test(s, 1.0).verdict == Verdict::fails);
        CHECK(diam_mean_density_test(s, 1.0).statistic == 0.0);  // nothing exceeds eta = 1
        CHECK(diam_mean_density_test(s, 1.0).verdict == Verdict::holds);
    }

    TEST_CASE("stable-in-mean dominates the final average; Banach dominates Cesaro with N scheduled") {
        std::mt19937_64 rng(21);
        gen::PaperExampleParams p;
        p.i_max = 4;
        const auto [pe, meta] = gen::build_paper_example(p);
        std::vector<SymbolicSequence> corpus{pe, gen::sturmian({}, 100000), gen::toeplitz_regular({}, 100000),
                                             gen::full_shift_point({}, 100000)};
        for (const auto& x : corpus) {
            for (std::size_t m : {2, 5}) {
                const std::size_t N = 1000 + rng() % 20000;
                const auto s = diam_series(x, cylinder_ball_identity(x, m).word, N, 64);
                const auto prefix = s.prefix_sums();
                const double final_avg = prefix[N] / static_cast<double>(N);
                CHECK(stable_in_mean_test(s, 0.5).statistic >= final_avg);
                auto windows = density::default_banach_windows(N);
                if (windows.back() != N) windows.push_back(N);
                CHECK(banach_diam_mean_test(s, 0.5, windows).statistic >= final_avg);
                CHECK(banach_diam_mean_test(s, 0.5, windows).statistic >=
                      diam_mean_avg_test(s, 0.5, std::vector<std::size_t>{N}).statistic);
            }
        }
    }

    TEST_CASE("average >= eta * density(eta) on shared series") {
        gen::PaperExampleParams p;
        p.i_max = 5;
        const auto [pe, meta] = gen::build_paper_example(p);
        std::vector<SymbolicSequence> corpus{repeat({0, 0, 1}, 200000), pe, gen::sturmian({}, 200000),
                                             gen::toeplitz_regular({}, 200000), gen::full_shift_point({}, 200000)};
        for (const auto& x : corpus) {
            for (std::size_t m : {2, 8, 24}) {
                const auto s = diam_series(x, cylinder_ball_identity(x, m).word, 40000, 64);
                const auto avg = diam_mean_avg_test(s, 0.5).statistic;
                for (double eta : {0.5, 0.25, 0.1, 0.05}) {
                    CHECK(avg >= eta * diam_mean_density_test(s, eta).statistic);
                }
            }
        }
    }

    TEST_CASE("diam-mean hold implies frequent stability on the corpus") {
        gen::PaperExampleParams p;
        p.i_max = 5;
        const auto [pe, meta] = gen::build_paper_example(p);
        std::vector<SymbolicSequence> corpus{repeat({0, 1, 1}, 200000), pe, gen::sturmian({}, 200000),
                                             gen::toeplitz_regular({}, 200000), gen::full_shift_point({}, 200000)};
        for (const auto& x : corpus) {
            for (std::size_t m : {2, 16, 48}) {
                const auto s = diam_series(x, cylinder_ball_identity(x, m).word, 40000, 64);
                for (double eps : {0.1, 0.25}) {
                    if (diam_mean_avg_test(s, eps).verdict != Verdict::holds) continue;
                    CHECK(frequent_stability_test(s, eps, 1.0 - eps).verdict == Verdict::holds);
                }
            }
        }
    }

    TEST_CASE("verdict JSON fields") {
        const auto x = repeat({0, 1}, 5000);
        auto v = diam_mean_avg_test(diam_series(x, FiniteWord::parse("01", 2), 1000, 64), 0.1);
        v.evidence_ref = "series/x.csv";
        const auto j = to_json(v);
        for (const char* key : {"test", "params", "statistic", "bias", "verdict", "evidence_ref"}) {
            CHECK(j.contains(key));
        }
        CHECK(j.at("verdict") == "holds-at-horizon");
        CHECK(j.at("evidence").at("horizon_note").get<std::string>().find("estimate at horizon") == 0);
    }

    TEST_CASE("threshold validation") {
        const auto x = repeat({0, 1}, 5000);
        const auto s = diam_series(x, FiniteWord::parse("01", 2), 100, 8);
        CHECK_THROWS_AS(diam_mean_avg_test(s, 0.0), ArgumentError);
        CHECK_THROWS_AS(frequent_stability_test(s, 0.1, 0.0), ArgumentError);
        CHECK_THROWS_AS(banach_diam_mean_test(s, 0.1, std::vector<std::size_t>{50, 20}), ArgumentError);
    }
}

TEST_SUITE("sensitivity") {
    TEST_CASE("full shift with depth-3 cylinders is sensitive") {
        const auto x = gen::full_shift_point({}, 200000);
        SensitivityOptions opt;
        opt.depth = 3;
        const auto v = diam_mean_sensitivity_test(x, 20000, 64, 0.1, opt);
        CHECK(v.verdict == Verdict::holds);
        CHECK(v.statistic == 1.0);
        CHECK(v.evidence.at("per_word").size() == 8);
    }

    TEST_CASE("periodic point is not sensitive") {
        const auto x = repeat({0, 0, 1}, 100000);
        SensitivityOptions opt;
        opt.depth = 3;
        const auto v = diam_mean_sensitivity_test(x, 20000, 64, 0.1, opt);
        CHECK(v.verdict == Verdict::fails);
        CHECK(v.statistic == 0.0);
    }

    TEST_CASE("zero-block example has a low-density witness") {
        gen::PaperExampleParams p;
        p.i_max = 5;
        const auto [x, meta] = gen::build_paper_example(p);
        SensitivityOptions opt;
        opt.depth = 2;
        opt.occ_limit = 2000;
        const auto v = diam_mean_sensitivity_test(x, meta.p_at(5), 64, 0.1, opt);
        CHECK(v.verdict == Verdict::fails);
        CHECK(v.statistic < 0.1);
    }

    TEST_CASE("words absent from the prefix are skipped with notice") {
        const auto x = repeat({0, 0, 1}, 50000);
        SensitivityOptions opt;
        opt.words = {FiniteWord::parse("11", 2), FiniteWord::parse("00", 2)};
        const auto v = diam_mean_sensitivity_test(x, 1000, 16, 0.1, opt);
        CHECK(v.evidence.at("skipped_missing").size() == 1);
        CHECK(v.evidence.at("minimizing_word") == "00");
    }
}

TEST_SUITE("mean equicontinuity modulus") {
    TEST_CASE("periodic: curve within the bias for m >= period") {
        const auto x = repeat({0, 1, 1}, 100000);
        const std::vector<std::size_t> depths{3, 6, 12};
        const auto c = mean_eq_modulus(x, depths, 16, 10000, 64);
        for (const auto& p : c.points) {
            CHECK(p.statistic <= 1.0 / 64);
            CHECK(p.pairs == 16);
            CHECK(!p.shortfall);
        }
        CHECK(mean_eq_test(c, 0.1).verdict == Verdict::holds);
    }

    TEST_CASE("Sturmian: decreasing in m") {
        const auto x = gen::sturmian({}, 400000);
        const std::vector<std::size_t> depths{4, 32};
        const auto c = mean_eq_modulus(x, depths, 16, 50000, 64);
        CHECK(c.points[1].statistic < c.points[0].statistic);
    }

    TEST_CASE("full shift: bounded away from zero at every depth") {
        const auto x = gen::full_shift_point({}, 400000);
        const std::vector<std::size_t> depths{2, 4, 8};
        const auto c = mean_eq_modulus(x, depths, 8, 20000, 64);
        for (const auto& p : c.points) CHECK(p.statistic > 0.3);
        CHECK(mean_eq_test(c, 0.1).verdict == Verdict::fails);
    }

    TEST_CASE("worst pair agrees on the sampled depth") {
        const auto x = gen::toeplitz_regular({}, 200000);
        const std::vector<std::size_t> depths{8};
        const auto c = mean_eq_modulus(x, depths, 8, 10000, 64);
        const auto& p = c.points[0];
        for (std::size_t j = 0; j < 8; ++j) CHECK(x.buffer()[p.worst_first + j] == x.buffer()[p.worst_second + j]);
    }
}

TEST_SUITE("a_N") {
    TEST_CASE("shifted-OR matches direct definition; monotone; a_N <= N") {
        gen::PaperExampleParams p;
        p.i_max = 4;
        const auto [x, meta] = gen::build_paper_example(p);
        const auto b = bytes_of(x);
        std::vector<std::size_t> horizons;
        for (std::size_t n = 1; n <= meta.p_at(4); n += 97) horizons.push_back(n);
        std::size_t occ_count = 0;
        const auto a = a_n_curve(x, FiniteWord({1, 1}, 4), horizons, &occ_count);
        const auto occ = oracle::occurrences(b, {1, 1}, b.size() - horizons.back() + 2);
        CHECK(occ.size() == occ_count);
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            std::size_t direct = 0;
            for (std::size_t m = 1; m <= horizons[h]; ++m) {
                bool hit = false;
                for (auto q : occ) hit = hit || b[q + m - 1] != 0;
                direct += hit;
            }
            CHECK(a[h] == direct);
            CHECK(a[h] <= horizons[h]);
            if (h) CHECK(a[h] >= a[h - 1]);
        }
    }

    TEST_CASE("ratios within the construction bound") {
        gen::PaperExampleParams p;
        p.i_max = 5;
        const auto [x, meta] = gen::build_paper_example(p);
        const auto st = a_n_statistic(x, meta, 1, 4);
        for (std::size_t j = 0; j < st.levels.size(); ++j) {
            CHECK(st.ratios[j] <= 1.0);
            if (st.levels[j] >= 2) CHECK(st.ratios[j] <= st.bounds[j]);
        }
        CHECK_THROWS_AS(a_n_statistic(x, meta, 1, 5), ArgumentError);
    }
}

TEST_SUITE("entropy") {
    TEST_CASE("Sturmian: ln(n+1)/n, decreasing") {
        const auto x = gen::sturmian({}, 1000000);
        const auto c = entropy_complexity(x, 1, 20);
        for (std::size_t j = 0; j < c.lengths.size(); ++j) CHECK(c.counts[j] == c.lengths[j] + 1);
        CHECK(c.values.back() == doctest::Approx(std::log(21.0) / 20.0));
        CHECK(c.non_increasing);
    }

    TEST_CASE("periodic: constant count, value tends to zero") {
        const auto x = repeat({0, 1, 1, 0, 1}, 10000);
        const auto c = entropy_complexity(x, 5, 40);
        for (auto n : c.counts) CHECK(n == 5);
        CHECK(c.values.back() < 0.05);
    }

    TEST_CASE("limit below n_max rejected") {
        const auto x = repeat({0, 1}, 100);
        CHECK_THROWS_AS(entropy_complexity(x, 1, 10, 5), ArgumentError);
    }
}

TEST_SUITE("hierarchy") {
    TEST_CASE("periodic at the top, full shift at the bottom and sensitive") {
        ClassifyParams cp;
        cp.depth = 2;
        cp.horizon = 20000;
        const auto per = classify_hierarchy(repeat({0, 0, 1}, 200000), "periodic", cp);
        CHECK(per.level == "diam-mean-equicontinuity-point");
        for (const auto& v : per.verdicts) CHECK(v.verdict == Verdict::holds);
        CHECK(per.sensitivity.verdict == Verdict::fails);
        CHECK(per.dichotomy_consistent);

        const auto fs = classify_hierarchy(gen::full_shift_point({}, 200000), "full_shift", cp);
        CHECK(fs.level == "none");
        for (const auto& v : fs.verdicts) CHECK(v.verdict == Verdict::fails);
        CHECK(fs.sensitivity.verdict == Verdict::holds);
        CHECK(fs.dichotomy_consistent);
        const auto j = to_json(fs);
        CHECK(j.at("ladder").size() == 3);
    }

    TEST_CASE("inconclusive component makes the rung inconclusive") {
        std::vector<Symbol> v(50000, 0);
        v[5] = 1;
        v[6] = 1;
        ClassifyParams cp;
        cp.word = FiniteWord::parse("11", 2);
        cp.horizon = 1000;
        const auto r = classify_hierarchy(seq(v), "lonely", cp);
        CHECK(r.ladder.front().verdict == Verdict::inconclusive);
    }
}
