#include "symdyn/generators.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <random>

#include "json.hpp"
#include "symdyn/errors.hpp"

namespace symdyn::gen {

namespace mp = boost::multiprecision;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Zero-block example

std::uint64_t auto_k_schedule(std::uint64_t p_i, std::uint64_t i) {
    if (p_i < 2 || i < 1) throw ArgumentError("auto_k_schedule: needs p_i >= 2 and i >= 1");
    std::uint64_t four_p = 0, inner = 0, scaled = 0, k = 0;
    if (__builtin_mul_overflow(p_i, std::uint64_t{4}, &four_p) || __builtin_add_overflow(four_p, i, &inner) ||
        __builtin_mul_overflow(i, inner, &scaled) || __builtin_add_overflow(p_i, scaled, &k)) {
        throw BudgetError("auto_k_schedule: k_" + std::to_string(i) + " overflows 64 bits (p_i = " +
                          std::to_string(p_i) + ")");
    }
    return k;
}

namespace {

std::vector<Symbol> resolve_driver(const PaperExampleParams& params) {
    const std::size_t i_max = params.i_max;
    if (i_max < 1) throw ArgumentError("build_paper_example: i_max must be >= 1");

    std::vector<Symbol> y = params.y;
    if (y.empty()) {
        const auto driver = champernowne23(i_max);
        y.assign(driver.buffer().begin(), driver.buffer().end());
    }
    if (y.size() < i_max) {
        throw ArgumentError("build_paper_example: driver y has " + std::to_string(y.size()) +
                            " symbols, B_" + std::to_string(i_max) + " needs " + std::to_string(i_max));
    }
    for (std::size_t j = 0; j < i_max; ++j) {
        if (y[j] != 2 && y[j] != 3) {
            throw ArgumentError("build_paper_example: y_" + std::to_string(j + 1) + " = " + std::to_string(y[j]) +
                                " is not in {2,3}");
        }
    }
    return y;
}

}  // namespace

PaperExampleMeta paper_example_schedule(const PaperExampleParams& params) {
    const std::size_t i_max = params.i_max;
    resolve_driver(params);
    if (params.k_rule == KRule::explicit_list) {
        if (params.k_list.size() < i_max) {
            throw ArgumentError("build_paper_example: explicit k list has " + std::to_string(params.k_list.size()) +
                                " entries, i_max = " + std::to_string(i_max));
        }
        for (auto k : params.k_list) {
            if (k < 1) throw ArgumentError("build_paper_example: every k_i must be >= 1");
        }
    }

    // Sizing pass: the full p/k schedule before touching memory.
    PaperExampleMeta meta;
    meta.p.push_back(2);
    for (std::size_t i = 1; i <= i_max; ++i) {
        const std::uint64_t p_i = meta.p.back();
        const std::uint64_t k_i =
            params.k_rule == KRule::automatic ? auto_k_schedule(p_i, i) : params.k_list[i - 1];
        const std::uint64_t p_next = 2 * p_i + k_i + i;
        if (k_i > kPaperExampleBudget || p_next > kPaperExampleBudget) {
            throw BudgetError("build_paper_example: p_" + std::to_string(i + 1) + " = " + std::to_string(p_next) +
                              " exceeds the buffer budget of 2^31 symbols");
        }
        meta.k.push_back(k_i);
        meta.p.push_back(p_next);
        const auto num = static_cast<std::int64_t>(2 * p_i + p_next) - static_cast<std::int64_t>(k_i);
        const auto den = static_cast<std::int64_t>(k_i) - static_cast<std::int64_t>(p_i);
        meta.ratio.emplace_back(num, den);
    }

    return meta;
}

std::pair<SymbolicSequence, PaperExampleMeta> build_paper_example(const PaperExampleParams& params) {
    const std::size_t i_max = params.i_max;
    const auto y = resolve_driver(params);
    auto meta = paper_example_schedule(params);

    std::vector<Symbol> buf;
    buf.reserve(meta.p.back());
    buf = {1, 1};
    meta.measured_lengths.push_back(buf.size());
    for (std::size_t i = 1; i <= i_max; ++i) {
        const std::size_t prev = buf.size();
        const std::size_t k_i = meta.k[i - 1];
        buf.resize(prev + k_i + i + prev, 0);
        std::copy_n(y.begin(), i, buf.begin() + static_cast<std::ptrdiff_t>(prev + k_i));
        std::copy_n(buf.begin(), prev, buf.begin() + static_cast<std::ptrdiff_t>(prev + k_i + i));
        meta.measured_lengths.push_back(buf.size());
    }

    json pj;
    pj["i_max"] = i_max;
    pj["y"] = params.y.empty() ? json("champernowne23") : json(params.y);
    if (params.k_rule == KRule::automatic) {
        pj["k_rule"] = "auto";
    } else {
        pj["k_rule"] = std::vector<std::uint64_t>(params.k_list.begin(), params.k_list.begin() + i_max);
    }
    return {SymbolicSequence(4, std::move(buf), "paper_example", pj.dump()), std::move(meta)};
}

// ---------------------------------------------------------------------------
// Champernowne points

namespace {

std::vector<Symbol> champernowne_buffer(unsigned k, std::size_t length) {
    std::vector<Symbol> out;
    out.reserve(length);
    std::vector<Symbol> word;
    for (std::size_t n = 1; out.size() < length; ++n) {
        word.assign(n, 0);
        while (true) {
            for (auto s : word) {
                if (out.size() == length) return out;
                out.push_back(s);
            }
            // Odometer increment in base k, most significant symbol first.
            std::size_t j = n;
            while (j > 0 && word[j - 1] == k - 1) word[--j] = 0;
            if (j == 0) break;
            ++word[j - 1];
        }
    }
    return out;
}

}  // namespace

SymbolicSequence champernowne23(std::size_t length) {
    if (length < 1) throw ArgumentError("champernowne23: length must be >= 1");
    auto buf = champernowne_buffer(2, length);
    for (auto& s : buf) s = static_cast<Symbol>(s + 2);
    json pj;
    pj["length"] = length;
    return SymbolicSequence(4, std::move(buf), "champernowne23", pj.dump());
}

SymbolicSequence champernowne(unsigned k, std::size_t length) {
    return full_shift_point(FullShiftParams{k, true, 0}, length);
}

SymbolicSequence full_shift_point(const FullShiftParams& params, std::size_t length) {
    if (params.k < 2 || params.k > 256) throw ArgumentError("full_shift_point: k must be in [2, 256]");
    if (length < 1) throw ArgumentError("full_shift_point: length must be >= 1");
    json pj;
    pj["k"] = params.k;
    pj["length"] = length;
    if (params.champernowne) {
        pj["mode"] = "champernowne";
        return SymbolicSequence(params.k, champernowne_buffer(params.k, length), "full_shift", pj.dump());
    }
    pj["mode"] = "random";
    pj["seed"] = params.seed;
    std::mt19937_64 engine(params.seed);
    std::vector<Symbol> buf(length);
    for (auto& s : buf) s = static_cast<Symbol>(engine() % params.k);
    return SymbolicSequence(params.k, std::move(buf), "full_shift", pj.dump());
}

// ---------------------------------------------------------------------------
// Sturmian codings

namespace {

using u128 = unsigned __int128;
using big_float = mp::cpp_bin_float_50;

u128 to_u128(const mp::cpp_int& v) {
    const mp::cpp_int mask = (mp::cpp_int(1) << 64) - 1;
    const auto lo = static_cast<std::uint64_t>(v & mask);
    const auto hi = static_cast<std::uint64_t>((v >> 64) & mask);
    return (static_cast<u128>(hi) << 64) | lo;
}

mp::cpp_int from_u128(u128 v) {
    mp::cpp_int out = static_cast<std::uint64_t>(v >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(v);
    return out;
}

}  // namespace

u128 parse_unit_fraction(const std::string& text) {
    big_float value;
    if (text == "golden") {
        value = (mp::sqrt(big_float(5)) - 1) / 2;
    } else if (text == "silver" || text == "sqrt2") {
        value = mp::sqrt(big_float(2)) - 1;
    } else {
        const bool plain = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
            return (c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+';
        });
        if (!plain) throw ArgumentError("rotation: cannot parse '" + text + "' as a number");
        try {
            value = big_float(text);
        } catch (const std::exception&) {
            throw ArgumentError("rotation: cannot parse '" + text + "' as a number");
        }
    }
    if (value < 0 || value >= 1) throw ArgumentError("rotation: '" + text + "' is outside [0, 1)");
    const big_float scaled = mp::ldexp(value, 128);
    return to_u128(mp::cpp_int(mp::floor(scaled)));
}

bool looks_rational(u128 alpha, std::uint64_t max_denominator) {
    if (alpha == 0) return true;
    // Convergents h/k of alpha = a / 2^128 via Euclid on (a, 2^128).
    const mp::cpp_int one = mp::cpp_int(1) << 128;
    const mp::cpp_int a = from_u128(alpha);
    const mp::cpp_int tolerance = mp::cpp_int(1) << 48;  // 2^-80 in units of 2^-128
    mp::cpp_int num = a, den = one;
    mp::cpp_int h1 = 1, h2 = 0, k1 = 0, k2 = 1;
    while (den != 0) {
        const mp::cpp_int t = num / den;
        const mp::cpp_int r = num % den;
        const mp::cpp_int h = t * h1 + h2;
        const mp::cpp_int k = t * k1 + k2;
        if (k > max_denominator) return false;
        mp::cpp_int err = k * a - h * one;
        if (err < 0) err = -err;
        if (err < tolerance) return true;
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
        num = den;
        den = r;
    }
    return true;
}

SymbolicSequence sturmian(const RotationParams& params, std::size_t length) {
    if (length < 1) throw ArgumentError("sturmian: length must be >= 1");
    const u128 alpha = parse_unit_fraction(params.alpha);
    if (looks_rational(alpha)) {
        throw ArgumentError("sturmian: alpha = " + params.alpha + " is rational to working precision");
    }
    u128 theta = parse_unit_fraction(params.theta);

    // Partition endpoints 0 and 1 - alpha; orbit points must stay 1e-12 away.
    const u128 cut = -alpha;  // 1 - alpha mod 1
    const auto guard = static_cast<u128>(std::ldexp(1e-12, 64)) << 64;
    auto near = [&](u128 phi, u128 point) {
        const u128 d = phi - point;
        return d < guard || -d < guard;
    };

    constexpr int kMaxReseeds = 8;
    for (int attempt = 0; attempt <= kMaxReseeds; ++attempt) {
        std::vector<Symbol> buf(length);
        u128 phi = theta;
        bool collided = false;
        for (std::size_t n = 0; n < length; ++n) {
            phi += alpha;  // wraps mod 2^128 == mod 1
            if (near(phi, 0) || near(phi, cut)) {
                collided = true;
                break;
            }
            buf[n] = phi >= cut ? 1 : 0;
        }
        if (!collided) {
            json pj;
            pj["alpha"] = params.alpha;
            pj["theta"] = params.theta;
            pj["length"] = length;
            return SymbolicSequence(2, std::move(buf), "sturmian", pj.dump());
        }
        // Deterministic re-seed: nudge theta by an irrational multiple of 2^-40.
        theta += alpha >> 40;
    }
    throw PrecisionError("sturmian: orbit keeps hitting a partition endpoint for alpha = " + params.alpha +
                         ", theta = " + params.theta);
}

// ---------------------------------------------------------------------------
// Toeplitz

SymbolicSequence toeplitz_regular(const ToeplitzParams& params, std::size_t length) {
    if (length < 1) throw ArgumentError("toeplitz_regular: length must be >= 1");
    if (params.periods.empty()) throw ArgumentError("toeplitz_regular: empty period schedule");
    if (params.symbols.empty()) throw ArgumentError("toeplitz_regular: no fill symbols");
    for (auto s : params.symbols) {
        if (s >= params.alphabet_size) throw ArgumentError("toeplitz_regular: fill symbol outside alphabet");
    }
    std::vector<std::uint64_t> ratios;
    std::uint64_t prev = 1;
    for (auto p : params.periods) {
        if (p <= prev || p % prev != 0) {
            throw ArgumentError("toeplitz_regular: period " + std::to_string(p) + " is not a proper multiple of " +
                                std::to_string(prev));
        }
        ratios.push_back(p / prev);
        prev = p;
    }

    std::vector<Symbol> buf(length, 0);
    std::vector<std::size_t> holes(length);
    for (std::size_t i = 0; i < length; ++i) holes[i] = i;
    std::size_t level = 0;
    while (!holes.empty() || level < params.levels) {
        const std::uint64_t q = ratios[std::min(level, ratios.size() - 1)];
        const Symbol s = params.symbols[level % params.symbols.size()];
        std::vector<std::size_t> rest;
        rest.reserve(holes.size() - holes.size() / q);
        for (std::size_t h = 0; h < holes.size(); ++h) {
            if (h % q == 0) {
                buf[holes[h]] = s;
            } else {
                rest.push_back(holes[h]);
            }
        }
        holes.swap(rest);
        ++level;
    }

    json pj;
    pj["periods"] = params.periods;
    pj["symbols"] = params.symbols;
    pj["alphabet_size"] = params.alphabet_size;
    pj["levels"] = params.levels;
    pj["length"] = length;
    return SymbolicSequence(params.alphabet_size, std::move(buf), "toeplitz", pj.dump());
}

// ---------------------------------------------------------------------------

SymbolicSequence periodic(const FiniteWord& word, std::size_t length) {
    if (word.empty()) throw ArgumentError("periodic: empty period word");
    if (length < 1) throw ArgumentError("periodic: length must be >= 1");
    std::vector<Symbol> buf(length);
    const auto s = word.symbols();
    for (std::size_t i = 0; i < length; ++i) buf[i] = s[i % s.size()];
    json pj;
    pj["word"] = word.to_string();
    pj["alphabet_size"] = word.alphabet_size();
    pj["length"] = length;
    return SymbolicSequence(word.alphabet_size(), std::move(buf), "periodic", pj.dump());
}

}  // namespace symdyn::gen
