#pragma once

// Deterministic constructors for every system in the corpus. Each generator
// records its id and canonical parameter JSON in the produced sequence.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "symdyn/symbolic.hpp"

namespace symdyn::gen {

// ---------------------------------------------------------------------------
// The zero-block subshift X_y^K over {0,1,2,3}:
//   A_1 = 11,  A_{i+1} = A_i 0^{k_i} B_i A_i,  B_i = y_1 ... y_i,
// with x = lim A_i.

inline constexpr std::uint64_t kPaperExampleBudget = std::uint64_t{1} << 31;

enum class KRule { automatic, explicit_list };

struct PaperExampleParams {
    // Driver y in {2,3}^N; only y_1 .. y_{i_max} are read. Empty means champernowne23.
    std::vector<Symbol> y;
    KRule k_rule = KRule::automatic;
    std::vector<std::uint64_t> k_list;  // used when k_rule == explicit_list
    std::size_t i_max = 6;
};

struct PaperExampleMeta {
    std::vector<std::uint64_t> p;  // p[i-1] = |A_i|, i = 1 .. i_max+1
    std::vector<std::uint64_t> k;  // k[i-1] = k_i, i = 1 .. i_max
    // (2p_i + p_{i+1} - k_i) / (k_i - p_i) as an exact fraction.
    std::vector<std::pair<std::int64_t, std::int64_t>> ratio;
    std::vector<std::uint64_t> measured_lengths;  // |A_i| measured from the buffer

    std::uint64_t p_at(std::size_t i) const { return p.at(i - 1); }
    std::uint64_t k_at(std::size_t i) const { return k.at(i - 1); }
    double ratio_at(std::size_t i) const {
        const auto& r = ratio.at(i - 1);
        return static_cast<double>(r.first) / static_cast<double>(r.second);
    }
};

// k_i = p_i + i (4 p_i + i). Gives ratio_i = 1/i exactly.
std::uint64_t auto_k_schedule(std::uint64_t p_i, std::uint64_t i);

// Validates params and computes p, k and ratio without building the buffer.
PaperExampleMeta paper_example_schedule(const PaperExampleParams& params);

// Buffer holds A_{i_max+1}.
std::pair<SymbolicSequence, PaperExampleMeta> build_paper_example(const PaperExampleParams& params);

// ---------------------------------------------------------------------------
// All {2,3}-words of length 1, 2, 3, ... in length-lex order, concatenated.
// Alphabet size 4 so the result can drive the zero-block example directly.
SymbolicSequence champernowne23(std::size_t length);

// k-ary Champernowne point: all k-ary words by length then lexicographically.
SymbolicSequence champernowne(unsigned k, std::size_t length);

struct FullShiftParams {
    unsigned k = 2;
    bool champernowne = true;
    std::uint64_t seed = 1;
};

SymbolicSequence full_shift_point(const FullShiftParams& params, std::size_t length);

// ---------------------------------------------------------------------------
// Coding of the rotation theta + n alpha mod 1 by [1 - alpha, 1) -> 1, else 0.

struct RotationParams {
    // "golden", "silver", "sqrt2" or a decimal literal in (0, 1).
    std::string alpha = "golden";
    // Decimal literal in [0, 1).
    std::string theta = "0";
};

// alpha as a 128-bit binary fraction: alpha = fraction / 2^128.
unsigned __int128 parse_unit_fraction(const std::string& text);
// Rejects alpha within 2^-80 of p/q for some q <= max_denominator.
bool looks_rational(unsigned __int128 alpha, std::uint64_t max_denominator = 1'000'000);

SymbolicSequence sturmian(const RotationParams& params, std::size_t length);

// ---------------------------------------------------------------------------
// Toeplitz skeleton fill. Level j has period p_j; with q_j = p_j / p_{j-1}
// (p_0 = 1) it fills every q_j-th still-unfilled position, starting at the
// first one, with symbols[(j-1) % symbols.size()]. Levels beyond the given
// periods repeat the last ratio until the prefix is filled.

struct ToeplitzParams {
    std::vector<std::uint64_t> periods{2, 4};
    std::vector<Symbol> symbols{0, 1};
    unsigned alphabet_size = 2;
    std::size_t levels = 0;  // minimum number of levels; 0 = as many as the prefix needs
};

SymbolicSequence toeplitz_regular(const ToeplitzParams& params, std::size_t length);

// ---------------------------------------------------------------------------
SymbolicSequence periodic(const FiniteWord& word, std::size_t length);

}  // namespace symdyn::gen
