#pragma once

// Independent brute-force reference implementations shared by the test suites.
// Deliberately naive: no shared code with the library beyond plain types.

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Bytes = std::vector<std::uint8_t>;

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n, unsigned k) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() % k);
    return out;
}

// 1-indexed first disagreement within depth K, 0 if none.
inline std::size_t first_diff(const Bytes& x, std::size_t ox, const Bytes& y, std::size_t oy, std::size_t K) {
    for (std::size_t j = 1; j <= K; ++j) {
        if (x.at(ox + j - 1) != y.at(oy + j - 1)) return j;
    }
    return 0;
}

inline std::vector<std::size_t> occurrences(const Bytes& x, const Bytes& w, std::size_t limit) {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q + w.size() <= limit; ++q) {
        bool ok = true;
        for (std::size_t j = 0; j < w.size(); ++j) ok = ok && x[q + j] == w[j];
        if (ok) out.push_back(q);
    }
    return out;
}

inline std::set<std::string> factors(const Bytes& x, std::size_t n, std::size_t limit) {
    std::set<std::string> out;
    for (std::size_t q = 0; q + n <= limit; ++q) out.insert(std::string(x.begin() + q, x.begin() + q + n));
    return out;
}

// #{F cap [M, M+n-1]} maximized over M, by explicit recount of every window.
inline std::size_t max_window_count(const std::vector<bool>& f, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t m = 0; m + n <= f.size(); ++m) {
        std::size_t c = 0;
        for (std::size_t i = m; i < m + n; ++i) c += f[i];
        best = std::max(best, c);
    }
    return best;
}

// Same quantity by a running add/drop count, for long horizons.
inline std::size_t sliding_max_count(const std::vector<bool>& f, std::size_t n) {
    if (n > f.size()) return 0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += f[i];
    std::size_t best = c;
    for (std::size_t m = 1; m + n <= f.size(); ++m) {
        c = c + f[m + n - 1] - f[m - 1];
        best = std::max(best, c);
    }
    return best;
}

inline std::size_t prefix_count(const std::vector<bool>& f, std::size_t n) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += f[i];
    return c;
}

// diam of T^i [w] sampled by occurrence shifts: smallest j <= K such that the
// symbols x_{q+i+j} over q are not all equal; 0 if constant through K.
inline std::size_t diam_first_diff(const Bytes& x, const std::vector<std::size_t>& occ, std::size_t i, std::size_t K) {
    for (std::size_t j = 1; j <= K; ++j) {
        const auto ref = x.at(occ[0] + i + j - 1);
        for (auto q : occ) {
            if (x.at(q + i + j - 1) != ref) return j;
        }
    }
    return 0;
}

}  // namespace oracle
