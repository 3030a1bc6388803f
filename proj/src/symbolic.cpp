#include "symdyn/symbolic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <unordered_set>

#include "symdyn/errors.hpp"

namespace symdyn {

// ---------------------------------------------------------------------------
// FiniteWord

FiniteWord::FiniteWord(std::vector<Symbol> symbols, unsigned alphabet_size)
    : symbols_(std::move(symbols)), alphabet_size_(alphabet_size) {
    if (alphabet_size_ < 1 || alphabet_size_ > 256) {
        throw ArgumentError("FiniteWord: alphabet size must be in [1, 256]");
    }
    for (auto s : symbols_) {
        if (s >= alphabet_size_) {
            throw ArgumentError("FiniteWord: symbol " + std::to_string(s) + " outside alphabet of size " +
                                std::to_string(alphabet_size_));
        }
    }
}

FiniteWord FiniteWord::parse(std::string_view digits, unsigned alphabet_size) {
    if (alphabet_size > 10) throw ArgumentError("FiniteWord::parse: digit notation needs alphabet size <= 10");
    std::vector<Symbol> out;
    out.reserve(digits.size());
    for (char c : digits) {
        if (c < '0' || c > '9') throw ArgumentError(std::string("FiniteWord::parse: not a digit: '") + c + "'");
        out.push_back(static_cast<Symbol>(c - '0'));
    }
    return FiniteWord(std::move(out), alphabet_size);
}

Symbol FiniteWord::at(std::size_t j) const {
    if (j == 0 || j > symbols_.size()) {
        throw HorizonError("FiniteWord::at: index " + std::to_string(j) + " outside [1, " +
                           std::to_string(symbols_.size()) + "]");
    }
    return symbols_[j - 1];
}

FiniteWord FiniteWord::operator+(const FiniteWord& rhs) const {
    std::vector<Symbol> out(symbols_);
    out.insert(out.end(), rhs.symbols_.begin(), rhs.symbols_.end());
    return FiniteWord(std::move(out), std::max(alphabet_size_, rhs.alphabet_size_));
}

std::string FiniteWord::to_string() const {
    std::string out;
    if (alphabet_size_ <= 10) {
        for (auto s : symbols_) out.push_back(static_cast<char>('0' + s));
        return out;
    }
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (i) out.push_back('.');
        out += std::to_string(symbols_[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SymbolicSequence / SequenceView

SymbolicSequence::SymbolicSequence(unsigned alphabet_size, std::vector<Symbol> prefix, std::string generator_id,
                                   std::string params_json) {
    if (alphabet_size < 1 || alphabet_size > 256) {
        throw ArgumentError("SymbolicSequence: alphabet size must be in [1, 256]");
    }
    if (prefix.empty()) throw ArgumentError("SymbolicSequence: prefix must hold at least one symbol");
    const auto bad = std::find_if(prefix.begin(), prefix.end(), [&](Symbol s) { return s >= alphabet_size; });
    if (bad != prefix.end()) {
        throw ArgumentError("SymbolicSequence: symbol " + std::to_string(*bad) + " at position " +
                            std::to_string(bad - prefix.begin() + 1) + " outside alphabet of size " +
                            std::to_string(alphabet_size));
    }
    data_ = std::make_shared<const Data>(
        Data{alphabet_size, std::move(prefix), std::move(generator_id), std::move(params_json)});
}

Symbol SymbolicSequence::at(std::size_t j) const {
    if (j == 0 || j > length()) {
        throw HorizonError(generator_id() + ": symbol " + std::to_string(j) + " requested, prefix holds " +
                           std::to_string(length()));
    }
    return data_->symbols[j - 1];
}

SequenceView SymbolicSequence::view(std::size_t n) const {
    if (n >= length()) {
        throw HorizonError(generator_id() + ": shift " + std::to_string(n) + " leaves no symbols (L = " +
                           std::to_string(length()) + ")");
    }
    std::span<const Symbol> all(data_->symbols);
    return SequenceView(std::shared_ptr<const void>(data_, data_.get()), all.subspan(n), n, data_->alphabet_size,
                        &data_->generator_id);
}

std::uint64_t SymbolicSequence::content_hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    mix(data_->generator_id);
    mix("\n");
    mix(data_->params_json);
    return h;
}

Symbol SequenceView::at(std::size_t j) const {
    if (j == 0 || j > symbols_.size()) {
        throw HorizonError(label() + " shifted by " + std::to_string(offset_) + ": symbol " + std::to_string(j) +
                           " requested, view exposes " + std::to_string(symbols_.size()));
    }
    return symbols_[j - 1];
}

SequenceView SequenceView::shifted(std::size_t n) const {
    if (n >= symbols_.size()) {
        throw HorizonError(label() + ": shift " + std::to_string(offset_ + n) + " leaves no symbols");
    }
    return SequenceView(owner_, symbols_.subspan(n), offset_ + n, alphabet_size_, label_);
}

SequenceView shift_view(const SymbolicSequence& x, std::size_t n) { return x.view(n); }

// ---------------------------------------------------------------------------
// Metric

TruncatedDistance metric_distance(const SequenceView& x, const SequenceView& y, std::size_t depth_cap) {
    if (depth_cap == 0) throw ArgumentError("metric_distance: depth cap must be >= 1");
    if (x.length() < depth_cap) {
        throw HorizonError("metric_distance: x (" + x.label() + " at offset " + std::to_string(x.offset()) +
                           ") exposes " + std::to_string(x.length()) + " symbols, depth cap needs " +
                           std::to_string(depth_cap));
    }
    if (y.length() < depth_cap) {
        throw HorizonError("metric_distance: y (" + y.label() + " at offset " + std::to_string(y.offset()) +
                           ") exposes " + std::to_string(y.length()) + " symbols, depth cap needs " +
                           std::to_string(depth_cap));
    }
    const auto a = x.symbols().first(depth_cap);
    const auto b = y.symbols().first(depth_cap);
    const auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin());
    TruncatedDistance d;
    d.depth_cap = depth_cap;
    d.first_diff = ia == a.end() ? 0 : static_cast<std::size_t>(ia - a.begin()) + 1;
    return d;
}

// ---------------------------------------------------------------------------
// Occurrences

namespace {

void check_word_for(const SymbolicSequence& x, const FiniteWord& w, const char* who) {
    if (w.empty()) throw ArgumentError(std::string(who) + ": empty word");
    for (auto s : w.symbols()) {
        if (s >= x.alphabet_size()) {
            throw ArgumentError(std::string(who) + ": word " + w.to_string() + " is not over the alphabet of " +
                                x.generator_id() + " (size " + std::to_string(x.alphabet_size()) + ")");
        }
    }
}

std::size_t resolve_limit(const SymbolicSequence& x, std::optional<std::size_t> limit, const char* who) {
    const std::size_t lim = limit.value_or(x.length());
    if (lim > x.length()) {
        throw HorizonError(std::string(who) + ": limit " + std::to_string(lim) + " exceeds prefix length " +
                           std::to_string(x.length()));
    }
    return lim;
}

template <typename Fn>
void scan_occurrences(std::span<const Symbol> hay, std::span<const Symbol> needle, Fn&& on_match) {
    if (needle.size() > hay.size()) return;
    if (needle.size() == 1) {
        const Symbol c = needle[0];
        const Symbol* base = hay.data();
        const Symbol* p = base;
        const Symbol* end = base + hay.size();
        while ((p = static_cast<const Symbol*>(std::memchr(p, c, static_cast<std::size_t>(end - p)))) != nullptr) {
            if (!on_match(static_cast<std::size_t>(p - base))) return;
            ++p;
        }
        return;
    }
    const std::boyer_moore_horspool_searcher searcher(needle.begin(), needle.end());
    auto it = hay.begin();
    while (true) {
        auto [first, last] = searcher(it, hay.end());
        if (first == hay.end()) return;
        if (!on_match(static_cast<std::size_t>(first - hay.begin()))) return;
        it = first + 1;
    }
}

}  // namespace

OccurrenceIndex occurrences(const SymbolicSequence& x, const FiniteWord& w, std::optional<std::size_t> limit) {
    check_word_for(x, w, "occurrences");
    const std::size_t lim = resolve_limit(x, limit, "occurrences");
    if (w.size() > lim) {
        throw ArgumentError("occurrences: word length " + std::to_string(w.size()) + " exceeds limit " +
                            std::to_string(lim));
    }
    OccurrenceIndex idx{w, {}, lim, x.generator_id()};
    scan_occurrences(x.buffer().first(lim), w.symbols(), [&](std::size_t q) {
        idx.positions.push_back(q);
        return true;
    });
    return idx;
}

std::optional<std::size_t> next_occurrence(const SymbolicSequence& x, const FiniteWord& w, std::size_t from,
                                           std::size_t limit) {
    check_word_for(x, w, "next_occurrence");
    const std::size_t lim = resolve_limit(x, limit, "next_occurrence");
    if (from >= lim) return std::nullopt;
    std::optional<std::size_t> found;
    scan_occurrences(x.buffer().subspan(from, lim - from), w.symbols(), [&](std::size_t q) {
        found = from + q;
        return false;
    });
    return found;
}

// ---------------------------------------------------------------------------
// Factors

namespace {

unsigned bits_per_symbol(unsigned k) { return k <= 1 ? 1u : static_cast<unsigned>(std::bit_width(k - 1u)); }

// Distinct packed codes of the n-words (MSB-first, so code order is lexicographic).
std::vector<std::uint64_t> packed_factor_codes(std::span<const Symbol> s, std::size_t n, unsigned bits) {
    std::vector<std::uint64_t> codes;
    if (n > s.size()) return codes;
    codes.reserve(s.size() - n + 1);
    const std::uint64_t mask = n * bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << (n * bits)) - 1;
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        code = ((code << bits) | s[i]) & mask;
        if (i + 1 >= n) codes.push_back(code);
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    return codes;
}

std::unordered_set<std::string_view> hashed_factors(std::span<const Symbol> s, std::size_t n) {
    std::unordered_set<std::string_view> seen;
    if (n > s.size()) return seen;
    const char* base = reinterpret_cast<const char*>(s.data());
    for (std::size_t i = 0; i + n <= s.size(); ++i) seen.emplace(base + i, n);
    return seen;
}

void check_factor_args(std::size_t n, std::size_t lim) {
    if (n == 0) throw ArgumentError("factors: word length must be >= 1");
    if (n > lim) throw ArgumentError("factors: word length " + std::to_string(n) + " exceeds limit " + std::to_string(lim));
}

}  // namespace

std::vector<FiniteWord> factors(const SymbolicSequence& x, std::size_t n, std::optional<std::size_t> limit) {
    const std::size_t lim = resolve_limit(x, limit, "factors");
    check_factor_args(n, lim);
    const auto s = x.buffer().first(lim);
    const unsigned k = x.alphabet_size();
    const unsigned bits = bits_per_symbol(k);
    std::vector<FiniteWord> out;
    if (n * bits <= 64) {
        const auto codes = packed_factor_codes(s, n, bits);
        out.reserve(codes.size());
        const std::uint64_t sym_mask = (std::uint64_t{1} << bits) - 1;
        for (auto code : codes) {
            std::vector<Symbol> w(n);
            for (std::size_t j = n; j-- > 0;) {
                w[j] = static_cast<Symbol>(code & sym_mask);
                code >>= bits;
            }
            out.emplace_back(std::move(w), k);
        }
        return out;
    }
    const auto seen = hashed_factors(s, n);
    out.reserve(seen.size());
    for (auto sv : seen) {
        std::vector<Symbol> w(sv.begin(), sv.end());
        out.emplace_back(std::move(w), k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t factor_count(const SymbolicSequence& x, std::size_t n, std::optional<std::size_t> limit) {
    const std::size_t lim = resolve_limit(x, limit, "factor_count");
    check_factor_args(n, lim);
    const auto s = x.buffer().first(lim);
    const unsigned bits = bits_per_symbol(x.alphabet_size());
    if (n * bits <= 64) return packed_factor_codes(s, n, bits).size();
    return hashed_factors(s, n).size();
}

// ---------------------------------------------------------------------------
// Cylinders

bool CylinderSpec::contains(const SequenceView& y) const {
    if (y.length() < word.size()) {
        throw HorizonError("CylinderSpec::contains: " + y.label() + " exposes " + std::to_string(y.length()) +
                           " symbols, cylinder depth is " + std::to_string(word.size()));
    }
    const auto s = word.symbols();
    return std::equal(s.begin(), s.end(), y.symbols().begin());
}

CylinderSpec cylinder_ball_identity(const SymbolicSequence& x, std::size_t m) {
    if (m == 0) throw ArgumentError("cylinder_ball_identity: depth must be >= 1");
    if (m > x.length()) {
        throw HorizonError("cylinder_ball_identity: depth " + std::to_string(m) + " exceeds prefix length " +
                           std::to_string(x.length()));
    }
    const auto s = x.buffer().first(m);
    return CylinderSpec{FiniteWord(std::vector<Symbol>(s.begin(), s.end()), x.alphabet_size())};
}

std::size_t depth_for_radius(double delta) {
    if (!(delta > 0.0) || delta > 1.0) throw ArgumentError("depth_for_radius: radius must be in (0, 1]");
    auto m = static_cast<std::size_t>(std::ceil(1.0 / delta));
    // Guard against 1/delta landing a hair above an integer.
    if (m > 1 && 1.0 / static_cast<double>(m - 1) <= delta) --m;
    return m;
}

}  // namespace symdyn
