#include "symdyn/bitset.hpp"

#include <bit>

#include "symdyn/errors.hpp"

namespace symdyn {

Bitset::Bitset(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

std::size_t Bitset::count() const noexcept {
    std::size_t total = 0;
    for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
}

std::size_t Bitset::count_prefix(std::size_t end) const noexcept {
    if (end > size_) end = size_;
    std::size_t total = 0;
    const std::size_t full = end >> 6;
    for (std::size_t w = 0; w < full; ++w) total += static_cast<std::size_t>(std::popcount(words_[w]));
    if (const auto rem = end & 63; rem != 0) {
        const auto mask = (std::uint64_t{1} << rem) - 1;
        total += static_cast<std::size_t>(std::popcount(words_[full] & mask));
    }
    return total;
}

namespace {

// 64 bits of src starting at bit position pos; bits past the end read as zero.
std::uint64_t extract_word(std::span<const std::uint64_t> src, std::size_t pos) {
    const std::size_t w = pos >> 6;
    const unsigned shift = pos & 63;
    std::uint64_t lo = w < src.size() ? src[w] : 0;
    if (shift == 0) return lo;
    std::uint64_t hi = w + 1 < src.size() ? src[w + 1] : 0;
    return (lo >> shift) | (hi << (64 - shift));
}

}  // namespace

void Bitset::or_shifted(const Bitset& src, std::size_t offset, std::size_t len) {
    if (len > size_ || offset + len > src.size_) {
        throw ArgumentError("Bitset::or_shifted: range exceeds operand size");
    }
    const std::size_t full = len >> 6;
    for (std::size_t w = 0; w < full; ++w) {
        words_[w] |= extract_word(src.words_, offset + (w << 6));
    }
    if (const auto rem = len & 63; rem != 0) {
        const auto mask = (std::uint64_t{1} << rem) - 1;
        words_[full] |= extract_word(src.words_, offset + (full << 6)) & mask;
    }
}

}  // namespace symdyn
