#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace symdyn {

/// Packed, fixed-size bit vector. Bit i lives in word i / 64 at position i % 64.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t size);

    std::size_t size() const noexcept { return size_; }

    bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    std::size_t count() const noexcept;
    // Number of set bits in [0, end).
    std::size_t count_prefix(std::size_t end) const noexcept;

    // this[j] |= src[offset + j] for j in [0, len). Word-at-a-time with an arbitrary bit shift.
    void or_shifted(const Bitset& src, std::size_t offset, std::size_t len);

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace symdyn
