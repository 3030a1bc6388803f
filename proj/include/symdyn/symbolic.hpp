#pragma once

// Points of the one-sided shift space over {0, ..., k-1}, the 1/i metric,
// cylinders, occurrence indexing and factor enumeration.
//
// Public contracts are 1-indexed: a sequence is x = x_1 x_2 ... and the shift
// acts by (sigma^n x)_j = x_{n+j}. Buffers are 0-indexed internally.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symdyn {

using Symbol = std::uint8_t;

inline constexpr std::size_t kDefaultDepthCap = 64;

class FiniteWord {
public:
    FiniteWord() = default;
    FiniteWord(std::vector<Symbol> symbols, unsigned alphabet_size);

    // "0110" style digit strings; only for alphabets of size <= 10.
    static FiniteWord parse(std::string_view digits, unsigned alphabet_size);

    unsigned alphabet_size() const noexcept { return alphabet_size_; }
    std::size_t size() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return symbols_.empty(); }
    std::span<const Symbol> symbols() const noexcept { return symbols_; }
    // 1-indexed.
    Symbol at(std::size_t j) const;

    FiniteWord operator+(const FiniteWord& rhs) const;
    std::string to_string() const;

    friend bool operator==(const FiniteWord&, const FiniteWord&) = default;
    friend auto operator<=>(const FiniteWord& a, const FiniteWord& b) {
        return a.symbols_ <=> b.symbols_;
    }

private:
    std::vector<Symbol> symbols_;
    unsigned alphabet_size_ = 2;
};

class SequenceView;

/// Immutable materialized prefix x_1 ... x_L of a point of the shift space.
///
/// Copies share the buffer. The generator id and its canonical parameter JSON
/// identify the point: regenerating from them must give identical bytes.
class SymbolicSequence {
public:
    SymbolicSequence(unsigned alphabet_size, std::vector<Symbol> prefix, std::string generator_id,
                     std::string params_json);

    unsigned alphabet_size() const noexcept { return data_->alphabet_size; }
    std::size_t length() const noexcept { return data_->symbols.size(); }
    const std::string& generator_id() const noexcept { return data_->generator_id; }
    const std::string& params_json() const noexcept { return data_->params_json; }

    // x_j, 1 <= j <= L.
    Symbol at(std::size_t j) const;
    std::span<const Symbol> buffer() const noexcept { return data_->symbols; }

    // sigma^n x as a zero-copy view. Requires n < L.
    SequenceView view(std::size_t n = 0) const;

    // FNV-1a of generator id and canonical params; the cache key for generated buffers.
    std::uint64_t content_hash() const noexcept;

private:
    struct Data {
        unsigned alphabet_size;
        std::vector<Symbol> symbols;
        std::string generator_id;
        std::string params_json;
    };
    std::shared_ptr<const Data> data_;

    friend class SequenceView;
};

/// (buffer, offset) pair standing for sigma^offset x.
class SequenceView {
public:
    unsigned alphabet_size() const noexcept { return alphabet_size_; }
    std::size_t offset() const noexcept { return offset_; }
    // Number of symbols exposed, L - offset.
    std::size_t length() const noexcept { return symbols_.size(); }
    const std::string& label() const noexcept { return *label_; }

    // (sigma^offset x)_j, 1-indexed.
    Symbol at(std::size_t j) const;
    std::span<const Symbol> symbols() const noexcept { return symbols_; }

    SequenceView shifted(std::size_t n) const;

private:
    SequenceView(std::shared_ptr<const void> owner, std::span<const Symbol> symbols, std::size_t offset,
                 unsigned alphabet_size, const std::string* label)
        : owner_(std::move(owner)), symbols_(symbols), offset_(offset), alphabet_size_(alphabet_size),
          label_(label) {}

    std::shared_ptr<const void> owner_;
    std::span<const Symbol> symbols_;
    std::size_t offset_ = 0;
    unsigned alphabet_size_ = 2;
    const std::string* label_ = nullptr;

    friend class SymbolicSequence;
};

// d(x, y) resolved to depth K: first_diff = j means d = 1/j; first_diff = 0
// means the two points agree on x_1..x_K and only d <= 1/K is known.
struct TruncatedDistance {
    std::size_t first_diff = 0;
    std::size_t depth_cap = kDefaultDepthCap;

    bool agrees_through_cap() const noexcept { return first_diff == 0; }
    // Contribution to a time average: 1/j, or 0 for agree-through-K.
    double average_term() const noexcept { return first_diff == 0 ? 0.0 : 1.0 / static_cast<double>(first_diff); }
    double upper_bound() const noexcept {
        return 1.0 / static_cast<double>(first_diff == 0 ? depth_cap : first_diff);
    }
};

TruncatedDistance metric_distance(const SequenceView& x, const SequenceView& y,
                                  std::size_t depth_cap = kDefaultDepthCap);

SequenceView shift_view(const SymbolicSequence& x, std::size_t n);

struct OccurrenceIndex {
    FiniteWord word;
    // 0-based q with x_{[q+1, q+|w|]} = w, strictly increasing.
    std::vector<std::size_t> positions;
    std::size_t limit = 0;
    std::string source;
};

// All q with q + |w| <= limit. limit defaults to L.
OccurrenceIndex occurrences(const SymbolicSequence& x, const FiniteWord& w,
                            std::optional<std::size_t> limit = std::nullopt);

// Smallest occurrence q >= from with q + |w| <= limit, if any.
std::optional<std::size_t> next_occurrence(const SymbolicSequence& x, const FiniteWord& w, std::size_t from,
                                           std::size_t limit);

// Distinct length-n sub-words of x_{[1, limit]}, sorted.
std::vector<FiniteWord> factors(const SymbolicSequence& x, std::size_t n,
                                std::optional<std::size_t> limit = std::nullopt);
std::size_t factor_count(const SymbolicSequence& x, std::size_t n, std::optional<std::size_t> limit = std::nullopt);

// The cylinder [w] of depth m = |w|. Under the 1/i metric it is the open ball
// B_{1/m}(y) around any y starting with w.
struct CylinderSpec {
    FiniteWord word;

    std::size_t depth() const noexcept { return word.size(); }
    bool contains(const SequenceView& y) const;
};

CylinderSpec cylinder_ball_identity(const SymbolicSequence& x, std::size_t m);

// Depth m of the largest ball B_{1/m} with 1/m <= delta.
std::size_t depth_for_radius(double delta);

}  // namespace symdyn
