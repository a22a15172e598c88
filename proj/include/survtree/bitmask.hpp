#pragma once

#include <cstdint>
#include <cstddef>
#include <functional>
#include <vector>

namespace survtree {

// Fixed-size bitset sized at runtime. Used for feature columns and subproblem
// support sets; equality and hashing are over the full block array, so two
// masks compare equal only if they have the same universe size.
class Bitmask {
public:
    Bitmask() = default;

    explicit Bitmask(std::size_t n, bool fill = false)
        : size_(n), blocks_((n + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
        trim();
    }

    std::size_t size() const { return size_; }

    bool test(std::size_t i) const {
        return (blocks_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::size_t i, bool v = true) {
        std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (v) blocks_[i >> 6] |= bit; else blocks_[i >> 6] &= ~bit;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint64_t b : blocks_) c += std::size_t(__builtin_popcountll(b));
        return c;
    }

    bool empty() const {
        for (std::uint64_t b : blocks_) if (b) return false;
        return true;
    }

    // this := this & other, or this & ~other when negate is set.
    void and_with(const Bitmask& other, bool negate = false) {
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            blocks_[w] &= negate ? ~other.blocks_[w] : other.blocks_[w];
        trim();
    }

    std::size_t count_and(const Bitmask& other) const {
        std::size_t c = 0;
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            c += std::size_t(__builtin_popcountll(blocks_[w] & other.blocks_[w]));
        return c;
    }

    bool is_subset_of(const Bitmask& other) const {
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            if (blocks_[w] & ~other.blocks_[w]) return false;
        return true;
    }

    bool intersects(const Bitmask& other) const {
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            if (blocks_[w] & other.blocks_[w]) return true;
        return false;
    }

    // Applies f to every set bit index in ascending order.
    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < blocks_.size(); ++w) {
            std::uint64_t b = blocks_[w];
            while (b) {
                unsigned bit = unsigned(__builtin_ctzll(b));
                f(w * 64 + bit);
                b &= b - 1;
            }
        }
    }

    bool operator==(const Bitmask& other) const {
        return size_ == other.size_ && blocks_ == other.blocks_;
    }
    bool operator!=(const Bitmask& other) const { return !(*this == other); }

    std::size_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t b : blocks_) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return std::size_t(h ^ size_);
    }

private:
    void trim() {
        if (size_ & 63) blocks_.back() &= (~std::uint64_t{0}) >> (64 - (size_ & 63));
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> blocks_;
};

} // namespace survtree

template <>
struct std::hash<survtree::Bitmask> {
    std::size_t operator()(const survtree::Bitmask& m) const { return m.hash(); }
};
