#ifndef NFATK_BITMASK_HPP
#define NFATK_BITMASK_HPP

#include <cstdint>
#include <cstddef>
#include <functional>
#include <vector>

namespace nfatk {

/// Fixed-width bitset over state indices, sized at construction. Used for
/// state sets inside dag layers where O(1) membership and cheap intersection
/// tests dominate.
class Mask {
public:
    Mask() = default;
    explicit Mask(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    void set(std::size_t i) { words_[i >> 6] |= (1ULL << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }
    bool none() const { return !any(); }

    bool intersects(const Mask& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }

    Mask& operator|=(const Mask& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    Mask& operator&=(const Mask& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    std::size_t size() const { return bits_; }

    bool operator==(const Mask& o) const { return bits_ == o.bits_ && words_ == o.words_; }
    bool operator<(const Mask& o) const { return words_ < o.words_; }

    std::size_t hash() const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (auto w : words_) {
            h ^= w;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::size_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

struct MaskHash {
    std::size_t operator()(const Mask& m) const { return m.hash(); }
};

} // namespace nfatk

#endif
