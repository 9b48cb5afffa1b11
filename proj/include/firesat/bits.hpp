#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace firesat {

/// Packed bit vector with 64-bit word storage.
class BitArray {
public:
    BitArray() = default;
    explicit BitArray(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    std::size_t size() const { return size_; }

    bool get(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i, bool v) {
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v) words_[i >> 6] |= mask;
        else   words_[i >> 6] &= ~mask;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (uint64_t w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    bool operator==(const BitArray&) const = default;

    const std::vector<uint64_t>& words() const { return words_; }
    std::vector<uint64_t>& words() { return words_; }

private:
    std::size_t size_ = 0;
    std::vector<uint64_t> words_;
};

/// Dense 3-D bit tensor (d0 x d1 x d2), used with d2 = 1 for 2-D data.
class BitTensor {
public:
    BitTensor() = default;
    BitTensor(int d0, int d1, int d2)
        : d0_(d0), d1_(d1), d2_(d2),
          bits_(static_cast<std::size_t>(d0) * d1 * d2) {
        if (d0 < 0 || d1 < 0 || d2 < 0)
            throw std::invalid_argument("BitTensor: negative extent");
    }

    int dim0() const { return d0_; }
    int dim1() const { return d1_; }
    int dim2() const { return d2_; }

    bool get(int i, int j, int k) const { return bits_.get(index(i, j, k)); }
    void set(int i, int j, int k, bool v) { bits_.set(index(i, j, k), v); }
    std::size_t count() const { return bits_.count(); }

    bool operator==(const BitTensor&) const = default;

    const BitArray& storage() const { return bits_; }
    BitArray& storage() { return bits_; }

private:
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * d1_ + j) * d2_ + k;
    }
    int d0_ = 0, d1_ = 0, d2_ = 0;
    BitArray bits_;
};

} // namespace firesat
