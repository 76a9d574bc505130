#pragma once

// Dense linear algebra over F2 sized for Selmer computations (tens of columns).

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent::gf2 {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return size_; }

  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, bool value = true) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (value) {
      words_[i / 64] |= mask;
    } else {
      words_[i / 64] &= ~mask;
    }
  }
  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  bool any() const {
    for (auto w : words_) {
      if (w) return true;
    }
    return false;
  }

  BitVector& operator^=(const BitVector& o) {
    check(o);
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= o.words_[k];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  bool dot(const BitVector& o) const {
    check(o);
    unsigned acc = 0;
    for (std::size_t k = 0; k < words_.size(); ++k) acc ^= std::popcount(words_[k] & o.words_[k]);
    return acc & 1U;
  }

  /// Index of the lowest set bit, or size() if zero.
  std::size_t lowest() const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
    }
    return size_;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < size_; ++i) s += get(i) ? '1' : '0';
    return s;
  }

  friend bool operator==(const BitVector& a, const BitVector& b) = default;
  friend bool operator<(const BitVector& a, const BitVector& b) {
    if (a.size_ != b.size_) return a.size_ < b.size_;
    for (std::size_t i = 0; i < a.size_; ++i) {
      if (a.get(i) != b.get(i)) return b.get(i);
    }
    return false;
  }

 private:
  void check(const BitVector& o) const {
    if (o.size_ != size_) throw std::invalid_argument("gf2: length mismatch");
  }
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Reduced row echelon basis of the span of `vectors` (pivot = lowest set bit).
inline std::vector<BitVector> echelon(std::vector<BitVector> vectors) {
  std::vector<BitVector> basis;
  for (auto& v : vectors) {
    for (const auto& b : basis) {
      if (v.get(b.lowest())) v ^= b;
    }
    if (!v.any()) continue;
    const std::size_t pivot = v.lowest();
    for (auto& b : basis) {
      if (b.get(pivot)) b ^= v;
    }
    basis.push_back(std::move(v));
  }
  std::sort(basis.begin(), basis.end(),
            [](const BitVector& a, const BitVector& b) { return a.lowest() < b.lowest(); });
  return basis;
}

inline std::size_t rank(const std::vector<BitVector>& vectors) { return echelon(vectors).size(); }

/// Membership in the span of a basis produced by echelon().
inline bool in_span(const std::vector<BitVector>& reduced_basis, BitVector v) {
  for (const auto& b : reduced_basis) {
    if (v.get(b.lowest())) v ^= b;
  }
  return !v.any();
}

/// Basis of {x in F2^ncols : <row, x> = 0 for every row}.
inline std::vector<BitVector> kernel(const std::vector<BitVector>& rows, std::size_t ncols) {
  std::vector<BitVector> reduced = echelon(rows);
  std::vector<bool> is_pivot(ncols, false);
  for (const auto& r : reduced) is_pivot[r.lowest()] = true;
  std::vector<BitVector> out;
  for (std::size_t free = 0; free < ncols; ++free) {
    if (is_pivot[free]) continue;
    BitVector x(ncols);
    x.set(free);
    for (const auto& r : reduced) {
      if (r.get(free)) x.set(r.lowest());
    }
    out.push_back(std::move(x));
  }
  return echelon(std::move(out));
}

}  // namespace fibdescent::gf2
