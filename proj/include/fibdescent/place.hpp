#pragma once

#include <fibdescent/integer.hpp>
#include <fibdescent/primes.hpp>

#include <algorithm>
#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibdescent {

/// A place of Q: the real place or a finite prime. Ordered real < 2 < 3 < 5 < ...
class Place {
 public:
  static Place real() { return Place(Integer(0)); }

  static Place finite(const Integer& p) {
    if (!is_prime(p)) throw std::invalid_argument("not a prime: " + fibdescent::to_string(p));
    return Place(p);
  }

  static Place finite(unsigned long p) { return finite(Integer(p)); }

  /// "inf", "real" or "oo" for the real place, otherwise a decimal prime.
  static Place parse(const std::string& token) {
    if (token == "inf" || token == "real" || token == "oo") return real();
    return finite(parse_integer(token));
  }

  bool is_real() const { return p_ == 0; }
  bool is_finite() const { return p_ != 0; }

  const Integer& prime() const {
    if (is_real()) throw std::logic_error("real place has no prime");
    return p_;
  }

  std::string to_string() const { return is_real() ? "inf" : fibdescent::to_string(p_); }

  friend bool operator==(const Place& a, const Place& b) { return a.p_ == b.p_; }
  friend std::strong_ordering operator<=>(const Place& a, const Place& b) {
    int c = cmp(a.p_, b.p_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  explicit Place(Integer p) : p_(std::move(p)) {}
  Integer p_;
};

/// Sorted, duplicate-free set of places.
using PlaceSet = std::vector<Place>;

inline PlaceSet normalize(PlaceSet places) {
  std::sort(places.begin(), places.end());
  places.erase(std::unique(places.begin(), places.end()), places.end());
  return places;
}

inline bool contains(const PlaceSet& set, const Place& v) {
  return std::binary_search(set.begin(), set.end(), v);
}

inline PlaceSet set_union(const PlaceSet& a, const PlaceSet& b) {
  PlaceSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline PlaceSet set_difference(const PlaceSet& a, const PlaceSet& b) {
  PlaceSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<Integer> finite_primes(const PlaceSet& set) {
  std::vector<Integer> out;
  for (const auto& v : set) {
    if (v.is_finite()) out.push_back(v.prime());
  }
  return out;
}

inline std::string to_string(const PlaceSet& set) {
  std::string s = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) s += ",";
    s += set[i].to_string();
  }
  return s + "}";
}

}  // namespace fibdescent
