#ifndef UIND_DYADIC_HPP
#define UIND_DYADIC_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace uind {

// Exact dyadic rational num / 2^scale. Program prior masses are sums of
// 2^(-code_len), so probability estimates stay exact here; conversion to
// double happens only at ratio/report boundaries.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(std::uint64_t num, unsigned scale) : num_(num), scale_(scale) { normalize(); }

  static Dyadic zero() { return Dyadic(); }
  // 2^(-k)
  static Dyadic pow2_neg(unsigned k) {
    if (k > kMaxScale) throw std::overflow_error("dyadic scale too large");
    return Dyadic(1, k);
  }

  std::uint64_t num() const { return num_; }
  unsigned scale() const { return scale_; }
  bool is_zero() const { return num_ == 0; }

  Dyadic& operator+=(const Dyadic& o) {
    unsigned s = scale_ > o.scale_ ? scale_ : o.scale_;
    std::uint64_t a = shifted(num_, s - scale_);
    std::uint64_t b = shifted(o.num_, s - o.scale_);
    if (a > ~b) throw std::overflow_error("dyadic addition overflow");
    num_ = a + b;
    scale_ = s;
    normalize();
    return *this;
  }
  friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }

  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    unsigned s = a.scale_ > b.scale_ ? a.scale_ : b.scale_;
    return shifted(a.num_, s - a.scale_) <=> shifted(b.num_, s - b.scale_);
  }
  friend bool operator==(const Dyadic& a, const Dyadic& b) { return (a <=> b) == 0; }

  double to_double() const { return std::ldexp(static_cast<double>(num_), -static_cast<int>(scale_)); }

 private:
  static constexpr unsigned kMaxScale = 62;

  static std::uint64_t shifted(std::uint64_t v, unsigned by) {
    if (by >= 64 || (by && (v >> (64 - by)) != 0)) throw std::overflow_error("dyadic shift overflow");
    return v << by;
  }

  void normalize() {
    if (num_ == 0) {
      scale_ = 0;
      return;
    }
    while (scale_ > 0 && (num_ & 1u) == 0) {
      num_ >>= 1;
      --scale_;
    }
    if (scale_ > kMaxScale) throw std::overflow_error("dyadic scale too large");
  }

  std::uint64_t num_ = 0;
  unsigned scale_ = 0;
};

}  // namespace uind

#endif
