#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gpfree {

// Membership over the integers [1, n]. Bit t of the word array stands for the
// integer t+1; words are 64-bit and their serialized form is little-endian.
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::uint64_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::uint64_t size() const { return n_; }

  bool test(std::uint64_t value) const {
    if (value == 0 || value > n_) return false;
    const std::uint64_t t = value - 1;
    return (words_[t >> 6] >> (t & 63)) & 1U;
  }

  void set(std::uint64_t value) {
    const std::uint64_t t = value - 1;
    words_[t >> 6] |= std::uint64_t{1} << (t & 63);
  }

  void reset(std::uint64_t value) {
    const std::uint64_t t = value - 1;
    words_[t >> 6] &= ~(std::uint64_t{1} << (t & 63));
  }

  std::uint64_t count() const {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  Bitmap& operator|=(const Bitmap& other) {
    for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) {
      words_[i] |= other.words_[i];
    }
    return *this;
  }

  // Calls f(value) for each set member in ascending order.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        const int bit = std::countr_zero(w);
        f(std::uint64_t{i} * 64 + static_cast<std::uint64_t>(bit) + 1);
        w &= w - 1;
      }
    }
  }

  std::vector<std::uint64_t> members() const {
    std::vector<std::uint64_t> out;
    out.reserve(count());
    for_each([&](std::uint64_t v) { out.push_back(v); });
    return out;
  }

  // Complement within [1, n].
  std::vector<std::uint64_t> non_members() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t v = 1; v <= n_; ++v) {
      if (!test(v)) out.push_back(v);
    }
    return out;
  }

  std::span<const std::uint64_t> words() const { return words_; }

  static Bitmap from_words(std::uint64_t n, std::vector<std::uint64_t> words) {
    Bitmap b;
    b.n_ = n;
    words.resize((n + 63) / 64, 0);
    b.words_ = std::move(words);
    if (n % 64 != 0 && !b.words_.empty()) {
      b.words_.back() &= (std::uint64_t{1} << (n % 64)) - 1;
    }
    return b;
  }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace gpfree
