#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace icanvas {

// 64-bit FNV-1a. Fixed so that mock outputs and asset ids are identical
// across processes and platforms.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 14695981039346656037ull;
  static constexpr std::uint64_t kPrime = 1099511628211ull;

  Fnv1a& update(std::span<const std::uint8_t> bytes) noexcept {
    for (std::uint8_t b : bytes) {
      state_ ^= b;
      state_ *= kPrime;
    }
    return *this;
  }
  Fnv1a& update(std::string_view text) noexcept {
    return update(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  // Fields are separated by a unit separator so ("ab","c") != ("a","bc").
  Fnv1a& field(std::string_view text) noexcept {
    update(text);
    const std::uint8_t sep = 0x1f;
    return update(std::span(&sep, 1));
  }
  Fnv1a& field(std::uint64_t value) noexcept {
    std::uint8_t le[8];
    for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(value >> (8 * i));
    return update(std::span(le, 8));
  }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a(std::string_view text) noexcept { return Fnv1a{}.update(text).digest(); }

std::string to_hex(std::uint64_t value);

}  // namespace icanvas
