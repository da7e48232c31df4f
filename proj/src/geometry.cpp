#include "icanvas/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace icanvas {

std::optional<Rect> intersect(const Rect& a, const Rect& b) noexcept {
  if (!a.valid() || !b.valid()) return std::nullopt;
  const std::int32_t x0 = std::max(a.x, b.x);
  const std::int32_t y0 = std::max(a.y, b.y);
  const std::int32_t x1 = std::min(a.right(), b.right());
  const std::int32_t y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

bool overlaps(const Rect& a, const Rect& b) noexcept { return intersect(a, b).has_value(); }

namespace {

// First pixel index whose center (i + 0.5) is >= edge.
std::int32_t first_center_at_or_after(double edge, std::int32_t limit) noexcept {
  const double v = std::ceil(edge - 0.5);
  if (v <= 0.0) return 0;
  if (v >= static_cast<double>(limit)) return limit;
  return static_cast<std::int32_t>(v);
}

}  // namespace

PixelBox rasterize(const NormRect& region, std::int32_t width, std::int32_t height) noexcept {
  PixelBox box;
  box.x0 = first_center_at_or_after(region.x * width, width);
  box.x1 = first_center_at_or_after((region.x + region.w) * width, width);
  box.y0 = first_center_at_or_after(region.y * height, height);
  box.y1 = first_center_at_or_after((region.y + region.h) * height, height);
  return box;
}

Mask::Mask(std::int32_t width, std::int32_t height)
    : width_(std::max(width, 0)),
      height_(std::max(height, 0)),
      words_((static_cast<std::size_t>(width_) * height_ + 63) / 64, 0) {}

bool Mask::test(std::int32_t x, std::int32_t y) const noexcept {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  const std::size_t bit = static_cast<std::size_t>(y) * width_ + x;
  return (words_[bit / 64] >> (bit % 64)) & 1u;
}

void Mask::set(std::int32_t x, std::int32_t y, bool on) noexcept {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const std::size_t bit = static_cast<std::size_t>(y) * width_ + x;
  const std::uint64_t m = std::uint64_t{1} << (bit % 64);
  if (on)
    words_[bit / 64] |= m;
  else
    words_[bit / 64] &= ~m;
}

void Mask::fill(const PixelBox& box, bool on) noexcept {
  const std::int32_t x0 = std::max(box.x0, 0), x1 = std::min(box.x1, width_);
  const std::int32_t y0 = std::max(box.y0, 0), y1 = std::min(box.y1, height_);
  for (std::int32_t y = y0; y < y1; ++y)
    for (std::int32_t x = x0; x < x1; ++x) set(x, y, on);
}

std::int64_t Mask::count() const noexcept {
  std::int64_t n = 0;
  for (std::uint64_t w : words_) n += std::popcount(w);
  return n;
}

std::int64_t Mask::count_in(const PixelBox& box) const noexcept {
  std::int64_t n = 0;
  const std::int32_t x0 = std::max(box.x0, 0), x1 = std::min(box.x1, width_);
  const std::int32_t y0 = std::max(box.y0, 0), y1 = std::min(box.y1, height_);
  for (std::int32_t y = y0; y < y1; ++y)
    for (std::int32_t x = x0; x < x1; ++x) n += test(x, y) ? 1 : 0;
  return n;
}

void Mask::clear_padding() noexcept {
  const std::size_t bits = static_cast<std::size_t>(width_) * height_;
  if (bits % 64 != 0 && !words_.empty())
    words_.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
}

Mask Mask::complement() const {
  Mask out = *this;
  for (std::uint64_t& w : out.words_) w = ~w;
  out.clear_padding();
  return out;
}

Mask& Mask::operator|=(const Mask& other) {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i) words_[i] |= other.words_[i];
  return *this;
}

bool Mask::disjoint_with(const Mask& other) const {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i)
    if (words_[i] & other.words_[i]) return false;
  return true;
}

}  // namespace icanvas
