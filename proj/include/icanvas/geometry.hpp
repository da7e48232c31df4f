#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace icanvas {

// Canvas rectangle in abstract pixels. Origin top-left, y grows downward.
struct Rect {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t w = 0;
  std::int32_t h = 0;

  bool valid() const noexcept { return w > 0 && h > 0; }
  std::int64_t area() const noexcept {
    return valid() ? std::int64_t{w} * std::int64_t{h} : 0;
  }
  std::int32_t right() const noexcept { return x + w; }
  std::int32_t bottom() const noexcept { return y + h; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Positive-area intersection, or nullopt.
std::optional<Rect> intersect(const Rect& a, const Rect& b) noexcept;
bool overlaps(const Rect& a, const Rect& b) noexcept;

// Rectangle in normalized [0,1]^2 image coordinates.
struct NormRect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const NormRect&, const NormRect&) = default;
};

// Half-open pixel span [x0,x1) x [y0,y1).
struct PixelBox {
  std::int32_t x0 = 0;
  std::int32_t y0 = 0;
  std::int32_t x1 = 0;
  std::int32_t y1 = 0;

  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  std::int64_t area() const noexcept {
    return empty() ? 0 : std::int64_t{x1 - x0} * std::int64_t{y1 - y0};
  }
  bool contains(std::int32_t px, std::int32_t py) const noexcept {
    return px >= x0 && px < x1 && py >= y0 && py < y1;
  }
};

// A pixel belongs to a normalized region when its center falls inside the
// half-open region. Result is clipped to the image.
PixelBox rasterize(const NormRect& region, std::int32_t width, std::int32_t height) noexcept;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Binary mask, one bit per pixel, row-major. A set bit marks the editable region.
class Mask {
 public:
  Mask() = default;
  Mask(std::int32_t width, std::int32_t height);

  std::int32_t width() const noexcept { return width_; }
  std::int32_t height() const noexcept { return height_; }
  std::int64_t pixel_count() const noexcept { return std::int64_t{width_} * height_; }

  bool test(std::int32_t x, std::int32_t y) const noexcept;
  void set(std::int32_t x, std::int32_t y, bool on = true) noexcept;
  void fill(const PixelBox& box, bool on = true) noexcept;

  std::int64_t count() const noexcept;
  // Number of set pixels inside box.
  std::int64_t count_in(const PixelBox& box) const noexcept;

  Mask complement() const;
  Mask& operator|=(const Mask& other);
  bool disjoint_with(const Mask& other) const;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  void clear_padding() noexcept;

  std::int32_t width_ = 0;
  std::int32_t height_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace icanvas
