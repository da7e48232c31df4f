#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icanvas/engine.hpp"

// Fillable brushes: stroke -> control points -> segmentation mask -> inpaint.
namespace icanvas::brushes {

struct Stroke {
  std::vector<Point> points;
  double width = 8.0;
};

inline constexpr std::size_t kMinControlPoints = 4;
inline constexpr std::size_t kMaxControlPoints = 32;
inline constexpr double kControlPointSpacing = 32.0;

void fill_brush_from_text(Engine& engine, const ElementId& brush, const std::string& prompt,
                          BrushMode mode);

// Picks up style tags or content labels from an asset, optionally restricted
// to a pixel region. Throws unknown_asset / extraction_empty.
std::string fill_brush_from_example(Engine& engine, const ElementId& brush, const AssetId& asset,
                                    const std::optional<Rect>& region, BrushMode mode);

// Uniform arc-length resampling; count = clamp(floor(length / 32), 4, 32),
// endpoints included, clamped into the image. Throws degenerate_stroke.
std::vector<Point> resample_stroke(const Stroke& stroke, std::int32_t width, std::int32_t height);

// 1 + 0.25 (n - 1), capped at 2.
double emphasis_weight(std::int32_t applications) noexcept;

// Segments synchronously, then submits the inpaint job.
JobId apply_brush(Engine& engine, const ElementId& brush, const ElementId& target,
                  const Stroke& stroke);

// Placed at rect, or beside brush a.
ElementId combine_brushes(Engine& engine, const ElementId& a, const ElementId& b,
                          std::optional<Rect> rect = std::nullopt);

Work plan_brush_job(const Engine& engine, const Job& job);

}  // namespace icanvas::brushes
