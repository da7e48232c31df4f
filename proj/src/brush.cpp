#include "icanvas/brush.hpp"

#include <algorithm>
#include <cmath>

namespace icanvas::brushes {

namespace {

std::vector<std::string> split_items(const std::string& prompt) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= prompt.size()) {
    const std::size_t end = std::min(prompt.find(',', start), prompt.size());
    const std::string item = canonical_text(std::string_view(prompt).substr(start, end - start));
    if (!item.empty() && std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

// Bounding rect of a mask's set pixels.
std::optional<Rect> mask_bounds(const Mask& m) {
  std::int32_t x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (std::int32_t y = 0; y < m.height(); ++y)
    for (std::int32_t x = 0; x < m.width(); ++x)
      if (m.test(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return std::nullopt;
  return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace

void fill_brush_from_text(Engine& engine, const ElementId& brush, const std::string& prompt, BrushMode mode) {
  engine.doc().body<BrushBody>(brush);
  const std::string p = canonical_text(prompt);
  if (p.empty()) throw Error(Errc::empty_prompt);
  auto& b = engine.doc().edit_body<BrushBody>(brush);
  b.prompt = p;
  b.mode = mode;
  b.applications.clear();
}

std::string fill_brush_from_example(Engine& engine, const ElementId& brush, const AssetId& asset,
                                    const std::optional<Rect>& region, BrushMode mode) {
  engine.doc().body<BrushBody>(brush);
  if (!engine.doc().has_asset(asset)) throw Error(Errc::unknown_asset, "unknown asset " + asset);
  const std::string p = canonical_text(engine.adapters().language->extract(engine.doc().asset(asset), region, mode));
  if (p.empty())
    throw Error(Errc::extraction_empty, "asset has no " + std::string(to_string(mode)) + " attributes");
  auto& b = engine.doc().edit_body<BrushBody>(brush);
  b.prompt = p;
  b.mode = mode;
  b.applications.clear();
  return p;
}

std::vector<Point> resample_stroke(const Stroke& stroke, std::int32_t width, std::int32_t height) {
  const auto& pts = stroke.points;
  if (pts.size() < 2) throw Error(Errc::degenerate_stroke, "a stroke needs at least two points");
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  const double length = cum.back();
  if (!(length > 0.0)) throw Error(Errc::degenerate_stroke, "stroke has zero length");

  const auto raw = static_cast<std::size_t>(std::floor(length / kControlPointSpacing));
  const std::size_t n = std::clamp(raw, kMinControlPoints, kMaxControlPoints);
  const double max_x = std::max(0.0, static_cast<double>(width) - 1.0);
  const double max_y = std::max(0.0, static_cast<double>(height) - 1.0);

  std::vector<Point> out;
  out.reserve(n);
  std::size_t seg = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = i + 1 == n ? length : length * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg + 1 < pts.size() && cum[seg] < s) ++seg;
    const double span = cum[seg] - cum[seg - 1];
    const double t = span > 0.0 ? (s - cum[seg - 1]) / span : 0.0;
    Point p{pts[seg - 1].x + t * (pts[seg].x - pts[seg - 1].x), pts[seg - 1].y + t * (pts[seg].y - pts[seg - 1].y)};
    p.x = std::clamp(p.x, 0.0, max_x);
    p.y = std::clamp(p.y, 0.0, max_y);
    out.push_back(p);
  }
  return out;
}

double emphasis_weight(std::int32_t applications) noexcept {
  return std::min(1.0 + 0.25 * (std::max(applications, 1) - 1), 2.0);
}

JobId apply_brush(Engine& engine, const ElementId& brush, const ElementId& target, const Stroke& stroke) {
  const BrushBody b = engine.doc().body<BrushBody>(brush);
  if (!b.filled()) throw Error(Errc::unfilled_brush, "brush " + brush + " has no prompt");
  if (!engine.doc().contains(target) || engine.doc().element(target).kind() != ElementKind::image)
    throw Error(Errc::unknown_target, target + " is not an image");
  const auto& img = engine.doc().body<ImageBody>(target);
  if (!img.asset) throw Error(Errc::unknown_target, "image " + target + " has no content yet");
  const AssetId source = *img.asset;
  const ImageAsset& asset = engine.doc().asset(source);

  const auto points = resample_stroke(stroke, asset.width, asset.height);
  Mask mask = engine.adapters().image->segment(asset, points);
  if (mask.count() == 0) throw Error(Errc::segmentation_empty, "segmentation selected nothing");
  const std::string description =
      engine.adapters().language->extract(asset, mask_bounds(mask), BrushMode::content);

  const auto it = b.applications.find(target);
  const std::int32_t n = (it == b.applications.end() ? 0 : it->second) + 1;
  BrushIntent intent{brush, source, b.prompt, b.mode, emphasis_weight(n), description, std::move(mask)};
  const JobId job = engine.submit(target, DebounceClass::immediate, std::move(intent));
  engine.doc().edit_body<BrushBody>(brush).applications[target] = n;
  return job;
}

ElementId combine_brushes(Engine& engine, const ElementId& a, const ElementId& b, std::optional<Rect> rect) {
  const BrushBody ba = engine.doc().body<BrushBody>(a);
  const BrushBody bb = engine.doc().body<BrushBody>(b);
  if (!ba.filled() || !bb.filled()) throw Error(Errc::unfilled_brush, "both brushes must be filled");
  auto items = split_items(ba.prompt);
  for (auto& item : split_items(bb.prompt))
    if (std::find(items.begin(), items.end(), item) == items.end()) items.push_back(std::move(item));
  BrushBody combined;
  for (std::size_t i = 0; i < items.size(); ++i) combined.prompt += (i ? ", " : "") + items[i];
  combined.mode = ba.mode == BrushMode::style || bb.mode == BrushMode::style ? BrushMode::style : BrushMode::content;
  const Rect ra = engine.doc().element(a).rect;
  return engine.create_element(rect.value_or(Rect{ra.right() + 16, ra.y, ra.w, ra.h}), std::move(combined));
}

Work plan_brush_job(const Engine& engine, const Job& job) {
  const auto& intent = std::get<BrushIntent>(job.intent);
  const auto& img = engine.doc().body<ImageBody>(job.target);
  const auto source = engine.doc().asset_ptr(intent.source);
  const std::string source_prompt = image_prompt(engine, job.target);

  GenerationRequest req;
  req.references.push_back(source);
  req.mask = intent.mask;
  req.controls = intent.mode == BrushMode::style ? style_controls(OpKind::inpaint) : content_controls(OpKind::inpaint);
  req.controls.emphasis_weight = intent.emphasis;
  req.seed = img.seed;
  req.validate();

  return [req, intent, source_prompt, adapter_id = engine.adapter_id(),
          created = job.fired_at](const Adapters& a) mutable -> JobOutcome {
    req.prompt = a.language->craft_brush_prompt(source_prompt, intent.segment_description, intent.brush_prompt,
                                                intent.mode, intent.emphasis);
    ImageAsset asset = a.image->inpaint(req);
    Provenance p;
    p.prompt = req.prompt;
    if (!canonical_text(req.prompt).empty()) p.fragments = a.language->decompose(req.prompt);
    sort_canonical(p.fragments);
    p.parents = req.reference_ids();
    p.seed = req.seed;
    p.controls = req.controls;
    p.adapter_id = adapter_id;
    p.created_at = created;
    asset.provenance = std::move(p);
    return JobResult{{std::move(asset)}, {}};
  };
}

}  // namespace icanvas::brushes
