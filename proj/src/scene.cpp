#include "icanvas/scene.hpp"

#include "icanvas/codec.hpp"
#include "icanvas/error.hpp"
#include "icanvas/hash.hpp"

namespace icanvas {

const Raster& ImageAsset::pixels() const {
  static const Raster kEmpty;
  return raster ? *raster : kEmpty;
}

bool operator==(const ImageAsset& a, const ImageAsset& b) {
  return a.id == b.id && a.width == b.width && a.height == b.height && a.pixels() == b.pixels() &&
         a.scene == b.scene && a.provenance == b.provenance;
}

AssetId compute_asset_id(const Raster& raster, const std::optional<SceneSpec>& scene) {
  Fnv1a h;
  h.update(raster);
  h.field(scene ? canonical_scene(*scene) : std::string());
  return to_hex(h.digest());
}

ImageAsset make_asset(std::int32_t width, std::int32_t height, Raster raster,
                      std::optional<SceneSpec> scene, std::optional<Provenance> provenance) {
  if (width <= 0 || height <= 0)
    throw Error(Errc::invalid_request, "asset dimensions must be positive");
  if (raster.size() != static_cast<std::size_t>(width) * height * 4)
    throw Error(Errc::corrupt_payload, "raster length does not match dimensions");
  ImageAsset a;
  a.width = width;
  a.height = height;
  a.id = compute_asset_id(raster, scene);
  a.raster = std::make_shared<const Raster>(std::move(raster));
  a.scene = std::move(scene);
  a.provenance = std::move(provenance);
  return a;
}

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb color_of(std::uint64_t h) {
  return {static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8),
          static_cast<std::uint8_t>(h >> 16)};
}

const std::string& first_or_empty(const TagSet& tags) {
  static const std::string kEmpty;
  return tags.empty() ? kEmpty : *tags.begin();
}

}  // namespace

Raster render_scene(const SceneSpec& scene, std::int32_t width, std::int32_t height,
                    std::uint64_t seed) {
  std::string color_tag;
  for (const auto& o : scene.objects)
    if (!o.color_tags.empty()) {
      color_tag = *o.color_tags.begin();
      break;
    }
  const Rgb bg = color_of(Fnv1a{}.field("background").field(color_tag).field(seed).digest());

  Raster px(static_cast<std::size_t>(width) * height * 4);
  for (std::size_t i = 0; i < px.size(); i += 4) {
    px[i] = bg.r;
    px[i + 1] = bg.g;
    px[i + 2] = bg.b;
    px[i + 3] = 255;
  }
  for (const auto& o : scene.objects) {
    const Rgb c =
        color_of(Fnv1a{}.field("object").field(o.label).field(first_or_empty(o.style_tags)).digest());
    const PixelBox box = rasterize(o.region, width, height);
    for (std::int32_t y = box.y0; y < box.y1; ++y) {
      std::uint8_t* row = px.data() + (static_cast<std::size_t>(y) * width) * 4;
      for (std::int32_t x = box.x0; x < box.x1; ++x) {
        row[x * 4] = c.r;
        row[x * 4 + 1] = c.g;
        row[x * 4 + 2] = c.b;
        row[x * 4 + 3] = 255;
      }
    }
  }
  return px;
}

NormRect layout_slot(std::size_t index, std::size_t count) noexcept {
  if (count <= 1) return {0.25, 0.25, 0.5, 0.5};
  const double w = 1.0 / static_cast<double>(count);
  return {w * static_cast<double>(index), 0.25, w, 0.5};
}

}  // namespace icanvas
