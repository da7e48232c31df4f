#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icanvas/geometry.hpp"
#include "icanvas/generation.hpp"

namespace icanvas {

using AssetId = std::string;

using TagSet = std::set<std::string>;

struct SceneObject {
  std::string label;
  NormRect region;
  TagSet style_tags;
  TagSet tone_tags;
  TagSet color_tags;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

// Metadata standing in for image semantics under the mock adapters.
struct SceneSpec {
  std::vector<SceneObject> objects;

  bool empty() const noexcept { return objects.empty(); }
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

using Raster = std::vector<std::uint8_t>;

// Immutable RGBA image plus the metadata that produced it. Rasters are shared
// so documents can be copied without duplicating pixel data.
struct ImageAsset {
  AssetId id;
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::shared_ptr<const Raster> raster;
  std::optional<SceneSpec> scene;
  std::optional<Provenance> provenance;

  const Raster& pixels() const;
  friend bool operator==(const ImageAsset& a, const ImageAsset& b);
};

// Content hash over raster bytes and the canonical scene serialization.
AssetId compute_asset_id(const Raster& raster, const std::optional<SceneSpec>& scene);

// Builds an asset, validating raster length and assigning its content id.
ImageAsset make_asset(std::int32_t width, std::int32_t height, Raster raster,
                      std::optional<SceneSpec> scene, std::optional<Provenance> provenance);

// Deterministic raster for a scene: background from the first color tag and
// the seed, each object filled with a color keyed on its label and first style
// tag. Later objects paint over earlier ones.
Raster render_scene(const SceneSpec& scene, std::int32_t width, std::int32_t height,
                    std::uint64_t seed);

// Layout used by the mock generator: n objects in equal columns, a single
// object centered at half size.
NormRect layout_slot(std::size_t index, std::size_t count) noexcept;

}  // namespace icanvas
