#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "icanvas/document.hpp"

namespace icanvas {

using json = nlohmann::json;

json to_json(const Rect& r);
Rect rect_from_json(const json& j);
json to_json(const Fragment& f);
Fragment fragment_from_json(const json& j);
json to_json(const FragmentEdit& e);
FragmentEdit fragment_edit_from_json(const json& j);
json to_json(const SceneSpec& s);
SceneSpec scene_from_json(const json& j);
json to_json(const GenerationControls& c);
GenerationControls controls_from_json(const json& j);
json to_json(const Provenance& p);
Provenance provenance_from_json(const json& j);
json to_json(const Grounding& g);
Grounding grounding_from_json(const json& j);
json to_json(const ElementBody& body);
ElementBody element_body_from_json(ElementKind kind, const json& j);
json to_json(const Element& e);
Element element_from_json(const json& j);
json to_json(const HistoryEntry& h);
HistoryEntry history_from_json(const json& j);
// Asset metadata only; raster bytes travel separately, addressed by id.
json asset_meta_to_json(const ImageAsset& a);

// Canonical scene text used for asset hashing.
std::string canonical_scene(const SceneSpec& scene);

// Looks up raster bytes for an asset id during load; returns nullopt if absent.
using RasterSource = std::function<std::optional<Raster>(const AssetId&)>;

json document_to_json(const CanvasDocument& doc);
// Canonical text: sorted keys, no insignificant whitespace, trailing newline.
std::string serialize(const CanvasDocument& doc);
// Throws version_mismatch or corrupt_payload. Every asset's id is re-derived
// from its bytes and must match.
CanvasDocument deserialize(std::string_view bytes, const RasterSource& rasters);
RasterSource rasters_from(const CanvasDocument& doc);

// Document file plus "<path>.assets/<hash>.png".
void save_document(const CanvasDocument& doc, const std::filesystem::path& path);
CanvasDocument load_document(const std::filesystem::path& path);
std::filesystem::path asset_dir_for(const std::filesystem::path& doc_path);

std::vector<std::uint8_t> encode_png(std::int32_t width, std::int32_t height, const Raster& rgba);
struct DecodedImage {
  std::int32_t width = 0;
  std::int32_t height = 0;
  Raster rgba;
};
DecodedImage decode_png(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace icanvas
