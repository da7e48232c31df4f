#include "icanvas/codec.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "icanvas/error.hpp"

namespace icanvas {

json to_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Rect rect_from_json(const json& j) {
  return {j.at("x").get<std::int32_t>(), j.at("y").get<std::int32_t>(), j.at("w").get<std::int32_t>(),
          j.at("h").get<std::int32_t>()};
}

json to_json(const Fragment& f) {
  return {{"ftype", f.ftype}, {"value", f.value}, {"origin", std::string(to_string(f.origin))}};
}

Fragment fragment_from_json(const json& j) {
  const auto origin = j.contains("origin") ? fragment_origin_from(j.at("origin").get<std::string>())
                                           : FragmentOrigin::user;
  return Fragment(j.at("ftype").get<std::string>(), j.at("value").get<std::string>(), origin);
}

json to_json(const FragmentEdit& e) {
  json j = {{"action", std::string(to_string(e.action))}, {"fragment", to_json(e.fragment)}};
  if (e.replacement) j["replacement"] = to_json(*e.replacement);
  return j;
}

FragmentEdit fragment_edit_from_json(const json& j) {
  FragmentEdit e;
  e.action = edit_action_from(j.at("action").get<std::string>());
  e.fragment = fragment_from_json(j.at("fragment"));
  if (j.contains("replacement")) e.replacement = fragment_from_json(j.at("replacement"));
  return e;
}

namespace {

json tags_json(const TagSet& tags) { return json(std::vector<std::string>(tags.begin(), tags.end())); }

TagSet tags_from(const json& j) {
  TagSet out;
  for (const auto& t : j) out.insert(t.get<std::string>());
  return out;
}

}  // namespace

json to_json(const SceneSpec& s) {
  json objects = json::array();
  for (const auto& o : s.objects)
    objects.push_back({{"label", o.label},
                       {"region", {{"x", o.region.x}, {"y", o.region.y}, {"w", o.region.w}, {"h", o.region.h}}},
                       {"style_tags", tags_json(o.style_tags)},
                       {"tone_tags", tags_json(o.tone_tags)},
                       {"color_tags", tags_json(o.color_tags)}});
  return {{"objects", objects}};
}

SceneSpec scene_from_json(const json& j) {
  SceneSpec s;
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.label = o.at("label").get<std::string>();
    if (obj.label.empty()) throw Error(Errc::malformed_payload, "scene object without label");
    const auto& r = o.at("region");
    obj.region = {r.at("x").get<double>(), r.at("y").get<double>(), r.at("w").get<double>(),
                  r.at("h").get<double>()};
    if (o.contains("style_tags")) obj.style_tags = tags_from(o.at("style_tags"));
    if (o.contains("tone_tags")) obj.tone_tags = tags_from(o.at("tone_tags"));
    if (o.contains("color_tags")) obj.color_tags = tags_from(o.at("color_tags"));
    s.objects.push_back(std::move(obj));
  }
  return s;
}

std::string canonical_scene(const SceneSpec& scene) { return to_json(scene).dump(); }

json to_json(const GenerationControls& c) {
  return {{"content_weight", c.content_weight}, {"style_weight", c.style_weight},
          {"denoise_strength", c.denoise_strength}, {"guidance", c.guidance},
          {"emphasis_weight", c.emphasis_weight}, {"op_kind", std::string(to_string(c.op_kind))}};
}

GenerationControls controls_from_json(const json& j) {
  return GenerationControls::make(j.at("content_weight").get<double>(), j.at("style_weight").get<double>(),
                                  j.at("denoise_strength").get<double>(), j.at("guidance").get<double>(),
                                  j.at("emphasis_weight").get<double>(),
                                  op_kind_from(j.at("op_kind").get<std::string>()));
}

json to_json(const Provenance& p) {
  json frags = json::array();
  for (const auto& f : p.fragments) frags.push_back(to_json(f));
  return {{"prompt", p.prompt},       {"fragments", frags},        {"parents", p.parents},
          {"seed", p.seed},           {"controls", to_json(p.controls)},
          {"adapter_id", p.adapter_id}, {"created_at", p.created_at}};
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.prompt = j.at("prompt").get<std::string>();
  for (const auto& f : j.at("fragments")) p.fragments.push_back(fragment_from_json(f));
  p.parents = j.at("parents").get<std::vector<std::string>>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.controls = controls_from_json(j.at("controls"));
  p.adapter_id = j.at("adapter_id").get<std::string>();
  p.created_at = j.at("created_at").get<std::int64_t>();
  return p;
}

json to_json(const Grounding& g) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GroundNone>) return {{"source", "none"}};
        else if constexpr (std::is_same_v<T, GroundAsset>) return {{"source", "asset"}, {"asset", v.asset}};
        else if constexpr (std::is_same_v<T, GroundFragment>)
          return {{"source", "fragment"}, {"fragment", to_json(v.fragment)}};
        else return {{"source", "text"}, {"prompt", v.prompt}};
      },
      g);
}

Grounding grounding_from_json(const json& j) {
  const auto src = j.at("source").get<std::string>();
  if (src == "none") return GroundNone{};
  if (src == "asset") return GroundAsset{j.at("asset").get<std::string>()};
  if (src == "fragment") return GroundFragment{fragment_from_json(j.at("fragment"))};
  if (src == "text") return GroundText{j.at("prompt").get<std::string>()};
  throw Error(Errc::malformed_payload, "unknown grounding source " + src);
}

namespace {

json row_json(const FragmentRow& row) {
  json frags = json::array();
  for (const auto& f : row.fragments) frags.push_back(to_json(f));
  json exp = json::object();
  for (const auto& [type, list] : row.expansions) {
    json col = json::array();
    for (const auto& f : list) col.push_back(to_json(f));
    exp[type] = col;
  }
  return {{"fragments", frags}, {"expansions", exp}};
}

FragmentRow row_from(const json& j) {
  FragmentRow row;
  for (const auto& f : j.at("fragments")) row.fragments.push_back(fragment_from_json(f));
  for (const auto& [type, col] : j.at("expansions").items())
    for (const auto& f : col) row.expansions[type].push_back(fragment_from_json(f));
  return row;
}

json cell_json(const Cell& c) {
  if (const auto* a = std::get_if<AssetId>(&c)) return {{"asset", *a}};
  if (const auto* f = std::get_if<Fragment>(&c)) return {{"fragment", to_json(*f)}};
  return nullptr;
}

Cell cell_from(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.contains("asset")) return j.at("asset").get<std::string>();
  return fragment_from_json(j.at("fragment"));
}

json palette_item_json(const PaletteItem& item) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Fragment>) return {{"kind", "fragment"}, {"fragment", to_json(v)}};
        else if constexpr (std::is_same_v<T, BrushItem>)
          return {{"kind", "brush"}, {"prompt", v.prompt}, {"mode", std::string(to_string(v.mode))}};
        else if constexpr (std::is_same_v<T, LensItem>) return {{"kind", "lens"}, {"prompt", v.prompt}};
        else return {{"kind", "asset"}, {"asset", v.asset}};
      },
      item);
}

PaletteItem palette_item_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fragment") return fragment_from_json(j.at("fragment"));
  if (kind == "brush")
    return BrushItem{j.at("prompt").get<std::string>(), brush_mode_from(j.at("mode").get<std::string>())};
  if (kind == "lens") return LensItem{j.at("prompt").get<std::string>()};
  if (kind == "asset") return AssetItem{j.at("asset").get<std::string>()};
  throw Error(Errc::malformed_payload, "unknown palette item kind " + kind);
}

template <class T>
void opt_put(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

json to_json(const ElementBody& body) {
  return std::visit(
      [](const auto& b) -> json {
        using T = std::decay_t<decltype(b)>;
        json j = json::object();
        if constexpr (std::is_same_v<T, ImageBody>) {
          j["prompt"] = b.prompt;
          opt_put(j, "asset", b.asset);
          j["row"] = b.row ? row_json(*b.row) : json(nullptr);
          j["seed"] = b.seed;
        } else if constexpr (std::is_same_v<T, FragmentBody>) {
          j["fragment"] = to_json(b.fragment);
        } else if constexpr (std::is_same_v<T, LensBody>) {
          j["prompt"] = b.prompt;
          opt_put(j, "last_result", b.last_result);
          j["faded"] = b.faded;
          j["seed"] = b.seed;
        } else if constexpr (std::is_same_v<T, ContainerBody>) {
          j["prompt"] = b.prompt;
          j["grounding"] = to_json(b.grounding);
          json cells = json::array();
          for (const auto& c : b.cells) cells.push_back(cell_json(c));
          j["cells"] = cells;
          j["cell_kind"] = std::string(to_string(b.cell_kind));
          j["base_seed"] = b.base_seed;
          j["generated"] = b.generated;
        } else if constexpr (std::is_same_v<T, BrushBody>) {
          j["prompt"] = b.prompt;
          j["mode"] = std::string(to_string(b.mode));
          j["applications"] = b.applications;
        } else {
          j["title"] = b.title;
          json items = json::array();
          for (const auto& it : b.items) items.push_back(palette_item_json(it));
          j["items"] = items;
          opt_put(j, "generated_from", b.generated_from);
        }
        return j;
      },
      body);
}

ElementBody element_body_from_json(ElementKind kind, const json& j) {
  switch (kind) {
    case ElementKind::image: {
      ImageBody b;
      b.prompt = j.value("prompt", std::string());
      b.asset = opt_string(j, "asset");
      if (j.contains("row") && !j.at("row").is_null()) b.row = row_from(j.at("row"));
      b.seed = j.value("seed", std::uint64_t{0});
      return b;
    }
    case ElementKind::fragment:
      return FragmentBody{fragment_from_json(j.at("fragment"))};
    case ElementKind::lens: {
      LensBody b;
      b.prompt = j.value("prompt", std::string());
      b.last_result = opt_string(j, "last_result");
      b.faded = j.value("faded", false);
      b.seed = j.value("seed", std::uint64_t{0});
      return b;
    }
    case ElementKind::container: {
      ContainerBody b;
      b.prompt = j.value("prompt", std::string());
      if (j.contains("grounding")) b.grounding = grounding_from_json(j.at("grounding"));
      if (j.contains("cells")) {
        const auto& cells = j.at("cells");
        if (cells.size() != b.cells.size()) throw Error(Errc::malformed_payload, "container needs 4 cells");
        for (std::size_t i = 0; i < b.cells.size(); ++i) b.cells[i] = cell_from(cells[i]);
      }
      const auto kind_text = j.value("cell_kind", std::string("images"));
      if (kind_text != "images" && kind_text != "fragments")
        throw Error(Errc::malformed_payload, "bad cell_kind " + kind_text);
      b.cell_kind = kind_text == "fragments" ? CellKind::fragments : CellKind::images;
      b.base_seed = j.value("base_seed", std::uint64_t{0});
      b.generated = j.value("generated", false);
      return b;
    }
    case ElementKind::brush: {
      BrushBody b;
      b.prompt = j.value("prompt", std::string());
      b.mode = brush_mode_from(j.value("mode", std::string("style")));
      if (j.contains("applications"))
        b.applications = j.at("applications").get<std::map<std::string, std::int32_t>>();
      return b;
    }
    case ElementKind::palette: {
      PaletteBody b;
      b.title = j.value("title", std::string());
      if (j.contains("items"))
        for (const auto& it : j.at("items")) b.items.push_back(palette_item_from(it));
      b.generated_from = opt_string(j, "generated_from");
      return b;
    }
  }
  throw Error(Errc::malformed_payload, "unknown element kind");
}

json to_json(const Element& e) {
  return {{"id", e.id},
          {"kind", std::string(to_string(e.kind()))},
          {"rect", to_json(e.rect)},
          {"z", e.z},
          {"body", to_json(e.body)}};
}

Element element_from_json(const json& j) {
  Element e;
  e.id = j.at("id").get<std::string>();
  e.rect = rect_from_json(j.at("rect"));
  e.z = j.at("z").get<std::int64_t>();
  e.body = element_body_from_json(element_kind_from(j.at("kind").get<std::string>()), j.at("body"));
  return e;
}

json to_json(const HistoryEntry& h) {
  return {{"seq", h.seq},
          {"element_id", h.element_id},
          {"kind", std::string(to_string(kind_of(h.prior)))},
          {"prior", to_json(h.prior)},
          {"cause", h.cause},
          {"timestamp", h.timestamp}};
}

HistoryEntry history_from_json(const json& j) {
  HistoryEntry h;
  h.seq = j.at("seq").get<std::uint64_t>();
  h.element_id = j.at("element_id").get<std::string>();
  h.prior = element_body_from_json(element_kind_from(j.at("kind").get<std::string>()), j.at("prior"));
  h.cause = j.at("cause").get<std::string>();
  h.timestamp = j.at("timestamp").get<std::int64_t>();
  return h;
}

json asset_meta_to_json(const ImageAsset& a) {
  json j = {{"id", a.id}, {"width", a.width}, {"height", a.height}};
  j["scene"] = a.scene ? to_json(*a.scene) : json(nullptr);
  j["provenance"] = a.provenance ? to_json(*a.provenance) : json(nullptr);
  return j;
}

json document_to_json(const CanvasDocument& doc) {
  json elements = json::object();
  for (const auto& [id, e] : doc.elements()) elements[id] = to_json(e);
  json assets = json::object();
  for (const auto& [id, a] : doc.assets()) assets[id] = asset_meta_to_json(*a);
  json history = json::array();
  for (const auto& h : doc.history()) history.push_back(to_json(h));
  return {{"version", kDocumentVersion},
          {"revision", doc.revision()},
          {"next_id", doc.next_id()},
          {"elements", elements},
          {"z_order", doc.z_order()},
          {"assets", assets},
          {"history", history},
          {"counters", doc.counters()}};
}

std::string serialize(const CanvasDocument& doc) { return document_to_json(doc).dump() + "\n"; }

CanvasDocument deserialize(std::string_view bytes, const RasterSource& rasters) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(Errc::corrupt_payload, std::string("unparseable document: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version"))
    throw Error(Errc::corrupt_payload, "document has no version");
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kDocumentVersion)
    throw Error(Errc::version_mismatch,
                "document version " + j.at("version").dump() + " is not " + std::to_string(kDocumentVersion) +
                    "; re-save it with a matching release or migrate the file");
  try {
    CanvasDocument doc;
    for (const auto& [id, meta] : j.at("assets").items()) {
      const auto width = meta.at("width").get<std::int32_t>();
      const auto height = meta.at("height").get<std::int32_t>();
      auto raster = rasters ? rasters(id) : std::nullopt;
      if (!raster) throw Error(Errc::corrupt_payload, "missing raster for asset " + id);
      std::optional<SceneSpec> scene;
      if (!meta.at("scene").is_null()) scene = scene_from_json(meta.at("scene"));
      std::optional<Provenance> prov;
      if (!meta.at("provenance").is_null()) prov = provenance_from_json(meta.at("provenance"));
      auto asset = make_asset(width, height, std::move(*raster), std::move(scene), std::move(prov));
      if (asset.id != id) throw Error(Errc::corrupt_payload, "asset " + id + " does not match its content");
      doc.put_asset_raw(std::make_shared<const ImageAsset>(std::move(asset)));
    }
    for (const auto& [id, e] : j.at("elements").items()) {
      Element el = element_from_json(e);
      if (el.id != id) throw Error(Errc::corrupt_payload, "element key mismatch " + id);
      doc.put_element(std::move(el));
    }
    doc.set_z_order(j.at("z_order").get<std::vector<std::string>>());
    for (const auto& h : j.at("history")) doc.append_history_raw(history_from_json(h));
    for (const auto& [id, v] : j.at("counters").items()) doc.set_counter(id, v.get<std::uint64_t>());
    doc.set_revision(j.at("revision").get<std::uint64_t>());
    doc.set_next_id(j.at("next_id").get<std::uint64_t>());
    doc.check_invariants();
    doc.drain_changes();
    return doc;
  } catch (const json::exception& e) {
    throw Error(Errc::corrupt_payload, std::string("malformed document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::corrupt_payload) throw;
    throw Error(Errc::corrupt_payload, e.what());
  }
}

RasterSource rasters_from(const CanvasDocument& doc) {
  return [&doc](const AssetId& id) -> std::optional<Raster> {
    if (!doc.has_asset(id)) return std::nullopt;
    return doc.asset(id).pixels();
  };
}

std::filesystem::path asset_dir_for(const std::filesystem::path& doc_path) {
  auto p = doc_path;
  p += ".assets";
  return p;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

}  // namespace

void save_document(const CanvasDocument& doc, const std::filesystem::path& path) {
  std::error_code ec;
  const auto dir = asset_dir_for(path);
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [id, a] : doc.assets()) {
    const auto file = dir / (id + ".png");
    if (std::filesystem::exists(file)) continue;
    write_file(file, encode_png(a->width, a->height, a->pixels()));
  }
  const std::string text = serialize(doc);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

CanvasDocument load_document(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const auto dir = asset_dir_for(path);
  RasterSource source = [&dir](const AssetId& id) -> std::optional<Raster> {
    const auto file = dir / (id + ".png");
    if (!std::filesystem::exists(file)) return std::nullopt;
    return decode_png(read_file(file)).rgba;
  };
  return deserialize(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), source);
}

// --- PNG ----------------------------------------------------------------------

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + length > cur->bytes.size()) png_error(png, "truncated png");
  std::memcpy(data, cur->bytes.data() + cur->offset, length);
  cur->offset += length;
}

void png_throw(png_structp, png_const_charp message) { throw Error(Errc::corrupt_payload, message); }

}  // namespace

std::vector<std::uint8_t> encode_png(std::int32_t width, std::int32_t height, const Raster& rgba) {
  if (rgba.size() != static_cast<std::size_t>(width) * height * 4)
    throw Error(Errc::corrupt_payload, "raster length does not match dimensions");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  try {
    png_set_write_fn(png, &out, png_write_to_vector, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::int32_t y = 0; y < height; ++y)
      png_write_row(png, const_cast<png_bytep>(rgba.data() + static_cast<std::size_t>(y) * width * 4));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

DecodedImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw Error(Errc::corrupt_payload, "not a png");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, nullptr);
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{bytes, 0};
  DecodedImage img;
  try {
    png_set_read_fn(png, &cursor, png_read_from_span);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_gray_to_rgb(png);
    png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
    png_read_update_info(png, info);
    img.width = static_cast<std::int32_t>(png_get_image_width(png, info));
    img.height = static_cast<std::int32_t>(png_get_image_height(png, info));
    img.rgba.resize(static_cast<std::size_t>(img.width) * img.height * 4);
    for (std::int32_t y = 0; y < img.height; ++y)
      png_read_row(png, img.rgba.data() + static_cast<std::size_t>(y) * img.width * 4, nullptr);
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

// --- base64 -------------------------------------------------------------------

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    int v;
    if (c >= 'A' && c <= 'Z') v = c - 'A';
    else if (c >= 'a' && c <= 'z') v = c - 'a' + 26;
    else if (c >= '0' && c <= '9') v = c - '0' + 52;
    else if (c == '+' || c == '-') v = 62;
    else if (c == '/' || c == '_') v = 63;
    else if (c == '=' || c == '\n' || c == '\r' || c == ' ') continue;
    else throw Error(Errc::malformed_response, "invalid base64");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace icanvas
