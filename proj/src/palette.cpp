#include "icanvas/palette.hpp"

namespace icanvas::palettes {

GeneratedKind generated_kind_from(std::string_view text) {
  if (text == "fragments") return GeneratedKind::fragments;
  if (text == "brushes") return GeneratedKind::brushes;
  throw Error(Errc::unsupported_kind, "palettes generate fragments or brushes, not " + std::string(text));
}

std::size_t add_to_palette(Engine& engine, const ElementId& palette, const ElementId& element) {
  engine.doc().body<PaletteBody>(palette);
  const Element& e = engine.doc().element(element);
  PaletteItem item;
  switch (e.kind()) {
    case ElementKind::fragment:
      item = std::get<FragmentBody>(e.body).fragment;
      break;
    case ElementKind::brush: {
      const auto& b = std::get<BrushBody>(e.body);
      item = BrushItem{b.prompt, b.mode};
      break;
    }
    case ElementKind::lens:
      item = LensItem{std::get<LensBody>(e.body).prompt};
      break;
    case ElementKind::image: {
      const auto& img = std::get<ImageBody>(e.body);
      if (!img.asset) throw Error(Errc::unsupported_kind, "image " + element + " has no content to store");
      item = AssetItem{*img.asset};
      break;
    }
    case ElementKind::container:
    case ElementKind::palette:
      throw Error(Errc::unsupported_kind, std::string(to_string(e.kind())) + " cannot be stored in a palette");
  }
  auto& items = engine.doc().edit_body<PaletteBody>(palette).items;
  items.push_back(std::move(item));
  return items.size() - 1;
}

ElementId take_from_palette(Engine& engine, const ElementId& palette, std::size_t index, Rect rect) {
  const auto& items = engine.doc().body<PaletteBody>(palette).items;
  if (index >= items.size()) throw Error(Errc::bad_index, "palette has " + std::to_string(items.size()) + " items");
  const PaletteItem item = items[index];
  if (const auto* f = std::get_if<Fragment>(&item)) return engine.create_element(rect, FragmentBody{*f});
  if (const auto* b = std::get_if<BrushItem>(&item)) {
    BrushBody body;
    body.prompt = b->prompt;
    body.mode = b->mode;
    return engine.create_element(rect, std::move(body));
  }
  if (const auto* l = std::get_if<LensItem>(&item)) {
    LensBody body;
    body.prompt = l->prompt;
    return engine.create_element(rect, std::move(body));
  }
  const AssetId asset = std::get<AssetItem>(item).asset;
  ImageBody img;
  img.asset = asset;
  if (const auto& prov = engine.doc().asset(asset).provenance) {
    img.prompt = prov->prompt;
    img.seed = prov->seed;
  }
  return engine.create_element(rect, std::move(img));
}

ElementId generate_palette(Engine& engine, const std::string& prompt, GeneratedKind kind, std::size_t k, Rect rect) {
  const std::string task = canonical_text(prompt);
  if (task.empty()) throw Error(Errc::empty_prompt);
  if (k > kMaxGenerated)
    throw Error(Errc::invalid_request, "at most " + std::to_string(kMaxGenerated) + " generated items");
  PaletteBody body;
  body.title = task;
  body.generated_from = task;
  if (k > 0) {
    auto proposed = engine.adapters().language->propose_fragments(task, k);
    if (proposed.size() > k) proposed.resize(k);
    for (auto& f : proposed) {
      if (kind == GeneratedKind::fragments)
        body.items.emplace_back(std::move(f));
      else
        body.items.emplace_back(
            BrushItem{f.value, f.ftype == "content" ? BrushMode::content : BrushMode::style});
    }
  }
  return engine.create_element(rect, std::move(body));
}

}  // namespace icanvas::palettes
