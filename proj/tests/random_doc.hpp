#pragma once

#include <random>
#include <string>

#include "icanvas/codec.hpp"
#include "icanvas/document.hpp"

namespace icanvas::test {

// Arbitrary but valid documents for serialization properties: every element
// kind, assets with and without scenes and provenance, awkward strings and
// full-range integers.
class DocGen {
 public:
  explicit DocGen(std::uint64_t seed) : rng_(seed) {}

  CanvasDocument document() {
    CanvasDocument d;
    assets_.clear();
    const int n_assets = pick(0, 4);
    for (int i = 0; i < n_assets; ++i) assets_.push_back(d.add_asset(asset()).id);
    const int n_elems = pick(0, 10);
    std::vector<ElementId> ids;
    for (int i = 0; i < n_elems; ++i) ids.push_back(d.create_element(rect(), body()));
    for (const auto& id : ids) {
      if (chance(0.15)) {
        d.remove_element(id);
        continue;
      }
      if (chance(0.3)) d.set_rect(id, rect());
    }
    std::int64_t t = pick(0, 1000);
    for (const auto& id : d.z_order())
      if (chance(0.4)) d.snapshot(id, chance(0.5) ? "render" : "fragment-edit \"quoted\"", t += pick(0, 50));
    for (const auto& id : d.z_order())
      if (chance(0.5)) d.set_counter(id, rng_());
    d.set_revision(rng_() >> pick(0, 63));
    d.drain_changes();
    return d;
  }

  std::string text() {
    static const char* pieces[] = {"castle", "watercolor", " ", "\"q\"", "back\\slash", "é", "漢字", "tab\t", "line\nbreak", ",", "{}", "☃"};
    std::string s;
    const int n = pick(0, 5);
    for (int i = 0; i < n; ++i) s += pieces[pick(0, 11)];
    return s;
  }

  Fragment fragment() {
    static const char* types[] = {"content", "style", "tone", "color", "composition", "lighting"};
    static const char* values[] = {"castle", "pastel", "oil painting", "serene", "wide shot", "café"};
    return Fragment(types[pick(0, 5)], values[pick(0, 5)], static_cast<FragmentOrigin>(pick(0, 3)));
  }

  ImageAsset asset() {
    const std::int32_t w = pick(1, 9), h = pick(1, 9);
    Raster px(static_cast<std::size_t>(w) * h * 4);
    for (auto& b : px) b = static_cast<std::uint8_t>(rng_());
    std::optional<SceneSpec> scene;
    if (chance(0.7)) {
      scene = SceneSpec{};
      const int n = pick(0, 3);
      for (int i = 0; i < n; ++i) {
        const double x = unit(), y = unit();
        scene->objects.push_back({"obj" + std::to_string(pick(0, 9)), {x, y, unit() * (1 - x), unit() * (1 - y)},
                                  tags(), tags(), tags()});
      }
    }
    std::optional<Provenance> prov;
    if (chance(0.7)) {
      Provenance p;
      p.prompt = text();
      for (int i = pick(0, 3); i > 0; --i) p.fragments.push_back(fragment());
      for (const auto& a : assets_)
        if (chance(0.5)) p.parents.push_back(a);
      p.seed = rng_();
      p.controls = GenerationControls::make(unit(), unit(), unit(), 0.5 + unit() * 20, 1 + unit(),
                                            static_cast<OpKind>(pick(0, 3)));
      p.adapter_id = chance(0.5) ? "mock" : "remote:x";
      p.created_at = pick(0, 100000);
      prov = p;
    }
    return make_asset(w, h, std::move(px), std::move(scene), std::move(prov));
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  TagSet tags() {
    TagSet t;
    for (int i = pick(0, 2); i > 0; --i) t.insert(i == 1 ? "watercolor" : "é-tag");
    return t;
  }

  Rect rect() { return {pick(-500, 500), pick(-500, 500), pick(1, 400), pick(1, 400)}; }

  std::optional<AssetId> maybe_asset() {
    if (assets_.empty() || chance(0.3)) return std::nullopt;
    return assets_[pick(0, static_cast<int>(assets_.size()) - 1)];
  }

  ElementBody body() {
    switch (pick(0, 5)) {
      case 0: {
        ImageBody b;
        b.prompt = text();
        b.asset = maybe_asset();
        b.seed = rng_();
        if (chance(0.5)) {
          FragmentRow row;
          row.fragments.push_back(fragment());
          if (chance(0.5)) row.expansions[row.fragments[0].ftype] = {fragment()};
          b.row = row;
        }
        return b;
      }
      case 1:
        return FragmentBody{fragment()};
      case 2: {
        LensBody b;
        b.prompt = text();
        b.last_result = maybe_asset();
        b.faded = chance(0.5);
        b.seed = rng_();
        return b;
      }
      case 3: {
        ContainerBody b;
        b.prompt = text();
        switch (pick(0, 3)) {
          case 0: b.grounding = GroundNone{}; break;
          case 1:
            if (auto a = maybe_asset()) b.grounding = GroundAsset{*a};
            break;
          case 2: b.grounding = GroundFragment{fragment()}; break;
          default: b.grounding = GroundText{text()};
        }
        b.cell_kind = chance(0.5) ? CellKind::images : CellKind::fragments;
        for (auto& c : b.cells) {
          if (b.cell_kind == CellKind::fragments) {
            if (chance(0.7)) c = fragment();
          } else if (auto a = maybe_asset()) {
            c = *a;
          }
        }
        b.base_seed = rng_();
        b.generated = chance(0.5);
        return b;
      }
      case 4: {
        BrushBody b;
        b.prompt = text();
        b.mode = chance(0.5) ? BrushMode::style : BrushMode::content;
        if (chance(0.5)) b.applications["e" + std::to_string(pick(1, 9))] = pick(1, 6);
        return b;
      }
      default: {
        PaletteBody b;
        b.title = text();
        for (int i = pick(0, 4); i > 0; --i) {
          switch (pick(0, 3)) {
            case 0: b.items.push_back(fragment()); break;
            case 1: b.items.push_back(BrushItem{text(), BrushMode::content}); break;
            case 2: b.items.push_back(LensItem{text()}); break;
            default:
              if (auto a = maybe_asset()) b.items.push_back(AssetItem{*a});
          }
        }
        if (chance(0.5)) b.generated_from = text();
        return b;
      }
    }
  }

  std::mt19937_64 rng_;
  std::vector<AssetId> assets_;
};

}  // namespace icanvas::test
