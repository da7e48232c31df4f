#include <random>

#include "support.hpp"

#include "icanvas/hash.hpp"

using namespace icanvas;
using namespace icanvas::test;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

std::array<std::uint8_t, 3> rgb(std::uint64_t h) {
  return {static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8), static_cast<std::uint8_t>(h >> 16)};
}

// Independent restatement of the raster rule: background from the first color
// tag and the seed, objects painted in order over pixel centres.
Raster oracle_raster(const SceneSpec& s, int w, int h, std::uint64_t seed) {
  std::string color;
  for (const auto& o : s.objects)
    if (!o.color_tags.empty()) {
      color = *o.color_tags.begin();
      break;
    }
  const auto bg = rgb(Fnv1a{}.field("background").field(color).field(seed).digest());
  Raster px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto c = bg;
      for (const auto& o : s.objects) {
        const double cx = (x + 0.5) / w, cy = (y + 0.5) / h;
        if (cx >= o.region.x && cx < o.region.x + o.region.w && cy >= o.region.y && cy < o.region.y + o.region.h)
          c = rgb(Fnv1a{}
                      .field("object")
                      .field(o.label)
                      .field(o.style_tags.empty() ? std::string() : *o.style_tags.begin())
                      .digest());
      }
      px.insert(px.end(), {c[0], c[1], c[2], 255});
    }
  return px;
}

GenerationRequest txt(const std::string& prompt, std::uint64_t seed) {
  GenerationRequest r;
  r.prompt = prompt;
  r.seed = seed;
  return r;
}

}  // namespace

TEST_SUITE("mock adapters") {

TEST_CASE("decompose examples") {
  const auto lang = MockLanguageAdapter(Lexicon::builtin());
  CHECK(pairs_of(lang.decompose("an enchanting illustration of a castle")) ==
        Pairs{{"content", "castle"}, {"style", "illustration"}, {"tone", "enchanting"}});
  CHECK(pairs_of(lang.decompose("a watercolor fortress, pastel")) ==
        Pairs{{"content", "fortress"}, {"style", "watercolor"}, {"color", "pastel"}});
  CHECK(pairs_of(lang.decompose("oil painting of a heron")) == Pairs{{"content", "heron"}, {"style", "oil painting"}});
}

TEST_CASE("vary examples follow the lexicon") {
  const auto lang = MockLanguageAdapter(Lexicon::builtin());
  CHECK(values_of(lang.vary_values({"style", "illustration"}, "", 3)) ==
        std::vector<std::string>{"watercolor", "oil painting", "pixel art"});
  CHECK(values_of(lang.vary_values({"content", "castle"}, "", 2)) == std::vector<std::string>{"fortress", "palace"});
  CHECK(lang.vary_values({"tone", "serene"}, "", 0).empty());
  // Cyclic: the last style wraps to the front.
  const auto& styles = Lexicon::builtin()->values("style");
  CHECK(lang.vary_values({"style", styles.back()}, "", 1).front().value == styles.front());
}

TEST_CASE("generate: single centred object, deterministic") {
  const MockImageAdapter img(Lexicon::builtin(), 48, 40);
  const ImageAsset a = img.generate(txt("castle, illustration", 7));
  REQUIRE(a.scene);
  REQUIRE(a.scene->objects.size() == 1);
  const auto& o = a.scene->objects[0];
  CHECK(o.label == "castle");
  CHECK(o.region == NormRect{0.25, 0.25, 0.5, 0.5});
  CHECK(o.style_tags == TagSet{"illustration"});
  CHECK(a.width == 48);
  CHECK(a.height == 40);
  const ImageAsset b = img.generate(txt("castle, illustration", 7));
  CHECK(a.pixels() == b.pixels());
  CHECK(a.id == b.id);
  CHECK(a.pixels() == oracle_raster(*a.scene, 48, 40, 7));
}

TEST_CASE("generate: seeds change the raster but not the labels") {
  const MockImageAdapter img(Lexicon::builtin(), 32, 32);
  const ImageAsset a = img.generate(txt("castle, illustration", 7));
  const ImageAsset b = img.generate(txt("castle, illustration", 8));
  CHECK(a.pixels() != b.pixels());
  CHECK(a.scene == b.scene);
}

TEST_CASE("generate: several objects share columns") {
  const MockImageAdapter img(Lexicon::builtin(), 60, 20);
  const ImageAsset a = img.generate(txt("heron, fox, tree, pastel, sketch", 1));
  REQUIRE(a.scene->objects.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.scene->objects[i].region.x == doctest::Approx(i / 3.0));
    CHECK(a.scene->objects[i].region.w == doctest::Approx(1 / 3.0));
    CHECK(a.scene->objects[i].color_tags == TagSet{"pastel"});
  }
  CHECK(a.pixels() == oracle_raster(*a.scene, 60, 20, 1));
}

TEST_CASE("style reference tags are copied at style weight 0.5 and above") {
  const MockImageAdapter img(Lexicon::builtin(), 32, 32);
  auto ref = std::make_shared<ImageAsset>(img.generate(txt("bird, line drawing", 1)));
  GenerationRequest r = txt("heron, illustration", 2);
  r.references = {ref};
  r.controls = GenerationControls::make(0.3, 0.8, 0.75, 7, 1, OpKind::img2img);
  const ImageAsset a = img.generate(r);
  CHECK(a.scene->objects.at(0).style_tags.count("line drawing") == 1);
  CHECK(a.scene->objects.at(0).label == "heron");
  r.controls = GenerationControls::make(0.8, 0.3, 0.75, 7, 1, OpKind::img2img);
  CHECK(img.generate(r).scene->objects.at(0).style_tags == TagSet{"illustration"});
}

TEST_CASE("outputs take the reference dimensions for img2img") {
  const MockImageAdapter img(Lexicon::builtin(), 32, 32);
  auto ref = std::make_shared<ImageAsset>(img.generate([] {
    GenerationRequest r = txt("castle", 1);
    r.width = 20;
    r.height = 12;
    return r;
  }()));
  GenerationRequest r = txt("castle, watercolor", 1);
  r.references = {ref};
  r.controls = content_controls(OpKind::img2img);
  const ImageAsset a = img.generate(r);
  CHECK(a.width == 20);
  CHECK(a.height == 12);
}

TEST_CASE("segmentation examples") {
  const MockImageAdapter img(Lexicon::builtin(), 100, 100);
  SceneSpec s;
  s.objects.push_back({"castle", {0.0, 0.0, 0.5, 1.0}, {}, {}, {}});
  s.objects.push_back({"tree", {0.5, 0.0, 0.3, 1.0}, {}, {}, {}});
  const ImageAsset a = make_asset(100, 100, render_scene(s, 100, 100, 0), s, std::nullopt);

  std::vector<Point> pts;
  for (int i = 0; i < 7; ++i) pts.push_back({10.0 + i, 50});
  for (int i = 0; i < 3; ++i) pts.push_back({60.0 + i, 50});
  Mask expect(100, 100);
  expect.fill({0, 0, 50, 100});
  CHECK(img.segment(a, pts) == expect);

  // 5/5 tie goes to the smaller object.
  pts.clear();
  for (int i = 0; i < 5; ++i) pts.push_back({10.0 + i, 50});
  for (int i = 0; i < 5; ++i) pts.push_back({60.0 + i, 50});
  Mask tree(100, 100);
  tree.fill({50, 0, 80, 100});
  CHECK(img.segment(a, pts) == tree);

  CHECK_ERRC(img.segment(a, {{90, 50}, {95, 10}}), Errc::segmentation_empty);
  ImageAsset blank = make_asset(4, 4, Raster(64, 0), std::nullopt, std::nullopt);
  CHECK_ERRC(img.segment(blank, {{1, 1}}), Errc::no_scene);
}

TEST_CASE("inpaint rewrites by overlap threshold") {
  const MockImageAdapter img(Lexicon::builtin(), 100, 100);
  SceneSpec s;
  s.objects.push_back({"castle", {0.0, 0.0, 0.5, 1.0}, {"illustration"}, {}, {}});
  s.objects.push_back({"tree", {0.5, 0.0, 0.5, 1.0}, {"illustration"}, {}, {}});
  auto base = std::make_shared<ImageAsset>(make_asset(100, 100, render_scene(s, 100, 100, 4), s, std::nullopt));

  GenerationRequest r;
  r.prompt = "castle, watercolor";
  r.references = {base};
  r.seed = 4;
  r.controls = style_controls(OpKind::inpaint);
  Mask m(100, 100);
  m.fill({0, 0, 50, 100});  // all of the castle
  m.fill({50, 0, 55, 100});  // 10% of the tree
  r.mask = m;
  const ImageAsset out = img.inpaint(r);
  CHECK(out.scene->objects[0].label == "castle");
  CHECK(out.scene->objects[0].style_tags == TagSet{"watercolor"});
  CHECK(out.scene->objects[1] == s.objects[1]);
  for (int y = 0; y < 100; ++y)
    for (int x = 55; x < 100; ++x)
      for (int c = 0; c < 4; ++c) {
        const std::size_t i = (static_cast<std::size_t>(y) * 100 + x) * 4 + c;
        REQUIRE(out.pixels()[i] == base->pixels()[i]);
      }

  // Content mode replaces the label.
  r.prompt = "fortress";
  r.controls = content_controls(OpKind::inpaint);
  CHECK(img.inpaint(r).scene->objects[0].label == "fortress");

  r.mask = Mask(100, 100);
  CHECK_ERRC(img.inpaint(r), Errc::mask_mismatch);
}

TEST_CASE("describe and extract read the scene") {
  const MockLanguageAdapter lang(Lexicon::builtin());
  SceneSpec s;
  s.objects.push_back({"heron", {0.25, 0.25, 0.5, 0.5}, {"watercolor"}, {}, {}});
  const ImageAsset a = make_asset(8, 8, render_scene(s, 8, 8, 0), s, std::nullopt);
  CHECK(pairs_of(lang.decompose(lang.describe(a))) == Pairs{{"content", "heron"}, {"style", "watercolor"}});
  CHECK(lang.extract(a, std::nullopt, BrushMode::style) == "watercolor");
  CHECK(lang.extract(a, std::nullopt, BrushMode::content) == "heron");
  // Region misses the object.
  CHECK_ERRC(lang.extract(a, Rect{0, 0, 1, 1}, BrushMode::content), Errc::extraction_empty);
  const ImageAsset blank = make_asset(8, 8, render_scene({}, 8, 8, 0), SceneSpec{}, std::nullopt);
  CHECK_ERRC(lang.extract(blank, std::nullopt, BrushMode::style), Errc::extraction_empty);
}

TEST_CASE("merge is loss-free on tokens") {
  const MockLanguageAdapter lang(Lexicon::builtin());
  const auto merged = lang.merge({"forest backdrop", "heron, illustration"});
  auto tokens = tokenize(merged);
  std::erase(tokens, ",");
  std::sort(tokens.begin(), tokens.end());
  CHECK(tokens == std::vector<std::string>{"backdrop", "forest", "heron", "illustration"});
}

}
