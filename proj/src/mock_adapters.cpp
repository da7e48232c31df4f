#include "icanvas/adapters.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "icanvas/error.hpp"
#include "icanvas/hash.hpp"

namespace icanvas {

namespace {

bool contains_pair(const std::vector<Fragment>& fs, const Fragment& f) {
  return std::any_of(fs.begin(), fs.end(), [&](const Fragment& g) { return g.same_pair(f); });
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

struct TagGroups {
  std::vector<std::string> labels;
  TagSet style, tone, color;
};

TagGroups group(const std::vector<Fragment>& fragments) {
  TagGroups g;
  for (const auto& f : fragments) {
    if (f.ftype == "content") {
      if (std::find(g.labels.begin(), g.labels.end(), f.value) == g.labels.end())
        g.labels.push_back(f.value);
    } else if (f.ftype == "style") {
      g.style.insert(f.value);
    } else if (f.ftype == "tone") {
      g.tone.insert(f.value);
    } else if (f.ftype == "color") {
      g.color.insert(f.value);
    }
  }
  return g;
}

}  // namespace

// --- language ---------------------------------------------------------------

MockLanguageAdapter::MockLanguageAdapter(std::shared_ptr<const Lexicon> lexicon)
    : lexicon_(std::move(lexicon)) {}

std::vector<Fragment> MockLanguageAdapter::decompose(const std::string& prompt) const {
  if (canonical_text(prompt).empty()) throw Error(Errc::empty_prompt);
  const auto tokens = tokenize(prompt);
  std::vector<Fragment> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (tokens[i] == ",") {
      ++i;
      continue;
    }
    bool matched = false;
    for (std::size_t len = std::min(lexicon_->max_phrase_tokens(), tokens.size() - i); len >= 1;
         --len) {
      std::string phrase;
      bool crosses = false;
      for (std::size_t j = i; j < i + len; ++j) {
        if (tokens[j] == ",") crosses = true;
        if (!phrase.empty()) phrase += ' ';
        phrase += tokens[j];
      }
      if (crosses) continue;
      auto type = lexicon_->type_of(phrase);
      if (!type && len == 1 && !lexicon_->is_stopword(phrase) && phrase.size() > 3 &&
          phrase.back() == 's') {
        type = lexicon_->type_of(phrase.substr(0, phrase.size() - 1));
        if (type) phrase.pop_back();
      }
      if (type) {
        Fragment f(*type, phrase, FragmentOrigin::decomposed);
        if (!contains_pair(out, f)) out.push_back(std::move(f));
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  sort_canonical(out);
  return out;
}

std::vector<std::string> MockLanguageAdapter::successors(const std::string& ftype,
                                                         const std::string& value,
                                                         std::size_t k) const {
  std::vector<std::string> out;
  auto take = [&](const std::string& v) {
    if (out.size() < k && v != value && std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  };
  if (ftype == "content")
    if (const auto* syn = lexicon_->synonyms(value))
      for (const auto& s : *syn) take(s);
  const auto& list = lexicon_->values(ftype);
  if (!list.empty()) {
    const auto it = std::find(list.begin(), list.end(), value);
    const std::size_t start = it == list.end() ? 0 : static_cast<std::size_t>(it - list.begin()) + 1;
    for (std::size_t n = 0; n < list.size() && out.size() < k; ++n)
      take(list[(start + n) % list.size()]);
  }
  return out;
}

std::vector<Fragment> MockLanguageAdapter::vary_values(const Fragment& fragment,
                                                       const std::string& /*context*/,
                                                       std::size_t k) const {
  std::vector<Fragment> out;
  for (const auto& v : successors(fragment.ftype, fragment.value, k))
    out.emplace_back(fragment.ftype, v, FragmentOrigin::suggested);
  return out;
}

std::vector<Fragment> MockLanguageAdapter::suggest_types(const std::string& prompt,
                                                         const std::vector<Fragment>& existing) const {
  std::set<std::string> present;
  for (const auto& f : existing) present.insert(f.ftype);
  std::vector<Fragment> from_prompt;
  if (!canonical_text(prompt).empty()) from_prompt = decompose(prompt);
  std::vector<Fragment> out;
  for (const auto& type : lexicon_->types()) {
    if (present.count(type)) continue;
    auto hit = std::find_if(from_prompt.begin(), from_prompt.end(),
                            [&](const Fragment& f) { return f.ftype == type; });
    if (hit != from_prompt.end()) {
      out.emplace_back(type, hit->value, FragmentOrigin::suggested);
      continue;
    }
    const auto& list = lexicon_->values(type);
    const std::uint64_t h = Fnv1a{}.field(canonical_text(prompt)).field(type).digest();
    out.emplace_back(type, list[h % list.size()], FragmentOrigin::suggested);
  }
  return out;
}

std::string MockLanguageAdapter::compose(const std::string& base,
                                         const std::vector<FragmentEdit>& edits) const {
  std::vector<Fragment> fs;
  if (!canonical_text(base).empty()) fs = decompose(base);
  for (const auto& e : edits) {
    auto it = std::find_if(fs.begin(), fs.end(), [&](const Fragment& f) { return f.same_pair(e.fragment); });
    switch (e.action) {
      case EditAction::add:
        if (it == fs.end()) fs.push_back(e.fragment);
        break;
      case EditAction::remove:
        if (it == fs.end())
          throw Error(Errc::remove_of_absent_fragment,
                      "[" + e.fragment.ftype + ", " + e.fragment.value + "] is not in the prompt");
        fs.erase(it);
        break;
      case EditAction::replace:
        if (!e.replacement || e.replacement->ftype != e.fragment.ftype)
          throw Error(Errc::replace_type_mismatch, "replacement must keep ftype " + e.fragment.ftype);
        if (it == fs.end())
          throw Error(Errc::remove_of_absent_fragment,
                      "[" + e.fragment.ftype + ", " + e.fragment.value + "] is not in the prompt");
        if (contains_pair(fs, *e.replacement))
          fs.erase(it);
        else
          *it = *e.replacement;
        break;
    }
  }
  return render_prompt(std::move(fs));
}

std::string MockLanguageAdapter::describe(const ImageAsset& asset) const {
  if (!asset.scene) throw Error(Errc::adapter_failure, "mock cannot describe an asset without a scene");
  std::vector<Fragment> fs;
  auto add = [&](const char* type, const std::string& v) {
    Fragment f(type, v, FragmentOrigin::extracted);
    if (!contains_pair(fs, f)) fs.push_back(std::move(f));
  };
  for (const auto& o : asset.scene->objects) add("content", o.label);
  for (const auto& o : asset.scene->objects) {
    for (const auto& t : o.style_tags) add("style", t);
    for (const auto& t : o.tone_tags) add("tone", t);
    for (const auto& t : o.color_tags) add("color", t);
  }
  return render_prompt(std::move(fs));
}

std::string MockLanguageAdapter::merge(const std::vector<std::string>& prompts) const {
  std::vector<std::string> parts;
  for (const auto& p : prompts) parts.push_back(canonical_text(p));
  return join(parts, ", ");
}

std::string MockLanguageAdapter::extract(const ImageAsset& asset, const std::optional<Rect>& region,
                                         BrushMode mode) const {
  if (!asset.scene) throw Error(Errc::extraction_empty, "asset has no scene to extract from");
  std::vector<std::string> labels;
  TagSet styles;
  for (const auto& o : asset.scene->objects) {
    const PixelBox box = rasterize(o.region, asset.width, asset.height);
    if (box.empty()) continue;
    if (region) {
      const Rect obj{box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0};
      if (!overlaps(obj, *region)) continue;
    }
    if (std::find(labels.begin(), labels.end(), o.label) == labels.end()) labels.push_back(o.label);
    styles.insert(o.style_tags.begin(), o.style_tags.end());
  }
  std::string out = mode == BrushMode::content ? join(labels, ", ")
                                                 : join(std::vector<std::string>(styles.begin(), styles.end()), ", ");
  if (out.empty())
    throw Error(Errc::extraction_empty, std::string("no ") + (mode == BrushMode::content ? "content" : "style") +
                                            " attributes in the region");
  return out;
}

std::string MockLanguageAdapter::dominant_dimension(const std::string& text) const {
  for (const auto& tok : tokenize(text))
    if (auto t = lexicon_->keyword_type(tok)) return *t;
  if (!canonical_text(text).empty()) {
    const auto fs = decompose(text);
    if (std::any_of(fs.begin(), fs.end(), [](const Fragment& f) { return f.ftype == "content"; }))
      return "content";
  }
  return "style";
}

std::string MockLanguageAdapter::variation_dimension(const std::string& prompt,
                                                     const Grounding& grounding) const {
  if (const auto* g = std::get_if<GroundFragment>(&grounding)) return g->fragment.ftype;
  if (const auto* g = std::get_if<GroundText>(&grounding))
    return dominant_dimension(merge({g->prompt, prompt}));
  return dominant_dimension(prompt);
}

std::vector<std::string> MockLanguageAdapter::derive_variant_prompts(const std::string& prompt,
                                                                     const Grounding& grounding,
                                                                     const std::string& context,
                                                                     std::size_t n) const {
  std::string text = prompt;
  if (const auto* g = std::get_if<GroundText>(&grounding)) text = merge({g->prompt, prompt});
  std::vector<Fragment> base;
  if (!canonical_text(text).empty()) base = decompose(text);
  const std::string dim = variation_dimension(prompt, grounding);
  // The example's own value along dim; variants start after it.
  std::string context_value;
  if (!canonical_text(context).empty()) {
    std::set<std::string> present;
    for (const auto& f : base) present.insert(f.ftype);
    for (const auto& f : decompose(context)) {
      if (f.ftype == dim && context_value.empty()) context_value = f.value;
      if (f.ftype != dim && !present.count(f.ftype)) base.push_back(f);
    }
    sort_canonical(base);
  }

  std::string current;
  if (const auto* g = std::get_if<GroundFragment>(&grounding)) {
    current = g->fragment.value;
  } else {
    for (const auto& f : base)
      if (f.ftype == dim) {
        current = f.value;
        break;
      }
  }
  const std::string start = current.empty() ? context_value : current;
  // Over-fetch so values already present in the base can be skipped.
  std::vector<std::string> out;
  for (const auto& v : successors(dim, start, n + base.size())) {
    if (out.size() == n) break;
    Fragment variant(dim, v, FragmentOrigin::suggested);
    if (contains_pair(base, variant)) continue;
    std::vector<Fragment> fs;
    bool replaced = false;
    for (const auto& f : base) {
      if (!replaced && f.ftype == dim && f.value == current) {
        fs.push_back(variant);
        replaced = true;
      } else {
        fs.push_back(f);
      }
    }
    if (!replaced) fs.push_back(variant);
    out.push_back(render_prompt(std::move(fs)));
  }
  return out;
}

std::string MockLanguageAdapter::craft_brush_prompt(const std::string& source_prompt,
                                                    const std::string& segment_description,
                                                    const std::string& brush_prompt, BrushMode mode,
                                                    double /*emphasis*/) const {
  std::vector<Fragment> src, seg, brush;
  if (!canonical_text(source_prompt).empty()) src = decompose(source_prompt);
  if (!canonical_text(segment_description).empty()) seg = decompose(segment_description);
  if (!canonical_text(brush_prompt).empty()) brush = decompose(brush_prompt);
  if (brush.empty()) return merge({render_prompt(src), brush_prompt});

  std::set<std::string> overridden;
  for (const auto& f : brush)
    if (mode == BrushMode::content || f.ftype != "content") overridden.insert(f.ftype);

  std::vector<Fragment> out;
  const bool seg_has_content =
      std::any_of(seg.begin(), seg.end(), [](const Fragment& f) { return f.ftype == "content"; });
  if (mode == BrushMode::style && seg_has_content) {
    for (const auto& f : seg)
      if (f.ftype == "content") out.push_back(f);
    for (const auto& f : src)
      if (f.ftype != "content" && !overridden.count(f.ftype)) out.push_back(f);
  } else {
    for (const auto& f : src)
      if (!overridden.count(f.ftype)) out.push_back(f);
  }
  for (const auto& f : brush)
    if (overridden.count(f.ftype) && !contains_pair(out, f)) out.push_back(f);
  return render_prompt(std::move(out));
}

std::vector<Fragment> MockLanguageAdapter::propose_fragments(const std::string& task,
                                                             std::size_t k) const {
  if (canonical_text(task).empty()) throw Error(Errc::empty_prompt);
  const std::string dim = dominant_dimension(task);
  std::string current;
  for (const auto& f : decompose(task))
    if (f.ftype == dim) {
      current = f.value;
      break;
    }
  std::vector<Fragment> out;
  if (!current.empty() && k > 0) out.emplace_back(dim, current, FragmentOrigin::suggested);
  for (const auto& v : successors(dim, current, k - out.size()))
    out.emplace_back(dim, v, FragmentOrigin::suggested);
  return out;
}

// --- image ------------------------------------------------------------------

MockImageAdapter::MockImageAdapter(std::shared_ptr<const Lexicon> lexicon,
                                   std::int32_t default_width, std::int32_t default_height)
    : language_(std::move(lexicon)), default_width_(default_width), default_height_(default_height) {}

ImageAsset MockImageAdapter::generate(const GenerationRequest& request) const {
  request.validate();
  const OpKind op = request.controls.op_kind;
  if (op == OpKind::inpaint) return inpaint(request);

  std::vector<Fragment> fragments;
  if (!canonical_text(request.prompt).empty()) fragments = language_.decompose(request.prompt);
  TagGroups g = group(fragments);
  if (request.controls.style_weight >= kStyleCopyWeight)
    for (const auto& ref : request.references)
      if (ref->scene)
        for (const auto& o : ref->scene->objects) g.style.insert(o.style_tags.begin(), o.style_tags.end());

  std::int32_t w = request.width > 0 ? request.width : default_width_;
  std::int32_t h = request.height > 0 ? request.height : default_height_;
  if (op != OpKind::txt2img) {
    if (request.references.empty())
      throw Error(Errc::invalid_request, std::string(to_string(op)) + " needs a reference asset");
    w = request.references.front()->width;
    h = request.references.front()->height;
  }

  SceneSpec scene;
  std::vector<std::string> new_labels = g.labels;
  if (op == OpKind::outpaint) {
    const auto& base = *request.references.front();
    if (base.scene) scene = *base.scene;
    std::erase_if(new_labels, [&](const std::string& l) {
      return std::any_of(scene.objects.begin(), scene.objects.end(),
                         [&](const SceneObject& o) { return o.label == l; });
    });
  }
  for (std::size_t i = 0; i < new_labels.size(); ++i)
    scene.objects.push_back({new_labels[i], layout_slot(i, new_labels.size()), g.style, g.tone, g.color});

  Raster px = render_scene(scene, w, h, request.seed);
  if (op == OpKind::outpaint) {
    const auto& base = request.references.front()->pixels();
    const Mask& mask = *request.mask;
    for (std::int32_t y = 0; y < h; ++y)
      for (std::int32_t x = 0; x < w; ++x)
        if (!mask.test(x, y)) {
          const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 4;
          std::copy_n(base.begin() + static_cast<std::ptrdiff_t>(i), 4, px.begin() + static_cast<std::ptrdiff_t>(i));
        }
  }
  return make_asset(w, h, std::move(px), std::move(scene), std::nullopt);
}

ImageAsset MockImageAdapter::inpaint(const GenerationRequest& request) const {
  request.validate();
  if (!request.mask || request.references.empty())
    throw Error(Errc::invalid_request, "inpaint needs a reference asset and a mask");
  const ImageAsset& base = *request.references.front();
  if (!base.scene) throw Error(Errc::no_scene, "reference asset has no scene");
  const Mask& mask = *request.mask;
  if (mask.count() == 0) throw Error(Errc::mask_mismatch, "empty mask");

  std::vector<Fragment> fragments;
  if (!canonical_text(request.prompt).empty()) fragments = language_.decompose(request.prompt);
  const TagGroups g = group(fragments);
  const bool style_mode = request.controls.style_weight > request.controls.content_weight;

  SceneSpec scene = *base.scene;
  for (auto& o : scene.objects) {
    const PixelBox box = rasterize(o.region, base.width, base.height);
    const std::int64_t area = box.area();
    if (area == 0 || mask.count_in(box) * 2 < area) continue;
    if (!style_mode && !g.labels.empty()) o.label = g.labels.front();
    if (!g.style.empty()) o.style_tags = g.style;
    if (!g.tone.empty()) o.tone_tags = g.tone;
    if (!g.color.empty()) o.color_tags = g.color;
  }

  const Raster fresh = render_scene(scene, base.width, base.height, request.seed);
  Raster px = base.pixels();
  for (std::int32_t y = 0; y < base.height; ++y)
    for (std::int32_t x = 0; x < base.width; ++x)
      if (mask.test(x, y)) {
        const std::size_t i = (static_cast<std::size_t>(y) * base.width + x) * 4;
        std::copy_n(fresh.begin() + static_cast<std::ptrdiff_t>(i), 4, px.begin() + static_cast<std::ptrdiff_t>(i));
      }
  return make_asset(base.width, base.height, std::move(px), std::move(scene), std::nullopt);
}

Mask MockImageAdapter::segment(const ImageAsset& asset, const std::vector<Point>& control_points) const {
  if (!asset.scene) throw Error(Errc::no_scene, "asset has no scene");
  std::optional<std::size_t> best;
  std::int64_t best_count = 0, best_area = 0;
  PixelBox best_box;
  const auto& objects = asset.scene->objects;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const PixelBox box = rasterize(objects[i].region, asset.width, asset.height);
    std::int64_t count = 0;
    for (const Point& p : control_points)
      if (box.contains(static_cast<std::int32_t>(std::floor(p.x)), static_cast<std::int32_t>(std::floor(p.y))))
        ++count;
    if (count == 0) continue;
    const std::int64_t area = box.area();
    if (!best || count > best_count || (count == best_count && area < best_area)) {
      best = i;
      best_count = count;
      best_area = area;
      best_box = box;
    }
  }
  if (!best) throw Error(Errc::segmentation_empty, "no object under the stroke");
  Mask mask(asset.width, asset.height);
  mask.fill(best_box);
  return mask;
}

Adapters make_mock_adapters(std::shared_ptr<const Lexicon> lexicon, std::int32_t default_width,
                            std::int32_t default_height) {
  Adapters a;
  a.language = std::make_shared<MockLanguageAdapter>(lexicon);
  a.image = std::make_shared<MockImageAdapter>(lexicon, default_width, default_height);
  a.id = "mock";
  return a;
}

}  // namespace icanvas
