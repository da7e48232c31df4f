#include "icanvas/lens.hpp"

#include <algorithm>
#include <cmath>

namespace icanvas::lens {

namespace {

// Asset a source contributes: an image's asset or a lens's last result.
std::optional<AssetId> source_asset(const Element& e) {
  if (const auto* img = std::get_if<ImageBody>(&e.body)) return img->asset;
  if (const auto* l = std::get_if<LensBody>(&e.body)) return l->last_result;
  return std::nullopt;
}

PixelBox local_box(const Rect& inter, const Rect& lens_rect) {
  return {inter.x - lens_rect.x, inter.y - lens_rect.y, inter.right() - lens_rect.x,
          inter.bottom() - lens_rect.y};
}

}  // namespace

std::vector<ElementId> covered_elements(const CanvasDocument& doc, const ElementId& lens_id) {
  const Element& l = doc.element(lens_id);
  if (l.kind() != ElementKind::lens) throw Error(Errc::unsupported_kind, lens_id + " is not a lens");
  std::vector<ElementId> out;
  for (const auto& id : doc.z_order()) {
    const Element& e = doc.element(id);
    if (e.z >= l.z) break;
    if (e.kind() == ElementKind::image && overlaps(e.rect, l.rect)) out.push_back(id);
  }
  return out;
}

std::vector<ElementId> composition_sources(const CanvasDocument& doc, const ElementId& lens_id) {
  const Element& l = doc.element(lens_id);
  if (l.kind() != ElementKind::lens) throw Error(Errc::unsupported_kind, lens_id + " is not a lens");
  std::vector<ElementId> out;
  for (const auto& id : doc.z_order()) {
    const Element& e = doc.element(id);
    if (e.z >= l.z) break;
    if (e.kind() != ElementKind::image && e.kind() != ElementKind::lens) continue;
    if (!overlaps(e.rect, l.rect) || !source_asset(e)) continue;
    out.push_back(id);
  }
  return out;
}

bool composition_buildable(const CanvasDocument& doc, const ElementId& lens_id) {
  return !doc.body<LensBody>(lens_id).prompt.empty() || !composition_sources(doc, lens_id).empty();
}

LensComposition build_composition(const Engine& engine, const ElementId& lens_id) {
  const CanvasDocument& doc = engine.doc();
  const Element& l = doc.element(lens_id);
  const auto& body = doc.body<LensBody>(lens_id);
  LensComposition c;
  c.covered = composition_sources(doc, lens_id);
  if (body.prompt.empty() && c.covered.empty())
    throw Error(Errc::blank_lens_no_prompt, "lens " + lens_id + " covers nothing and has no prompt");

  c.preserve_mask = Mask(l.rect.w, l.rect.h);
  for (const auto& id : c.covered) {
    const Element& e = doc.element(id);
    if (auto inter = intersect(e.rect, l.rect)) c.preserve_mask.fill(local_box(*inter, l.rect));
    std::string prompt;
    if (e.kind() == ElementKind::image) {
      prompt = image_prompt(engine, id);
    } else {
      const ImageAsset& a = doc.asset(*source_asset(e));
      prompt = a.provenance ? a.provenance->prompt : doc.body<LensBody>(id).prompt;
    }
    if (!canonical_text(prompt).empty()) c.source_prompts.push_back(prompt);
  }
  c.generate_mask = c.preserve_mask.complement();

  std::vector<std::string> parts;
  if (!body.prompt.empty()) parts.push_back(body.prompt);
  parts.insert(parts.end(), c.source_prompts.begin(), c.source_prompts.end());
  c.composite_prompt = engine.adapters().language->merge(parts);
  return c;
}

JobId regenerate_lens(Engine& engine, const ElementId& lens_id) {
  if (!composition_buildable(engine.doc(), lens_id))
    throw Error(Errc::blank_lens_no_prompt, "lens " + lens_id + " covers nothing and has no prompt");
  return engine.submit(lens_id, DebounceClass::lens_idle, LensIntent{});
}

std::vector<ElementId> resolve_lens_stack(const CanvasDocument& doc, const Rect& region) {
  std::vector<ElementId> out;
  for (const auto& id : doc.z_order()) {
    const Element& e = doc.element(id);
    if (e.kind() == ElementKind::lens && overlaps(e.rect, region)) out.push_back(id);
  }
  return out;
}

ImageAsset compose_crop(const CanvasDocument& doc, const Rect& lens_rect,
                        const std::vector<ElementId>& sources) {
  const std::int32_t W = lens_rect.w, H = lens_rect.h;
  Raster px(static_cast<std::size_t>(W) * H * 4, 0);
  SceneSpec scene;
  for (const auto& id : sources) {
    const Element& e = doc.element(id);
    const auto asset_id = source_asset(e);
    if (!asset_id) continue;
    const ImageAsset& a = doc.asset(*asset_id);
    const Raster& src = a.pixels();
    if (auto inter = intersect(e.rect, lens_rect)) {
      for (std::int32_t cy = inter->y; cy < inter->bottom(); ++cy) {
        const auto sy = std::min<std::int64_t>(
            a.height - 1, (std::int64_t{cy - e.rect.y} * a.height + a.height / 2) / e.rect.h);
        for (std::int32_t cx = inter->x; cx < inter->right(); ++cx) {
          const auto sx = std::min<std::int64_t>(
              a.width - 1, (std::int64_t{cx - e.rect.x} * a.width + a.width / 2) / e.rect.w);
          const std::size_t si = (static_cast<std::size_t>(sy) * a.width + static_cast<std::size_t>(sx)) * 4;
          const std::size_t di =
              (static_cast<std::size_t>(cy - lens_rect.y) * W + static_cast<std::size_t>(cx - lens_rect.x)) * 4;
          std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(si), 4, px.begin() + static_cast<std::ptrdiff_t>(di));
        }
      }
    }
    if (!a.scene) continue;
    for (const auto& o : a.scene->objects) {
      const double x0 = (e.rect.x + o.region.x * e.rect.w - lens_rect.x) / W;
      const double y0 = (e.rect.y + o.region.y * e.rect.h - lens_rect.y) / H;
      const double x1 = x0 + o.region.w * e.rect.w / W;
      const double y1 = y0 + o.region.h * e.rect.h / H;
      const double cx0 = std::max(0.0, x0), cy0 = std::max(0.0, y0);
      const double cx1 = std::min(1.0, x1), cy1 = std::min(1.0, y1);
      if (cx1 <= cx0 || cy1 <= cy0) continue;
      SceneObject mapped = o;
      mapped.region = {cx0, cy0, cx1 - cx0, cy1 - cy0};
      scene.objects.push_back(std::move(mapped));
    }
  }
  return make_asset(W, H, std::move(px), std::move(scene), std::nullopt);
}

Work plan_lens_job(const Engine& engine, const Job& job) {
  const CanvasDocument& doc = engine.doc();
  const Element& l = doc.element(job.target);
  const LensComposition comp = build_composition(engine, job.target);

  GenerationRequest req;
  req.prompt = comp.composite_prompt;
  req.seed = doc.body<LensBody>(job.target).seed;
  std::vector<std::string> parents;
  OpKind op = OpKind::txt2img;
  if (comp.covered.empty()) {
    req.width = l.rect.w;
    req.height = l.rect.h;
  } else {
    for (const auto& id : comp.covered) parents.push_back(*source_asset(doc.element(id)));
    req.references.push_back(std::make_shared<const ImageAsset>(compose_crop(doc, l.rect, comp.covered)));
    if (comp.generate_mask.count() == 0) {
      op = OpKind::img2img;
    } else {
      op = OpKind::outpaint;
      req.mask = comp.generate_mask;
    }
  }
  // Lenses keep the covered structure and lean on its style.
  req.controls = GenerationControls::make(0.8, 0.5, 0.75, 7.0, 1.0, op);
  req.validate();

  return [req, parents, adapter_id = engine.adapter_id(), created = job.fired_at](const Adapters& a) -> JobOutcome {
    ImageAsset asset = a.image->generate(req);
    Provenance p;
    p.prompt = req.prompt;
    if (!canonical_text(req.prompt).empty()) p.fragments = a.language->decompose(req.prompt);
    sort_canonical(p.fragments);
    p.parents = parents;
    p.seed = req.seed;
    p.controls = req.controls;
    p.adapter_id = adapter_id;
    p.created_at = created;
    asset.provenance = std::move(p);
    return JobResult{{std::move(asset)}, {}};
  };
}

}  // namespace icanvas::lens
