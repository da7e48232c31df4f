#pragma once

#include <string>
#include <vector>

#include "icanvas/engine.hpp"

// Transformative lenses: coverage, prompt merging, preserve/generate masks,
// stacking and debounced re-synthesis.
namespace icanvas::lens {

struct LensComposition {
  // Ascending z. Images, plus lower lenses that already have a result.
  std::vector<ElementId> covered;
  // Lens-local, lens-sized; set bits are covered content.
  Mask preserve_mask;
  Mask generate_mask;
  std::vector<std::string> source_prompts;
  std::string composite_prompt;
};

// Image elements below the lens whose rect overlaps it, ascending z.
std::vector<ElementId> covered_elements(const CanvasDocument& doc, const ElementId& lens_id);

// Coverage plus chaining sources (generated lenses below), ascending z.
std::vector<ElementId> composition_sources(const CanvasDocument& doc, const ElementId& lens_id);

// Throws blank_lens_no_prompt.
LensComposition build_composition(const Engine& engine, const ElementId& lens_id);
bool composition_buildable(const CanvasDocument& doc, const ElementId& lens_id);

// Debounced on the idle window.
JobId regenerate_lens(Engine& engine, const ElementId& lens_id);

// Lenses overlapping region, ascending z (the chaining order).
std::vector<ElementId> resolve_lens_stack(const CanvasDocument& doc, const Rect& region);

// Lens-sized reference: covered rasters painted in z order (nearest
// neighbour), transparent elsewhere; scene objects mapped into lens space.
ImageAsset compose_crop(const CanvasDocument& doc, const Rect& lens_rect,
                        const std::vector<ElementId>& sources);

Work plan_lens_job(const Engine& engine, const Job& job);

}  // namespace icanvas::lens
