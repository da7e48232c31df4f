#include "icanvas/generation.hpp"

#include <cmath>

#include "icanvas/error.hpp"
#include "icanvas/scene.hpp"

namespace icanvas {

std::string_view to_string(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::txt2img: return "txt2img";
    case OpKind::img2img: return "img2img";
    case OpKind::inpaint: return "inpaint";
    case OpKind::outpaint: return "outpaint";
  }
  return "txt2img";
}

OpKind op_kind_from(std::string_view text) {
  if (text == "txt2img") return OpKind::txt2img;
  if (text == "img2img") return OpKind::img2img;
  if (text == "inpaint") return OpKind::inpaint;
  if (text == "outpaint") return OpKind::outpaint;
  throw Error(Errc::invalid_request, "unknown op kind: " + std::string(text));
}

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw Error(Errc::invalid_request, std::string(name) + " must lie in [0,1]");
}

}  // namespace

void GenerationControls::validate() const {
  check_unit(content_weight, "content_weight");
  check_unit(style_weight, "style_weight");
  check_unit(denoise_strength, "denoise_strength");
  if (!(guidance > 0.0) || !std::isfinite(guidance))
    throw Error(Errc::invalid_request, "guidance must be positive");
  if (!(emphasis_weight >= 1.0 && emphasis_weight <= 2.0))
    throw Error(Errc::invalid_request, "emphasis_weight must lie in [1,2]");
}

GenerationControls GenerationControls::make(double content_weight, double style_weight,
                                             double denoise_strength, double guidance,
                                             double emphasis_weight, OpKind op_kind) {
  GenerationControls c{content_weight, style_weight, denoise_strength,
                       guidance,       emphasis_weight, op_kind};
  c.validate();
  return c;
}

GenerationControls style_controls(OpKind op) {
  return GenerationControls::make(0.3, 0.8, 0.75, 7.0, 1.0, op);
}

GenerationControls content_controls(OpKind op) {
  return GenerationControls::make(0.8, 0.3, 0.75, 7.0, 1.0, op);
}

std::vector<std::string> GenerationRequest::reference_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : references)
    if (r) ids.push_back(r->id);
  return ids;
}

void GenerationRequest::validate() const {
  controls.validate();
  for (const auto& r : references)
    if (!r) throw Error(Errc::invalid_request, "null reference asset");
  if (width < 0 || height < 0) throw Error(Errc::invalid_request, "negative output size");
  if (mask) {
    if (references.empty())
      throw Error(Errc::invalid_request, "mask without a reference asset");
    if (mask->width() != references.front()->width || mask->height() != references.front()->height)
      throw Error(Errc::mask_mismatch, "mask does not match reference dimensions");
  }
  if ((controls.op_kind == OpKind::inpaint || controls.op_kind == OpKind::outpaint) && !mask)
    throw Error(Errc::invalid_request, "masked operation without a mask");
}

}  // namespace icanvas
