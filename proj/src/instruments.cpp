#include "icanvas/instruments.hpp"

#include "icanvas/error.hpp"

namespace icanvas {

std::string_view to_string(EditAction action) noexcept {
  switch (action) {
    case EditAction::add: return "add";
    case EditAction::remove: return "remove";
    case EditAction::replace: return "replace";
  }
  return "add";
}

EditAction edit_action_from(std::string_view text) {
  if (text == "add") return EditAction::add;
  if (text == "remove") return EditAction::remove;
  if (text == "replace") return EditAction::replace;
  throw Error(Errc::malformed_payload, "unknown edit action: " + std::string(text));
}

std::string_view to_string(BrushMode mode) noexcept {
  return mode == BrushMode::style ? "style" : "content";
}

BrushMode brush_mode_from(std::string_view text) {
  if (text == "style") return BrushMode::style;
  if (text == "content") return BrushMode::content;
  throw Error(Errc::malformed_payload, "unknown brush mode: " + std::string(text));
}

const Fragment* FragmentRow::find(std::string_view ftype) const noexcept {
  for (const Fragment& f : fragments)
    if (f.ftype == ftype) return &f;
  return nullptr;
}

}  // namespace icanvas
