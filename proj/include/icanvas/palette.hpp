#pragma once

#include <cstddef>
#include <string>

#include "icanvas/engine.hpp"

// Palettes store snapshots of instruments and can generate sets of them.
namespace icanvas::palettes {

inline constexpr std::size_t kMaxGenerated = 8;

enum class GeneratedKind { fragments, brushes };
GeneratedKind generated_kind_from(std::string_view text);

// Throws unsupported_kind for containers and palettes.
std::size_t add_to_palette(Engine& engine, const ElementId& palette, const ElementId& element);
ElementId take_from_palette(Engine& engine, const ElementId& palette, std::size_t index,
                            Rect rect);
ElementId generate_palette(Engine& engine, const std::string& prompt, GeneratedKind kind,
                           std::size_t k, Rect rect);

}  // namespace icanvas::palettes
