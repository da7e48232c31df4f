#pragma once

#include <cstdint>
#include <optional>

#include "icanvas/engine.hpp"

// Generative containers: a prompt header plus a fixed 2x2 grid of variations.
namespace icanvas::containers {

inline constexpr std::size_t kCells = 4;

// Replaces the grounding and clears the cells. Throws unresolvable_source.
void ground_container(Engine& engine, const ElementId& container, Grounding source);

// With no explicit seed the first run derives one and later runs re-roll.
// Throws empty_container.
JobId generate_variations(Engine& engine, const ElementId& container,
                          std::optional<std::uint64_t> base_seed = std::nullopt);

// Creates an image or fragment card from a filled cell. Throws empty_cell / bad_index.
ElementId adopt_cell(Engine& engine, const ElementId& container, std::size_t cell_index,
                     Rect rect);

Work plan_container_job(const Engine& engine, const Job& job);

}  // namespace icanvas::containers
