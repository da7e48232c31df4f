#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "icanvas/engine.hpp"

// Prompt decomposition into [type, value] fragments, suggestions, and
// recomposition of edited fragment sets.
namespace icanvas::fragments {

// At most max_fragments, unique (ftype, value), canonical type order.
// Throws empty_prompt.
std::vector<Fragment> decompose_prompt(const LanguageAdapter& language, const std::string& prompt,
                                       std::size_t max_fragments);

// Attaches (or returns the already attached) fragment row of an image.
const FragmentRow& reveal_fragments(Engine& engine, const ElementId& image);

// Suggestions for types not yet present. Throws no_more_types.
std::vector<Fragment> extend_fragment_types(const LanguageAdapter& language,
                                            const std::string& prompt,
                                            const std::vector<Fragment>& existing,
                                            std::size_t max_fragments);
// Same, appended to the image's row.
std::vector<Fragment> extend_row(Engine& engine, const ElementId& image);

// k distinct values of the same ftype, never the input value.
std::vector<Fragment> vary_fragment(const LanguageAdapter& language, const Fragment& fragment,
                                    const std::string& context_prompt, std::size_t k);
// Same, accumulated into the row column for the fragment's ftype.
std::vector<Fragment> vary_in_row(Engine& engine, const ElementId& image, const Fragment& fragment,
                                  std::size_t k);

// Throws remove_of_absent_fragment / replace_type_mismatch.
std::string compose_prompt(const LanguageAdapter& language, const std::string& base_prompt,
                           const std::vector<FragmentEdit>& edits);

// Validates against the image's prompt (including edits still pending for it)
// and submits a coalescing regeneration that reuses the image's seed.
JobId apply_fragment_edit(Engine& engine, const ElementId& image, const FragmentEdit& edit);

// Work for a RenderIntent or FragmentEditIntent against an image.
Work plan_image_job(const Engine& engine, const Job& job);

}  // namespace icanvas::fragments
