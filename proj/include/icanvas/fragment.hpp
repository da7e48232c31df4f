#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace icanvas {

enum class FragmentOrigin { decomposed, suggested, user, extracted };

std::string_view to_string(FragmentOrigin origin) noexcept;
FragmentOrigin fragment_origin_from(std::string_view text);

// One dimension of a prompt, rendered to the user as a [type, value] card.
// ftype and value are kept canonical: trimmed, lowercase, single-spaced.
struct Fragment {
  std::string ftype;
  std::string value;
  FragmentOrigin origin = FragmentOrigin::user;

  Fragment() = default;
  Fragment(std::string_view type, std::string_view val,
           FragmentOrigin from = FragmentOrigin::user);

  bool same_pair(const Fragment& other) const noexcept {
    return ftype == other.ftype && value == other.value;
  }
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

// Lowercase, trim, collapse internal whitespace.
std::string canonical_text(std::string_view text);

// content, style, tone, color, composition; anything else after, alphabetical.
inline constexpr std::string_view kCanonicalTypes[] = {"content", "style", "tone", "color",
                                                       "composition"};
bool type_order_less(std::string_view a, std::string_view b) noexcept;

// Stable sort by canonical type order, preserving relative order within a type.
void sort_canonical(std::vector<Fragment>& fragments);

// Canonical prompt rendering: values in canonical type order, comma-joined.
std::string render_prompt(std::vector<Fragment> fragments);

}  // namespace icanvas
