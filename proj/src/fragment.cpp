#include "icanvas/fragment.hpp"

#include <algorithm>
#include <cctype>

#include "icanvas/error.hpp"

namespace icanvas {

std::string_view to_string(FragmentOrigin origin) noexcept {
  switch (origin) {
    case FragmentOrigin::decomposed: return "decomposed";
    case FragmentOrigin::suggested: return "suggested";
    case FragmentOrigin::user: return "user";
    case FragmentOrigin::extracted: return "extracted";
  }
  return "user";
}

FragmentOrigin fragment_origin_from(std::string_view text) {
  if (text == "decomposed") return FragmentOrigin::decomposed;
  if (text == "suggested") return FragmentOrigin::suggested;
  if (text == "user") return FragmentOrigin::user;
  if (text == "extracted") return FragmentOrigin::extracted;
  throw Error(Errc::malformed_payload, "unknown fragment origin: " + std::string(text));
}

std::string canonical_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

Fragment::Fragment(std::string_view type, std::string_view val, FragmentOrigin from)
    : ftype(canonical_text(type)), value(canonical_text(val)), origin(from) {
  if (ftype.empty() || value.empty())
    throw Error(Errc::malformed_payload, "fragment type and value must be non-empty");
}

namespace {

std::size_t type_rank(std::string_view t) noexcept {
  const auto* it = std::find(std::begin(kCanonicalTypes), std::end(kCanonicalTypes), t);
  return static_cast<std::size_t>(it - std::begin(kCanonicalTypes));
}

}  // namespace

bool type_order_less(std::string_view a, std::string_view b) noexcept {
  const std::size_t ra = type_rank(a), rb = type_rank(b);
  if (ra != rb) return ra < rb;
  return ra == std::size(kCanonicalTypes) && a < b;
}

void sort_canonical(std::vector<Fragment>& fragments) {
  std::stable_sort(fragments.begin(), fragments.end(), [](const Fragment& a, const Fragment& b) {
    return type_order_less(a.ftype, b.ftype);
  });
}

std::string render_prompt(std::vector<Fragment> fragments) {
  sort_canonical(fragments);
  std::string out;
  for (const Fragment& f : fragments) {
    if (!out.empty()) out += ", ";
    out += f.value;
  }
  return out;
}

}  // namespace icanvas
