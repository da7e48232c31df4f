#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icanvas/fragment.hpp"

namespace icanvas {

using AssetId = std::string;

enum class EditAction { add, remove, replace };

std::string_view to_string(EditAction action) noexcept;
EditAction edit_action_from(std::string_view text);

struct FragmentEdit {
  EditAction action = EditAction::add;
  Fragment fragment;
  std::optional<Fragment> replacement;

  static FragmentEdit add(Fragment f) { return {EditAction::add, std::move(f), std::nullopt}; }
  static FragmentEdit remove(Fragment f) {
    return {EditAction::remove, std::move(f), std::nullopt};
  }
  static FragmentEdit replace(Fragment from, Fragment to) {
    return {EditAction::replace, std::move(from), std::move(to)};
  }

  friend bool operator==(const FragmentEdit&, const FragmentEdit&) = default;
};

// Base fragments (one per ftype, canonical order) plus per-type variation
// columns.
struct FragmentRow {
  std::vector<Fragment> fragments;
  std::map<std::string, std::vector<Fragment>> expansions;

  const Fragment* find(std::string_view ftype) const noexcept;
  friend bool operator==(const FragmentRow&, const FragmentRow&) = default;
};

struct GroundNone {
  friend bool operator==(const GroundNone&, const GroundNone&) = default;
};
struct GroundAsset {
  AssetId asset;
  friend bool operator==(const GroundAsset&, const GroundAsset&) = default;
};
struct GroundFragment {
  Fragment fragment;
  friend bool operator==(const GroundFragment&, const GroundFragment&) = default;
};
struct GroundText {
  std::string prompt;
  friend bool operator==(const GroundText&, const GroundText&) = default;
};

// The single example a container is grounded on.
using Grounding = std::variant<GroundNone, GroundAsset, GroundFragment, GroundText>;

enum class BrushMode { style, content };

std::string_view to_string(BrushMode mode) noexcept;
BrushMode brush_mode_from(std::string_view text);

}  // namespace icanvas
