#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icanvas/error.hpp"
#include "icanvas/fragment.hpp"
#include "icanvas/geometry.hpp"
#include "icanvas/instruments.hpp"
#include "icanvas/scene.hpp"

namespace icanvas {

using ElementId = std::string;

inline constexpr int kDocumentVersion = 1;

struct ImageBody {
  // The prompt the element currently stands for. Fragment edits and setPrompt
  // update it at once; the asset catches up when the job lands.
  std::string prompt;
  // Empty until the first generation lands.
  std::optional<AssetId> asset;
  std::optional<FragmentRow> row;
  std::uint64_t seed = 0;
  friend bool operator==(const ImageBody&, const ImageBody&) = default;
};

struct FragmentBody {
  Fragment fragment;
  friend bool operator==(const FragmentBody&, const FragmentBody&) = default;
};

struct LensBody {
  std::string prompt;
  std::optional<AssetId> last_result;
  // UI mirror only; never triggers regeneration.
  bool faded = false;
  std::uint64_t seed = 0;
  friend bool operator==(const LensBody&, const LensBody&) = default;
};

enum class CellKind { images, fragments };
std::string_view to_string(CellKind kind) noexcept;

using Cell = std::variant<std::monostate, AssetId, Fragment>;

struct ContainerBody {
  std::string prompt;
  Grounding grounding = GroundNone{};
  std::array<Cell, 4> cells{};
  CellKind cell_kind = CellKind::images;
  std::uint64_t base_seed = 0;
  bool generated = false;
  friend bool operator==(const ContainerBody&, const ContainerBody&) = default;
};

struct BrushBody {
  std::string prompt;
  BrushMode mode = BrushMode::style;
  // Application count per target element; emphasis grows with repeats.
  std::map<ElementId, std::int32_t> applications;

  bool filled() const noexcept { return !prompt.empty(); }
  friend bool operator==(const BrushBody&, const BrushBody&) = default;
};

struct BrushItem {
  std::string prompt;
  BrushMode mode = BrushMode::style;
  friend bool operator==(const BrushItem&, const BrushItem&) = default;
};
struct LensItem {
  std::string prompt;
  friend bool operator==(const LensItem&, const LensItem&) = default;
};
struct AssetItem {
  AssetId asset;
  friend bool operator==(const AssetItem&, const AssetItem&) = default;
};

// Palette entries are value snapshots, never live references.
using PaletteItem = std::variant<Fragment, BrushItem, LensItem, AssetItem>;

struct PaletteBody {
  std::string title;
  std::vector<PaletteItem> items;
  std::optional<std::string> generated_from;
  friend bool operator==(const PaletteBody&, const PaletteBody&) = default;
};

// Variant index doubles as the element kind.
using ElementBody =
    std::variant<ImageBody, FragmentBody, LensBody, ContainerBody, BrushBody, PaletteBody>;

enum class ElementKind { image, fragment, lens, container, brush, palette };

std::string_view to_string(ElementKind kind) noexcept;
ElementKind element_kind_from(std::string_view text);
ElementKind kind_of(const ElementBody& body) noexcept;

struct Element {
  ElementId id;
  Rect rect;
  std::int64_t z = 0;
  ElementBody body;

  ElementKind kind() const noexcept { return kind_of(body); }
  friend bool operator==(const Element&, const Element&) = default;
};

struct HistoryEntry {
  std::uint64_t seq = 0;
  ElementId element_id;
  ElementBody prior;
  std::string cause;
  std::int64_t timestamp = 0;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// Everything touched since the last drain; the session turns this into
// docPatch operations.
struct ChangeSet {
  std::set<ElementId> upserted;
  std::set<ElementId> removed;
  std::vector<AssetId> new_assets;
  std::size_t history_from = 0;
  std::set<ElementId> counters;
  bool z_order = false;
  bool next_id = false;

  bool empty() const noexcept {
    return upserted.empty() && removed.empty() && new_assets.empty() && counters.empty() &&
           !z_order && !next_id;
  }
};

// The reified workspace. All mutation goes through these methods so the
// invariants (z permutation, resolvable assets, append-only history) hold
// after every call.
class CanvasDocument {
 public:
  CanvasDocument() = default;

  // Appends at the top of the z-order. Throws invalid_rect / malformed_payload.
  ElementId create_element(Rect rect, ElementBody body);
  void remove_element(const ElementId& id);

  bool contains(const ElementId& id) const { return elements_.count(id) != 0; }
  const Element& element(const ElementId& id) const;
  // Mutable access marks the element changed.
  Element& edit(const ElementId& id);

  template <class Body>
  const Body& body(const ElementId& id) const;
  template <class Body>
  Body& edit_body(const ElementId& id);

  // Returns true when the rect actually changed.
  bool set_rect(const ElementId& id, Rect rect);

  const std::map<ElementId, Element>& elements() const noexcept { return elements_; }
  // Element ids in ascending z.
  const std::vector<ElementId>& z_order() const noexcept { return z_order_; }

  // Content-addressed store; re-adding an existing id keeps the original.
  const ImageAsset& add_asset(ImageAsset asset);
  bool has_asset(const AssetId& id) const { return assets_.count(id) != 0; }
  const ImageAsset& asset(const AssetId& id) const;
  std::shared_ptr<const ImageAsset> asset_ptr(const AssetId& id) const;
  const std::map<AssetId, std::shared_ptr<const ImageAsset>>& assets() const noexcept {
    return assets_;
  }

  const HistoryEntry& snapshot(const ElementId& id, std::string cause, std::int64_t timestamp);
  // Restores the recorded body bit-exactly. Throws dangling_asset when the
  // element is gone or an asset it references is missing.
  void restore(const HistoryEntry& entry);
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }
  const HistoryEntry& history_entry(std::uint64_t seq) const;

  std::uint64_t counter(const ElementId& id) const;
  void set_counter(const ElementId& id, std::uint64_t value);
  const std::map<ElementId, std::uint64_t>& counters() const noexcept { return counters_; }

  std::uint64_t revision() const noexcept { return revision_; }
  void set_revision(std::uint64_t revision) noexcept { revision_ = revision; }
  std::uint64_t next_id() const noexcept { return next_id_; }

  // Asset ids referenced from element bodies and history.
  std::set<AssetId> referenced_assets() const;
  // Throws malformed_payload naming the first violated invariant.
  void check_invariants() const;

  const ChangeSet& changes() const noexcept { return changes_; }
  ChangeSet drain_changes();

  // Raw setters used by deserialization and patch replay.
  void put_element(Element element);
  void put_asset_raw(std::shared_ptr<const ImageAsset> asset);
  void set_z_order(std::vector<ElementId> order);
  void append_history_raw(HistoryEntry entry);
  void set_next_id(std::uint64_t next) noexcept;

  friend bool operator==(const CanvasDocument& a, const CanvasDocument& b);

 private:
  std::int64_t top_z() const;

  std::map<ElementId, Element> elements_;
  std::vector<ElementId> z_order_;
  std::map<AssetId, std::shared_ptr<const ImageAsset>> assets_;
  std::vector<HistoryEntry> history_;
  std::map<ElementId, std::uint64_t> counters_;
  std::uint64_t revision_ = 0;
  std::uint64_t next_id_ = 1;
  ChangeSet changes_;
};

std::vector<AssetId> assets_in(const ElementBody& body);

template <class Body>
const Body& CanvasDocument::body(const ElementId& id) const {
  const Element& e = element(id);
  if (const auto* b = std::get_if<Body>(&e.body)) return *b;
  throw Error(Errc::unsupported_kind, "element " + id + " is a " + std::string(to_string(e.kind())));
}

template <class Body>
Body& CanvasDocument::edit_body(const ElementId& id) {
  Element& e = edit(id);
  if (auto* b = std::get_if<Body>(&e.body)) return *b;
  throw Error(Errc::unsupported_kind, "element " + id + " is a " + std::string(to_string(e.kind())));
}

}  // namespace icanvas
