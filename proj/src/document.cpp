#include "icanvas/document.hpp"

#include <algorithm>

namespace icanvas {

std::string_view to_string(CellKind kind) noexcept {
  return kind == CellKind::fragments ? "fragments" : "images";
}

std::string_view to_string(ElementKind kind) noexcept {
  switch (kind) {
    case ElementKind::image: return "image";
    case ElementKind::fragment: return "fragment";
    case ElementKind::lens: return "lens";
    case ElementKind::container: return "container";
    case ElementKind::brush: return "brush";
    case ElementKind::palette: return "palette";
  }
  return "image";
}

ElementKind element_kind_from(std::string_view text) {
  for (auto k : {ElementKind::image, ElementKind::fragment, ElementKind::lens, ElementKind::container,
                 ElementKind::brush, ElementKind::palette})
    if (to_string(k) == text) return k;
  throw Error(Errc::unsupported_kind, "unknown element kind " + std::string(text));
}

ElementKind kind_of(const ElementBody& body) noexcept {
  return static_cast<ElementKind>(body.index());
}

std::vector<AssetId> assets_in(const ElementBody& body) {
  std::vector<AssetId> out;
  std::visit(
      [&out](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ImageBody>) {
          if (b.asset) out.push_back(*b.asset);
        } else if constexpr (std::is_same_v<T, LensBody>) {
          if (b.last_result) out.push_back(*b.last_result);
        } else if constexpr (std::is_same_v<T, ContainerBody>) {
          if (const auto* g = std::get_if<GroundAsset>(&b.grounding)) out.push_back(g->asset);
          for (const auto& c : b.cells)
            if (const auto* a = std::get_if<AssetId>(&c)) out.push_back(*a);
        } else if constexpr (std::is_same_v<T, PaletteBody>) {
          for (const auto& it : b.items)
            if (const auto* a = std::get_if<AssetItem>(&it)) out.push_back(a->asset);
        }
      },
      body);
  return out;
}

namespace {

void validate_body(const ElementBody& body) {
  if (const auto* f = std::get_if<FragmentBody>(&body))
    if (f->fragment.ftype.empty() || f->fragment.value.empty())
      throw Error(Errc::malformed_payload, "fragment card needs a type and a value");
}

}  // namespace

std::int64_t CanvasDocument::top_z() const {
  return z_order_.empty() ? 0 : elements_.at(z_order_.back()).z;
}

ElementId CanvasDocument::create_element(Rect rect, ElementBody body) {
  if (!rect.valid()) throw Error(Errc::invalid_rect, "width and height must be positive");
  validate_body(body);
  for (const auto& a : assets_in(body))
    if (!has_asset(a)) throw Error(Errc::dangling_asset, "unknown asset " + a);
  ElementId id = "e" + std::to_string(next_id_++);
  Element e{id, rect, top_z() + 1, std::move(body)};
  elements_.emplace(id, std::move(e));
  z_order_.push_back(id);
  changes_.upserted.insert(id);
  changes_.z_order = true;
  changes_.next_id = true;
  return id;
}

void CanvasDocument::remove_element(const ElementId& id) {
  if (!contains(id)) throw Error(Errc::unknown_id, id);
  elements_.erase(id);
  z_order_.erase(std::remove(z_order_.begin(), z_order_.end(), id), z_order_.end());
  changes_.upserted.erase(id);
  changes_.removed.insert(id);
  changes_.z_order = true;
}

const Element& CanvasDocument::element(const ElementId& id) const {
  auto it = elements_.find(id);
  if (it == elements_.end()) throw Error(Errc::unknown_id, id);
  return it->second;
}

Element& CanvasDocument::edit(const ElementId& id) {
  auto it = elements_.find(id);
  if (it == elements_.end()) throw Error(Errc::unknown_id, id);
  changes_.upserted.insert(id);
  return it->second;
}

bool CanvasDocument::set_rect(const ElementId& id, Rect rect) {
  if (!rect.valid()) throw Error(Errc::invalid_rect, "width and height must be positive");
  if (element(id).rect == rect) return false;
  edit(id).rect = rect;
  return true;
}

const ImageAsset& CanvasDocument::add_asset(ImageAsset asset) {
  auto it = assets_.find(asset.id);
  if (it != assets_.end()) return *it->second;
  const AssetId id = asset.id;
  auto [pos, _] = assets_.emplace(id, std::make_shared<const ImageAsset>(std::move(asset)));
  changes_.new_assets.push_back(id);
  return *pos->second;
}

const ImageAsset& CanvasDocument::asset(const AssetId& id) const { return *asset_ptr(id); }

std::shared_ptr<const ImageAsset> CanvasDocument::asset_ptr(const AssetId& id) const {
  auto it = assets_.find(id);
  if (it == assets_.end()) throw Error(Errc::dangling_asset, "unknown asset " + id);
  return it->second;
}

const HistoryEntry& CanvasDocument::snapshot(const ElementId& id, std::string cause,
                                             std::int64_t timestamp) {
  const Element& e = element(id);
  history_.push_back(HistoryEntry{history_.size() + 1, id, e.body, std::move(cause), timestamp});
  return history_.back();
}

void CanvasDocument::restore(const HistoryEntry& entry) {
  if (!contains(entry.element_id))
    throw Error(Errc::dangling_asset, "element " + entry.element_id + " no longer exists");
  if (kind_of(entry.prior) != element(entry.element_id).kind())
    throw Error(Errc::unsupported_kind, "history entry kind does not match element");
  for (const auto& a : assets_in(entry.prior))
    if (!has_asset(a)) throw Error(Errc::dangling_asset, "unknown asset " + a);
  edit(entry.element_id).body = entry.prior;
}

const HistoryEntry& CanvasDocument::history_entry(std::uint64_t seq) const {
  if (seq == 0 || seq > history_.size())
    throw Error(Errc::unknown_id, "no history entry " + std::to_string(seq));
  return history_[seq - 1];
}

std::uint64_t CanvasDocument::counter(const ElementId& id) const {
  auto it = counters_.find(id);
  return it == counters_.end() ? 0 : it->second;
}

void CanvasDocument::set_counter(const ElementId& id, std::uint64_t value) {
  counters_[id] = value;
  changes_.counters.insert(id);
}

std::set<AssetId> CanvasDocument::referenced_assets() const {
  std::set<AssetId> out;
  for (const auto& [_, e] : elements_)
    for (auto& a : assets_in(e.body)) out.insert(std::move(a));
  for (const auto& h : history_)
    for (auto& a : assets_in(h.prior)) out.insert(std::move(a));
  return out;
}

void CanvasDocument::check_invariants() const {
  if (z_order_.size() != elements_.size())
    throw Error(Errc::malformed_payload, "z-order length differs from element count");
  std::set<ElementId> seen;
  std::int64_t last_z = 0;
  bool first = true;
  for (const auto& id : z_order_) {
    if (!seen.insert(id).second) throw Error(Errc::malformed_payload, "duplicate id in z-order " + id);
    auto it = elements_.find(id);
    if (it == elements_.end()) throw Error(Errc::malformed_payload, "z-order names unknown element " + id);
    if (!first && it->second.z <= last_z)
      throw Error(Errc::malformed_payload, "z values not increasing at " + id);
    first = false;
    last_z = it->second.z;
  }
  for (const auto& [id, e] : elements_) {
    if (e.id != id) throw Error(Errc::malformed_payload, "element key mismatch " + id);
    if (!e.rect.valid()) throw Error(Errc::malformed_payload, "element " + id + " has an invalid rect");
  }
  for (const auto& [id, a] : assets_)
    if (!a || a->id != id) throw Error(Errc::malformed_payload, "asset key mismatch " + id);
  for (const auto& a : referenced_assets())
    if (!has_asset(a)) throw Error(Errc::malformed_payload, "dangling asset reference " + a);
  for (std::size_t i = 0; i < history_.size(); ++i)
    if (history_[i].seq != i + 1) throw Error(Errc::malformed_payload, "history sequence gap");
}

ChangeSet CanvasDocument::drain_changes() {
  ChangeSet out = std::move(changes_);
  changes_ = ChangeSet{};
  changes_.history_from = history_.size();
  return out;
}

void CanvasDocument::put_element(Element element) {
  const ElementId id = element.id;
  elements_[id] = std::move(element);
  changes_.upserted.insert(id);
}

void CanvasDocument::put_asset_raw(std::shared_ptr<const ImageAsset> asset) {
  const AssetId id = asset->id;
  if (assets_.emplace(id, std::move(asset)).second) changes_.new_assets.push_back(id);
}

void CanvasDocument::set_z_order(std::vector<ElementId> order) {
  z_order_ = std::move(order);
  changes_.z_order = true;
}

void CanvasDocument::append_history_raw(HistoryEntry entry) { history_.push_back(std::move(entry)); }

void CanvasDocument::set_next_id(std::uint64_t next) noexcept {
  next_id_ = next;
  changes_.next_id = true;
}

bool operator==(const CanvasDocument& a, const CanvasDocument& b) {
  if (a.elements_ != b.elements_ || a.z_order_ != b.z_order_ || a.history_ != b.history_ ||
      a.counters_ != b.counters_ || a.revision_ != b.revision_ || a.next_id_ != b.next_id_)
    return false;
  if (a.assets_.size() != b.assets_.size()) return false;
  for (auto ia = a.assets_.begin(), ib = b.assets_.begin(); ia != a.assets_.end(); ++ia, ++ib)
    if (ia->first != ib->first || !(*ia->second == *ib->second)) return false;
  return true;
}

}  // namespace icanvas
