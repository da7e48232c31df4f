#include "icanvas/engine.hpp"

#include <algorithm>

#include "icanvas/brush.hpp"
#include "icanvas/container.hpp"
#include "icanvas/fragments.hpp"
#include "icanvas/hash.hpp"
#include "icanvas/lens.hpp"
#include "icanvas/palette.hpp"

namespace icanvas {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const char* cause_of(const JobIntent& intent) {
  return std::visit(overloaded{[](const RenderIntent&) { return "render"; },
                               [](const FragmentEditIntent&) { return "fragment-edit"; },
                               [](const LensIntent&) { return "lens"; },
                               [](const ContainerIntent&) { return "container"; },
                               [](const BrushIntent&) { return "brush"; }},
                    intent);
}

JobFailure failure_from(const Error& e) { return {e.code(), e.what()}; }

}  // namespace

Engine::Engine(Adapters adapters, EngineConfig config)
    : adapters_(std::move(adapters)),
      config_(config),
      scheduler_(GenerationScheduler::Options{config.idle_window_ms, config.edit_window_ms,
                                              config.max_inflight}) {}

void Engine::replace_document(CanvasDocument doc) {
  doc_ = std::move(doc);
  scheduler_ = GenerationScheduler(scheduler_.options());
  for (const auto& [id, value] : doc_.counters()) scheduler_.seed_counter(id, value);
}

std::uint64_t Engine::derive_seed(std::string_view salt) const {
  const std::uint64_t s = Fnv1a{}.field(config_.base_seed).field(salt).digest();
  return s == 0 ? 1 : s;
}

ElementId Engine::create_element(Rect rect, ElementBody body) {
  const ElementId id = doc_.create_element(rect, std::move(body));
  Element& e = doc_.edit(id);
  if (auto* img = std::get_if<ImageBody>(&e.body)) {
    img->prompt = canonical_text(img->prompt);
    if (img->seed == 0) img->seed = derive_seed("image/" + id);
    if (!img->asset && !img->prompt.empty()) submit(id, DebounceClass::immediate, RenderIntent{img->prompt});
  } else if (auto* lens = std::get_if<LensBody>(&e.body)) {
    if (lens->seed == 0) lens->seed = derive_seed("lens/" + id);
    if (lens::composition_buildable(doc_, id)) lens::regenerate_lens(*this, id);
  }
  return id;
}

void Engine::schedule_lenses_over(const ElementId& id, const Rect& a, const Rect& b) {
  const std::int64_t z = doc_.element(id).z;
  std::vector<ElementId> lenses;
  for (const auto& other : doc_.z_order()) {
    const Element& e = doc_.element(other);
    if (e.z <= z || e.kind() != ElementKind::lens) continue;
    if (overlaps(e.rect, a) || overlaps(e.rect, b)) lenses.push_back(other);
  }
  for (const auto& l : lenses)
    if (lens::composition_buildable(doc_, l)) lens::regenerate_lens(*this, l);
}

bool Engine::update_geometry(const ElementId& id, Rect rect) {
  const Rect old = doc_.element(id).rect;
  if (!doc_.set_rect(id, rect)) return false;
  if (doc_.element(id).kind() == ElementKind::lens && lens::composition_buildable(doc_, id))
    lens::regenerate_lens(*this, id);
  schedule_lenses_over(id, old, rect);
  return true;
}

void Engine::set_prompt(const ElementId& id, const std::string& prompt) {
  Element& e = doc_.edit(id);
  std::visit(overloaded{
                 [&](ImageBody& b) {
                   const std::string p = canonical_text(prompt);
                   if (p.empty()) throw Error(Errc::empty_prompt);
                   b.prompt = p;
                   b.row.reset();
                   submit(id, DebounceClass::immediate, RenderIntent{p});
                 },
                 [&](LensBody& b) {
                   b.prompt = canonical_text(prompt);
                   if (lens::composition_buildable(doc_, id)) lens::regenerate_lens(*this, id);
                 },
                 [&](ContainerBody& b) { b.prompt = canonical_text(prompt); },
                 [&](BrushBody& b) { brushes::fill_brush_from_text(*this, id, prompt, b.mode); },
                 [&](PaletteBody& b) { b.title = prompt; },
                 [&](FragmentBody&) {
                   throw Error(Errc::unsupported_kind, "fragment cards are edited through fragment edits");
                 }},
             e.body);
}

void Engine::delete_element(const ElementId& id) {
  const Element e = doc_.element(id);
  std::vector<ElementId> lenses;
  for (const auto& other : doc_.z_order()) {
    const Element& o = doc_.element(other);
    if (o.z > e.z && o.kind() == ElementKind::lens && overlaps(o.rect, e.rect)) lenses.push_back(other);
  }
  scheduler_.cancel_target(id);
  doc_.remove_element(id);
  for (const auto& l : lenses)
    if (lens::composition_buildable(doc_, l)) lens::regenerate_lens(*this, l);
}

DropEffect Engine::drop_on(const ElementId& source, const ElementId& target) {
  const ElementKind sk = doc_.element(source).kind();
  const ElementKind tk = doc_.element(target).kind();
  auto unsupported = [&]() -> Error {
    return Error(Errc::unsupported_pair, std::string(to_string(sk)) + " -> " + std::string(to_string(tk)));
  };
  if (source == target) throw unsupported();

  if (tk == ElementKind::palette) return StoredInPalette{palettes::add_to_palette(*this, target, source)};

  if (sk == ElementKind::fragment && tk == ElementKind::image) {
    const Fragment f = doc_.body<FragmentBody>(source).fragment;
    const std::string prompt = image_prompt(*this, target);
    std::optional<Fragment> same_type;
    if (!canonical_text(prompt).empty())
      for (const auto& existing : adapters_.language->decompose(prompt))
        if (existing.ftype == f.ftype) {
          same_type = existing;
          break;
        }
    const FragmentEdit edit = same_type && !same_type->same_pair(f) ? FragmentEdit::replace(*same_type, f)
                                                                     : FragmentEdit::add(f);
    return FragmentApplied{fragments::apply_fragment_edit(*this, target, edit)};
  }
  if (tk == ElementKind::container && (sk == ElementKind::image || sk == ElementKind::fragment)) {
    Grounding g;
    if (sk == ElementKind::image) {
      const auto& img = doc_.body<ImageBody>(source);
      if (!img.asset) throw Error(Errc::unresolvable_source, "image " + source + " has no asset yet");
      g = GroundAsset{*img.asset};
    } else {
      g = GroundFragment{doc_.body<FragmentBody>(source).fragment};
    }
    containers::ground_container(*this, target, std::move(g));
    return ContainerGrounded{containers::generate_variations(*this, target)};
  }
  if ((sk == ElementKind::image && tk == ElementKind::lens) ||
      (sk == ElementKind::lens && tk == ElementKind::image)) {
    const ElementId l = sk == ElementKind::lens ? source : target;
    return LensScheduled{l, lens::regenerate_lens(*this, l)};
  }
  if (sk == ElementKind::brush && tk == ElementKind::brush)
    return BrushesCombined{brushes::combine_brushes(*this, source, target)};
  if (sk == ElementKind::image && tk == ElementKind::brush) {
    const auto& img = doc_.body<ImageBody>(source);
    if (!img.asset) throw Error(Errc::unknown_asset, "image " + source + " has no asset yet");
    const BrushMode mode = doc_.body<BrushBody>(target).mode;
    return BrushFilled{brushes::fill_brush_from_example(*this, target, *img.asset, std::nullopt, mode)};
  }
  throw unsupported();
}

const HistoryEntry& Engine::snapshot(const ElementId& id) { return doc_.snapshot(id, "snapshot", now_); }

void Engine::restore(std::uint64_t history_seq) {
  const HistoryEntry entry = doc_.history_entry(history_seq);
  if (!doc_.contains(entry.element_id))
    throw Error(Errc::dangling_asset, "element " + entry.element_id + " no longer exists");
  for (const auto& a : assets_in(entry.prior))
    if (!doc_.has_asset(a)) throw Error(Errc::dangling_asset, "unknown asset " + a);
  scheduler_.cancel_target(entry.element_id);
  doc_.snapshot(entry.element_id, "restore", now_);
  doc_.restore(entry);
}

JobId Engine::submit(const ElementId& target, DebounceClass cls, JobIntent intent) {
  if (!doc_.contains(target)) throw Error(Errc::unknown_id, target);
  return scheduler_.submit(target, cls, std::move(intent), now_);
}

std::vector<Dispatch> Engine::take_ready() {
  std::vector<Dispatch> out;
  for (auto& job : scheduler_.take_ready(now_)) {
    Work work = plan(job);
    out.push_back({std::move(job), std::move(work)});
  }
  return out;
}

Work Engine::plan(const Job& job) {
  Work work;
  try {
    work = std::visit(overloaded{[&](const RenderIntent&) { return fragments::plan_image_job(*this, job); },
                                 [&](const FragmentEditIntent&) { return fragments::plan_image_job(*this, job); },
                                 [&](const LensIntent&) { return lens::plan_lens_job(*this, job); },
                                 [&](const ContainerIntent&) { return containers::plan_container_job(*this, job); },
                                 [&](const BrushIntent&) { return brushes::plan_brush_job(*this, job); }},
                      job.intent);
  } catch (const Error& e) {
    const JobFailure f = failure_from(e);
    return [f](const Adapters&) -> JobOutcome { return f; };
  }
  return [inner = std::move(work)](const Adapters& a) -> JobOutcome {
    try {
      return inner(a);
    } catch (const Error& e) {
      return failure_from(e);
    } catch (const std::exception& e) {
      return JobFailure{Errc::adapter_failure, e.what()};
    }
  };
}

Completion Engine::complete(const Job& job, JobOutcome outcome) {
  Completion c;
  c.job = job;
  c.disposition = scheduler_.on_result(job.id);
  if (auto* f = std::get_if<JobFailure>(&outcome)) {
    c.failure = std::move(*f);
    c.disposition = Disposition::discarded;
    return c;
  }
  if (c.disposition != Disposition::applied) return c;
  if (!doc_.contains(job.target)) {
    c.disposition = Disposition::discarded;
    return c;
  }
  try {
    apply(job, std::move(std::get<JobResult>(outcome)));
  } catch (const Error& e) {
    c.failure = failure_from(e);
    c.disposition = Disposition::discarded;
  }
  return c;
}

void Engine::apply(const Job& job, JobResult result) {
  const ElementId& id = job.target;
  const ElementKind kind = doc_.element(id).kind();
  const bool wants_one_asset = !std::holds_alternative<ContainerIntent>(job.intent);
  if (wants_one_asset && result.assets.size() != 1)
    throw Error(Errc::malformed_response, "expected one asset, got " + std::to_string(result.assets.size()));
  if (std::holds_alternative<ContainerIntent>(job.intent) && result.assets.size() + result.fragments.size() !=
                                                                 containers::kCells)
    throw Error(Errc::malformed_response, "container result must fill every cell");
  if (std::holds_alternative<LensIntent>(job.intent) ? kind != ElementKind::lens
      : std::holds_alternative<ContainerIntent>(job.intent) ? kind != ElementKind::container
                                                             : kind != ElementKind::image)
    throw Error(Errc::unsupported_kind, "job target " + id + " changed kind");

  std::vector<AssetId> ids;
  for (auto& a : result.assets) ids.push_back(doc_.add_asset(std::move(a)).id);
  doc_.snapshot(id, cause_of(job.intent), now_);
  doc_.set_counter(id, job.captured);

  Element& e = doc_.edit(id);
  std::visit(overloaded{
                 [&](ImageBody& b) { b.asset = ids.front(); },
                 [&](LensBody& b) { b.last_result = ids.front(); },
                 [&](ContainerBody& b) {
                   for (std::size_t i = 0; i < containers::kCells; ++i) {
                     if (b.cell_kind == CellKind::fragments)
                       b.cells[i] = result.fragments.at(i);
                     else
                       b.cells[i] = ids.at(i);
                   }
                   b.base_seed = std::get<ContainerIntent>(job.intent).base_seed;
                   b.generated = true;
                 },
                 [](auto&) {}},
             e.body);

  if (kind == ElementKind::image || kind == ElementKind::lens) {
    const Rect r = doc_.element(id).rect;
    schedule_lenses_over(id, r, r);
  }
}

std::string image_prompt(const Engine& engine, const ElementId& image) {
  const auto& body = engine.doc().body<ImageBody>(image);
  if (!body.prompt.empty()) return body.prompt;
  if (!body.asset) return {};
  const ImageAsset& asset = engine.doc().asset(*body.asset);
  if (asset.provenance && !asset.provenance->prompt.empty()) return asset.provenance->prompt;
  return engine.adapters().language->describe(asset);
}

}  // namespace icanvas
