#include "icanvas/container.hpp"

#include <set>

#include "icanvas/fragments.hpp"
#include "icanvas/hash.hpp"

namespace icanvas::containers {

namespace {

bool is_empty(const ContainerBody& b) {
  return b.prompt.empty() && std::holds_alternative<GroundNone>(b.grounding);
}

}  // namespace

void ground_container(Engine& engine, const ElementId& container, Grounding source) {
  engine.doc().body<ContainerBody>(container);
  if (const auto* a = std::get_if<GroundAsset>(&source)) {
    if (!engine.doc().has_asset(a->asset)) throw Error(Errc::unresolvable_source, "unknown asset " + a->asset);
  } else if (const auto* t = std::get_if<GroundText>(&source)) {
    if (canonical_text(t->prompt).empty()) throw Error(Errc::unresolvable_source, "empty text grounding");
  }
  auto& body = engine.doc().edit_body<ContainerBody>(container);
  body.cell_kind = std::holds_alternative<GroundFragment>(source) ? CellKind::fragments : CellKind::images;
  body.grounding = std::move(source);
  body.cells = {};
  body.generated = false;
}

JobId generate_variations(Engine& engine, const ElementId& container, std::optional<std::uint64_t> base_seed) {
  const auto& body = engine.doc().body<ContainerBody>(container);
  if (is_empty(body)) throw Error(Errc::empty_container, "container " + container + " has no prompt or grounding");
  std::uint64_t seed;
  if (base_seed)
    seed = *base_seed;
  else if (!body.generated && body.base_seed == 0)
    seed = engine.derive_seed("container/" + container);
  else
    seed = Fnv1a{}.field(body.base_seed).field("reroll").digest();
  return engine.submit(container, DebounceClass::immediate, ContainerIntent{seed});
}

ElementId adopt_cell(Engine& engine, const ElementId& container, std::size_t cell_index, Rect rect) {
  const auto& body = engine.doc().body<ContainerBody>(container);
  if (cell_index >= kCells) throw Error(Errc::bad_index, "cell index " + std::to_string(cell_index));
  const Cell cell = body.cells[cell_index];
  if (std::holds_alternative<std::monostate>(cell))
    throw Error(Errc::empty_cell, "cell " + std::to_string(cell_index) + " is empty");
  if (const auto* f = std::get_if<Fragment>(&cell)) return engine.create_element(rect, FragmentBody{*f});
  const AssetId asset = std::get<AssetId>(cell);
  ImageBody img;
  img.asset = asset;
  if (const auto& prov = engine.doc().asset(asset).provenance) {
    img.prompt = prov->prompt;
    img.seed = prov->seed;
  }
  return engine.create_element(rect, std::move(img));
}

Work plan_container_job(const Engine& engine, const Job& job) {
  const auto& body = engine.doc().body<ContainerBody>(job.target);
  if (is_empty(body)) throw Error(Errc::empty_container, "container " + job.target + " has no prompt or grounding");
  const std::uint64_t base_seed = std::get<ContainerIntent>(job.intent).base_seed;
  const std::string prompt = body.prompt;
  const Grounding grounding = body.grounding;
  const CellKind kind = body.cell_kind;
  std::shared_ptr<const ImageAsset> source;
  if (const auto* a = std::get_if<GroundAsset>(&grounding)) source = engine.doc().asset_ptr(a->asset);

  return [=, adapter_id = engine.adapter_id(), created = job.fired_at](const Adapters& a) -> JobOutcome {
    const LanguageAdapter& lang = *a.language;
    JobResult result;
    if (kind == CellKind::fragments) {
      const Fragment& f = std::get<GroundFragment>(grounding).fragment;
      result.fragments = fragments::vary_fragment(lang, f, prompt, kCells);
      if (result.fragments.size() != kCells)
        return JobFailure{Errc::adapter_failure, "language model returned too few distinct values"};
      return result;
    }

    std::string context;
    if (source && source->scene) context = lang.describe(*source);
    const auto prompts = lang.derive_variant_prompts(prompt, grounding, context, kCells);
    if (prompts.size() != kCells || std::set<std::string>(prompts.begin(), prompts.end()).size() != kCells)
      return JobFailure{Errc::adapter_failure, "language model returned too few distinct variants"};

    const std::string dim = lang.variation_dimension(prompt, grounding);
    const OpKind op = source ? OpKind::img2img : OpKind::txt2img;
    // Varying style must not drag the source's style along; anything else keeps it.
    const GenerationControls controls = dim == "style" ? content_controls(op) : style_controls(op);
    for (std::size_t i = 0; i < kCells; ++i) {
      GenerationRequest req;
      req.prompt = prompts[i];
      if (source) req.references.push_back(source);
      req.controls = controls;
      req.seed = base_seed + i;
      ImageAsset asset = a.image->generate(req);
      Provenance p;
      p.prompt = req.prompt;
      p.fragments = lang.decompose(req.prompt);
      sort_canonical(p.fragments);
      p.parents = req.reference_ids();
      p.seed = req.seed;
      p.controls = req.controls;
      p.adapter_id = adapter_id;
      p.created_at = created;
      asset.provenance = std::move(p);
      result.assets.push_back(std::move(asset));
    }
    return result;
  };
}

}  // namespace icanvas::containers
