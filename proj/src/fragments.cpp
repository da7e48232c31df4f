#include "icanvas/fragments.hpp"

#include <algorithm>
#include <set>

namespace icanvas::fragments {

namespace {

bool has_pair(const std::vector<Fragment>& fs, const Fragment& f) {
  return std::any_of(fs.begin(), fs.end(), [&](const Fragment& g) { return g.same_pair(f); });
}

// Row base: first fragment of each type, canonical order.
std::vector<Fragment> row_base(const LanguageAdapter& language, const std::string& prompt,
                               std::size_t max_fragments) {
  std::vector<Fragment> out;
  std::set<std::string> seen;
  for (auto& f : decompose_prompt(language, prompt, max_fragments))
    if (seen.insert(f.ftype).second) out.push_back(std::move(f));
  return out;
}

}  // namespace

std::vector<Fragment> decompose_prompt(const LanguageAdapter& language, const std::string& prompt,
                                       std::size_t max_fragments) {
  if (canonical_text(prompt).empty()) throw Error(Errc::empty_prompt);
  std::vector<Fragment> out;
  for (auto& f : language.decompose(prompt))
    if (!has_pair(out, f)) out.push_back(std::move(f));
  sort_canonical(out);
  if (out.size() > max_fragments) out.resize(max_fragments);
  return out;
}

const FragmentRow& reveal_fragments(Engine& engine, const ElementId& image) {
  const auto& current = engine.doc().body<ImageBody>(image);
  if (current.row) return *current.row;
  const std::string prompt = image_prompt(engine, image);
  FragmentRow row;
  row.fragments = row_base(*engine.adapters().language, prompt, engine.config().max_fragments);
  auto& body = engine.doc().edit_body<ImageBody>(image);
  if (body.prompt.empty()) body.prompt = canonical_text(prompt);
  body.row = std::move(row);
  return *body.row;
}

std::vector<Fragment> extend_fragment_types(const LanguageAdapter& language, const std::string& prompt,
                                            const std::vector<Fragment>& existing,
                                            std::size_t max_fragments) {
  std::set<std::string> present;
  for (const auto& f : existing) present.insert(f.ftype);
  std::vector<Fragment> out;
  for (auto& f : language.suggest_types(prompt, existing)) {
    if (out.size() == max_fragments) break;
    if (present.insert(f.ftype).second) out.push_back(std::move(f));
  }
  if (out.empty()) throw Error(Errc::no_more_types, "every known fragment type is already present");
  sort_canonical(out);
  return out;
}

std::vector<Fragment> extend_row(Engine& engine, const ElementId& image) {
  reveal_fragments(engine, image);
  const std::string prompt = image_prompt(engine, image);
  auto suggestions = extend_fragment_types(*engine.adapters().language, prompt,
                                           engine.doc().body<ImageBody>(image).row->fragments,
                                           engine.config().max_fragments);
  auto& row = *engine.doc().edit_body<ImageBody>(image).row;
  row.fragments.insert(row.fragments.end(), suggestions.begin(), suggestions.end());
  sort_canonical(row.fragments);
  return suggestions;
}

std::vector<Fragment> vary_fragment(const LanguageAdapter& language, const Fragment& fragment,
                                    const std::string& context_prompt, std::size_t k) {
  std::vector<Fragment> out;
  if (k == 0) return out;
  for (auto& f : language.vary_values(fragment, context_prompt, k)) {
    if (out.size() == k) break;
    if (f.ftype != fragment.ftype || f.value == fragment.value || has_pair(out, f)) continue;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Fragment> vary_in_row(Engine& engine, const ElementId& image, const Fragment& fragment,
                                  std::size_t k) {
  reveal_fragments(engine, image);
  const std::string prompt = image_prompt(engine, image);
  const auto& column_now = engine.doc().body<ImageBody>(image).row->expansions;
  std::vector<Fragment> known;
  if (auto it = column_now.find(fragment.ftype); it != column_now.end()) known = it->second;

  // Ask past the values already shown so repeated requests keep accumulating.
  auto fresh = vary_fragment(*engine.adapters().language, fragment, prompt, k + known.size());
  std::vector<Fragment> added;
  for (auto& f : fresh) {
    if (added.size() == k) break;
    if (!has_pair(known, f)) added.push_back(std::move(f));
  }
  if (!added.empty()) {
    auto& column = engine.doc().edit_body<ImageBody>(image).row->expansions[fragment.ftype];
    column.insert(column.end(), added.begin(), added.end());
  }
  return added;
}

std::string compose_prompt(const LanguageAdapter& language, const std::string& base_prompt,
                           const std::vector<FragmentEdit>& edits) {
  for (const auto& e : edits)
    if (e.action == EditAction::replace && (!e.replacement || e.replacement->ftype != e.fragment.ftype))
      throw Error(Errc::replace_type_mismatch, "replacement must keep ftype " + e.fragment.ftype);
  return language.compose(base_prompt, edits);
}

JobId apply_fragment_edit(Engine& engine, const ElementId& image, const FragmentEdit& edit) {
  const std::string base = image_prompt(engine, image);
  const std::string next = compose_prompt(*engine.adapters().language, base, {edit});
  if (canonical_text(next).empty()) throw Error(Errc::empty_prompt, "edit would leave the image without a prompt");
  if (engine.scheduler().is_shutdown()) throw Error(Errc::shutdown, "scheduler is shut down");

  auto& body = engine.doc().edit_body<ImageBody>(image);
  body.prompt = next;
  if (body.row) body.row->fragments = row_base(*engine.adapters().language, next, engine.config().max_fragments);
  return engine.submit(image, DebounceClass::edit_coalesce, FragmentEditIntent{{edit}});
}

Work plan_image_job(const Engine& engine, const Job& job) {
  const auto& body = engine.doc().body<ImageBody>(job.target);
  const std::string prompt = body.prompt.empty() ? image_prompt(engine, job.target) : body.prompt;
  if (canonical_text(prompt).empty()) throw Error(Errc::empty_prompt, "image " + job.target + " has no prompt");

  GenerationRequest req;
  req.prompt = prompt;
  req.seed = body.seed;
  const bool steer = std::holds_alternative<FragmentEditIntent>(job.intent) && body.asset;
  if (steer) {
    req.references.push_back(engine.doc().asset_ptr(*body.asset));
    req.controls = content_controls(OpKind::img2img);
  }
  req.validate();

  return [req, adapter_id = engine.adapter_id(), created = job.fired_at](const Adapters& a) -> JobOutcome {
    ImageAsset asset = a.image->generate(req);
    Provenance p;
    p.prompt = req.prompt;
    p.fragments = a.language->decompose(req.prompt);
    sort_canonical(p.fragments);
    p.parents = req.reference_ids();
    p.seed = req.seed;
    p.controls = req.controls;
    p.adapter_id = adapter_id;
    p.created_at = created;
    asset.provenance = std::move(p);
    return JobResult{{std::move(asset)}, {}};
  };
}

}  // namespace icanvas::fragments
