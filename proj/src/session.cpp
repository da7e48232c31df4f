#include "icanvas/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "icanvas/brush.hpp"
#include "icanvas/container.hpp"
#include "icanvas/fragments.hpp"
#include "icanvas/lens.hpp"
#include "icanvas/palette.hpp"

namespace icanvas {

namespace {

json effect_json(const DropEffect& effect) {
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, FragmentApplied>) return {{"effect", "fragmentApplied"}, {"job", e.job}};
        else if constexpr (std::is_same_v<T, ContainerGrounded>)
          return {{"effect", "containerGrounded"}, {"job", e.job}};
        else if constexpr (std::is_same_v<T, LensScheduled>)
          return {{"effect", "lensScheduled"}, {"lens", e.lens}, {"job", e.job}};
        else if constexpr (std::is_same_v<T, BrushesCombined>) return {{"effect", "brushesCombined"}, {"id", e.brush}};
        else if constexpr (std::is_same_v<T, StoredInPalette>) return {{"effect", "storedInPalette"}, {"index", e.index}};
        else return {{"effect", "brushFilled"}, {"prompt", e.prompt}};
      },
      effect);
}

json row_json(const FragmentRow& row) {
  json frags = json::array();
  for (const auto& f : row.fragments) frags.push_back(to_json(f));
  json exp = json::object();
  for (const auto& [type, list] : row.expansions) {
    json col = json::array();
    for (const auto& f : list) col.push_back(to_json(f));
    exp[type] = col;
  }
  return {{"fragments", frags}, {"expansions", exp}};
}

json fragments_json(const std::vector<Fragment>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back(to_json(f));
  return out;
}

BrushMode mode_arg(const json& args, BrushMode fallback) {
  return args.contains("mode") ? brush_mode_from(args.at("mode").get<std::string>()) : fallback;
}

ElementBody body_from_init(Engine& engine, ElementKind kind, const Rect& rect, const json& init) {
  switch (kind) {
    case ElementKind::image: {
      ImageBody b;
      b.prompt = init.value("prompt", std::string());
      b.seed = init.value("seed", std::uint64_t{0});
      std::optional<SceneSpec> scene;
      if (init.contains("scene")) scene = scene_from_json(init.at("scene"));
      if (init.contains("png_b64")) {
        const auto img = decode_png(base64_decode(init.at("png_b64").get<std::string>()));
        b.asset = engine.doc().add_asset(make_asset(img.width, img.height, img.rgba, scene, std::nullopt)).id;
      } else if (scene) {
        const std::int32_t w = init.value("width", rect.w), h = init.value("height", rect.h);
        if (w <= 0 || h <= 0) throw Error(Errc::malformed_payload, "scene image needs positive dimensions");
        Raster px = render_scene(*scene, w, h, b.seed);
        b.asset = engine.doc().add_asset(make_asset(w, h, std::move(px), scene, std::nullopt)).id;
      } else if (init.contains("asset")) {
        b.asset = init.at("asset").get<std::string>();
        if (!engine.doc().has_asset(*b.asset)) throw Error(Errc::unknown_asset, "unknown asset " + *b.asset);
      }
      return b;
    }
    case ElementKind::fragment: {
      const auto origin = init.contains("origin") ? fragment_origin_from(init.at("origin").get<std::string>())
                                                  : FragmentOrigin::user;
      const auto type = init.at("ftype").get<std::string>();
      const auto value = init.at("value").get<std::string>();
      if (canonical_text(type).empty() || canonical_text(value).empty())
        throw Error(Errc::malformed_payload, "fragment card needs a type and a value");
      return FragmentBody{Fragment(type, value, origin)};
    }
    case ElementKind::lens: {
      LensBody b;
      b.prompt = canonical_text(init.value("prompt", std::string()));
      b.seed = init.value("seed", std::uint64_t{0});
      return b;
    }
    case ElementKind::container: {
      ContainerBody b;
      b.prompt = canonical_text(init.value("prompt", std::string()));
      return b;
    }
    case ElementKind::brush: {
      BrushBody b;
      b.prompt = canonical_text(init.value("prompt", std::string()));
      b.mode = mode_arg(init, BrushMode::style);
      return b;
    }
    case ElementKind::palette: {
      PaletteBody b;
      b.title = init.value("title", std::string());
      return b;
    }
  }
  throw Error(Errc::unsupported_kind);
}

brushes::Stroke stroke_arg(const json& args) {
  brushes::Stroke s;
  for (const auto& p : args.at("points")) {
    if (p.is_array()) s.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    else s.points.push_back({p.at("x").get<double>(), p.at("y").get<double>()});
  }
  s.width = args.value("width", s.width);
  return s;
}

json full_state_ops(const CanvasDocument& doc) {
  json ops = json::array();
  ops.push_back({{"op", "reset"}});
  for (const auto& [id, a] : doc.assets()) ops.push_back({{"op", "putAsset"}, {"asset", asset_meta_to_json(*a)}});
  for (const auto& [id, e] : doc.elements()) ops.push_back({{"op", "putElement"}, {"element", to_json(e)}});
  ops.push_back({{"op", "zOrder"}, {"order", doc.z_order()}});
  for (const auto& h : doc.history()) ops.push_back({{"op", "appendHistory"}, {"entry", to_json(h)}});
  for (const auto& [id, v] : doc.counters()) ops.push_back({{"op", "counter"}, {"id", id}, {"value", v}});
  ops.push_back({{"op", "nextId"}, {"value", doc.next_id()}});
  return ops;
}

}  // namespace

struct Session::Batch {
  std::vector<json> events;
  bool reset = false;
};

Session::Session(Engine engine, SessionOptions options) : engine_(std::move(engine)), options_(options) {
  revision_ = engine_.doc().revision();
  epoch_ms_ = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now().time_since_epoch())
                  .count() -
              engine_.now();
  if (options_.execution == SessionOptions::Execution::threaded)
    for (std::size_t i = 0; i < std::max<std::size_t>(1, options_.workers); ++i)
      workers_.emplace_back([this] { worker_loop(); });
}

Session::~Session() {
  stop();
  {
    std::lock_guard<std::mutex> g(work_mu_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  for (auto& w : workers_) w.join();
}

std::uint64_t Session::subscribe(Listener listener) {
  std::lock_guard g(mu_);
  listeners_.emplace(next_listener_, std::move(listener));
  return next_listener_++;
}

std::uint64_t Session::attach(Listener listener) {
  std::lock_guard g(mu_);
  listener({{"kind", "snapshot"}, {"doc_revision", revision_}, {"ops", full_state_ops(engine_.doc())}});
  listeners_.emplace(next_listener_, std::move(listener));
  return next_listener_++;
}

void Session::unsubscribe(std::uint64_t id) {
  std::lock_guard g(mu_);
  listeners_.erase(id);
}

std::int64_t Session::clock_now() const {
  if (options_.clock == SessionOptions::Clock::virtual_time) return engine_.now();
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
             .count() -
         epoch_ms_;
}

std::int64_t Session::now() const {
  std::lock_guard g(mu_);
  return clock_now();
}

void Session::emit(Batch& batch, json event) {
  event["doc_revision"] = revision_;
  batch.events.push_back(std::move(event));
}

std::vector<json> Session::publish(Batch& batch) {
  if (options_.record) log_.insert(log_.end(), batch.events.begin(), batch.events.end());
  for (const auto& e : batch.events)
    for (auto& [_, listener] : listeners_) listener(e);
  return std::move(batch.events);
}

void Session::flush_patch(Batch& batch, const json& cause) {
  CanvasDocument& doc = engine_.doc();
  ChangeSet changes = doc.drain_changes();
  const bool history_grew = changes.history_from < doc.history().size();
  if (!batch.reset && changes.empty() && !history_grew) return;

  ++revision_;
  doc.set_revision(revision_);
  json ops;
  if (batch.reset) {
    ops = full_state_ops(doc);
    batch.reset = false;
  } else {
    ops = json::array();
    for (const auto& id : changes.new_assets)
      ops.push_back({{"op", "putAsset"}, {"asset", asset_meta_to_json(doc.asset(id))}});
    for (const auto& id : changes.removed) ops.push_back({{"op", "removeElement"}, {"id", id}});
    for (const auto& id : changes.upserted)
      if (doc.contains(id)) ops.push_back({{"op", "putElement"}, {"element", to_json(doc.element(id))}});
    if (changes.z_order) ops.push_back({{"op", "zOrder"}, {"order", doc.z_order()}});
    for (std::size_t i = changes.history_from; i < doc.history().size(); ++i)
      ops.push_back({{"op", "appendHistory"}, {"entry", to_json(doc.history()[i])}});
    for (const auto& id : changes.counters) ops.push_back({{"op", "counter"}, {"id", id}, {"value", doc.counter(id)}});
    if (changes.next_id) ops.push_back({{"op", "nextId"}, {"value", doc.next_id()}});
  }
  json event = {{"kind", "docPatch"}, {"ops", ops}};
  for (const auto& [k, v] : cause.items()) event[k] = v;
  emit(batch, std::move(event));
}

void Session::finish(const Job& job, JobOutcome outcome, Batch& batch) {
  engine_.set_now(std::max(engine_.now(), clock_now()));
  const Completion c = engine_.complete(job, std::move(outcome));
  flush_patch(batch, {{"job", job.id}});
  json base = {{"job", job.id}, {"target", job.target}, {"time", engine_.now()}};
  if (c.failure) {
    base["kind"] = "error";
    base["code"] = std::string(to_string(c.failure->code));
    base["message"] = c.failure->message;
  } else if (c.disposition == Disposition::applied) {
    base["kind"] = "generationCompleted";
  } else {
    base["kind"] = "generationDiscarded";
    base["reason"] = "stale";
  }
  emit(batch, std::move(base));
}

void Session::run_fired(std::vector<Dispatch> fired, Batch& batch) {
  for (const auto& d : fired)
    emit(batch, {{"kind", "generationStarted"},
                 {"job", d.job.id},
                 {"target", d.job.target},
                 {"class", std::string(to_string(d.job.cls))},
                 {"time", d.job.fired_at}});
  switch (options_.execution) {
    case SessionOptions::Execution::inline_work:
      for (auto& d : fired) finish(d.job, d.work(engine_.adapters()), batch);
      break;
    case SessionOptions::Execution::manual:
      for (auto& d : fired) parked_.push_back(std::move(d));
      break;
    case SessionOptions::Execution::threaded: {
      {
        std::lock_guard<std::mutex> g(work_mu_);
        for (auto& d : fired) work_queue_.push_back(std::move(d));
      }
      work_cv_.notify_all();
      break;
    }
  }
}

void Session::pump(Batch& batch) {
  for (;;) {
    std::deque<std::pair<Job, JobOutcome>> done;
    done.swap(done_);
    for (auto& [job, outcome] : done) finish(job, std::move(outcome), batch);
    engine_.set_now(std::max(engine_.now(), clock_now()));
    auto fired = engine_.take_ready();
    if (fired.empty() && done.empty()) return;
    run_fired(std::move(fired), batch);
  }
}

std::vector<json> Session::handle_line(std::string_view line) {
  json command;
  try {
    command = json::parse(line);
  } catch (const json::exception& e) {
    std::lock_guard g(mu_);
    Batch batch;
    emit(batch, {{"kind", "error"}, {"request_id", nullptr}, {"code", "schema-error"}, {"message", e.what()}});
    return publish(batch);
  }
  return handle(command);
}

std::vector<json> Session::handle(const json& command) {
  std::lock_guard g(mu_);
  Batch batch;
  json request_id = nullptr;
  if (command.is_object() && command.contains("request_id")) request_id = command.at("request_id");
  auto fail = [&](std::string_view code, const std::string& message) {
    emit(batch, {{"kind", "error"}, {"request_id", request_id}, {"code", code}, {"message", message}});
  };
  try {
    if (!command.is_object() || !command.contains("cmd") || !command.at("cmd").is_string())
      throw Error(Errc::schema_error, "command needs a string \"cmd\"");
    const std::string cmd = command.at("cmd").get<std::string>();
    if (std::find(std::begin(kCommands), std::end(kCommands), cmd) == std::end(kCommands))
      throw Error(Errc::unknown_command, "unknown command " + cmd);
    const json args = command.value("args", json::object());
    if (!args.is_object()) throw Error(Errc::schema_error, "\"args\" must be an object");

    engine_.set_now(std::max(engine_.now(), clock_now()));
    const bool clock_step = cmd == "waitIdle" || cmd == "advanceClock";
    std::optional<CanvasDocument> saved_doc;
    std::optional<GenerationScheduler> saved_sched;
    if (!clock_step) {
      saved_doc = engine_.doc();
      saved_sched = engine_.scheduler();
    }
    json result;
    try {
      result = dispatch_command(cmd, args, batch);
    } catch (...) {
      if (saved_doc) {
        engine_.doc() = std::move(*saved_doc);
        engine_.scheduler() = std::move(*saved_sched);
        batch.reset = false;
      }
      throw;
    }
    flush_patch(batch, {{"request_id", request_id}});
    emit(batch, {{"kind", "ack"}, {"request_id", request_id}, {"cmd", cmd}, {"result", result}});
    pump(batch);
  } catch (const Error& e) {
    fail(to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    fail("schema-error", e.what());
  }
  auto out = publish(batch);
  driver_cv_.notify_all();
  return out;
}

json Session::dispatch_command(const std::string& cmd, const json& args, Batch& batch) {
  Engine& en = engine_;
  auto id = [&](const char* key = "id") { return args.at(key).get<std::string>(); };

  if (cmd == "createElement") {
    const ElementKind kind = element_kind_from(args.at("kind").get<std::string>());
    const Rect rect = rect_from_json(args.at("rect"));
    if (!rect.valid()) throw Error(Errc::invalid_rect, "width and height must be positive");
    ElementBody body = body_from_init(en, kind, rect, args.value("init", json::object()));
    return {{"id", en.create_element(rect, std::move(body))}};
  }
  if (cmd == "updateGeometry") return {{"changed", en.update_geometry(id(), rect_from_json(args.at("rect")))}};
  if (cmd == "setPrompt") {
    en.set_prompt(id(), args.at("prompt").get<std::string>());
    return json::object();
  }
  if (cmd == "dropOn") return effect_json(en.drop_on(id("source"), id("target")));
  if (cmd == "revealFragments") return row_json(fragments::reveal_fragments(en, id()));
  if (cmd == "varyFragment") {
    const Fragment f = fragment_from_json(args.at("fragment"));
    const std::size_t k = args.value("k", std::size_t{3});
    if (args.contains("id") && en.doc().element(id()).kind() == ElementKind::image)
      return fragments_json(fragments::vary_in_row(en, id(), f, k));
    return fragments_json(fragments::vary_fragment(*en.adapters().language, f, args.value("context", std::string()), k));
  }
  if (cmd == "extendFragmentTypes") return fragments_json(fragments::extend_row(en, id()));
  if (cmd == "applyFragmentEdit")
    return {{"job", fragments::apply_fragment_edit(en, id(), fragment_edit_from_json(args.at("edit")))}};
  if (cmd == "generateContainer") {
    std::optional<std::uint64_t> seed;
    if (args.contains("seed")) seed = args.at("seed").get<std::uint64_t>();
    return {{"job", containers::generate_variations(en, id(), seed)}};
  }
  if (cmd == "groundContainer") {
    Grounding g;
    if (args.contains("element")) {
      const Element& e = en.doc().element(id("element"));
      if (const auto* img = std::get_if<ImageBody>(&e.body)) {
        if (!img->asset) throw Error(Errc::unresolvable_source, "image has no asset yet");
        g = GroundAsset{*img->asset};
      } else if (const auto* f = std::get_if<FragmentBody>(&e.body)) {
        g = GroundFragment{f->fragment};
      } else {
        throw Error(Errc::unresolvable_source, "containers ground on images, fragments or text");
      }
    } else {
      g = grounding_from_json(args.at("grounding"));
    }
    containers::ground_container(en, id(), std::move(g));
    return json::object();
  }
  if (cmd == "adoptCell")
    return {{"id", containers::adopt_cell(en, id(), args.at("index").get<std::size_t>(), rect_from_json(args.at("rect")))}};
  if (cmd == "fillBrushFromText") {
    const BrushMode mode = mode_arg(args, en.doc().body<BrushBody>(id()).mode);
    brushes::fill_brush_from_text(en, id(), args.at("prompt").get<std::string>(), mode);
    return json::object();
  }
  if (cmd == "fillBrushFromExample") {
    const BrushMode mode = mode_arg(args, en.doc().body<BrushBody>(id()).mode);
    AssetId asset;
    if (args.contains("asset")) {
      asset = args.at("asset").get<std::string>();
    } else {
      const auto& img = en.doc().body<ImageBody>(id("image"));
      if (!img.asset) throw Error(Errc::unknown_asset, "image has no asset yet");
      asset = *img.asset;
    }
    std::optional<Rect> region;
    if (args.contains("region")) region = rect_from_json(args.at("region"));
    return {{"prompt", brushes::fill_brush_from_example(en, id(), asset, region, mode)}};
  }
  if (cmd == "applyBrushStroke")
    return {{"job", brushes::apply_brush(en, id("brush"), id("target"), stroke_arg(args))}};
  if (cmd == "combineBrushes") {
    std::optional<Rect> rect;
    if (args.contains("rect")) rect = rect_from_json(args.at("rect"));
    return {{"id", brushes::combine_brushes(en, id("a"), id("b"), rect)}};
  }
  if (cmd == "addToPalette") return {{"index", palettes::add_to_palette(en, id("palette"), id("element"))}};
  if (cmd == "takeFromPalette")
    return {{"id", palettes::take_from_palette(en, id("palette"), args.at("index").get<std::size_t>(),
                                               rect_from_json(args.at("rect")))}};
  if (cmd == "generatePalette") {
    const auto kind = palettes::generated_kind_from(args.value("kind", std::string("fragments")));
    return {{"id", palettes::generate_palette(en, args.at("prompt").get<std::string>(), kind,
                                              args.value("k", std::size_t{4}), rect_from_json(args.at("rect")))}};
  }
  if (cmd == "restoreHistory") {
    en.restore(args.at("seq").get<std::uint64_t>());
    return json::object();
  }
  if (cmd == "snapshotElement") return {{"seq", en.snapshot(id()).seq}};
  if (cmd == "deleteElement") {
    en.delete_element(id());
    return json::object();
  }
  if (cmd == "setLensFaded") {
    en.doc().edit_body<LensBody>(id()).faded = args.at("faded").get<bool>();
    return json::object();
  }
  if (cmd == "saveDocument") {
    const std::string path = args.at("path").get<std::string>();
    save_document(en.doc(), path);
    return {{"path", path}};
  }
  if (cmd == "loadDocument") {
    const std::string path = args.at("path").get<std::string>();
    CanvasDocument loaded = load_document(path);
    en.replace_document(std::move(loaded));
    batch.reset = true;
    return {{"path", path}};
  }
  if (cmd == "waitIdle" || cmd == "advanceClock") {
    if (options_.clock != SessionOptions::Clock::virtual_time)
      throw Error(Errc::unsupported_kind, cmd + " needs the virtual clock");
    if (cmd == "waitIdle")
      wait_idle_in(batch);
    else
      advance_in(args.at("ms").get<std::int64_t>(), batch);
    return {{"time", engine_.now()}};
  }
  throw Error(Errc::unknown_command, "unknown command " + cmd);
}

std::vector<json> Session::advance(std::int64_t ms) {
  std::lock_guard g(mu_);
  Batch batch;
  advance_in(ms, batch);
  return publish(batch);
}

void Session::advance_in(std::int64_t ms, Batch& batch) {
  const std::int64_t target = engine_.now() + std::max<std::int64_t>(ms, 0);
  for (;;) {
    const auto d = engine_.scheduler().next_deadline();
    if (!d || *d > target) break;
    const std::int64_t before = engine_.now();
    engine_.set_now(std::max(before, *d));
    const std::size_t pending = engine_.scheduler().pending_count();
    pump(batch);
    if (engine_.now() == before && engine_.scheduler().pending_count() == pending) break;
  }
  engine_.set_now(target);
  pump(batch);
}

std::vector<json> Session::wait_idle() {
  std::lock_guard g(mu_);
  Batch batch;
  wait_idle_in(batch);
  return publish(batch);
}

void Session::wait_idle_in(Batch& batch) {
  pump(batch);
  while (!engine_.scheduler().idle()) {
    const auto d = engine_.scheduler().next_deadline();
    if (!d) break;
    const std::int64_t before = engine_.now();
    const std::size_t pending = engine_.scheduler().pending_count();
    engine_.set_now(std::max(before, *d));
    pump(batch);
    if (engine_.now() == before && engine_.scheduler().pending_count() == pending) break;
  }
}

std::vector<Dispatch> Session::take_dispatched() {
  std::lock_guard g(mu_);
  std::vector<Dispatch> out(std::make_move_iterator(parked_.begin()), std::make_move_iterator(parked_.end()));
  parked_.clear();
  return out;
}

std::vector<json> Session::deliver(const Job& job, JobOutcome outcome) {
  std::lock_guard g(mu_);
  Batch batch;
  finish(job, std::move(outcome), batch);
  pump(batch);
  return publish(batch);
}

void Session::worker_loop() {
  const Adapters adapters = engine_.adapters();
  for (;;) {
    Dispatch d;
    {
      std::unique_lock<std::mutex> lk(work_mu_);
      work_cv_.wait(lk, [&] { return stopping_ || !work_queue_.empty(); });
      if (stopping_ && work_queue_.empty()) return;
      d = std::move(work_queue_.front());
      work_queue_.pop_front();
    }
    JobOutcome outcome = d.work(adapters);
    {
      std::lock_guard g(mu_);
      done_.emplace_back(d.job, std::move(outcome));
    }
    driver_cv_.notify_all();
  }
}

void Session::start() {
  std::lock_guard g(mu_);
  if (driver_.joinable()) return;
  driver_stop_ = false;
  driver_ = std::thread([this] { driver_loop(); });
}

void Session::stop() {
  {
    std::lock_guard g(mu_);
    if (!driver_.joinable()) return;
    driver_stop_ = true;
  }
  driver_cv_.notify_all();
  driver_.join();
}

void Session::driver_loop() {
  std::unique_lock lk(mu_);
  while (!driver_stop_) {
    Batch batch;
    pump(batch);
    publish(batch);
    if (!done_.empty()) continue;
    auto wait = std::chrono::milliseconds(500);
    if (const auto d = engine_.scheduler().next_deadline())
      wait = std::chrono::milliseconds(std::clamp<std::int64_t>(*d - clock_now(), 1, 500));
    driver_cv_.wait_for(lk, wait);
  }
}

std::vector<json> Session::events() const {
  std::lock_guard g(mu_);
  return log_;
}

CanvasDocument Session::document() const {
  std::lock_guard g(mu_);
  return engine_.doc();
}

std::uint64_t Session::revision() const {
  std::lock_guard g(mu_);
  return revision_;
}

bool Session::idle() const {
  std::lock_guard g(mu_);
  return engine_.scheduler().idle() && parked_.empty() && done_.empty();
}

std::shared_ptr<const ImageAsset> Session::find_asset(const AssetId& id) const {
  std::lock_guard g(mu_);
  if (!engine_.doc().has_asset(id)) return nullptr;
  return engine_.doc().asset_ptr(id);
}

// --- replay -------------------------------------------------------------------

void apply_patch(CanvasDocument& doc, const json& event, const RasterSource& rasters) {
  const std::string kind = event.value("kind", std::string());
  if (kind != "docPatch" && kind != "snapshot") return;
  for (const auto& op : event.at("ops")) {
    const std::string name = op.at("op").get<std::string>();
    if (name == "reset") {
      doc = CanvasDocument{};
    } else if (name == "putAsset") {
      const json& meta = op.at("asset");
      const AssetId id = meta.at("id").get<std::string>();
      if (doc.has_asset(id)) continue;
      auto raster = rasters ? rasters(id) : std::nullopt;
      if (!raster) throw Error(Errc::corrupt_payload, "no raster for asset " + id);
      std::optional<SceneSpec> scene;
      if (!meta.at("scene").is_null()) scene = scene_from_json(meta.at("scene"));
      std::optional<Provenance> prov;
      if (!meta.at("provenance").is_null()) prov = provenance_from_json(meta.at("provenance"));
      auto asset = make_asset(meta.at("width").get<std::int32_t>(), meta.at("height").get<std::int32_t>(),
                              std::move(*raster), std::move(scene), std::move(prov));
      if (asset.id != id) throw Error(Errc::corrupt_payload, "raster does not match asset " + id);
      doc.put_asset_raw(std::make_shared<const ImageAsset>(std::move(asset)));
    } else if (name == "removeElement") {
      const auto id = op.at("id").get<std::string>();
      if (doc.contains(id)) doc.remove_element(id);
    } else if (name == "putElement") {
      doc.put_element(element_from_json(op.at("element")));
    } else if (name == "zOrder") {
      doc.set_z_order(op.at("order").get<std::vector<std::string>>());
    } else if (name == "appendHistory") {
      doc.append_history_raw(history_from_json(op.at("entry")));
    } else if (name == "counter") {
      doc.set_counter(op.at("id").get<std::string>(), op.at("value").get<std::uint64_t>());
    } else if (name == "nextId") {
      doc.set_next_id(op.at("value").get<std::uint64_t>());
    } else {
      throw Error(Errc::corrupt_payload, "unknown patch op " + name);
    }
  }
  doc.set_revision(event.at("doc_revision").get<std::uint64_t>());
  doc.drain_changes();
}

CanvasDocument replay(const std::vector<json>& events, const RasterSource& rasters) {
  CanvasDocument doc;
  for (const auto& e : events) apply_patch(doc, e, rasters);
  return doc;
}

// --- scripts ------------------------------------------------------------------

json Transcript::to_json() const { return {{"events", events}, {"document", document_to_json(document)}}; }

std::string Transcript::dump() const { return to_json().dump() + "\n"; }

std::vector<json> parse_script(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  try {
    if (text[first] == '[') {
      json arr = json::parse(text);
      return arr.get<std::vector<json>>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::script_parse_error, e.what());
  }
  std::vector<json> steps;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    try {
      steps.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(Errc::script_parse_error, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const auto& s : steps)
    if (!s.is_object() || !s.contains("cmd")) throw Error(Errc::script_parse_error, "step without \"cmd\": " + s.dump());
  return steps;
}

namespace {

json substitute(const json& value, const std::map<std::string, json>& bindings) {
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s.size() > 1 && s[0] == '$') {
      auto it = bindings.find(s.substr(1));
      if (it == bindings.end()) throw Error(Errc::script_parse_error, "unbound name " + s);
      return it->second;
    }
    return value;
  }
  if (value.is_array()) {
    json out = json::array();
    for (const auto& v : value) out.push_back(substitute(v, bindings));
    return out;
  }
  if (value.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : value.items()) out[k] = substitute(v, bindings);
    return out;
  }
  return value;
}

}  // namespace

Transcript run_script(const std::vector<json>& steps, Engine engine) {
  Session session(std::move(engine), SessionOptions{SessionOptions::Clock::virtual_time,
                                                    SessionOptions::Execution::inline_work, 1, true});
  std::map<std::string, json> bindings;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    json step = steps[i];
    const std::string cmd = step.at("cmd").get<std::string>();
    if (step.contains("args")) step["args"] = substitute(step.at("args"), bindings);
    if (!step.contains("request_id")) step["request_id"] = "s" + std::to_string(i + 1);
    const json rid = step.at("request_id");
    for (const auto& e : session.handle(step)) {
      if (e.at("kind") == "error" && e.contains("request_id") && e.at("request_id") == rid)
        throw Error(errc_from(e.at("code").get<std::string>()),
                    "step " + std::to_string(i + 1) + " (" + cmd + ") failed: " + e.at("code").get<std::string>() +
                        ": " + e.at("message").get<std::string>());
      if (e.at("kind") == "ack" && e.at("request_id") == rid && step.contains("as")) {
        const json& result = e.at("result");
        bindings[step.at("as").get<std::string>()] = result.contains("id") ? result.at("id") : result;
      }
    }
  }
  return Transcript{session.events(), session.document()};
}

Transcript run_script_file(const std::filesystem::path& path, Engine engine) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read script " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return run_script(parse_script(buf.str()), std::move(engine));
}

}  // namespace icanvas
