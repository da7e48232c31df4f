#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "icanvas/config.hpp"
#include "icanvas/session.hpp"
#include "support.hpp"

using namespace icanvas;
using namespace icanvas::test;
namespace fs = std::filesystem;

namespace {

json command(const std::string& cmd, json args, const std::string& rid = "r") {
  return {{"cmd", cmd}, {"args", std::move(args)}, {"request_id", rid}};
}

json image_init(const std::string& prompt, std::uint64_t seed = 7) { return {{"prompt", prompt}, {"seed", seed}}; }

json create(const std::string& kind, Rect rect, json init, const std::string& rid = "r") {
  return command("createElement", {{"kind", kind}, {"rect", to_json(rect)}, {"init", std::move(init)}}, rid);
}

const json* find_kind(const std::vector<json>& events, const std::string& kind) {
  for (const auto& e : events)
    if (e.at("kind") == kind) return &e;
  return nullptr;
}

std::size_t count_kind(const std::vector<json>& events, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& e : events) n += e.at("kind") == kind;
  return n;
}

std::string ack_id(const std::vector<json>& events) { return find_kind(events, "ack")->at("result").at("id"); }

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("icanvas_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path script(const std::string& name) { return fs::path(ICANVAS_SOURCE_DIR) / "tests" / "scripts" / name; }

}  // namespace

TEST_SUITE("session") {

TEST_CASE("a command emits a patch, an ack and its generation in revision order") {
  Session s(make_engine());
  const auto events = s.handle(create("image", {0, 0, 100, 100}, image_init("castle, illustration"), "c1"));
  std::vector<std::string> kinds;
  for (const auto& e : events) kinds.push_back(e.at("kind"));
  CHECK(kinds == std::vector<std::string>{"docPatch", "ack", "generationStarted", "docPatch", "generationCompleted"});
  CHECK(events[0].at("request_id") == "c1");
  CHECK(events[1].at("request_id") == "c1");
  CHECK(events[0].at("doc_revision") == 1);
  CHECK(events[3].at("doc_revision") == 2);
  std::uint64_t last = 0;
  for (const auto& e : events) {
    CHECK(e.at("doc_revision").get<std::uint64_t>() >= last);
    last = e.at("doc_revision");
  }
  CHECK(s.revision() == 2);
}

TEST_CASE("a malformed command yields exactly one error and no revision") {
  Session s(make_engine());
  auto events = s.handle(command("createElement", {{"kind", "image"}}, "bad"));
  REQUIRE(events.size() == 1);
  CHECK(events[0].at("kind") == "error");
  CHECK(events[0].at("request_id") == "bad");
  CHECK(events[0].at("code") == "schema-error");
  CHECK(s.revision() == 0);

  events = s.handle(command("teleport", json::object(), "x"));
  REQUIRE(events.size() == 1);
  CHECK(events[0].at("code") == "unknown-command");

  events = s.handle_line("{not json");
  REQUIRE(events.size() == 1);
  CHECK(events[0].at("code") == "schema-error");

  events = s.handle(create("image", Rect{0, 0, 0, 10}, image_init("castle")));
  CHECK(events.at(0).at("code") == "invalid-rect");
  CHECK(s.revision() == 0);
  CHECK(s.document().elements().empty());
}

TEST_CASE("a failing command rolls back partial work") {
  Session s(make_engine());
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  const auto before = s.document();
  // Grounding succeeds, but generation of an unknown container id fails first.
  const auto events = s.handle(command("dropOn", {{"source", "e1"}, {"target", "e1"}}));
  CHECK(events.at(0).at("code") == "unsupported-pair");
  CHECK(s.document() == before);
  CHECK(s.idle());
}

TEST_CASE("every subscriber sees the same events") {
  Session s(make_engine());
  std::vector<json> a, b;
  s.subscribe([&](const json& e) { a.push_back(e); });
  const auto id_b = s.subscribe([&](const json& e) { b.push_back(e); });
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  CHECK(a == b);
  CHECK(a.size() == 5);
  s.unsubscribe(id_b);
  s.handle(create("lens", {0, 0, 50, 50}, {{"prompt", "forest backdrop"}}));
  CHECK(a.size() > b.size());
}

TEST_CASE("attach starts with a snapshot that replays to the document") {
  Session s(make_engine());
  s.handle(create("image", {0, 0, 100, 100}, image_init("heron")));
  std::vector<json> seen;
  s.attach([&](const json& e) { seen.push_back(e); });
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].at("kind") == "snapshot");
  CHECK(seen[0].at("doc_revision") == s.revision());
  s.handle(create("lens", {0, 0, 100, 100}, {{"prompt", "forest backdrop"}}));
  s.wait_idle();
  const auto doc = s.document();
  CHECK(replay(seen, rasters_from(doc)) == doc);
}

TEST_CASE("lens edits start a generation only after the idle window") {
  Session s(make_engine());
  s.handle(create("image", {0, 0, 100, 100}, image_init("heron")));
  s.handle(create("lens", {0, 0, 100, 100}, {{"prompt", "forest backdrop"}}));
  s.wait_idle();
  auto events = s.handle(command("updateGeometry", {{"id", "e1"}, {"rect", to_json(Rect{5, 0, 100, 100})}}));
  CHECK(find_kind(events, "docPatch"));
  CHECK_FALSE(find_kind(events, "generationStarted"));
  CHECK(s.advance(1999).empty());
  events = s.advance(1);
  REQUIRE(find_kind(events, "generationStarted"));
  CHECK(find_kind(events, "generationStarted")->at("target") == "e2");
  CHECK(find_kind(events, "generationStarted")->at("class") == "lens-idle");
  CHECK(find_kind(events, "generationCompleted"));
}

TEST_CASE("fading a lens never regenerates it") {
  Session s(make_engine());
  s.handle(create("image", {0, 0, 100, 100}, image_init("heron")));
  s.handle(create("lens", {0, 0, 100, 100}, {{"prompt", "forest backdrop"}}));
  s.wait_idle();
  s.handle(command("setLensFaded", {{"id", "e2"}, {"faded", true}}));
  CHECK(s.idle());
  CHECK(count_kind(s.advance(10000), "generationStarted") == 0);
  CHECK(s.document().body<LensBody>("e2").faded);
}

TEST_CASE("manual execution: saves exclude in-flight results") {
  Session s(make_engine(), {SessionOptions::Clock::virtual_time, SessionOptions::Execution::manual});
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  auto parked = s.take_dispatched();
  REQUIRE(parked.size() == 1);
  CHECK_FALSE(s.idle());

  const auto dir = temp_dir("inflight");
  s.handle(command("saveDocument", {{"path", (dir / "doc.json").string()}}));
  CHECK_FALSE(load_document(dir / "doc.json").body<ImageBody>("e1").asset);

  const auto events = s.deliver(parked[0].job, parked[0].work(s.engine_unsafe().adapters()));
  CHECK(find_kind(events, "generationCompleted"));
  CHECK(s.document().body<ImageBody>("e1").asset);
  CHECK(s.idle());
}

TEST_CASE("manual execution: a newer job wins regardless of completion order") {
  Session s(make_engine(), {SessionOptions::Clock::virtual_time, SessionOptions::Execution::manual});
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  auto first = s.take_dispatched();
  s.handle(command("setPrompt", {{"id", "e1"}, {"prompt", "palace"}}));
  auto second = s.take_dispatched();
  REQUIRE(first.size() == 1);
  REQUIRE(second.size() == 1);
  const auto& adapters = s.engine_unsafe().adapters();
  CHECK(find_kind(s.deliver(second[0].job, second[0].work(adapters)), "generationCompleted"));
  CHECK(find_kind(s.deliver(first[0].job, first[0].work(adapters)), "generationDiscarded"));
  const auto doc = s.document();
  CHECK(doc.asset(*doc.body<ImageBody>("e1").asset).provenance->prompt == "palace");
}

TEST_CASE("failed jobs surface as errors and keep the previous asset") {
  Session s(make_engine(), {SessionOptions::Clock::virtual_time, SessionOptions::Execution::manual});
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  auto d = s.take_dispatched();
  s.deliver(d[0].job, d[0].work(s.engine_unsafe().adapters()));
  const auto asset = s.document().body<ImageBody>("e1").asset;
  s.handle(command("setPrompt", {{"id", "e1"}, {"prompt", "palace"}}));
  d = s.take_dispatched();
  const auto events = s.deliver(d[0].job, JobFailure{Errc::network, "connection refused"});
  const json* err = find_kind(events, "error");
  REQUIRE(err);
  CHECK(err->at("code") == "network");
  CHECK(err->at("target") == "e1");
  CHECK(s.document().body<ImageBody>("e1").asset == asset);
}

TEST_CASE("threaded execution completes work on the pool") {
  EngineConfig cfg;
  cfg.idle_window_ms = 20;
  Session s(make_engine(cfg), {SessionOptions::Clock::real_time, SessionOptions::Execution::threaded, 2, true});
  s.start();
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  s.handle(create("image", {200, 0, 100, 100}, image_init("heron")));
  s.handle(create("lens", {0, 0, 300, 100}, {{"prompt", "forest backdrop"}}));
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  auto done = [&] {
    const auto doc = s.document();
    return s.idle() && doc.body<LensBody>("e3").last_result && doc.body<ImageBody>("e1").asset &&
           doc.body<ImageBody>("e2").asset;
  };
  while (!done() && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  REQUIRE(done());
  s.stop();
  const auto events = s.events();
  std::uint64_t last = 0;
  for (const auto& e : events) {
    CHECK(e.at("doc_revision").get<std::uint64_t>() >= last);
    last = e.at("doc_revision");
  }
  CHECK(replay(events, rasters_from(s.document())) == s.document());
}

TEST_CASE("virtual-clock commands are refused in real time") {
  Session s(make_engine(), {SessionOptions::Clock::real_time, SessionOptions::Execution::inline_work});
  CHECK(s.handle(command("waitIdle", json::object())).at(0).at("kind") == "error");
}

TEST_CASE("snapshot and restore through commands") {
  Session s(make_engine());
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle")));
  const auto original = s.document().body<ImageBody>("e1");
  const auto seq = find_kind(s.handle(command("snapshotElement", {{"id", "e1"}})), "ack")->at("result").at("seq");
  s.handle(command("setPrompt", {{"id", "e1"}, {"prompt", "palace"}}));
  CHECK(s.document().body<ImageBody>("e1").asset != original.asset);
  const auto events = s.handle(command("restoreHistory", {{"seq", seq}}));
  CHECK(count_kind(events, "generationStarted") == 0);
  CHECK(s.document().body<ImageBody>("e1") == original);

  s.handle(command("deleteElement", {{"id", "e1"}}));
  CHECK(s.handle(command("restoreHistory", {{"seq", seq}})).at(0).at("code") == "dangling-asset");
}

TEST_CASE("save and load through commands") {
  Session s(make_engine());
  s.handle(create("image", {0, 0, 100, 100}, image_init("castle, watercolor")));
  s.handle(create("fragment", {0, 120, 60, 20}, {{"ftype", "color"}, {"value", "pastel"}}));
  const auto dir = temp_dir("saveload");
  const auto path = (dir / "doc.json").string();
  s.handle(command("saveDocument", {{"path", path}}));
  const auto doc = s.document();

  Session t(make_engine());
  std::vector<json> seen;
  t.subscribe([&](const json& e) { seen.push_back(e); });
  const auto events = t.handle(command("loadDocument", {{"path", path}}));
  CHECK(find_kind(events, "ack"));
  auto loaded = t.document();
  loaded.set_revision(doc.revision());
  CHECK(serialize(loaded) == serialize(doc));
  // The load patch is a full reset.
  CHECK(replay(seen, rasters_from(t.document())) == t.document());

  json j = json::parse(std::ifstream(path));
  j["version"] = 0;
  std::ofstream(path) << j.dump();
  CHECK(t.handle(command("loadDocument", {{"path", path}})).at(0).at("code") == "version-mismatch");
  CHECK(t.handle(command("loadDocument", {{"path", (dir / "missing.json").string()}})).at(0).at("code") ==
        "io-error");
}

TEST_CASE("scripts bind results and stop on the first error") {
  const auto steps = parse_script(R"(
# comment
{"cmd":"createElement","args":{"kind":"image","rect":{"x":0,"y":0,"w":100,"h":100},"init":{"prompt":"castle","seed":3}},"as":"img"}
{"cmd":"createElement","args":{"kind":"brush","rect":{"x":0,"y":200,"w":40,"h":40},"init":{"prompt":"watercolor"}},"as":"b"}
{"cmd":"applyBrushStroke","args":{"brush":"$b","target":"$img","points":[[20,30],[44,30]]}}
{"cmd":"waitIdle"}
)");
  REQUIRE(steps.size() == 4);
  const auto t = run_script(steps, make_engine());
  CHECK(t.document.elements().size() == 2);

  CHECK_ERRC(run_script(parse_script(R"({"cmd":"deleteElement","args":{"id":"$nope"}})"), make_engine()),
             Errc::script_parse_error);
  CHECK_ERRC(run_script(parse_script(R"({"cmd":"deleteElement","args":{"id":"e9"}})"), make_engine()),
             Errc::unknown_id);
  CHECK_ERRC(parse_script("{oops"), Errc::script_parse_error);
  CHECK_ERRC(parse_script(R"({"args":{}})"), Errc::script_parse_error);
}

TEST_CASE("an empty script yields an empty transcript") {
  const auto t = run_script(parse_script(""), make_engine());
  CHECK(t.events.empty());
  CHECK(t.document.elements().empty());
}

TEST_CASE("walkthroughs are deterministic and replay exactly") {
  for (const char* name : {"containers_lenses.jsonl", "fragments_brush.jsonl"}) {
    CAPTURE(name);
    const auto a = run_script_file(script(name), make_engine({}, 512));
    const auto b = run_script_file(script(name), make_engine({}, 512));
    CHECK(a.dump() == b.dump());
    CHECK(replay(a.events, rasters_from(a.document)) == a.document);
  }
}

TEST_CASE("the bird walkthrough leaves containers and generated lenses") {
  const auto t = run_script_file(script("containers_lenses.jsonl"), make_engine({}, 512));
  std::size_t containers = 0, lenses = 0;
  for (const auto& [id, e] : t.document.elements()) {
    if (e.kind() == ElementKind::container) ++containers;
    if (const auto* l = std::get_if<LensBody>(&e.body)) lenses += l->last_result.has_value();
  }
  CHECK(containers >= 2);
  CHECK(lenses >= 2);
}

TEST_CASE("the castle walkthrough ends watercolor with an inpainted region") {
  const auto t = run_script_file(script("fragments_brush.jsonl"), make_engine({}, 512));
  const auto& img = t.document.body<ImageBody>("e1");
  const auto& asset = t.document.asset(*img.asset);
  REQUIRE(asset.scene);
  CHECK(asset.scene->objects.at(0).label == "castle");
  CHECK(asset.scene->objects.at(0).style_tags.contains("watercolor"));
  CHECK(asset.provenance->controls.op_kind == OpKind::inpaint);
}

}

TEST_SUITE("config") {

TEST_CASE("defaults and file values") {
  const Config d = config_from_json(json::object());
  CHECK(d.adapter == "mock");
  CHECK(d.engine.idle_window_ms == 2000);
  CHECK(d.engine.edit_window_ms == 300);
  CHECK(d.engine.max_inflight == 4);

  const Config c = config_from_json(json::parse(R"({"adapter":"remote","idle_window_ms":50,"port":9000,
      "remote":{"language_url":"http://x/v1/chat/completions","image_url":"http://y"}})"));
  CHECK(c.adapter == "remote");
  CHECK(c.engine.idle_window_ms == 50);
  CHECK(c.port == 9000);
  CHECK(c.remote.image_url == "http://y");
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_ERRC(config_from_json(json::parse(R"({"idle_windw_ms":5})")), Errc::schema_error);
  CHECK_ERRC(config_from_json(json::parse(R"({"remote":{"urll":"x"}})")), Errc::schema_error);
  CHECK_ERRC(config_from_json(json::parse(R"({"adapter":"magic"})")), Errc::schema_error);
  CHECK_ERRC(config_from_json(json::parse(R"({"max_inflight":"four"})")), Errc::schema_error);
}

TEST_CASE("environment overrides the file") {
  const auto dir = temp_dir("config");
  std::ofstream(dir / "c.json") << R"({"idle_window_ms":100,"host":"0.0.0.0"})";
  const EnvLookup env = [](const std::string& k) -> std::optional<std::string> {
    if (k == "ICANVAS_IDLE_WINDOW_MS") return "250";
    if (k == "ICANVAS_PORT") return "8123";
    return std::nullopt;
  };
  const Config c = load_config(dir / "c.json", env);
  CHECK(c.engine.idle_window_ms == 250);
  CHECK(c.port == 8123);
  CHECK(c.host == "0.0.0.0");

  const EnvLookup bad = [](const std::string& k) -> std::optional<std::string> {
    if (k == "ICANVAS_MAX_INFLIGHT") return "lots";
    return std::nullopt;
  };
  CHECK_ERRC(load_config(std::nullopt, bad), Errc::schema_error);
  CHECK_ERRC(load_config(dir / "missing.json", env), Errc::io_error);
}

TEST_CASE("adapter selection") {
  Config c;
  CHECK(make_adapters(c).id.rfind("mock", 0) == 0);
  c.adapter = "remote";
  c.remote.language_url = "http://127.0.0.1:1/v1/chat/completions";
  c.remote.image_url = "http://127.0.0.1:1";
  CHECK(make_adapters(c).id.rfind("remote:", 0) == 0);
}

}
