#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "icanvas/codec.hpp"
#include "icanvas/engine.hpp"

namespace icanvas {

// Command names accepted by Session::handle.
inline constexpr std::string_view kCommands[] = {
    "createElement",     "updateGeometry",      "setPrompt",          "dropOn",
    "revealFragments",   "varyFragment",        "extendFragmentTypes", "applyFragmentEdit",
    "generateContainer", "groundContainer",     "adoptCell",          "fillBrushFromText",
    "fillBrushFromExample", "applyBrushStroke", "combineBrushes",     "addToPalette",
    "takeFromPalette",   "generatePalette",     "restoreHistory",     "snapshotElement",
    "deleteElement",     "setLensFaded",        "saveDocument",       "loadDocument",
    "waitIdle",          "advanceClock"};

struct SessionOptions {
  enum class Clock { virtual_time, real_time };
  // inline: fired work runs synchronously inside the command (scripts).
  // manual: fired work is parked until the caller delivers an outcome (tests).
  // threaded: fired work runs on a worker pool (serve).
  enum class Execution { inline_work, manual, threaded };

  Clock clock = Clock::virtual_time;
  Execution execution = Execution::inline_work;
  std::size_t workers = 4;
  // Keep every emitted event in memory (transcripts).
  bool record = false;
};

// One document behind a serialized command queue. Every public call takes
// the session lock, so commands, timer firings and job completions are
// applied one at a time and events leave in revision order.
class Session {
 public:
  using Listener = std::function<void(const json& event)>;

  explicit Session(Engine engine, SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  std::uint64_t subscribe(Listener listener);
  void unsubscribe(std::uint64_t id);
  // Delivers a "snapshot" event (full state as patch ops) to the listener and
  // subscribes it, atomically, so no revision is missed or seen twice.
  std::uint64_t attach(Listener listener);

  // Returns the events this call emitted (they are also broadcast).
  std::vector<json> handle(const json& command);
  std::vector<json> handle_line(std::string_view line);

  // Virtual clock only.
  std::int64_t now() const;
  std::vector<json> advance(std::int64_t ms);
  // Fires every pending job, advancing virtual time past each deadline.
  std::vector<json> wait_idle();

  // Manual execution: fired jobs waiting for an outcome, oldest first.
  std::vector<Dispatch> take_dispatched();
  std::vector<json> deliver(const Job& job, JobOutcome outcome);

  // Real-time mode: starts the timer/completion driver thread.
  void start();
  void stop();

  std::vector<json> events() const;
  // Locked snapshot of the document.
  CanvasDocument document() const;
  std::uint64_t revision() const;
  bool idle() const;
  // Raster lookup for the asset HTTP route.
  std::shared_ptr<const ImageAsset> find_asset(const AssetId& id) const;

  // Direct engine access for tests; not synchronized.
  Engine& engine_unsafe() noexcept { return engine_; }

 private:
  struct Batch;

  json dispatch_command(const std::string& cmd, const json& args, Batch& batch);
  void pump(Batch& batch);
  void advance_in(std::int64_t ms, Batch& batch);
  void wait_idle_in(Batch& batch);
  void run_fired(std::vector<Dispatch> fired, Batch& batch);
  void finish(const Job& job, JobOutcome outcome, Batch& batch);
  void flush_patch(Batch& batch, const json& cause);
  void emit(Batch& batch, json event);
  std::vector<json> publish(Batch& batch);
  std::int64_t clock_now() const;
  void worker_loop();
  void driver_loop();

  Engine engine_;
  SessionOptions options_;
  mutable std::recursive_mutex mu_;
  std::uint64_t revision_ = 0;
  std::map<std::uint64_t, Listener> listeners_;
  std::uint64_t next_listener_ = 1;
  std::vector<json> log_;
  std::deque<Dispatch> parked_;

  // Threaded execution.
  std::mutex work_mu_;
  std::condition_variable work_cv_;
  std::deque<Dispatch> work_queue_;
  std::deque<std::pair<Job, JobOutcome>> done_;
  std::vector<std::thread> workers_;
  std::thread driver_;
  std::condition_variable_any driver_cv_;
  bool stopping_ = false;
  bool driver_stop_ = false;
  std::int64_t epoch_ms_ = 0;
};

// Applies one docPatch or snapshot event to a document. Asset rasters come from rasters.
void apply_patch(CanvasDocument& doc, const json& event, const RasterSource& rasters);

// Folds every docPatch in an event log into an empty document.
CanvasDocument replay(const std::vector<json>& events, const RasterSource& rasters);

struct Transcript {
  std::vector<json> events;
  CanvasDocument document;

  json to_json() const;
  // Canonical text: identical runs give identical bytes.
  std::string dump() const;
};

// Script: a JSON array of steps, or one JSON object per line ('#' starts a
// comment line). A step is a command object; "as" binds the step's result id
// to a name that later steps reference as "$name".
std::vector<json> parse_script(std::string_view text);
Transcript run_script(const std::vector<json>& steps, Engine engine);
Transcript run_script_file(const std::filesystem::path& path, Engine engine);

}  // namespace icanvas
