#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "icanvas/adapters.hpp"
#include "icanvas/document.hpp"
#include "icanvas/scheduler.hpp"

namespace icanvas {

struct EngineConfig {
  std::int64_t idle_window_ms = 2000;
  std::int64_t edit_window_ms = 300;
  std::size_t max_inflight = 4;
  std::uint64_t base_seed = 42;
  std::size_t max_fragments = 5;
};

struct JobResult {
  std::vector<ImageAsset> assets;
  std::vector<Fragment> fragments;
};
struct JobFailure {
  Errc code = Errc::adapter_failure;
  std::string message;
};
using JobOutcome = std::variant<JobResult, JobFailure>;

// Adapter work for one fired job. Runs off the command queue; captures only
// values, never the document.
using Work = std::function<JobOutcome(const Adapters&)>;

struct Dispatch {
  Job job;
  Work work;
};

struct Completion {
  Job job;
  Disposition disposition = Disposition::discarded;
  std::optional<JobFailure> failure;
};

struct FragmentApplied { JobId job = 0; };
struct ContainerGrounded { JobId job = 0; };
struct LensScheduled { ElementId lens; JobId job = 0; };
struct BrushesCombined { ElementId brush; };
struct StoredInPalette { std::size_t index = 0; };
struct BrushFilled { std::string prompt; };

using DropEffect = std::variant<FragmentApplied, ContainerGrounded, LensScheduled,
                                BrushesCombined, StoredInPalette, BrushFilled>;

// Owns one document together with its scheduler and adapters. Single-writer:
// callers serialize every call (the session's command queue does this).
class Engine {
 public:
  Engine(Adapters adapters, EngineConfig config = {});

  CanvasDocument& doc() noexcept { return doc_; }
  const CanvasDocument& doc() const noexcept { return doc_; }
  void replace_document(CanvasDocument doc);
  const Adapters& adapters() const noexcept { return adapters_; }
  GenerationScheduler& scheduler() noexcept { return scheduler_; }
  const GenerationScheduler& scheduler() const noexcept { return scheduler_; }
  const EngineConfig& config() const noexcept { return config_; }

  std::int64_t now() const noexcept { return now_; }
  void set_now(std::int64_t now) noexcept { now_ = now; }

  // --- document-level operations ---------------------------------------
  // Images with a prompt and no asset get a render job; lenses get a
  // composition job when one is buildable. A zero seed is replaced by a
  // derived one.
  ElementId create_element(Rect rect, ElementBody body);
  // Returns false (and queues nothing) for an identical rect.
  bool update_geometry(const ElementId& id, Rect rect);
  void set_prompt(const ElementId& id, const std::string& prompt);
  void delete_element(const ElementId& id);
  DropEffect drop_on(const ElementId& source, const ElementId& target);
  const HistoryEntry& snapshot(const ElementId& id);
  void restore(std::uint64_t history_seq);

  // --- job plumbing -----------------------------------------------------
  JobId submit(const ElementId& target, DebounceClass cls, JobIntent intent);
  // Fires due jobs and builds their work. Planning failures become work that
  // returns the failure, so every fired job still yields one completion.
  std::vector<Dispatch> take_ready();
  Completion complete(const Job& job, JobOutcome outcome);

  std::uint64_t derive_seed(std::string_view salt) const;
  std::string adapter_id() const { return adapters_.id; }

 private:
  Work plan(const Job& job);
  void apply(const Job& job, JobResult result);
  // Lenses above `id` whose rect overlaps either rect.
  void schedule_lenses_over(const ElementId& id, const Rect& a, const Rect& b);

  Adapters adapters_;
  EngineConfig config_;
  CanvasDocument doc_;
  GenerationScheduler scheduler_;
  std::int64_t now_ = 0;
};

// Prompt an image element was produced from, or a description of it.
std::string image_prompt(const Engine& engine, const ElementId& image);

}  // namespace icanvas
