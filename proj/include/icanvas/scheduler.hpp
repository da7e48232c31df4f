#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "icanvas/geometry.hpp"
#include "icanvas/instruments.hpp"

namespace icanvas {

using ElementId = std::string;
using JobId = std::uint64_t;

enum class DebounceClass { immediate, lens_idle, edit_coalesce };
std::string_view to_string(DebounceClass cls) noexcept;

// Regenerate an image element from a prompt (initial creation, setPrompt).
struct RenderIntent {
  std::string prompt;
};
// Accumulated fragment edits against an image's current prompt.
struct FragmentEditIntent {
  std::vector<FragmentEdit> edits;
};
struct LensIntent {};
struct ContainerIntent {
  std::uint64_t base_seed = 0;
};
// Segmentation already ran when the brush was applied; the job crafts the
// prompt and inpaints.
struct BrushIntent {
  ElementId brush;
  // Asset the mask was segmented against.
  std::string source;
  std::string brush_prompt;
  BrushMode mode = BrushMode::style;
  double emphasis = 1.0;
  std::string segment_description;
  Mask mask;
};

using JobIntent =
    std::variant<RenderIntent, FragmentEditIntent, LensIntent, ContainerIntent, BrushIntent>;

// Coalescing rule: fragment edit lists concatenate, anything else is
// superseded by the newer intent.
void merge_intent(JobIntent& pending, JobIntent incoming);

struct Job {
  JobId id = 0;
  ElementId target;
  DebounceClass cls = DebounceClass::immediate;
  JobIntent intent;
  std::int64_t submitted_at = 0;
  std::int64_t due_at = 0;
  std::int64_t fired_at = 0;
  // Target generation counter captured when the job fired.
  std::uint64_t captured = 0;
  bool stale = false;
};

enum class Disposition { applied, discarded };

// Debounced, coalescing job bookkeeping with staleness filtering. Purely a
// state machine over an externally supplied clock: it never runs work itself.
class GenerationScheduler {
 public:
  struct Options {
    std::int64_t idle_window_ms = 2000;
    std::int64_t edit_window_ms = 300;
    std::size_t max_inflight = 4;
  };

  GenerationScheduler() = default;
  explicit GenerationScheduler(Options options) : options_(options) {}

  const Options& options() const noexcept { return options_; }
  std::int64_t window(DebounceClass cls) const noexcept;

  // One pending job per (target, class): a second submit merges into it and
  // re-arms the timer. In-flight jobs of the same (target, class) go stale.
  JobId submit(const ElementId& target, DebounceClass cls, JobIntent intent, std::int64_t now);

  // Fires every due job that fits under the in-flight cap and whose target
  // has no live in-flight job. Ordered by due time, then id.
  std::vector<Job> take_ready(std::int64_t now);

  // Applied iff the job is live and its captured counter is still current.
  Disposition on_result(JobId id);

  // Drops pending jobs and marks in-flight ones stale. Returns how many.
  std::size_t cancel_target(const ElementId& target);

  void shutdown() noexcept { shutdown_ = true; }
  bool is_shutdown() const noexcept { return shutdown_; }

  std::optional<std::int64_t> next_deadline() const;
  bool idle() const noexcept { return pending_.empty() && inflight_.empty(); }
  std::size_t pending_count() const noexcept { return pending_.size(); }
  std::size_t inflight_count() const noexcept { return inflight_.size(); }
  std::optional<JobId> pending_job(const ElementId& target, DebounceClass cls) const;
  bool has_work_for(const ElementId& target) const;
  std::uint64_t counter(const ElementId& target) const;
  // Restores a counter from a loaded document; never moves it backwards.
  void seed_counter(const ElementId& target, std::uint64_t value);

 private:
  bool target_busy(const ElementId& target) const;

  Options options_;
  JobId next_id_ = 1;
  bool shutdown_ = false;
  std::map<std::pair<ElementId, DebounceClass>, Job> pending_;
  std::map<JobId, Job> inflight_;
  std::map<ElementId, std::uint64_t> counters_;
};

}  // namespace icanvas
