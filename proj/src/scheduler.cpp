#include "icanvas/scheduler.hpp"

#include <algorithm>

#include "icanvas/error.hpp"

namespace icanvas {

std::string_view to_string(DebounceClass cls) noexcept {
  switch (cls) {
    case DebounceClass::immediate: return "immediate";
    case DebounceClass::lens_idle: return "lens-idle";
    case DebounceClass::edit_coalesce: return "edit-coalesce";
  }
  return "immediate";
}

void merge_intent(JobIntent& pending, JobIntent incoming) {
  auto* old_edits = std::get_if<FragmentEditIntent>(&pending);
  auto* new_edits = std::get_if<FragmentEditIntent>(&incoming);
  if (old_edits && new_edits) {
    old_edits->edits.insert(old_edits->edits.end(), std::make_move_iterator(new_edits->edits.begin()),
                            std::make_move_iterator(new_edits->edits.end()));
    return;
  }
  pending = std::move(incoming);
}

std::int64_t GenerationScheduler::window(DebounceClass cls) const noexcept {
  switch (cls) {
    case DebounceClass::immediate: return 0;
    case DebounceClass::lens_idle: return options_.idle_window_ms;
    case DebounceClass::edit_coalesce: return options_.edit_window_ms;
  }
  return 0;
}

JobId GenerationScheduler::submit(const ElementId& target, DebounceClass cls, JobIntent intent,
                                  std::int64_t now) {
  if (shutdown_) throw Error(Errc::shutdown, "scheduler is shut down");
  for (auto& [_, job] : inflight_)
    if (job.target == target && job.cls == cls) job.stale = true;

  const auto key = std::make_pair(target, cls);
  auto it = pending_.find(key);
  if (it != pending_.end()) {
    merge_intent(it->second.intent, std::move(intent));
    it->second.submitted_at = now;
    it->second.due_at = now + window(cls);
    return it->second.id;
  }
  Job job;
  job.id = next_id_++;
  job.target = target;
  job.cls = cls;
  job.intent = std::move(intent);
  job.submitted_at = now;
  job.due_at = now + window(cls);
  pending_.emplace(key, std::move(job));
  return next_id_ - 1;
}

bool GenerationScheduler::target_busy(const ElementId& target) const {
  return std::any_of(inflight_.begin(), inflight_.end(),
                     [&](const auto& kv) { return kv.second.target == target && !kv.second.stale; });
}

std::vector<Job> GenerationScheduler::take_ready(std::int64_t now) {
  std::vector<Job> fired;
  if (shutdown_) return fired;
  std::vector<const Job*> due;
  for (const auto& [_, job] : pending_)
    if (job.due_at <= now) due.push_back(&job);
  std::sort(due.begin(), due.end(), [](const Job* a, const Job* b) {
    return a->due_at != b->due_at ? a->due_at < b->due_at : a->id < b->id;
  });
  std::vector<std::pair<ElementId, DebounceClass>> taken;
  for (const Job* j : due) {
    if (inflight_.size() >= options_.max_inflight) break;
    if (target_busy(j->target)) continue;
    Job job = *j;
    job.fired_at = now;
    job.captured = ++counters_[job.target];
    taken.emplace_back(job.target, job.cls);
    inflight_.emplace(job.id, job);
    fired.push_back(std::move(job));
  }
  for (const auto& key : taken) pending_.erase(key);
  return fired;
}

Disposition GenerationScheduler::on_result(JobId id) {
  auto it = inflight_.find(id);
  if (it == inflight_.end()) return Disposition::discarded;
  const Job job = std::move(it->second);
  inflight_.erase(it);
  if (job.stale || job.captured != counter(job.target)) return Disposition::discarded;
  return Disposition::applied;
}

std::size_t GenerationScheduler::cancel_target(const ElementId& target) {
  std::size_t n = 0;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->first.first == target) {
      it = pending_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  for (auto& [_, job] : inflight_)
    if (job.target == target && !job.stale) {
      job.stale = true;
      ++n;
    }
  return n;
}

std::optional<std::int64_t> GenerationScheduler::next_deadline() const {
  std::optional<std::int64_t> best;
  for (const auto& [_, job] : pending_)
    if (!best || job.due_at < *best) best = job.due_at;
  return best;
}

std::optional<JobId> GenerationScheduler::pending_job(const ElementId& target, DebounceClass cls) const {
  auto it = pending_.find({target, cls});
  if (it == pending_.end()) return std::nullopt;
  return it->second.id;
}

bool GenerationScheduler::has_work_for(const ElementId& target) const {
  for (const auto& [key, _] : pending_)
    if (key.first == target) return true;
  return target_busy(target);
}

std::uint64_t GenerationScheduler::counter(const ElementId& target) const {
  auto it = counters_.find(target);
  return it == counters_.end() ? 0 : it->second;
}

void GenerationScheduler::seed_counter(const ElementId& target, std::uint64_t value) {
  auto& c = counters_[target];
  c = std::max(c, value);
}

}  // namespace icanvas
