#include "btground/planner.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace btground {

namespace {

std::size_t default_expansion_cap(std::size_t n) {
  // 10 * 3^n, capped.
  constexpr std::size_t kCap = 100000;
  std::size_t v = 10;
  for (std::size_t i = 0; i < n; ++i) {
    if (v >= kCap) return kCap;
    v *= 3;
  }
  return std::min(v, kCap);
}

std::vector<const ActionModel*> sorted_by_name(std::span<const ActionModel> models) {
  std::vector<const ActionModel*> out;
  out.reserve(models.size());
  for (const ActionModel& m : models) out.push_back(&m);
  std::sort(out.begin(), out.end(),
            [](const ActionModel* a, const ActionModel* b) { return a->name < b->name; });
  return out;
}

}  // namespace

PlanResult bt_expansion(const Task& task, std::span<const ActionModel> models,
                        const PlannerConfig& cfg) {
  if (holds(task.goal, task.start)) {
    return PlanResult(BTNode::condition(task.goal));
  }

  const std::size_t cap =
      cfg.max_expansions ? cfg.max_expansions : default_expansion_cap(task.goal.size());
  const auto ordered = sorted_by_name(models);

  std::vector<BTNode> branches;
  branches.push_back(BTNode::condition(task.goal));
  std::vector<std::string> actions_used;

  std::deque<StateSet> queue;
  std::vector<StateSet> seen;  // every condition ever enqueued
  std::vector<StateSet> dead_ends;
  queue.push_back(task.goal);
  seen.push_back(task.goal);

  auto subsumed = [&seen](const StateSet& c) {
    for (const StateSet& s : seen) {
      if (c.contains(s)) return true;  // an equal or weaker condition exists
    }
    return false;
  };

  int expanded = 0;
  auto make_context = [&](bool budget) {
    PlanningContext ctx;
    ctx.task_id = task.id;
    ctx.solved = false;
    ctx.expanded_conditions = expanded;
    ctx.frontier = dead_ends;
    for (const StateSet& c : queue) ctx.frontier.push_back(c);
    ctx.sketch = BTNode::fallback(branches);
    ctx.actions_used = actions_used;
    ctx.budget_exhausted = budget;
    return ctx;
  };

  while (!queue.empty()) {
    if (static_cast<std::size_t>(expanded) >= cap) {
      throw PlanBudgetError(
          "bt_expansion: expansion budget exceeded for task '" + task.id + "'",
          make_context(true));
    }
    StateSet c = queue.front();
    queue.pop_front();
    ++expanded;

    bool progressed = false;
    for (const ActionModel* h : ordered) {
      if (h->del.intersects(c)) continue;   // would undo part of c
      if (!h->add.intersects(c)) continue;  // no progress toward c
      StateSet regressed = (c - h->add) | h->pre;
      if (subsumed(regressed)) continue;

      branches.push_back(BTNode::sequence(
          {BTNode::condition(regressed), BTNode::action(h->name)}));
      if (std::find(actions_used.begin(), actions_used.end(), h->name) ==
          actions_used.end()) {
        actions_used.push_back(h->name);
      }
      progressed = true;

      if (holds(regressed, task.start)) {
        return PlanResult(BTNode::fallback(branches));
      }
      queue.push_back(regressed);
      seen.push_back(regressed);
    }
    if (!progressed) dead_ends.push_back(c);
  }

  return PlanResult(make_context(false));
}

std::map<std::string, PlanResult> plan_all(std::span<const Task> tasks,
                                           std::span<const ActionModel> models,
                                           const PlannerConfig& cfg) {
  std::map<std::string, PlanResult> out;
  for (const Task& t : tasks) {
    try {
      out.emplace(t.id, bt_expansion(t, models, cfg));
    } catch (const PlanBudgetError& e) {
      out.emplace(t.id, PlanResult(e.partial()));
    }
  }
  return out;
}

std::optional<std::size_t> forward_search_oracle(const Task& task,
                                                 std::span<const ActionModel> models) {
  if (task.start.size() > 20) {
    throw ResourceError("forward_search_oracle: universe too large (n > 20)");
  }
  if (holds(task.goal, task.start)) return 0;

  std::unordered_set<StateSet, StateSetHash> visited;
  std::deque<std::pair<StateSet, std::size_t>> queue;
  visited.insert(task.start);
  queue.emplace_back(task.start, 0);

  while (!queue.empty()) {
    auto [state, depth] = queue.front();
    queue.pop_front();
    for (const ActionModel& h : models) {
      if (!holds(h.pre, state)) continue;
      StateSet next = apply_model(h, state);
      if (visited.contains(next)) continue;
      if (holds(task.goal, next)) return depth + 1;
      visited.insert(next);
      queue.emplace_back(std::move(next), depth + 1);
    }
  }
  return std::nullopt;
}

bool verify_solution(const BTNode& tree, const Task& task,
                     std::span<const ActionModel> models,
                     std::size_t tick_budget) {
  ActionTable table;
  for (const ActionModel& m : models) table.emplace(m.name, m);

  StateSet s = task.start;
  for (std::size_t t = 0; t < tick_budget; ++t) {
    TickResult r = tick(tree, s, table);
    if (r.status == BTStatus::Success) return holds(task.goal, s);
    if (r.status == BTStatus::Failure) return false;
    const ActionModel& h = table.at(*r.active_action);
    if (!holds(h.pre, s)) return false;  // tree reached an unarmed action
    s = apply_model(h, s);
  }
  return false;  // budget exhausted
}

}  // namespace btground
