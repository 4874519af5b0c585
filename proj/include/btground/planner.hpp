#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "btground/bt.hpp"
#include "btground/errors.hpp"
#include "btground/model.hpp"

namespace btground {

/// A planning problem: reach some state covering `goal` from `start`.
struct Task {
  std::string id;
  StateSet start;
  StateSet goal;
};

/// Diagnostics handed back when planning terminates without a solution
/// (or when the expansion budget runs out). `frontier` lists the unmet
/// conditions left open: dead-end conditions no model could regress, plus
/// any conditions still queued at termination.
struct PlanningContext {
  std::string task_id;
  bool solved = false;
  int expanded_conditions = 0;
  std::vector<StateSet> frontier;
  BTNode sketch = BTNode::condition(StateSet{});
  std::vector<std::string> actions_used;
  bool budget_exhausted = false;
};

/// Either a solution tree or the failure diagnostics; exactly one branch.
class PlanResult {
 public:
  explicit PlanResult(BTNode solution) : value_(std::move(solution)) {}
  explicit PlanResult(PlanningContext context) : value_(std::move(context)) {}

  bool solved() const { return std::holds_alternative<BTNode>(value_); }
  const BTNode& solution() const { return std::get<BTNode>(value_); }
  const PlanningContext& context() const { return std::get<PlanningContext>(value_); }

 private:
  std::variant<BTNode, PlanningContext> value_;
};

struct PlannerConfig {
  /// Maximum conditions expanded before a ResourceError; 0 means the
  /// default 10 * 3^n capped at 100000.
  std::size_t max_expansions = 0;
};

/// Exception carrying the partial diagnostics of a budget-capped run.
class PlanBudgetError : public ResourceError {
 public:
  PlanBudgetError(const std::string& msg, PlanningContext partial)
      : ResourceError(msg), partial_(std::move(partial)) {}
  const PlanningContext& partial() const { return partial_; }

 private:
  PlanningContext partial_;
};

/// Backward condition expansion from the goal. Sound and complete over
/// the given models: returns a tree whose closed-loop execution under
/// consistent actions reaches the goal in finitely many ticks, or the
/// failure diagnostics. Deterministic: FIFO frontier, models visited in
/// ascending name order.
PlanResult bt_expansion(const Task& task, std::span<const ActionModel> models,
                        const PlannerConfig& cfg = {});

/// Plan every task; budget errors land in that task's entry instead of
/// aborting the batch.
std::map<std::string, PlanResult> plan_all(std::span<const Task> tasks,
                                           std::span<const ActionModel> models,
                                           const PlannerConfig& cfg = {});

/// Independent completeness oracle: breadth-first search over the state
/// graph whose edges are model applications. Returns the shortest action
/// count reaching a goal-covering state, or nullopt if unreachable.
/// Guarded to n <= 20 (ResourceError beyond).
std::optional<std::size_t> forward_search_oracle(const Task& task,
                                                 std::span<const ActionModel> models);

/// Closed-loop simulation of a tree against the models themselves:
/// tick, apply the active model, repeat. True iff execution ends in
/// success with the goal covered within the tick budget.
bool verify_solution(const BTNode& tree, const Task& task,
                     std::span<const ActionModel> models,
                     std::size_t tick_budget);

}  // namespace btground
