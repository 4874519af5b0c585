#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btground/model.hpp"
#include "btground/state.hpp"

namespace btground {

enum class BTStatus { Success, Running, Failure };

const char* to_string(BTStatus s);

/// Node of a behavior tree. Leaves are Condition or Action; internal
/// nodes are Sequence (AND) or Fallback (OR) with at least one child.
/// Value type: trees are copied and compared structurally.
class BTNode {
 public:
  enum class Kind { Condition, Action, Sequence, Fallback };

  static BTNode condition(StateSet c);
  static BTNode action(std::string name);
  static BTNode sequence(std::vector<BTNode> children);
  static BTNode fallback(std::vector<BTNode> children);

  Kind kind() const { return kind_; }
  const StateSet& condition_set() const;
  const std::string& action_name() const;
  const std::vector<BTNode>& children() const { return children_; }
  std::vector<BTNode>& children() { return children_; }

  bool operator==(const BTNode&) const = default;

 private:
  BTNode() = default;
  Kind kind_ = Kind::Condition;
  StateSet condition_;
  std::string action_;
  std::vector<BTNode> children_;
};

/// Action models keyed by name; ordered so that iteration is stable.
using ActionTable = std::map<std::string, ActionModel>;

struct TickResult {
  BTStatus status = BTStatus::Failure;
  /// The Action leaf reached when status is Running.
  std::optional<std::string> active_action;
};

/// One top-down evaluation pass. Pure: never mutates the state; Action
/// leaves return Running and name themselves, execution is the
/// environment's job. Sequence returns the first non-success child
/// status, Fallback the first non-failure. Unresolved action ids throw
/// DomainError.
TickResult tick(const BTNode& root, const StateSet& s, const ActionTable& actions);

/// Status component of tick: classifies s into the tree's
/// success/running/failure partition.
BTStatus bt_region(const BTNode& root, const StateSet& s, const ActionTable& actions);

}  // namespace btground
