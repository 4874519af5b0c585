#include "btground/bt.hpp"

#include "btground/errors.hpp"

namespace btground {

const char* to_string(BTStatus s) {
  switch (s) {
    case BTStatus::Success: return "success";
    case BTStatus::Running: return "running";
    case BTStatus::Failure: return "failure";
  }
  return "unknown";
}

BTNode BTNode::condition(StateSet c) {
  BTNode n;
  n.kind_ = Kind::Condition;
  n.condition_ = std::move(c);
  return n;
}

BTNode BTNode::action(std::string name) {
  BTNode n;
  n.kind_ = Kind::Action;
  n.action_ = std::move(name);
  return n;
}

BTNode BTNode::sequence(std::vector<BTNode> children) {
  if (children.empty()) throw DomainError("Sequence node requires at least one child");
  BTNode n;
  n.kind_ = Kind::Sequence;
  n.children_ = std::move(children);
  return n;
}

BTNode BTNode::fallback(std::vector<BTNode> children) {
  if (children.empty()) throw DomainError("Fallback node requires at least one child");
  BTNode n;
  n.kind_ = Kind::Fallback;
  n.children_ = std::move(children);
  return n;
}

const StateSet& BTNode::condition_set() const {
  if (kind_ != Kind::Condition) throw DomainError("node is not a Condition");
  return condition_;
}

const std::string& BTNode::action_name() const {
  if (kind_ != Kind::Action) throw DomainError("node is not an Action");
  return action_;
}

TickResult tick(const BTNode& node, const StateSet& s, const ActionTable& actions) {
  switch (node.kind()) {
    case BTNode::Kind::Condition:
      return {holds(node.condition_set(), s) ? BTStatus::Success : BTStatus::Failure,
              std::nullopt};
    case BTNode::Kind::Action: {
      if (!actions.contains(node.action_name())) {
        throw DomainError("tick: unresolved action id '" + node.action_name() + "'");
      }
      return {BTStatus::Running, node.action_name()};
    }
    case BTNode::Kind::Sequence: {
      for (const BTNode& child : node.children()) {
        TickResult r = tick(child, s, actions);
        if (r.status != BTStatus::Success) return r;
      }
      return {BTStatus::Success, std::nullopt};
    }
    case BTNode::Kind::Fallback: {
      for (const BTNode& child : node.children()) {
        TickResult r = tick(child, s, actions);
        if (r.status != BTStatus::Failure) return r;
      }
      return {BTStatus::Failure, std::nullopt};
    }
  }
  throw DomainError("tick: corrupt node kind");
}

BTStatus bt_region(const BTNode& root, const StateSet& s, const ActionTable& actions) {
  return tick(root, s, actions).status;
}

}  // namespace btground
