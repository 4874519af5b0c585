#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "btground/bt.hpp"
#include "btground/model.hpp"
#include "btground/universe.hpp"

namespace btground {

/// Executable unit owned by the environment. The pre/add/del triple is the
/// policy's true transition; it is hidden from the grounding side, which
/// only ever sees the id, the description, and execution outcomes.
struct ControlPolicy {
  std::string id;
  std::string description;
  StateSet pre;
  StateSet add;
  StateSet del;
  int duration_ticks = 1;
  double failure_prob = 0.0;
  /// Applied instead of the nominal effect on a stochastic failure;
  /// both empty = world unchanged.
  StateSet failure_add;
  StateSet failure_del;
};

/// Public catalog view: what proposers are allowed to know.
struct PolicyInfo {
  std::string id;
  std::string description;
};

/// A sampled initial state; the recorded seed reproduces it exactly.
struct Scenario {
  StateSet initial;
  std::uint64_t seed = 0;
};

/// One execution record (I_e). succeeded is exactly the symbolic
/// consistency outcome: after ⊇ expected.
struct ExecutionContext {
  int attempt = 0;
  std::string policy_id;
  StateSet before;
  StateSet after;
  StateSet expected;
  bool succeeded = false;
  int ticks_elapsed = 0;
  std::string note;
};

struct TraceStep {
  int tick = 0;
  StateSet state;
  BTStatus status = BTStatus::Failure;
  std::optional<std::string> action;
};

struct ExecutionTrace {
  std::vector<TraceStep> steps;
  bool complete = false;  // false when the tick budget ran out
  BTStatus final_status = BTStatus::Failure;
  StateSet final_state;
};

/// Model + policy binding used when executing a whole tree.
struct ActionBinding {
  ActionModel model;
  std::string policy_id;
};

struct EnvConfig {
  /// Probability that each atom outside pre(h) joins a sampled scenario.
  double fill_prob = 0.5;
  /// Strict consistency: additionally require del(h) ∩ after = ∅ and run
  /// the first trial from exactly pre(h).
  bool strict_consistency = false;
};

/// Literal consistency outcome test: s_t ⊇ (pre ∪ add) ∖ del. The strict
/// variant also rejects outcomes that retain declared-deleted atoms.
bool check_consistency_outcome(const ActionModel& h, const StateSet& after,
                               bool strict = false);

/// Owns the policy library and runs all effectful execution. One instance
/// per episode; instances are independent.
class Environment {
 public:
  Environment(UniversePtr universe, std::vector<ControlPolicy> policies,
              std::vector<StateSet> mutex_groups, EnvConfig cfg = {});

  const DomainUniverse& universe() const { return *universe_; }
  const EnvConfig& config() const { return cfg_; }
  std::vector<PolicyInfo> catalog() const;

  /// Sample s0 ⊇ pre(h): each outside atom joins with fill_prob, then
  /// mutex conflicts are repaired by dropping non-pre atoms, lowest index
  /// winning. Throws UnsatisfiableScenarioError if pre(h) itself violates
  /// a mutex group.
  Scenario sample_scenario(const ActionModel& h, std::uint64_t seed) const;

  /// Run one policy from s0. If the policy's own (hidden) precondition is
  /// unmet the world is untouched and the record says so; otherwise the
  /// hidden transition (or the failure effect) is applied after
  /// duration_ticks. succeeded is judged against the caller-supplied
  /// expected set.
  ExecutionContext execute(const std::string& policy_id, const StateSet& s0,
                           const StateSet& expected, int attempt,
                           std::uint64_t seed) const;

  /// K independent sample→execute→check cycles; true iff all pass. All
  /// contexts are returned for proposer feedback.
  std::pair<bool, std::vector<ExecutionContext>> validate_consistency(
      const ActionModel& h, const std::string& policy_id, int trials,
      std::uint64_t seed) const;

  /// Closed loop over a whole tree: tick, run the bound policy of the
  /// active action to completion, re-tick. Ends on success, failure, or
  /// budget exhaustion (trace flagged incomplete).
  ExecutionTrace execute_bt(const BTNode& tree, const StateSet& s0,
                            const std::map<std::string, ActionBinding>& bindings,
                            std::size_t tick_budget, std::uint64_t seed) const;

  /// Privileged access to the declared transitions (oracle proposer, audit
  /// tooling). Every call is counted so redaction audits can prove the
  /// grounding path never looked.
  const std::vector<ControlPolicy>& hidden_policies() const;
  std::size_t hidden_read_count() const { return hidden_reads_; }

 private:
  const ControlPolicy& find_policy(const std::string& id) const;

  UniversePtr universe_;
  std::vector<ControlPolicy> policies_;
  std::vector<StateSet> mutex_groups_;
  EnvConfig cfg_;
  mutable std::size_t hidden_reads_ = 0;
};

}  // namespace btground
