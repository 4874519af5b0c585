#include "btground/sim_env.hpp"

#include <algorithm>

#include "btground/rng.hpp"

namespace btground {

bool check_consistency_outcome(const ActionModel& h, const StateSet& after,
                               bool strict) {
  if (!after.contains(expected_outcome(h))) return false;
  if (strict && after.intersects(h.del)) return false;
  return true;
}

Environment::Environment(UniversePtr universe, std::vector<ControlPolicy> policies,
                         std::vector<StateSet> mutex_groups, EnvConfig cfg)
    : universe_(std::move(universe)),
      policies_(std::move(policies)),
      mutex_groups_(std::move(mutex_groups)),
      cfg_(cfg) {
  for (const ControlPolicy& p : policies_) {
    if (p.add.intersects(p.del)) {
      throw DomainError("policy '" + p.id + "' has overlapping add/del effects");
    }
  }
}

std::vector<PolicyInfo> Environment::catalog() const {
  std::vector<PolicyInfo> out;
  out.reserve(policies_.size());
  for (const ControlPolicy& p : policies_) out.push_back({p.id, p.description});
  return out;
}

const ControlPolicy& Environment::find_policy(const std::string& id) const {
  for (const ControlPolicy& p : policies_) {
    if (p.id == id) return p;
  }
  throw DomainError("unknown policy id '" + id + "'");
}

Scenario Environment::sample_scenario(const ActionModel& h, std::uint64_t seed) const {
  for (const StateSet& group : mutex_groups_) {
    if ((h.pre & group).count() > 1) {
      throw UnsatisfiableScenarioError(
          "pre(" + h.name + ") violates a mutex group; no scenario exists");
    }
  }

  Rng rng(seed);
  std::bernoulli_distribution fill(cfg_.fill_prob);
  StateSet s0 = h.pre;
  for (std::size_t i = 0; i < s0.size(); ++i) {
    if (!s0.test(i) && fill(rng)) s0.set(i);
  }

  // Mutex repair: pre atoms always survive; otherwise the lowest-index
  // drawn atom wins its group.
  for (const StateSet& group : mutex_groups_) {
    StateSet present = s0 & group;
    if (present.count() <= 1) continue;
    StateSet pre_in_group = h.pre & group;
    std::size_t winner;
    if (pre_in_group.any()) {
      winner = pre_in_group.indices().front();
    } else {
      winner = present.indices().front();
    }
    for (std::size_t i : present.indices()) {
      if (i != winner) s0.reset(i);
    }
  }
  return Scenario{s0, seed};
}

ExecutionContext Environment::execute(const std::string& policy_id,
                                      const StateSet& s0, const StateSet& expected,
                                      int attempt, std::uint64_t seed) const {
  const ControlPolicy& p = find_policy(policy_id);
  ExecutionContext ctx;
  ctx.attempt = attempt;
  ctx.policy_id = policy_id;
  ctx.before = s0;
  ctx.expected = expected;

  if (!holds(p.pre, s0)) {
    ctx.after = s0;
    ctx.ticks_elapsed = 0;
    ctx.note = "no effect: policy reported not applicable at tick 0";
  } else {
    Rng rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (p.failure_prob > 0.0 && uniform(rng) < p.failure_prob) {
      ctx.after = (s0 | p.failure_add) - p.failure_del;
      ctx.ticks_elapsed = p.duration_ticks;
      ctx.note = "stochastic failure";
    } else {
      ctx.after = (s0 | p.add) - p.del;
      ctx.ticks_elapsed = p.duration_ticks;
    }
  }
  ctx.succeeded = ctx.after.contains(expected);
  return ctx;
}

std::pair<bool, std::vector<ExecutionContext>> Environment::validate_consistency(
    const ActionModel& h, const std::string& policy_id, int trials,
    std::uint64_t seed) const {
  if (trials < 1) throw DomainError("validate_consistency requires at least one trial");
  std::vector<ExecutionContext> contexts;
  contexts.reserve(static_cast<std::size_t>(trials));
  const StateSet expected = expected_outcome(h);
  bool all_ok = true;

  for (int k = 0; k < trials; ++k) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(k));
    StateSet s0;
    if (cfg_.strict_consistency && k == 0) {
      // Targeted scenario: exactly the declared precondition.
      s0 = h.pre;
      for (const StateSet& group : mutex_groups_) {
        if ((h.pre & group).count() > 1) {
          throw UnsatisfiableScenarioError(
              "pre(" + h.name + ") violates a mutex group; no scenario exists");
        }
      }
    } else {
      s0 = sample_scenario(h, trial_seed).initial;
    }
    ExecutionContext ctx =
        execute(policy_id, s0, expected, k + 1, derive_seed(trial_seed, 0x5eedull));
    bool ok = ctx.succeeded;
    if (cfg_.strict_consistency && !check_consistency_outcome(h, ctx.after, true)) {
      ok = false;
    }
    all_ok = all_ok && ok;
    contexts.push_back(std::move(ctx));
  }
  return {all_ok, std::move(contexts)};
}

ExecutionTrace Environment::execute_bt(
    const BTNode& tree, const StateSet& s0,
    const std::map<std::string, ActionBinding>& bindings, std::size_t tick_budget,
    std::uint64_t seed) const {
  ActionTable table;
  for (const auto& [name, binding] : bindings) table.emplace(name, binding.model);

  ExecutionTrace trace;
  StateSet s = s0;
  for (std::size_t t = 0; t < tick_budget; ++t) {
    TickResult r = tick(tree, s, table);
    trace.steps.push_back({static_cast<int>(t), s, r.status, r.active_action});
    if (r.status != BTStatus::Running) {
      trace.complete = true;
      trace.final_status = r.status;
      trace.final_state = s;
      return trace;
    }
    const ActionBinding& binding = bindings.at(*r.active_action);
    ExecutionContext ctx =
        execute(binding.policy_id, s, expected_outcome(binding.model),
                static_cast<int>(t), derive_seed(seed, t));
    s = ctx.after;
  }
  trace.complete = false;
  trace.final_status = BTStatus::Running;
  trace.final_state = s;
  return trace;
}

const std::vector<ControlPolicy>& Environment::hidden_policies() const {
  ++hidden_reads_;
  return policies_;
}

}  // namespace btground
