#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btground/model.hpp"
#include "btground/planner.hpp"
#include "btground/proposers.hpp"
#include "btground/sim_env.hpp"

namespace btground {

/// The grounding problem: tasks, the condition universe, the model space
/// (validity rules, optionally restricted to an explicit candidate list),
/// and the policy catalog. Hidden transitions stay inside the Environment.
struct GroundingProblem {
  UniversePtr universe;
  std::vector<Task> tasks;
  ValidityRules rules;
  std::optional<std::vector<ActionModel>> explicit_models;
  std::vector<PolicyInfo> policy_catalog;
};

/// A model bound to the policy that realized it, plus the seed under
/// which validate_consistency accepted the pair (replayable).
struct GroundedAction {
  ActionModel model;
  std::string policy_id;
  std::uint64_t validation_seed = 0;
};

struct BTSystem {
  StateSet condition_atoms;
  std::vector<GroundedAction> actions;

  std::vector<ActionModel> models() const;
  std::map<std::string, ActionBinding> bindings() const;
};

struct CycleStats {
  int proposals = 0;
  int accepted = 0;
  int validations = 0;
  int refinements = 0;
  int rejected = 0;
};

struct GroundingReport {
  BTSystem system;
  bool complete = false;
  std::map<std::string, PlanResult> task_results;
  int feedback_cycles = 0;
  int proposals_made = 0;
  int policies_sampled = 0;
  int refinements = 0;
  std::vector<std::string> refinement_notes;
  std::vector<std::string> rejections;
  std::vector<CycleStats> cycles;
  double wall_seconds = 0.0;
};

struct GroundingConfig {
  std::uint64_t seed = 0;
  int k_trials = 4;     // consistency trials per candidate pair
  int n_max = 3;        // policy sampling attempts per model
  int max_cycles = 16;  // outer loop cap; exceeded = best-effort report
  std::size_t batch = 8;
  std::uint64_t naive_cap = 10'000'000;
  bool ablate_planning_contexts = false;
  bool ablate_execution_contexts = false;
  PlannerConfig planner;
};

/// 2^n * 3^n, saturated at uint64 max.
std::uint64_t candidate_count(std::size_t n);

/// Visit every rule-valid model over an n-atom universe in canonical
/// order: pre, add, del ascending as bit masks (add/del overlap skipped
/// inside). The visitor returns false to stop.
void for_each_valid_model(std::size_t n, const ValidityRules& rules,
                          const std::function<bool(const ActionModel&)>& visit);

/// Count of rule-valid models; throws ResourceError when the raw
/// candidate count exceeds `cap`.
std::uint64_t count_valid_models(std::size_t n, const ValidityRules& rules,
                                 std::uint64_t cap);

/// Exhaustive grounding: enumerate the whole valid model space (or the
/// explicit list), keep the first policy that validates each model.
BTSystem naive_ground(const GroundingProblem& problem, const Environment& env,
                      const GroundingConfig& cfg);

/// True iff every task plans against the actions' models and every
/// solution verifies in closed loop.
bool all_solvable(std::span<const Task> tasks, std::span<const GroundedAction> actions,
                  const PlannerConfig& cfg = {});

/// The context-aware grounding loop: initial proposal, then cycles of
/// (repair proposals until plannable or space exhausted) → (policy
/// sampling with consistency validation) → (cross-level refinement of
/// rejected models) → knowledge sync. Proposal batches the proposers
/// return are schema-gated here; protocol failures degrade to "no
/// proposal" or built-in fallbacks rather than aborting the run.
GroundingReport cabto_ground(const GroundingProblem& problem, const Environment& env,
                             const ProposerBundle& proposers, const GroundingConfig& cfg);

/// Wrap a naive_ground result in the same report shape cabto produces.
GroundingReport report_for_system(BTSystem system, const GroundingProblem& problem,
                                  const GroundingConfig& cfg);

struct Metrics {
  double asr = 0.0;  // mean per-task planning success rate
  double csr = 0.0;  // fraction of runs with every task planned
  double fc = 0.0;   // mean feedback cycles
};

Metrics compute_metrics(std::span<const GroundingReport> runs, std::size_t task_count);

/// Tick budget that suffices for any solution tree: one tick per branch
/// on the worst nominal path, doubled, plus slack.
std::size_t verify_budget_for(const BTNode& tree);

}  // namespace btground
