#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btground/model.hpp"
#include "btground/planner.hpp"
#include "btground/sim_env.hpp"
#include "btground/universe.hpp"

namespace btground {

enum class ProposerPhase { InitialProposal, RepairProposal, PolicySample, Refine };

const char* to_string(ProposerPhase p);

/// Failed-planning diagnostics as shipped to proposers: the raw context
/// plus the sketch rendered to text.
struct PlanningContextView {
  PlanningContext context;
  std::string sketch_text;
};

/// One request record. The engine fills only the fields the phase uses,
/// and leaves i_fail / i_e empty when the corresponding contexts are
/// ablated, so no proposer (built-in or external) ever sees suppressed
/// data. The included flags record that choice for auditing.
struct ProposerRequest {
  ProposerPhase phase = ProposerPhase::InitialProposal;
  bool planning_contexts_included = true;
  bool execution_contexts_included = true;

  UniversePtr universe;
  std::vector<Task> tasks;
  ValidityRules rules;
  std::optional<std::vector<ActionModel>> explicit_models;
  std::vector<ActionModel> proposed;  // already moved out of the unexplored space
  std::uint64_t remaining_models = 0;
  std::size_t batch = 8;
  std::vector<PolicyInfo> catalog;

  std::vector<PlanningContextView> i_fail;   // repair / refine
  std::optional<ActionModel> subject;        // policy_sample / refine
  std::vector<ExecutionContext> i_e;         // policy_sample / refine
  int attempt = 0;                           // policy_sample ordinal (0-based)

  std::uint64_t seed = 0;
};

struct PolicyChoice {
  std::string policy_id;
  std::map<std::string, std::string> hyperparameters;
};

struct RefineOutcome {
  std::optional<ActionModel> model;  // nullopt = no refinement
  std::string note;
};

class ModelProposer {
 public:
  virtual ~ModelProposer() = default;
  virtual std::vector<ActionModel> propose(const ProposerRequest& request) = 0;
};

class PolicySampler {
 public:
  virtual ~PolicySampler() = default;
  virtual PolicyChoice sample(const ProposerRequest& request) = 0;
};

class ModelRefiner {
 public:
  virtual ~ModelRefiner() = default;
  virtual RefineOutcome refine(const ProposerRequest& request) = 0;
};

struct ProposerBundle {
  std::shared_ptr<ModelProposer> proposer;
  std::shared_ptr<PolicySampler> sampler;
  std::shared_ptr<ModelRefiner> refiner;
  std::string label;
};

/// Enumerates the valid model space lazily in canonical order
/// (pre, add, del ascending as bit masks), skipping already-proposed
/// triples. Policy sampling walks the catalog in order.
ProposerBundle make_exhaustive_proposer();

/// Goal- and frontier-directed proposals built from the policy catalog's
/// descriptions, keyword-overlap policy sampling with failure penalties,
/// and execution-diff model refinement.
ProposerBundle make_heuristic_proposer();

/// Seeded random valid proposals; uniform policy choice; no refinement.
ProposerBundle make_random_proposer();

/// Reads the environment's declared policy transitions and proposes
/// exactly those. Intended for tests and pipeline baselines; every read
/// is counted by the environment's audit hook.
ProposerBundle make_oracle_proposer(const Environment& env);

/// Mention test used by the heuristic proposers: an atom counts as
/// mentioned when all of its words (predicate split on case boundaries,
/// plus the arguments) occur within a short token window, with the
/// arguments appearing in declaration order. "left holding the bottle"
/// mentions Holding(left,bottle); "holding red with green clear" does not
/// mention Holding(green).
StateSet mentioned_atoms(const std::string& text, const DomainUniverse& universe);

}  // namespace btground
