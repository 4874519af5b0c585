#pragma once

#include <string>
#include <vector>

#include "btground/domain_io.hpp"
#include "btground/grounding.hpp"

namespace btground {

/// Everything needed to rerun a grounding invocation.
struct RunConfigEcho {
  std::string domain_path;
  std::string taskset_path;
  std::string algo = "cabto";
  std::string proposer = "heuristic";
  std::uint64_t seed = 0;
  int k_trials = 4;
  int n_max = 3;
  int max_cycles = 16;
  std::size_t batch = 8;
  double fill_prob = 0.5;
  bool ablate_planning_contexts = false;
  bool ablate_execution_contexts = false;
  bool strict_consistency = false;
};

struct ActionRecord {
  std::string name;
  std::vector<std::string> pre, add, del;
  std::string policy_id;
  std::uint64_t validation_seed = 0;
};

struct TaskRecord {
  std::string id;
  bool solved = false;
  std::string bt_text;  // solved tasks: rendered solution
  int acts = 0;         // distinct action predicates in the solution
  int conds = 0;        // distinct condition predicates in the solution
  int steps = 0;        // actions executed on the nominal closed loop
  int expanded_conditions = 0;                      // failed tasks
  std::vector<std::vector<std::string>> frontier;   // failed tasks
};

struct ResultsFile {
  RunConfigEcho config;
  bool complete = false;
  int feedback_cycles = 0;
  int proposals_made = 0;
  int policies_sampled = 0;
  int refinements = 0;
  std::vector<std::string> refinement_notes;
  std::vector<std::string> condition_atoms;
  std::vector<ActionRecord> actions;
  std::vector<TaskRecord> tasks;
  double solved_fraction = 0.0;
  std::string timestamp;
  double wall_seconds = 0.0;
};

struct TaskAttributes {
  int acts = 0;
  int conds = 0;
  int steps = 0;
};

/// Acts/Conds/Steps of one solution tree: distinct action predicates,
/// distinct condition predicates, and the executed-action count of the
/// nominal closed-loop run.
TaskAttributes solution_attributes(const BTNode& tree, const Task& task,
                                   std::span<const ActionModel> models,
                                   const DomainUniverse& universe);

ResultsFile build_results(const GroundingReport& report, const GroundingProblem& problem,
                          const RunConfigEcho& config);

/// Canonical pretty JSON. The volatile fields (_timestamp, _wall_seconds)
/// occupy single lines so reproducibility checks can mask them.
std::string serialize_results(const ResultsFile& results);
ResultsFile parse_results_text(const std::string& text);

ResultsFile load_results_file(const std::string& path);
void write_results_file(const std::string& path, const ResultsFile& results);

/// Rebuild the grounded system against a concrete universe.
BTSystem system_from_results(const ResultsFile& results, const DomainUniverse& universe);

}  // namespace btground
