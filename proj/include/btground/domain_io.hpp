#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btground/grounding.hpp"
#include "btground/sim_env.hpp"
#include "btground/universe.hpp"

namespace btground {

/// Parsed domain file: the proposition universe with object descriptions,
/// validity rule toggles and mutex groups, an optional explicit model
/// list, and the policy library with hidden transitions.
struct DomainFile {
  std::string name;
  UniversePtr universe;
  ValidityRules rules;
  std::optional<std::vector<ActionModel>> models;
  std::vector<ControlPolicy> policies;
};

struct TaskSetFile {
  std::string name;
  std::string domain_ref;
  std::vector<Task> tasks;
};

DomainFile parse_domain(const std::string& text);
std::string serialize_domain(const DomainFile& domain);

TaskSetFile parse_taskset(const std::string& text, const DomainUniverse& universe);
std::string serialize_taskset(const TaskSetFile& tasks, const DomainUniverse& universe);

DomainFile load_domain_file(const std::string& path);
TaskSetFile load_taskset_file(const std::string& path, const DomainUniverse& universe);

/// Indented text form: `?` fallback, `->` sequence, `{a, b}` condition
/// leaves (atoms sorted by index), bare names for actions. Two-space
/// indent per depth; parse_bt reads the same shape back.
std::string render_bt(const BTNode& tree, const DomainUniverse& universe);
BTNode parse_bt(const std::string& text, const DomainUniverse& universe);

/// Graphviz description for external renderers.
std::string render_bt_dot(const BTNode& tree, const DomainUniverse& universe);

Environment make_environment(const DomainFile& domain, EnvConfig cfg = {});
GroundingProblem make_problem(const DomainFile& domain, const TaskSetFile& tasks);

}  // namespace btground
