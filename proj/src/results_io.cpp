#include "btground/results_io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace btground {

namespace {

using nlohmann::json;

std::string predicate_of(const std::string& name) {
  auto paren = name.find('(');
  return paren == std::string::npos ? name : name.substr(0, paren);
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void collect_attributes(const BTNode& node, const DomainUniverse& u,
                        std::set<std::string>& act_preds,
                        std::set<std::string>& cond_preds) {
  switch (node.kind()) {
    case BTNode::Kind::Action:
      act_preds.insert(predicate_of(node.action_name()));
      return;
    case BTNode::Kind::Condition:
      for (std::size_t i : node.condition_set().indices()) {
        cond_preds.insert(u.at(i).predicate);
      }
      return;
    default:
      for (const BTNode& child : node.children()) {
        collect_attributes(child, u, act_preds, cond_preds);
      }
  }
}

json config_json(const RunConfigEcho& c) {
  return json{{"domain", c.domain_path},
              {"tasks", c.taskset_path},
              {"algo", c.algo},
              {"proposer", c.proposer},
              {"seed", c.seed},
              {"k_trials", c.k_trials},
              {"n_max", c.n_max},
              {"max_cycles", c.max_cycles},
              {"batch", c.batch},
              {"fill_prob", c.fill_prob},
              {"ablate_planning_contexts", c.ablate_planning_contexts},
              {"ablate_execution_contexts", c.ablate_execution_contexts},
              {"strict_consistency", c.strict_consistency}};
}

RunConfigEcho config_from_json(const json& j) {
  RunConfigEcho c;
  c.domain_path = j.value("domain", "");
  c.taskset_path = j.value("tasks", "");
  c.algo = j.value("algo", "cabto");
  c.proposer = j.value("proposer", "heuristic");
  c.seed = j.value("seed", std::uint64_t{0});
  c.k_trials = j.value("k_trials", 4);
  c.n_max = j.value("n_max", 3);
  c.max_cycles = j.value("max_cycles", 16);
  c.batch = j.value("batch", std::size_t{8});
  c.fill_prob = j.value("fill_prob", 0.5);
  c.ablate_planning_contexts = j.value("ablate_planning_contexts", false);
  c.ablate_execution_contexts = j.value("ablate_execution_contexts", false);
  c.strict_consistency = j.value("strict_consistency", false);
  return c;
}

}  // namespace

TaskAttributes solution_attributes(const BTNode& tree, const Task& task,
                                   std::span<const ActionModel> models,
                                   const DomainUniverse& universe) {
  TaskAttributes out;
  std::set<std::string> act_preds, cond_preds;
  collect_attributes(tree, universe, act_preds, cond_preds);
  out.acts = static_cast<int>(act_preds.size());
  out.conds = static_cast<int>(cond_preds.size());

  ActionTable table;
  for (const ActionModel& m : models) table.emplace(m.name, m);
  StateSet s = task.start;
  const std::size_t budget = verify_budget_for(tree);
  for (std::size_t t = 0; t < budget; ++t) {
    TickResult r = tick(tree, s, table);
    if (r.status != BTStatus::Running) break;
    const ActionModel& h = table.at(*r.active_action);
    if (!holds(h.pre, s)) break;
    s = apply_model(h, s);
    ++out.steps;
  }
  return out;
}

ResultsFile build_results(const GroundingReport& report, const GroundingProblem& problem,
                          const RunConfigEcho& config) {
  const DomainUniverse& u = *problem.universe;
  ResultsFile out;
  out.config = config;
  out.complete = report.complete;
  out.feedback_cycles = report.feedback_cycles;
  out.proposals_made = report.proposals_made;
  out.policies_sampled = report.policies_sampled;
  out.refinements = report.refinements;
  out.refinement_notes = report.refinement_notes;
  out.condition_atoms = u.atom_texts(report.system.condition_atoms);

  for (const GroundedAction& a : report.system.actions) {
    out.actions.push_back({a.model.name, u.atom_texts(a.model.pre),
                           u.atom_texts(a.model.add), u.atom_texts(a.model.del),
                           a.policy_id, a.validation_seed});
  }

  const std::vector<ActionModel> models = report.system.models();
  std::size_t solved = 0;
  for (const Task& t : problem.tasks) {
    TaskRecord record;
    record.id = t.id;
    auto it = report.task_results.find(t.id);
    if (it != report.task_results.end() && it->second.solved()) {
      record.solved = true;
      ++solved;
      record.bt_text = render_bt(it->second.solution(), u);
      TaskAttributes attrs = solution_attributes(it->second.solution(), t, models, u);
      record.acts = attrs.acts;
      record.conds = attrs.conds;
      record.steps = attrs.steps;
    } else if (it != report.task_results.end()) {
      const PlanningContext& ctx = it->second.context();
      record.expanded_conditions = ctx.expanded_conditions;
      for (const StateSet& c : ctx.frontier) record.frontier.push_back(u.atom_texts(c));
    }
    out.tasks.push_back(std::move(record));
  }
  out.solved_fraction = problem.tasks.empty()
                            ? 1.0
                            : static_cast<double>(solved) / problem.tasks.size();
  out.timestamp = now_iso8601();
  out.wall_seconds = report.wall_seconds;
  return out;
}

std::string serialize_results(const ResultsFile& r) {
  json j;
  j["_timestamp"] = r.timestamp;
  j["_wall_seconds"] = r.wall_seconds;
  j["schema"] = "btground-results-v1";
  j["config"] = config_json(r.config);
  j["complete"] = r.complete;
  j["feedback_cycles"] = r.feedback_cycles;
  j["proposals_made"] = r.proposals_made;
  j["policies_sampled"] = r.policies_sampled;
  j["refinements"] = r.refinements;
  j["refinement_notes"] = r.refinement_notes;
  j["condition_atoms"] = r.condition_atoms;

  json actions = json::array();
  for (const ActionRecord& a : r.actions) {
    actions.push_back({{"name", a.name},
                       {"pre", a.pre},
                       {"add", a.add},
                       {"del", a.del},
                       {"policy", a.policy_id},
                       {"validation_seed", a.validation_seed}});
  }
  j["actions"] = actions;

  json tasks = json::array();
  for (const TaskRecord& t : r.tasks) {
    json entry = {{"id", t.id}, {"solved", t.solved}};
    if (t.solved) {
      entry["bt"] = t.bt_text;
      entry["acts"] = t.acts;
      entry["conds"] = t.conds;
      entry["steps"] = t.steps;
    } else {
      entry["expanded_conditions"] = t.expanded_conditions;
      entry["frontier"] = t.frontier;
    }
    tasks.push_back(entry);
  }
  j["tasks"] = tasks;
  j["solved_fraction"] = r.solved_fraction;
  return j.dump(2) + "\n";
}

ResultsFile parse_results_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad results file: ") + e.what(), 1, 1);
  }
  ResultsFile r;
  r.timestamp = j.value("_timestamp", "");
  r.wall_seconds = j.value("_wall_seconds", 0.0);
  r.config = config_from_json(j.value("config", json::object()));
  r.complete = j.value("complete", false);
  r.feedback_cycles = j.value("feedback_cycles", 0);
  r.proposals_made = j.value("proposals_made", 0);
  r.policies_sampled = j.value("policies_sampled", 0);
  r.refinements = j.value("refinements", 0);
  r.refinement_notes = j.value("refinement_notes", std::vector<std::string>{});
  r.condition_atoms = j.value("condition_atoms", std::vector<std::string>{});
  for (const auto& a : j.value("actions", json::array())) {
    ActionRecord record;
    record.name = a.value("name", "");
    record.pre = a.value("pre", std::vector<std::string>{});
    record.add = a.value("add", std::vector<std::string>{});
    record.del = a.value("del", std::vector<std::string>{});
    record.policy_id = a.value("policy", "");
    record.validation_seed = a.value("validation_seed", std::uint64_t{0});
    r.actions.push_back(std::move(record));
  }
  for (const auto& t : j.value("tasks", json::array())) {
    TaskRecord record;
    record.id = t.value("id", "");
    record.solved = t.value("solved", false);
    record.bt_text = t.value("bt", "");
    record.acts = t.value("acts", 0);
    record.conds = t.value("conds", 0);
    record.steps = t.value("steps", 0);
    record.expanded_conditions = t.value("expanded_conditions", 0);
    record.frontier = t.value("frontier", std::vector<std::vector<std::string>>{});
    r.tasks.push_back(std::move(record));
  }
  r.solved_fraction = j.value("solved_fraction", 0.0);
  return r;
}

ResultsFile load_results_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open results file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_results_text(ss.str());
}

void write_results_file(const std::string& path, const ResultsFile& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write results file: " + path);
  out << serialize_results(results);
}

BTSystem system_from_results(const ResultsFile& results, const DomainUniverse& universe) {
  BTSystem system;
  system.condition_atoms = universe.set_of(results.condition_atoms);
  for (const ActionRecord& a : results.actions) {
    ActionModel m;
    m.name = a.name;
    m.pre = universe.set_of(a.pre);
    m.add = universe.set_of(a.add);
    m.del = universe.set_of(a.del);
    system.actions.push_back({std::move(m), a.policy_id, a.validation_seed});
  }
  return system;
}

}  // namespace btground
