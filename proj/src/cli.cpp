#include "btground/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "btground/domain_io.hpp"
#include "btground/external_proposer.hpp"
#include "btground/results_io.hpp"

namespace btground {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kIncomplete = 1;
constexpr int kInputError = 2;
constexpr int kResourceError = 3;

struct GroundOptions {
  std::string domain_path;
  std::string tasks_path;
  std::string algo = "cabto";
  std::string proposer = "heuristic";
  std::string out_path = "results.json";
  std::uint64_t seed = 0;
  int k_trials = 4;
  int n_max = 3;
  int max_cycles = 16;
  std::size_t batch = 8;
  double fill_prob = 0.5;
  std::uint64_t naive_cap = 10'000'000;
  int proposer_timeout_ms = 120000;
  bool ablate_planning = false;
  bool ablate_execution = false;
  bool strict = false;
  bool redact = false;
};

ProposerBundle select_proposer(const std::string& name, const Environment& env,
                               int timeout_ms) {
  if (name == "exhaustive") return make_exhaustive_proposer();
  if (name == "heuristic") return make_heuristic_proposer();
  if (name == "random") return make_random_proposer();
  if (name == "oracle") return make_oracle_proposer(env);
  if (name.rfind("external:", 0) == 0) return make_external_proposer(name, timeout_ms);
  throw DomainError("unknown proposer '" + name + "'");
}

/// Resolve `ref` relative to the directory of `anchor` when it does not
/// resolve as given.
std::string resolve_near(const std::string& ref, const std::string& anchor) {
  if (fs::exists(ref)) return ref;
  fs::path near = fs::path(anchor).parent_path() / ref;
  if (fs::exists(near)) return near.string();
  return ref;
}

int run_ground(const GroundOptions& opt) {
  DomainFile domain = load_domain_file(opt.domain_path);
  TaskSetFile tasks =
      load_taskset_file(resolve_near(opt.tasks_path, opt.domain_path), *domain.universe);

  EnvConfig env_cfg;
  env_cfg.fill_prob = opt.fill_prob;
  env_cfg.strict_consistency = opt.strict;
  Environment env = make_environment(domain, env_cfg);
  GroundingProblem problem = make_problem(domain, tasks);

  GroundingConfig cfg;
  cfg.seed = opt.seed;
  cfg.k_trials = opt.k_trials;
  cfg.n_max = opt.n_max;
  cfg.max_cycles = opt.max_cycles;
  cfg.batch = opt.batch;
  cfg.naive_cap = opt.naive_cap;
  cfg.ablate_planning_contexts = opt.ablate_planning;
  cfg.ablate_execution_contexts = opt.ablate_execution;

  GroundingReport report;
  if (opt.algo == "naive") {
    report = report_for_system(naive_ground(problem, env, cfg), problem, cfg);
  } else if (opt.algo == "cabto") {
    ProposerBundle bundle = select_proposer(opt.proposer, env, opt.proposer_timeout_ms);
    report = cabto_ground(problem, env, bundle, cfg);
  } else {
    throw DomainError("unknown algorithm '" + opt.algo + "' (expected naive or cabto)");
  }

  RunConfigEcho echo;
  echo.domain_path = opt.domain_path;
  echo.taskset_path = opt.tasks_path;
  echo.algo = opt.algo;
  echo.proposer = opt.proposer;
  echo.seed = opt.seed;
  echo.k_trials = opt.k_trials;
  echo.n_max = opt.n_max;
  echo.max_cycles = opt.max_cycles;
  echo.batch = opt.batch;
  echo.fill_prob = opt.fill_prob;
  echo.ablate_planning_contexts = opt.ablate_planning;
  echo.ablate_execution_contexts = opt.ablate_execution;
  echo.strict_consistency = opt.strict;

  write_results_file(opt.out_path, build_results(report, problem, echo));

  std::size_t solved = 0;
  for (const auto& [id, result] : report.task_results) {
    if (result.solved()) ++solved;
  }
  std::cout << "grounded " << report.system.actions.size() << " actions; solved "
            << solved << "/" << problem.tasks.size() << " tasks; feedback cycles "
            << report.feedback_cycles << "; complete "
            << (report.complete ? "true" : "false") << "\n";
  std::cout << "results written to " << opt.out_path << "\n";

  if (opt.redact) {
    const std::size_t reads = env.hidden_read_count();
    if (opt.proposer == "oracle") {
      std::cout << "redaction audit: oracle proposer performed " << reads
                << " privileged reads (expected for this proposer)\n";
    } else if (reads == 0) {
      std::cout << "redaction audit: hidden policy fields were never read\n";
    } else {
      std::cerr << "redaction audit FAILED: " << reads
                << " hidden-field reads on a non-oracle run\n";
      return kIncomplete;
    }
  }
  return report.complete ? kOk : kIncomplete;
}

struct LoadedRun {
  DomainFile domain;
  TaskSetFile tasks;
  ResultsFile results;
};

LoadedRun load_run(const std::string& results_path, std::string domain_override,
                   std::string tasks_override) {
  LoadedRun run{DomainFile{}, TaskSetFile{}, load_results_file(results_path)};
  std::string domain_path = domain_override.empty()
                                ? resolve_near(run.results.config.domain_path, results_path)
                                : domain_override;
  run.domain = load_domain_file(domain_path);
  std::string tasks_path = tasks_override.empty()
                               ? resolve_near(run.results.config.taskset_path, results_path)
                               : tasks_override;
  tasks_path = resolve_near(tasks_path, domain_path);
  run.tasks = load_taskset_file(tasks_path, *run.domain.universe);
  return run;
}

const Task& find_task(const TaskSetFile& tasks, const std::string& id) {
  for (const Task& t : tasks.tasks) {
    if (t.id == id) return t;
  }
  throw DomainError("task '" + id + "' not found in task set");
}

int run_plan(const std::string& results_path, const std::string& domain_path,
             const std::string& tasks_path, const std::string& task_id, bool dot) {
  std::vector<ActionModel> models;
  DomainFile domain;
  TaskSetFile tasks;
  if (!results_path.empty()) {
    LoadedRun run = load_run(results_path, domain_path, tasks_path);
    models = system_from_results(run.results, *run.domain.universe).models();
    domain = std::move(run.domain);
    tasks = std::move(run.tasks);
  } else {
    if (domain_path.empty() || tasks_path.empty()) {
      throw DomainError("plan needs --results, or --domain and --tasks");
    }
    domain = load_domain_file(domain_path);
    tasks = load_taskset_file(resolve_near(tasks_path, domain_path), *domain.universe);
    if (!domain.models) {
      throw DomainError("domain declares no explicit models; plan from a results file");
    }
    models = *domain.models;
  }

  const Task& task = find_task(tasks, task_id);
  PlanResult result = bt_expansion(task, models);
  if (!result.solved()) {
    std::cerr << "no solution: expanded " << result.context().expanded_conditions
              << " conditions, " << result.context().frontier.size()
              << " unmet conditions remain\n";
    for (const StateSet& c : result.context().frontier) {
      std::cerr << "  unmet: " << domain.universe->set_text(c) << "\n";
    }
    return kIncomplete;
  }
  std::cout << (dot ? render_bt_dot(result.solution(), *domain.universe)
                    : render_bt(result.solution(), *domain.universe));
  return kOk;
}

int run_execute(const std::string& results_path, const std::string& domain_path,
                const std::string& tasks_path, const std::string& task_id,
                std::uint64_t seed, std::size_t tick_budget, double fill_prob) {
  LoadedRun run = load_run(results_path, domain_path, tasks_path);
  EnvConfig env_cfg;
  env_cfg.fill_prob = fill_prob;
  Environment env = make_environment(run.domain, env_cfg);
  BTSystem system = system_from_results(run.results, *run.domain.universe);
  const Task& task = find_task(run.tasks, task_id);

  PlanResult plan = bt_expansion(task, system.models());
  if (!plan.solved()) {
    std::cerr << "task '" << task_id << "' has no solution over the grounded system\n";
    return kIncomplete;
  }
  ExecutionTrace trace =
      env.execute_bt(plan.solution(), task.start, system.bindings(), tick_budget, seed);
  for (const TraceStep& step : trace.steps) {
    std::cout << "t=" << step.tick << " status=" << to_string(step.status)
              << " state=" << run.domain.universe->set_text(step.state);
    if (step.action) std::cout << " action=" << *step.action;
    std::cout << "\n";
  }
  if (!trace.complete) {
    std::cout << "trace incomplete: tick budget exhausted\n";
    return kIncomplete;
  }
  const bool goal_met =
      trace.final_status == BTStatus::Success && holds(task.goal, trace.final_state);
  std::cout << "final: " << to_string(trace.final_status)
            << " goal " << (goal_met ? "reached" : "not reached") << "\n";
  return goal_met ? kOk : kIncomplete;
}

int run_metrics(const std::vector<std::string>& files) {
  // Group runs by (taskset, ablation arm) and print one row per taskset
  // in the ASR/CSR/FC layout, pairing the arms when both exist.
  struct Group {
    std::vector<ResultsFile> runs;
  };
  std::map<std::string, std::map<std::string, Group>> table;
  for (const std::string& path : files) {
    ResultsFile r = load_results_file(path);
    std::string arm = r.config.ablate_planning_contexts ? "wo" : "w";
    std::string key = r.config.domain_path + " " + r.config.taskset_path;
    table[key][arm].runs.push_back(std::move(r));
  }

  auto metrics_of = [](const Group& g) {
    double asr = 0.0, fc = 0.0;
    double csr = 0.0;
    for (const ResultsFile& r : g.runs) {
      asr += r.solved_fraction;
      fc += r.feedback_cycles;
      if (r.complete) csr += 1.0;
    }
    const double n = static_cast<double>(g.runs.size());
    return std::tuple<double, double, double>(100.0 * asr / n, 100.0 * csr / n, fc / n);
  };

  std::printf("%-28s %5s %5s %5s  %-16s %-16s %-6s\n", "TaskSet", "Acts", "Conds",
              "Steps", "ASR(w/o -> w)", "CSR(w/o -> w)", "FC");
  for (const auto& [key, arms] : table) {
    // Task attributes averaged over solved tasks of the best-informed arm.
    const Group* attr_group = nullptr;
    if (auto it = arms.find("w"); it != arms.end()) attr_group = &it->second;
    else if (auto it2 = arms.find("wo"); it2 != arms.end()) attr_group = &it2->second;
    double acts = 0, conds = 0, steps = 0;
    int solved = 0;
    if (attr_group) {
      for (const ResultsFile& r : attr_group->runs) {
        for (const TaskRecord& t : r.tasks) {
          if (!t.solved) continue;
          acts += t.acts;
          conds += t.conds;
          steps += t.steps;
          ++solved;
        }
      }
    }
    if (solved > 0) {
      acts /= solved;
      conds /= solved;
      steps /= solved;
    }

    std::string asr_text, csr_text, fc_text;
    auto fmt = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f%%", v);
      return std::string(buf);
    };
    if (arms.contains("wo") && arms.contains("w")) {
      auto [asr_wo, csr_wo, fc_wo] = metrics_of(arms.at("wo"));
      auto [asr_w, csr_w, fc_w] = metrics_of(arms.at("w"));
      asr_text = fmt(asr_wo) + " -> " + fmt(asr_w);
      csr_text = fmt(csr_wo) + " -> " + fmt(csr_w);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", fc_w);
      fc_text = buf;
    } else {
      const Group& only = arms.begin()->second;
      auto [asr, csr, fc] = metrics_of(only);
      asr_text = fmt(asr);
      csr_text = fmt(csr);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", fc);
      fc_text = buf;
    }
    std::printf("%-28s %5.1f %5.1f %5.1f  %-16s %-16s %-6s\n", key.c_str(), acts, conds,
                steps, asr_text.c_str(), csr_text.c_str(), fc_text.c_str());
  }
  return kOk;
}

int run_enumerate(const std::string& domain_path, bool core_only, bool no_adp,
                  bool no_dsp, std::size_t list_limit, std::uint64_t cap) {
  DomainFile domain = load_domain_file(domain_path);
  ValidityRules rules = domain.rules;
  if (core_only) {
    rules.add_disjoint_pre = false;
    rules.del_subset_pre = false;
    rules.mutex_groups.clear();
  }
  if (no_adp) rules.add_disjoint_pre = false;
  if (no_dsp) rules.del_subset_pre = false;

  const std::size_t n = domain.universe->size();
  const std::uint64_t count = count_valid_models(n, rules, cap);
  std::cout << "universe: " << n << " propositions\n";
  std::cout << "candidates (2^n*3^n): " << candidate_count(n) << "\n";
  std::cout << "valid models: " << count << "\n";
  if (list_limit > 0) {
    std::size_t printed = 0;
    for_each_valid_model(n, rules, [&](const ActionModel& m) {
      std::cout << m.name << ": pre " << domain.universe->set_text(m.pre) << " add "
                << domain.universe->set_text(m.add) << " del "
                << domain.universe->set_text(m.del) << "\n";
      return ++printed < list_limit;
    });
  }
  return kOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"behavior-tree grounding toolkit"};
  app.require_subcommand(1);

  GroundOptions ground;
  CLI::App* cmd_ground = app.add_subcommand("ground", "construct a BT system");
  cmd_ground->add_option("--domain", ground.domain_path)->required();
  cmd_ground->add_option("--tasks", ground.tasks_path)->required();
  cmd_ground->add_option("--algo", ground.algo)->check(CLI::IsMember({"naive", "cabto"}));
  cmd_ground->add_option("--proposer", ground.proposer);
  cmd_ground->add_option("--seed", ground.seed);
  cmd_ground->add_option("--nmax", ground.n_max);
  cmd_ground->add_option("--k-trials", ground.k_trials);
  cmd_ground->add_option("--max-cycles", ground.max_cycles);
  cmd_ground->add_option("--batch", ground.batch);
  cmd_ground->add_option("--fill-prob", ground.fill_prob);
  cmd_ground->add_option("--naive-cap", ground.naive_cap);
  cmd_ground->add_option("--proposer-timeout", ground.proposer_timeout_ms);
  cmd_ground->add_option("--out", ground.out_path);
  cmd_ground->add_flag("--ablate-planning-contexts", ground.ablate_planning);
  cmd_ground->add_flag("--ablate-execution-contexts", ground.ablate_execution);
  cmd_ground->add_flag("--strict-consistency", ground.strict);
  cmd_ground->add_flag("--redact", ground.redact);

  std::string plan_results, plan_domain, plan_tasks, plan_task;
  bool plan_dot = false;
  CLI::App* cmd_plan = app.add_subcommand("plan", "plan one task and render the tree");
  cmd_plan->add_option("--results", plan_results);
  cmd_plan->add_option("--domain", plan_domain);
  cmd_plan->add_option("--tasks", plan_tasks);
  cmd_plan->add_option("--task", plan_task)->required();
  cmd_plan->add_flag("--dot", plan_dot);

  std::string run_results, run_domain, run_tasks, run_task;
  std::uint64_t run_seed = 0;
  std::size_t run_budget = 200;
  double run_fill = 0.5;
  CLI::App* cmd_run = app.add_subcommand("run", "execute a planned tree in the environment");
  cmd_run->add_option("--results", run_results)->required();
  cmd_run->add_option("--domain", run_domain);
  cmd_run->add_option("--tasks", run_tasks);
  cmd_run->add_option("--task", run_task)->required();
  cmd_run->add_option("--seed", run_seed);
  cmd_run->add_option("--tick-budget", run_budget);
  cmd_run->add_option("--fill-prob", run_fill);

  std::vector<std::string> metric_files;
  CLI::App* cmd_metrics = app.add_subcommand("metrics", "aggregate results files");
  cmd_metrics->add_option("files", metric_files)->required()->expected(-1);

  std::string enum_domain;
  bool enum_core = false, enum_no_adp = false, enum_no_dsp = false;
  std::size_t enum_list = 0;
  std::uint64_t enum_cap = 10'000'000;
  CLI::App* cmd_enum = app.add_subcommand("enumerate", "count or list the valid model space");
  cmd_enum->add_option("--domain", enum_domain)->required();
  cmd_enum->add_flag("--core-only", enum_core,
                     "keep only the add/del disjointness constraint");
  cmd_enum->add_flag("--no-add-disjoint-pre", enum_no_adp);
  cmd_enum->add_flag("--no-del-subset-pre", enum_no_dsp);
  cmd_enum->add_option("--list", enum_list);
  cmd_enum->add_option("--cap", enum_cap);

  try {
    std::vector<std::string> argv_copy = args;
    std::vector<char*> argv;
    argv.reserve(argv_copy.size());
    for (std::string& s : argv_copy) argv.push_back(s.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (cmd_ground->parsed()) return run_ground(ground);
    if (cmd_plan->parsed()) {
      return run_plan(plan_results, plan_domain, plan_tasks, plan_task, plan_dot);
    }
    if (cmd_run->parsed()) {
      return run_execute(run_results, run_domain, run_tasks, run_task, run_seed,
                         run_budget, run_fill);
    }
    if (cmd_metrics->parsed()) return run_metrics(metric_files);
    if (cmd_enum->parsed()) {
      return run_enumerate(enum_domain, enum_core, enum_no_adp, enum_no_dsp, enum_list,
                           enum_cap);
    }
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kResourceError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args);
}

}  // namespace btground
