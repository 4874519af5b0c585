#include "btground/grounding.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <unordered_set>

#include "btground/domain_io.hpp"
#include "btground/rng.hpp"

namespace btground {

namespace {

constexpr std::uint64_t kUnbounded = UINT64_MAX;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kUnbounded / a) return kUnbounded;
  return a * b;
}

std::uint64_t model_seed(std::uint64_t master, const ActionModel& h,
                         const std::string& policy_id) {
  return derive_seed(master, h.triple_hash(), fnv1a64(policy_id));
}

/// Tracks the unexplored model space H_U as "members not yet proposed".
/// Intensional spaces are never materialized; membership is validity.
class ModelSpace {
 public:
  ModelSpace(const GroundingProblem& problem, std::uint64_t feasibility_cap) {
    rules_ = problem.rules;
    n_ = problem.universe->size();
    if (problem.explicit_models) {
      explicit_ = std::vector<ActionModel>{};
      for (const ActionModel& m : *problem.explicit_models) {
        if (is_valid_model(m, rules_)) explicit_->push_back(m);
      }
      total_ = explicit_->size();
    } else if (candidate_count(n_) <= feasibility_cap) {
      total_ = count_valid_models(n_, rules_, feasibility_cap);
    } else {
      total_ = kUnbounded;
    }
  }

  bool is_member(const ActionModel& m) const {
    if (!is_valid_model(m, rules_)) return false;
    if (!explicit_) return true;
    for (const ActionModel& e : *explicit_) {
      if (e.same_triple(m)) return true;
    }
    return false;
  }

  bool already_proposed(const ActionModel& m) const {
    if (!hashes_.contains(m.triple_hash())) return false;
    for (const ActionModel& p : proposed_) {
      if (p.same_triple(m)) return true;
    }
    return false;
  }

  void mark_proposed(const ActionModel& m) {
    hashes_.insert(m.triple_hash());
    proposed_.push_back(m);
  }

  bool exhausted() const {
    return total_ != kUnbounded && proposed_.size() >= total_;
  }

  std::uint64_t remaining() const {
    if (total_ == kUnbounded) return kUnbounded;
    return total_ - std::min<std::uint64_t>(total_, proposed_.size());
  }

  const std::vector<ActionModel>& proposed() const { return proposed_; }
  const std::optional<std::vector<ActionModel>>& explicit_models() const {
    return explicit_;
  }

 private:
  ValidityRules rules_;
  std::size_t n_ = 0;
  std::optional<std::vector<ActionModel>> explicit_;
  std::uint64_t total_ = 0;
  std::vector<ActionModel> proposed_;
  std::unordered_set<std::uint64_t> hashes_;
};

std::vector<ActionModel> models_of(std::span<const GroundedAction> actions) {
  std::vector<ActionModel> out;
  out.reserve(actions.size());
  for (const GroundedAction& a : actions) out.push_back(a.model);
  return out;
}

StateSet condition_union(std::span<const GroundedAction> actions, std::size_t n) {
  StateSet c(n);
  for (const GroundedAction& a : actions) {
    c |= a.model.pre;
    c |= a.model.add;
    c |= a.model.del;
  }
  return c;
}

}  // namespace

std::vector<ActionModel> BTSystem::models() const {
  std::vector<ActionModel> out;
  out.reserve(actions.size());
  for (const GroundedAction& a : actions) out.push_back(a.model);
  return out;
}

std::map<std::string, ActionBinding> BTSystem::bindings() const {
  std::map<std::string, ActionBinding> out;
  for (const GroundedAction& a : actions) {
    out.emplace(a.model.name, ActionBinding{a.model, a.policy_id});
  }
  return out;
}

std::uint64_t candidate_count(std::size_t n) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < n; ++i) v = saturating_mul(v, 6);
  return v;
}

void for_each_valid_model(std::size_t n, const ValidityRules& rules,
                          const std::function<bool(const ActionModel&)>& visit) {
  if (n > 20) throw ResourceError("model enumeration: universe too large (n > 20)");
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t pre = 0; pre < limit; ++pre) {
    for (std::uint64_t add = 0; add < limit; ++add) {
      for (std::uint64_t del = 0; del < limit; ++del) {
        if ((add & del) != 0) continue;
        ActionModel m;
        m.pre = StateSet::from_mask(n, pre);
        m.add = StateSet::from_mask(n, add);
        m.del = StateSet::from_mask(n, del);
        if (!is_valid_model(m, rules)) continue;
        std::uint64_t index = (pre << (2 * n)) | (add << n) | del;
        std::string id = std::to_string(index);
        const int digits = std::to_string(saturating_mul(limit, limit * limit) - 1).size();
        m.name = "h" + std::string(digits - id.size(), '0') + id;
        if (!visit(m)) return;
      }
    }
  }
}

std::uint64_t count_valid_models(std::size_t n, const ValidityRules& rules,
                                 std::uint64_t cap) {
  if (candidate_count(n) > cap) {
    throw ResourceError("model space too large: " + std::to_string(candidate_count(n)) +
                        " candidates exceed the cap of " + std::to_string(cap));
  }
  std::uint64_t count = 0;
  for_each_valid_model(n, rules, [&count](const ActionModel&) {
    ++count;
    return true;
  });
  return count;
}

std::size_t verify_budget_for(const BTNode& tree) {
  const std::size_t branches =
      tree.kind() == BTNode::Kind::Fallback ? tree.children().size() : 1;
  return 2 * branches + 2;
}

BTSystem naive_ground(const GroundingProblem& problem, const Environment& env,
                      const GroundingConfig& cfg) {
  const std::size_t n = problem.universe->size();
  std::vector<GroundedAction> actions;

  auto try_ground = [&](const ActionModel& h) {
    for (const PolicyInfo& p : problem.policy_catalog) {
      const std::uint64_t seed = model_seed(cfg.seed, h, p.id);
      auto [ok, contexts] = env.validate_consistency(h, p.id, cfg.k_trials, seed);
      if (ok) {
        actions.push_back({h, p.id, seed});
        break;
      }
    }
  };

  if (problem.explicit_models) {
    for (const ActionModel& h : *problem.explicit_models) {
      if (is_valid_model(h, problem.rules)) try_ground(h);
    }
  } else {
    if (candidate_count(n) > cfg.naive_cap) {
      throw ResourceError("naive_ground: " + std::to_string(candidate_count(n)) +
                          " candidate models exceed the cap of " +
                          std::to_string(cfg.naive_cap));
    }
    for_each_valid_model(n, problem.rules, [&](const ActionModel& h) {
      try_ground(h);
      return true;
    });
  }

  BTSystem system;
  system.condition_atoms = condition_union(actions, n);
  system.actions = std::move(actions);
  return system;
}

bool all_solvable(std::span<const Task> tasks, std::span<const GroundedAction> actions,
                  const PlannerConfig& cfg) {
  const std::vector<ActionModel> models = models_of(actions);
  auto results = plan_all(tasks, models, cfg);
  for (const Task& t : tasks) {
    auto it = results.find(t.id);
    if (it == results.end() || !it->second.solved()) return false;
    if (!verify_solution(it->second.solution(), t, models,
                         verify_budget_for(it->second.solution()))) {
      return false;
    }
  }
  return true;
}

GroundingReport cabto_ground(const GroundingProblem& problem, const Environment& env,
                             const ProposerBundle& proposers,
                             const GroundingConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = problem.universe->size();

  GroundingReport report;
  ModelSpace space(problem, cfg.naive_cap);

  std::vector<GroundedAction> grounded;          // A
  std::vector<ActionModel> validated;            // H
  std::vector<ActionModel> explored;             // H_E
  std::unordered_set<std::uint64_t> validated_hashes;
  std::unordered_set<std::string> names_in_use;

  auto is_validated = [&](const ActionModel& m) {
    if (!validated_hashes.contains(m.triple_hash())) return false;
    for (const ActionModel& v : validated) {
      if (v.same_triple(m)) return true;
    }
    return false;
  };

  ProposerBundle fallback = make_heuristic_proposer();

  auto base_request = [&](ProposerPhase phase) {
    ProposerRequest req;
    req.phase = phase;
    req.planning_contexts_included = !cfg.ablate_planning_contexts;
    req.execution_contexts_included = !cfg.ablate_execution_contexts;
    req.universe = problem.universe;
    req.tasks = problem.tasks;
    req.rules = problem.rules;
    req.explicit_models = space.explicit_models();
    req.proposed = space.proposed();
    req.remaining_models = space.remaining();
    req.batch = cfg.batch;
    req.catalog = problem.policy_catalog;
    req.seed = cfg.seed;
    return req;
  };

  auto accept_proposals = [&](std::vector<ActionModel> models, CycleStats* stats) {
    int accepted = 0;
    for (ActionModel& m : models) {
      if (stats) ++stats->proposals;
      if (!space.is_member(m)) {
        report.rejections.push_back("proposal rejected (invalid or outside the model space): " + m.name);
        if (stats) ++stats->rejected;
        continue;
      }
      if (space.already_proposed(m)) {
        report.rejections.push_back("proposal rejected (already explored): " + m.name);
        if (stats) ++stats->rejected;
        continue;
      }
      if (m.name.empty()) m.name = "m" + std::to_string(m.triple_hash() % 100000);
      while (names_in_use.contains(m.name)) m.name += "~";
      names_in_use.insert(m.name);
      space.mark_proposed(m);
      explored.push_back(m);
      ++accepted;
      ++report.proposals_made;
      if (stats) ++stats->accepted;
    }
    return accepted;
  };

  auto call_proposer = [&](const ProposerRequest& req) -> std::vector<ActionModel> {
    try {
      return proposers.proposer->propose(req);
    } catch (const ProtocolError& e) {
      report.rejections.push_back(std::string("proposer protocol error: ") + e.what());
      return {};
    } catch (const ResourceError& e) {
      report.rejections.push_back(std::string("proposer gave up: ") + e.what());
      return {};
    }
  };

  auto build_i_fail = [&](const std::map<std::string, PlanResult>& results) {
    std::vector<PlanningContextView> views;
    if (cfg.ablate_planning_contexts) return views;
    for (const Task& t : problem.tasks) {
      auto it = results.find(t.id);
      if (it == results.end() || it->second.solved()) continue;
      const PlanningContext& ctx = it->second.context();
      views.push_back({ctx, render_bt(ctx.sketch, *problem.universe)});
    }
    return views;
  };

  auto solvable_now = [&]() {
    return all_solvable(problem.tasks, grounded, cfg.planner);
  };

  // Initial proposal pass.
  {
    ProposerRequest req = base_request(ProposerPhase::InitialProposal);
    int accepted = accept_proposals(call_proposer(req), nullptr);
    if (accepted == 0 && !space.exhausted()) {
      req.proposed = space.proposed();
      req.remaining_models = space.remaining();
      accept_proposals(call_proposer(req), nullptr);  // one re-query
    }
  }

  std::vector<PlanningContextView> last_i_fail;
  int cycles_run = 0;
  while (!space.exhausted() && !solvable_now()) {
    if (cycles_run >= cfg.max_cycles) {
      report.rejections.push_back("max feedback cycles reached; returning best effort");
      break;
    }
    CycleStats stats;

    // Phase 1: high-level model proposal until plannable or exhausted.
    while (true) {
      auto results = plan_all(problem.tasks, explored, cfg.planner);
      last_i_fail = build_i_fail(results);
      bool any_failed = false;
      for (const Task& t : problem.tasks) {
        auto it = results.find(t.id);
        if (it == results.end() || !it->second.solved()) {
          any_failed = true;
          break;
        }
      }
      if (!any_failed || space.exhausted()) break;

      ProposerRequest req = base_request(ProposerPhase::RepairProposal);
      req.i_fail = last_i_fail;
      int accepted = accept_proposals(call_proposer(req), &stats);
      if (accepted == 0) {
        req.proposed = space.proposed();
        req.remaining_models = space.remaining();
        accepted = accept_proposals(call_proposer(req), &stats);
      }
      if (accepted == 0) break;  // no proposal: let the outer loop decide
    }

    // Phase 2 + 3: validate explored-but-unvalidated models; refinements
    // join the queue of the same pass.
    std::deque<ActionModel> queue;
    for (const ActionModel& m : explored) {
      if (!is_validated(m)) queue.push_back(m);
    }
    while (!queue.empty()) {
      ActionModel h = queue.front();
      queue.pop_front();

      std::vector<ExecutionContext> history;
      bool consistent = false;
      for (int attempt = 0; attempt < cfg.n_max && !consistent; ++attempt) {
        ProposerRequest req = base_request(ProposerPhase::PolicySample);
        req.subject = h;
        req.attempt = attempt;
        if (!cfg.ablate_execution_contexts) req.i_e = history;

        PolicyChoice choice;
        bool have_choice = false;
        try {
          choice = proposers.sampler->sample(req);
          have_choice = true;
        } catch (const ProtocolError& e) {
          report.rejections.push_back(std::string("sampler protocol error: ") + e.what());
        } catch (const DomainError& e) {
          report.rejections.push_back(std::string("sampler error: ") + e.what());
        }
        if (have_choice) {
          bool known = false;
          for (const PolicyInfo& p : problem.policy_catalog) {
            if (p.id == choice.policy_id) {
              known = true;
              break;
            }
          }
          if (!known) {
            report.rejections.push_back("sampler returned unknown policy id '" +
                                        choice.policy_id + "'; using built-in fallback");
            have_choice = false;
          }
        }
        if (!have_choice) {
          if (problem.policy_catalog.empty()) break;
          choice = fallback.sampler->sample(req);
        }

        ++report.policies_sampled;
        ++stats.validations;
        const std::uint64_t seed = model_seed(cfg.seed, h, choice.policy_id);
        auto [ok, contexts] = env.validate_consistency(h, choice.policy_id,
                                                       cfg.k_trials, seed);
        history.insert(history.end(), contexts.begin(), contexts.end());
        if (ok) {
          grounded.push_back({h, choice.policy_id, seed});
          validated.push_back(h);
          validated_hashes.insert(h.triple_hash());
          consistent = true;
        }
      }

      if (!consistent) {
        ProposerRequest req = base_request(ProposerPhase::Refine);
        req.subject = h;
        if (!cfg.ablate_planning_contexts) req.i_fail = last_i_fail;
        if (!cfg.ablate_execution_contexts) req.i_e = history;

        RefineOutcome outcome;
        try {
          outcome = proposers.refiner->refine(req);
        } catch (const ProtocolError& e) {
          outcome = {std::nullopt, std::string("refiner protocol error: ") + e.what()};
        }
        if (!outcome.note.empty()) {
          report.refinement_notes.push_back(h.name + ": " + outcome.note);
        }
        if (outcome.model && !outcome.model->same_triple(h)) {
          ActionModel refined = *outcome.model;
          std::vector<ActionModel> single;
          single.push_back(refined);
          if (accept_proposals(std::move(single), &stats) > 0) {
            ++report.refinements;
            ++stats.refinements;
            queue.push_back(explored.back());
          }
        }
      }
    }

    // Knowledge sync: prune the explored pool to the validated set.
    explored = validated;
    ++cycles_run;
    report.cycles.push_back(stats);
  }

  report.feedback_cycles = std::max(0, cycles_run - 1);
  report.system.condition_atoms = condition_union(grounded, n);
  report.system.actions = grounded;
  report.task_results = plan_all(problem.tasks, models_of(grounded), cfg.planner);
  report.complete = all_solvable(problem.tasks, grounded, cfg.planner);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

GroundingReport report_for_system(BTSystem system, const GroundingProblem& problem,
                                  const GroundingConfig& cfg) {
  GroundingReport report;
  report.system = std::move(system);
  report.task_results =
      plan_all(problem.tasks, report.system.models(), cfg.planner);
  report.complete = all_solvable(problem.tasks, report.system.actions, cfg.planner);
  return report;
}

Metrics compute_metrics(std::span<const GroundingReport> runs, std::size_t task_count) {
  if (runs.empty()) throw DomainError("compute_metrics: no runs");
  Metrics m;
  double asr_sum = 0.0;
  double fc_sum = 0.0;
  std::size_t complete_runs = 0;
  for (const GroundingReport& r : runs) {
    std::size_t solved = 0;
    for (const auto& [id, result] : r.task_results) {
      if (result.solved()) ++solved;
    }
    asr_sum += task_count == 0 ? 1.0
                               : static_cast<double>(solved) / static_cast<double>(task_count);
    fc_sum += r.feedback_cycles;
    if (r.complete) ++complete_runs;
  }
  m.asr = asr_sum / static_cast<double>(runs.size());
  m.csr = static_cast<double>(complete_runs) / static_cast<double>(runs.size());
  m.fc = fc_sum / static_cast<double>(runs.size());
  return m;
}

}  // namespace btground
