#include "btground/proposers.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "btground/rng.hpp"

namespace btground {

const char* to_string(ProposerPhase p) {
  switch (p) {
    case ProposerPhase::InitialProposal: return "initial_proposal";
    case ProposerPhase::RepairProposal: return "repair_proposal";
    case ProposerPhase::PolicySample: return "policy_sample";
    case ProposerPhase::Refine: return "refine";
  }
  return "unknown";
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> camel_words(const std::string& ident) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : ident) {
    const bool alnum = std::isalnum(static_cast<unsigned char>(c));
    if ((!alnum || std::isupper(static_cast<unsigned char>(c))) && !cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
    if (alnum) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> atom_words(const Proposition& p) {
  std::vector<std::string> words = camel_words(p.predicate);
  for (const std::string& a : p.args) {
    for (const std::string& w : camel_words(a)) words.push_back(w);
  }
  return words;
}

struct TripleSet {
  std::unordered_set<std::uint64_t> hashes;
  std::vector<ActionModel> models;

  bool contains(const ActionModel& m) const {
    if (!hashes.contains(m.triple_hash())) return false;
    for (const ActionModel& other : models) {
      if (other.same_triple(m)) return true;
    }
    return false;
  }
  void insert(const ActionModel& m) {
    hashes.insert(m.triple_hash());
    models.push_back(m);
  }
};

TripleSet proposed_set(const ProposerRequest& req) {
  TripleSet s;
  for (const ActionModel& m : req.proposed) s.insert(m);
  return s;
}

std::set<std::string> token_set(const std::string& text) {
  auto toks = tokenize(text);
  return {toks.begin(), toks.end()};
}

/// Word bag of a model: words of every atom it touches plus its name.
std::set<std::string> model_words(const ActionModel& h, const DomainUniverse& u) {
  std::set<std::string> out;
  auto add_atoms = [&](const StateSet& s) {
    for (std::size_t i : s.indices()) {
      for (const std::string& w : atom_words(u.at(i))) out.insert(w);
    }
  };
  add_atoms(h.pre);
  add_atoms(h.add);
  add_atoms(h.del);
  for (const std::string& w : camel_words(h.name)) out.insert(w);
  return out;
}

int keyword_overlap(const std::string& description, const std::set<std::string>& words) {
  int score = 0;
  for (const std::string& t : token_set(description)) {
    if (words.contains(t)) ++score;
  }
  return score;
}

std::string hex4(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 4; ++i) {
    out += digits[(h >> (4 * (3 - i))) & 0xf];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive proposer
// ---------------------------------------------------------------------------

class ExhaustiveProposer : public ModelProposer {
 public:
  std::vector<ActionModel> propose(const ProposerRequest& req) override {
    const TripleSet proposed = proposed_set(req);
    std::vector<ActionModel> out;

    if (req.explicit_models) {
      for (const ActionModel& m : *req.explicit_models) {
        if (out.size() >= req.batch) break;
        if (proposed.contains(m)) continue;
        if (!is_valid_model(m, req.rules)) continue;
        out.push_back(m);
      }
      return out;
    }

    const std::size_t n = req.universe->size();
    if (n > 20) {
      throw ResourceError("exhaustive proposer: universe too large (n > 20)");
    }
    const std::uint64_t limit = std::uint64_t{1} << n;
    const int digits = std::to_string((limit * limit * limit) - 1).size();

    for (std::uint64_t pre = 0; pre < limit; ++pre) {
      for (std::uint64_t add = 0; add < limit; ++add) {
        for (std::uint64_t del = 0; del < limit; ++del) {
          ActionModel m;
          m.pre = StateSet::from_mask(n, pre);
          m.add = StateSet::from_mask(n, add);
          m.del = StateSet::from_mask(n, del);
          if (!is_valid_model(m, req.rules)) continue;
          if (proposed.contains(m)) continue;
          std::uint64_t index = (pre << (2 * n)) | (add << n) | del;
          std::string id = std::to_string(index);
          m.name = "h" + std::string(digits - id.size(), '0') + id;
          out.push_back(std::move(m));
          if (out.size() >= req.batch) return out;
        }
      }
    }
    return out;
  }
};

class ExhaustiveSampler : public PolicySampler {
 public:
  PolicyChoice sample(const ProposerRequest& req) override {
    if (req.catalog.empty()) throw DomainError("policy catalog is empty");
    const std::size_t idx = static_cast<std::size_t>(req.attempt) % req.catalog.size();
    return {req.catalog[idx].id, {}};
  }
};

class NullRefiner : public ModelRefiner {
 public:
  RefineOutcome refine(const ProposerRequest&) override {
    return {std::nullopt, "no refinement"};
  }
};

// ---------------------------------------------------------------------------
// Heuristic proposer
// ---------------------------------------------------------------------------

struct Candidate {
  ActionModel model;
  int relevance = 0;  // |add ∩ target atoms|
};

StateSet mutex_forced_del(const StateSet& pre, const StateSet& add,
                          const ValidityRules& rules) {
  StateSet del(pre.size());
  for (const StateSet& group : rules.mutex_groups) {
    if (!add.intersects(group)) continue;
    del |= (pre & group) - add;
  }
  return del;
}

StateSet repair_pre_mutex(StateSet pre, const ValidityRules& rules) {
  for (const StateSet& group : rules.mutex_groups) {
    StateSet present = pre & group;
    if (present.count() <= 1) continue;
    auto keep = present.indices().front();
    for (std::size_t i : present.indices()) {
      if (i != keep) pre.reset(i);
    }
  }
  return pre;
}

/// Split the mentioned atoms of a policy description into precondition
/// and effect sides around a required effect core. Mutex groups drive the
/// split: a group already containing an effect atom keeps its other
/// mentioned members on the precondition side (they get overwritten),
/// while a group with a precondition member pushes the rest to the effect
/// side (they are the successor states). Groups where the direction stays
/// ambiguous fork into both readings.
std::vector<ActionModel> partition_mentions(const StateSet& mentioned,
                                            const StateSet& base_add,
                                            const ValidityRules& rules) {
  struct Split {
    StateSet add;
    StateSet pre;
    StateSet undecided;
  };
  const std::size_t n = mentioned.size();
  std::vector<Split> open;
  open.push_back({base_add, StateSet(n), mentioned - base_add});
  std::vector<ActionModel> out;

  while (!open.empty()) {
    Split split = std::move(open.back());
    open.pop_back();

    bool changed = true;
    while (changed) {
      changed = false;
      for (const StateSet& group : rules.mutex_groups) {
        StateSet undecided_members = split.undecided & group;
        if (undecided_members.none()) continue;
        if (split.add.intersects(group)) {
          split.pre |= undecided_members;
          split.undecided -= undecided_members;
          changed = true;
        } else if (split.pre.intersects(group)) {
          split.add |= undecided_members;
          split.undecided -= undecided_members;
          changed = true;
        }
      }
    }

    // An unresolved multi-member group is a transition whose direction the
    // text does not fix; fork both readings (bounded).
    const StateSet* ambiguous = nullptr;
    for (const StateSet& group : rules.mutex_groups) {
      if ((split.undecided & group).count() >= 2) {
        ambiguous = &group;
        break;
      }
    }
    if (ambiguous != nullptr && out.size() + open.size() < 8) {
      auto members = (split.undecided & *ambiguous).indices();
      for (std::size_t k = 0; k < 2 && k < members.size(); ++k) {
        Split fork = split;
        fork.pre.set(members[k]);
        fork.undecided.reset(members[k]);
        open.push_back(std::move(fork));
      }
      continue;
    }

    // Mentions with no transition evidence are requirements.
    split.pre |= split.undecided;
    ActionModel m;
    m.pre = repair_pre_mutex(split.pre, rules);
    m.add = split.add;
    m.del = mutex_forced_del(m.pre, m.add, rules);
    out.push_back(std::move(m));
  }
  return out;
}

class HeuristicProposer : public ModelProposer {
 public:
  std::vector<ActionModel> propose(const ProposerRequest& req) override {
    const DomainUniverse& u = *req.universe;
    const TripleSet proposed = proposed_set(req);

    // Targets: frontier conditions of failed plans when available (repair
    // with planning contexts), always followed by the task goals.
    std::vector<std::pair<StateSet, StateSet>> targets;  // (condition, start)
    for (const PlanningContextView& view : req.i_fail) {
      const Task* task = find_task(req, view.context.task_id);
      if (!task) continue;
      for (const StateSet& c : view.context.frontier) {
        targets.emplace_back(c, task->start);
      }
    }
    for (const Task& t : req.tasks) targets.emplace_back(t.goal, t.start);

    StateSet target_union(u.size());
    for (const auto& [c, s0] : targets) target_union |= c;

    std::vector<Candidate> candidates;
    auto consider = [&](ActionModel m) {
      if (!is_valid_model(m, req.rules)) return;
      if (proposed.contains(m)) return;
      for (const Candidate& c : candidates) {
        if (c.model.same_triple(m)) return;
      }
      int relevance = static_cast<int>((m.add & target_union).count());
      candidates.push_back({std::move(m), relevance});
    };

    if (req.explicit_models) {
      // Constrained space: rank the declared menu.
      for (const ActionModel& m : *req.explicit_models) consider(m);
    } else {
      for (const auto& [c, s0] : targets) {
        StateSet missing = c - s0;
        if (missing.none()) continue;
        // Catalog-derived candidates: a policy whose description mentions
        // part of the target supplies the rest of its mentions, split into
        // precondition and effect sides along the mutex groups. When the
        // overlap lies entirely inside the current state (an atom that
        // must be re-achieved mid-plan), fall back to the full overlap.
        for (const PolicyInfo& p : req.catalog) {
          StateSet mentioned = mentioned_atoms(p.description, u);
          StateSet add = missing & mentioned;
          if (add.none()) add = c & mentioned;
          if (add.none()) continue;
          for (ActionModel m : partition_mentions(mentioned, add, req.rules)) {
            m.name = p.id;
            consider(std::move(m));
          }
        }
        // Direct candidate: everything currently true as precondition.
        ActionModel jump;
        jump.pre = s0;
        jump.add = missing;
        jump.del = mutex_forced_del(s0, missing, req.rules);
        jump.name = "direct_" + hex4(jump.triple_hash());
        consider(std::move(jump));
      }
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.relevance != b.relevance) return a.relevance > b.relevance;
                       const auto ap = a.model.pre.count(), bp = b.model.pre.count();
                       if (ap != bp) return ap < bp;
                       const auto aa = a.model.add.count(), ba = b.model.add.count();
                       if (aa != ba) return aa > ba;
                       return a.model.name < b.model.name;
                     });

    std::vector<ActionModel> out;
    for (Candidate& c : candidates) {
      if (out.size() >= req.batch) break;
      out.push_back(std::move(c.model));
    }
    return out;
  }

 private:
  static const Task* find_task(const ProposerRequest& req, const std::string& id) {
    for (const Task& t : req.tasks) {
      if (t.id == id) return &t;
    }
    return nullptr;
  }
};

class HeuristicSampler : public PolicySampler {
 public:
  PolicyChoice sample(const ProposerRequest& req) override {
    if (req.catalog.empty()) throw DomainError("policy catalog is empty");
    if (!req.subject) throw DomainError("policy_sample request lacks a model");
    const std::set<std::string> words = model_words(*req.subject, *req.universe);

    // Policies that already failed for this model are set aside until
    // everything has been tried.
    std::set<std::string> rejected;
    for (const ExecutionContext& ctx : req.i_e) {
      if (!ctx.succeeded) rejected.insert(ctx.policy_id);
    }

    const PolicyInfo* best = nullptr;
    int best_score = -1;
    const PolicyInfo* best_any = nullptr;
    int best_any_score = -1;
    for (const PolicyInfo& p : req.catalog) {
      int score = keyword_overlap(p.description, words);
      for (const std::string& w : camel_words(p.id)) {
        if (words.contains(w)) ++score;
      }
      if (score > best_any_score) {
        best_any_score = score;
        best_any = &p;
      }
      if (!rejected.contains(p.id) && score > best_score) {
        best_score = score;
        best = &p;
      }
    }
    const PolicyInfo* chosen = best ? best : best_any;
    return {chosen->id, {}};
  }
};

class HeuristicRefiner : public ModelRefiner {
 public:
  RefineOutcome refine(const ProposerRequest& req) override {
    if (!req.subject) throw DomainError("refine request lacks a model");
    const ActionModel& h = *req.subject;
    if (req.i_e.empty()) {
      return {std::nullopt, "no execution contexts available"};
    }

    bool all_ok = true;
    for (const ExecutionContext& ctx : req.i_e) all_ok = all_ok && ctx.succeeded;
    if (all_ok) return {std::nullopt, "all executions consistent; nothing to refine"};

    // Group the evidence by policy; the policy with the most data speaks.
    std::vector<std::string> order;
    for (const ExecutionContext& ctx : req.i_e) {
      if (std::find(order.begin(), order.end(), ctx.policy_id) == order.end()) {
        order.push_back(ctx.policy_id);
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return count_for(req, a) > count_for(req, b);
                     });

    for (const std::string& policy : order) {
      std::vector<const ExecutionContext*> fired, unfired;
      for (const ExecutionContext& ctx : req.i_e) {
        if (ctx.policy_id != policy) continue;
        if (ctx.after == ctx.before) {
          unfired.push_back(&ctx);
        } else {
          fired.push_back(&ctx);
        }
      }

      // Missing precondition: an atom that separates the scenarios where
      // the policy acted from those where it refused.
      if (!fired.empty() && !unfired.empty()) {
        for (std::size_t i = 0; i < h.pre.size(); ++i) {
          if (h.pre.test(i)) continue;
          bool discriminates = true;
          for (const ExecutionContext* ctx : fired) {
            if (!ctx->before.test(i)) { discriminates = false; break; }
          }
          if (discriminates) {
            for (const ExecutionContext* ctx : unfired) {
              if (ctx->before.test(i)) { discriminates = false; break; }
            }
          }
          if (!discriminates) continue;
          ActionModel repaired = h;
          repaired.pre.set(i);
          repaired.add -= repaired.pre;
          repaired.del |= mutex_forced_del(repaired.pre, repaired.add, req.rules);
          if (repaired.add.none()) continue;
          if (!is_valid_model(repaired, req.rules)) continue;
          if (repaired.same_triple(h)) continue;
          return {repaired, "added missing precondition " +
                                req.universe->at(i).text() + " (evidence: " +
                                policy + ")"};
        }
      }

      if (!fired.empty()) {
        // Unverified add effect: a declared add atom the world failed to
        // show after some completed execution.
        StateSet unverified(h.add.size());
        for (std::size_t i : h.add.indices()) {
          for (const ExecutionContext* ctx : fired) {
            if (!ctx->after.test(i)) {
              unverified.set(i);
              break;
            }
          }
        }
        if (unverified.any()) {
          ActionModel repaired = h;
          repaired.add -= unverified;
          if (repaired.add.any() && is_valid_model(repaired, req.rules) &&
              !repaired.same_triple(h)) {
            return {repaired, "removed unverified add effects " +
                                  req.universe->set_text(unverified) +
                                  " (evidence: " + policy + ")"};
          }
        }

        // Delete-effect defect: a declared-persistent atom vanished in
        // every completed execution. Hardest class; flagged, not fixed.
        const StateSet expected = expected_outcome(h);
        for (std::size_t i : expected.indices()) {
          bool was_present = false;
          bool always_gone = true;
          for (const ExecutionContext* ctx : fired) {
            if (ctx->before.test(i)) was_present = true;
            if (ctx->after.test(i)) always_gone = false;
          }
          if (was_present && always_gone) {
            return {std::nullopt,
                    "delete-effect defect suspected: declared-persistent atom " +
                        req.universe->at(i).text() +
                        " absent after every execution (evidence: " + policy + ")"};
          }
        }
      }
    }
    return {std::nullopt, "no refinement"};
  }

 private:
  static std::size_t count_for(const ProposerRequest& req, const std::string& id) {
    std::size_t n = 0;
    for (const ExecutionContext& ctx : req.i_e) {
      if (ctx.policy_id == id) ++n;
    }
    return n;
  }
};

// ---------------------------------------------------------------------------
// Random proposer
// ---------------------------------------------------------------------------

std::uint64_t request_fingerprint(const ProposerRequest& req) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(req.phase));
  h = derive_seed(h, req.proposed.size());
  h = derive_seed(h, req.remaining_models);
  if (req.subject) h = derive_seed(h, req.subject->triple_hash());
  h = derive_seed(h, req.i_e.size());
  h = derive_seed(h, static_cast<std::uint64_t>(req.attempt));
  return h;
}

class RandomProposer : public ModelProposer {
 public:
  std::vector<ActionModel> propose(const ProposerRequest& req) override {
    Rng rng(derive_seed(req.seed, request_fingerprint(req)));
    const TripleSet proposed = proposed_set(req);
    std::vector<ActionModel> out;

    if (req.explicit_models) {
      std::vector<const ActionModel*> pool;
      for (const ActionModel& m : *req.explicit_models) {
        if (!proposed.contains(m) && is_valid_model(m, req.rules)) pool.push_back(&m);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      for (const ActionModel* m : pool) {
        if (out.size() >= req.batch) break;
        out.push_back(*m);
      }
      return out;
    }

    const std::size_t n = req.universe->size();
    std::bernoulli_distribution bit(0.25);
    for (int tries = 0; tries < 400 && out.size() < req.batch; ++tries) {
      ActionModel m;
      m.pre = StateSet(n);
      m.add = StateSet(n);
      m.del = StateSet(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (bit(rng)) m.pre.set(i);
        if (bit(rng)) m.add.set(i);
        if (bit(rng)) m.del.set(i);
      }
      if (!is_valid_model(m, req.rules)) continue;
      if (proposed.contains(m)) continue;
      bool dup = false;
      for (const ActionModel& prev : out) {
        if (prev.same_triple(m)) { dup = true; break; }
      }
      if (dup) continue;
      m.name = "rand_" + hex4(m.triple_hash());
      out.push_back(std::move(m));
    }
    return out;
  }
};

class RandomSampler : public PolicySampler {
 public:
  PolicyChoice sample(const ProposerRequest& req) override {
    if (req.catalog.empty()) throw DomainError("policy catalog is empty");
    Rng rng(derive_seed(req.seed, request_fingerprint(req)));
    std::uniform_int_distribution<std::size_t> pick(0, req.catalog.size() - 1);
    return {req.catalog[pick(rng)].id, {}};
  }
};

// ---------------------------------------------------------------------------
// Oracle proposer
// ---------------------------------------------------------------------------

class OracleProposer : public ModelProposer {
 public:
  explicit OracleProposer(const Environment& env) : env_(&env) {}

  std::vector<ActionModel> propose(const ProposerRequest& req) override {
    const TripleSet proposed = proposed_set(req);
    std::vector<ActionModel> models;
    for (const ControlPolicy& p : env_->hidden_policies()) {
      ActionModel m;
      m.name = p.id;
      m.pre = p.pre;
      m.add = p.add;
      m.del = p.del;
      if (!is_valid_model(m, req.rules)) continue;
      if (proposed.contains(m)) continue;
      if (req.explicit_models) {
        bool listed = false;
        for (const ActionModel& e : *req.explicit_models) {
          if (e.same_triple(m)) { listed = true; break; }
        }
        if (!listed) continue;
      }
      models.push_back(std::move(m));
    }
    std::sort(models.begin(), models.end(),
              [](const ActionModel& a, const ActionModel& b) { return a.name < b.name; });
    if (models.size() > req.batch) models.resize(req.batch);
    return models;
  }

 private:
  const Environment* env_;
};

class OracleSampler : public PolicySampler {
 public:
  explicit OracleSampler(const Environment& env) : env_(&env) {}

  PolicyChoice sample(const ProposerRequest& req) override {
    if (!req.subject) throw DomainError("policy_sample request lacks a model");
    const auto& policies = env_->hidden_policies();
    for (const ControlPolicy& p : policies) {
      if (p.pre == req.subject->pre && p.add == req.subject->add &&
          p.del == req.subject->del) {
        return {p.id, {}};
      }
    }
    for (const ControlPolicy& p : policies) {
      if (p.id == req.subject->name) return {p.id, {}};
    }
    if (req.catalog.empty()) throw DomainError("policy catalog is empty");
    return {req.catalog.front().id, {}};
  }

 private:
  const Environment* env_;
};

}  // namespace

StateSet mentioned_atoms(const std::string& text, const DomainUniverse& universe) {
  const std::vector<std::string> tokens = tokenize(text);
  StateSet out(universe.size());
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const Proposition& prop = universe.at(i);
    std::vector<std::string> words = atom_words(prop);
    std::vector<std::string> arg_heads;
    for (const std::string& a : prop.args) {
      auto head = camel_words(a);
      if (!head.empty()) arg_heads.push_back(head.front());
    }
    const std::size_t k = words.size();
    bool mentioned = false;
    for (std::size_t start = 0; start < tokens.size() && !mentioned; ++start) {
      const std::size_t end = std::min(tokens.size(), start + k + 1);
      auto in_window = [&](const std::string& w, std::size_t from) {
        for (std::size_t j = from; j < end; ++j) {
          if (tokens[j] == w) return j;
        }
        return std::size_t(tokens.size());
      };
      bool all = true;
      for (const std::string& w : words) {
        if (in_window(w, start) == tokens.size()) {
          all = false;
          break;
        }
      }
      if (!all) continue;
      // Relational atoms must name their arguments in declaration order.
      std::size_t cursor = start;
      bool ordered = true;
      for (const std::string& head : arg_heads) {
        std::size_t pos = in_window(head, cursor);
        if (pos == tokens.size()) {
          ordered = false;
          break;
        }
        cursor = pos + 1;
      }
      mentioned = ordered;
    }
    if (mentioned) out.set(i);
  }
  return out;
}

ProposerBundle make_exhaustive_proposer() {
  return {std::make_shared<ExhaustiveProposer>(), std::make_shared<ExhaustiveSampler>(),
          std::make_shared<NullRefiner>(), "exhaustive"};
}

ProposerBundle make_heuristic_proposer() {
  return {std::make_shared<HeuristicProposer>(), std::make_shared<HeuristicSampler>(),
          std::make_shared<HeuristicRefiner>(), "heuristic"};
}

ProposerBundle make_random_proposer() {
  return {std::make_shared<RandomProposer>(), std::make_shared<RandomSampler>(),
          std::make_shared<NullRefiner>(), "random"};
}

ProposerBundle make_oracle_proposer(const Environment& env) {
  return {std::make_shared<OracleProposer>(env), std::make_shared<OracleSampler>(env),
          std::make_shared<NullRefiner>(), "oracle"};
}

}  // namespace btground
