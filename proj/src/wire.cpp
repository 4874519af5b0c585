#include "btground/wire.hpp"

#include <json.hpp>

namespace btground {

namespace {

using nlohmann::json;

json atoms_json(const StateSet& s, const DomainUniverse& u) {
  json arr = json::array();
  for (const std::string& a : u.atom_texts(s)) arr.push_back(a);
  return arr;
}

json model_json(const ActionModel& m, const DomainUniverse& u) {
  return json{{"name", m.name},
              {"pre", atoms_json(m.pre, u)},
              {"add", atoms_json(m.add, u)},
              {"del", atoms_json(m.del, u)}};
}

json context_json(const ExecutionContext& ctx, const DomainUniverse& u) {
  return json{{"attempt", ctx.attempt},
              {"policy", ctx.policy_id},
              {"before", atoms_json(ctx.before, u)},
              {"after", atoms_json(ctx.after, u)},
              {"expected", atoms_json(ctx.expected, u)},
              {"succeeded", ctx.succeeded},
              {"ticks", ctx.ticks_elapsed},
              {"note", ctx.note}};
}

StateSet atoms_from_json(const json& arr, const DomainUniverse& u) {
  if (!arr.is_array()) throw ProtocolError("expected an atom array");
  StateSet s(u.size());
  for (const auto& item : arr) {
    if (!item.is_string()) throw ProtocolError("atom entries must be strings");
    auto idx = u.find(item.get<std::string>());
    if (!idx) throw ProtocolError("unknown atom in response: " + item.get<std::string>());
    s.set(*idx);
  }
  return s;
}

ActionModel model_from_json(const json& obj, const DomainUniverse& u) {
  if (!obj.is_object()) throw ProtocolError("model entries must be objects");
  ActionModel m;
  if (obj.contains("name") && obj["name"].is_string()) {
    m.name = obj["name"].get<std::string>();
  }
  for (const char* key : {"pre", "add", "del"}) {
    if (!obj.contains(key)) throw ProtocolError(std::string("model lacks '") + key + "'");
  }
  m.pre = atoms_from_json(obj["pre"], u);
  m.add = atoms_from_json(obj["add"], u);
  m.del = atoms_from_json(obj["del"], u);
  if (m.name.empty()) m.name = "ext_" + std::to_string(m.triple_hash() % 100000);
  return m;
}

}  // namespace

std::string serialize_request(const ProposerRequest& req) {
  const DomainUniverse& u = *req.universe;
  json j;
  j["phase"] = to_string(req.phase);
  j["context_flags"] = {{"planning_contexts", req.planning_contexts_included},
                        {"execution_contexts", req.execution_contexts_included}};
  j["batch"] = req.batch;
  j["seed"] = req.seed;

  json props = json::array();
  for (const Proposition& p : u.propositions()) props.push_back(p.text());
  json objects = json::array();
  for (const ObjectInfo& o : u.objects()) {
    objects.push_back({{"name", o.name}, {"description", o.description}});
  }
  j["universe"] = {{"propositions", props}, {"objects", objects}};

  json groups = json::array();
  for (const StateSet& g : req.rules.mutex_groups) groups.push_back(atoms_json(g, u));
  j["rules"] = {{"add_disjoint_pre", req.rules.add_disjoint_pre},
                {"del_subset_pre", req.rules.del_subset_pre},
                {"mutex_groups", groups}};

  json tasks = json::array();
  for (const Task& t : req.tasks) {
    tasks.push_back({{"id", t.id},
                     {"start", atoms_json(t.start, u)},
                     {"goal", atoms_json(t.goal, u)}});
  }
  j["tasks"] = tasks;

  json proposed = json::array();
  for (const ActionModel& m : req.proposed) proposed.push_back(model_json(m, u));
  json space = {{"proposed", proposed}, {"remaining", req.remaining_models}};
  if (req.explicit_models) {
    json explicit_list = json::array();
    for (const ActionModel& m : *req.explicit_models) {
      explicit_list.push_back(model_json(m, u));
    }
    space["explicit"] = explicit_list;
  }
  j["model_space"] = space;

  json catalog = json::array();
  for (const PolicyInfo& p : req.catalog) {
    catalog.push_back({{"id", p.id}, {"description", p.description}});
  }
  j["catalog"] = catalog;

  if (req.planning_contexts_included && !req.i_fail.empty()) {
    json fails = json::array();
    for (const PlanningContextView& view : req.i_fail) {
      json frontier = json::array();
      for (const StateSet& c : view.context.frontier) frontier.push_back(atoms_json(c, u));
      fails.push_back({{"task", view.context.task_id},
                       {"expanded_conditions", view.context.expanded_conditions},
                       {"frontier", frontier},
                       {"sketch", view.sketch_text},
                       {"actions_used", view.context.actions_used}});
    }
    j["i_fail"] = fails;
  }

  if (req.subject) j["subject"] = model_json(*req.subject, u);
  if (req.phase == ProposerPhase::PolicySample) j["attempt"] = req.attempt;

  if (req.execution_contexts_included && !req.i_e.empty()) {
    json contexts = json::array();
    for (const ExecutionContext& ctx : req.i_e) contexts.push_back(context_json(ctx, u));
    j["i_e"] = contexts;
  }

  return j.dump();
}

WireResponse parse_response(const std::string& line, ProposerPhase phase,
                            const DomainUniverse& universe) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed response record: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("response record must be a JSON object");

  WireResponse out;
  switch (phase) {
    case ProposerPhase::InitialProposal:
    case ProposerPhase::RepairProposal: {
      if (!j.contains("models") || !j["models"].is_array()) {
        throw ProtocolError("proposal response lacks a 'models' array");
      }
      for (const auto& m : j["models"]) out.models.push_back(model_from_json(m, universe));
      return out;
    }
    case ProposerPhase::PolicySample: {
      if (!j.contains("policy") || !j["policy"].is_string()) {
        throw ProtocolError("policy_sample response lacks a 'policy' string");
      }
      PolicyChoice choice;
      choice.policy_id = j["policy"].get<std::string>();
      if (j.contains("hyperparameters") && j["hyperparameters"].is_object()) {
        for (auto it = j["hyperparameters"].begin(); it != j["hyperparameters"].end(); ++it) {
          choice.hyperparameters[it.key()] =
              it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
      }
      out.policy = std::move(choice);
      return out;
    }
    case ProposerPhase::Refine: {
      if (!j.contains("model")) throw ProtocolError("refine response lacks a 'model' field");
      if (!j["model"].is_null()) {
        out.refinement.model = model_from_json(j["model"], universe);
      }
      if (j.contains("note") && j["note"].is_string()) {
        out.refinement.note = j["note"].get<std::string>();
      }
      return out;
    }
  }
  throw ProtocolError("unknown request phase");
}

}  // namespace btground
