// Reference adapter for the line-delimited proposer protocol: one JSON
// request per stdin line, one JSON response per stdout line. Answers with
// fixed, well-formed records so protocol plumbing can be exercised
// without any language model. Modes (first argv):
//   fixed      propose a single hard-coded valid model (default)
//   invalid    propose a model with overlapping add/del (schema-gate test)
//   unknown    answer policy_sample with a nonexistent policy id
//   silent     exit immediately (dead-adapter test)
//   garbage    reply with non-JSON text

#include <iostream>
#include <string>

#include <json.hpp>

using nlohmann::json;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "fixed";
  if (mode == "silent") return 0;

  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "garbage") {
      std::cout << "not json at all\n" << std::flush;
      continue;
    }
    json request;
    try {
      request = json::parse(line);
    } catch (...) {
      std::cout << json{{"error", "unparseable request"}}.dump() << "\n" << std::flush;
      continue;
    }
    const std::string phase = request.value("phase", "");
    json reply;

    if (phase == "initial_proposal" || phase == "repair_proposal") {
      // Pick atoms straight from the request's universe so the model is
      // well-formed for any domain.
      const auto& props = request["universe"]["propositions"];
      json model;
      model["name"] = "echo_model";
      model["pre"] = json::array();
      model["add"] = json::array();
      model["del"] = json::array();
      if (!props.empty()) {
        model["add"].push_back(props[0]);
        if (mode == "invalid") model["del"].push_back(props[0]);
      }
      reply["models"] = json::array({model});
    } else if (phase == "policy_sample") {
      if (mode == "unknown") {
        reply["policy"] = "no_such_policy";
      } else {
        const auto& catalog = request.value("catalog", json::array());
        reply["policy"] = catalog.empty() ? "none" : catalog[0].value("id", "none");
      }
      reply["hyperparameters"] = json::object();
    } else if (phase == "refine") {
      reply["model"] = nullptr;
      reply["note"] = "echo adapter does not refine";
    } else {
      reply["error"] = "unknown phase";
    }
    std::cout << reply.dump() << "\n" << std::flush;
  }
  return 0;
}
