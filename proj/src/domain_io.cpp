#include "btground/domain_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace btground {

namespace {

struct Line {
  int number = 0;       // 1-based
  int indent = 0;       // leading spaces
  std::string content;  // without leading spaces
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    int indent = 0;
    while (indent < static_cast<int>(raw.size()) && raw[indent] == ' ') ++indent;
    std::string content = raw.substr(indent);
    if (content.empty() || content[0] == '#') continue;
    out.push_back({number, indent, content});
  }
  return out;
}

[[noreturn]] void fail(const Line& line, int col, const std::string& msg) {
  throw ParseError(msg, line.number, line.indent + col + 1);
}

/// Parse `{A, B, C}` starting at `pos` within line.content.
StateSet parse_set(const Line& line, std::size_t& pos, const DomainUniverse& universe) {
  const std::string& s = line.content;
  auto skip_ws = [&] {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  };
  skip_ws();
  if (pos >= s.size() || s[pos] != '{') fail(line, static_cast<int>(pos), "expected '{'");
  ++pos;
  StateSet out(universe.size());
  skip_ws();
  if (pos < s.size() && s[pos] == '}') {
    ++pos;
    return out;
  }
  while (true) {
    skip_ws();
    std::size_t start = pos;
    int depth = 0;
    while (pos < s.size()) {
      char c = s[pos];
      if (c == '(') ++depth;
      if (c == ')' && depth > 0) {
        --depth;
        ++pos;
        continue;
      }
      if (depth == 0 && (c == ',' || c == '}' || c == ' ')) break;
      ++pos;
    }
    std::string atom = s.substr(start, pos - start);
    std::size_t err_col = 0;
    if (!parse_atom_text(atom, &err_col)) {
      fail(line, static_cast<int>(start + err_col), "malformed atom '" + atom + "'");
    }
    auto idx = universe.find(atom);
    if (!idx) fail(line, static_cast<int>(start), "unknown atom '" + atom + "'");
    out.set(*idx);
    skip_ws();
    if (pos >= s.size()) fail(line, static_cast<int>(pos), "unterminated set");
    if (s[pos] == ',') {
      ++pos;
      continue;
    }
    if (s[pos] == '}') {
      ++pos;
      return out;
    }
    fail(line, static_cast<int>(pos), "expected ',' or '}'");
  }
}

StateSet parse_whole_set(const Line& line, std::size_t pos, const DomainUniverse& u) {
  StateSet s = parse_set(line, pos, u);
  while (pos < line.content.size() && line.content[pos] == ' ') ++pos;
  if (pos != line.content.size()) fail(line, static_cast<int>(pos), "trailing characters");
  return s;
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string set_to_text(const StateSet& s, const DomainUniverse& u) {
  std::string out = "{";
  bool first = true;
  for (const std::string& a : u.atom_texts(s)) {
    if (!first) out += ", ";
    out += a;
    first = false;
  }
  return out + "}";
}

bool parse_bool(const Line& line, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(line, 0, "expected 'true' or 'false', got '" + value + "'");
}

/// `Name: rest` split; returns (name, rest).
std::pair<std::string, std::string> split_key(const Line& line) {
  auto colon = line.content.find(':');
  if (colon == std::string::npos) fail(line, 0, "expected 'key: value'");
  std::string key = line.content.substr(0, colon);
  std::string rest = line.content.substr(colon + 1);
  while (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
  return {key, rest};
}

ActionModel parse_model_line(const Line& line, const DomainUniverse& universe) {
  auto [name, rest] = split_key(line);
  std::size_t err_col = 0;
  if (!parse_atom_text(name, &err_col)) {
    fail(line, static_cast<int>(err_col), "malformed model name '" + name + "'");
  }
  ActionModel m;
  m.name = name;
  // rest: `pre {..} add {..} del {..}`
  std::size_t pos = line.content.find(':') + 1;
  const std::string& s = line.content;
  auto expect_word = [&](const std::string& word) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (s.compare(pos, word.size(), word) != 0) {
      fail(line, static_cast<int>(pos), "expected '" + word + "'");
    }
    pos += word.size();
  };
  expect_word("pre");
  m.pre = parse_set(line, pos, universe);
  expect_word("add");
  m.add = parse_set(line, pos, universe);
  expect_word("del");
  m.del = parse_set(line, pos, universe);
  if (m.add.intersects(m.del)) {
    fail(line, 0, "model '" + name + "' has overlapping add and del sets");
  }
  return m;
}

}  // namespace

DomainFile parse_domain(const std::string& text) {
  const std::vector<Line> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty domain file", 1, 1);

  std::size_t i = 0;
  if (lines[i].content.rfind("domain ", 0) != 0) {
    fail(lines[i], 0, "expected 'domain <name>' header");
  }
  DomainFile out;
  out.name = lines[i].content.substr(7);
  ++i;

  // propositions first, so that later sections can resolve atoms
  std::vector<Proposition> props;
  std::vector<ObjectInfo> objects;
  struct PendingSet {
    Line line;
    std::size_t pos;
  };
  std::vector<Line> mutex_lines;
  std::vector<Line> model_lines;
  struct RawPolicy {
    Line header;
    std::vector<Line> fields;
  };
  std::vector<RawPolicy> raw_policies;
  bool saw_models_section = false;

  std::string section;
  for (; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.indent == 0) {
      if (line.content.back() != ':') fail(line, 0, "expected a section header");
      section = line.content.substr(0, line.content.size() - 1);
      if (section != "propositions" && section != "objects" && section != "mutex" &&
          section != "rules" && section != "models" && section != "policies") {
        fail(line, 0, "unknown section '" + section + "'");
      }
      if (section == "models") saw_models_section = true;
      continue;
    }
    if (section.empty()) fail(line, 0, "content before any section");

    if (section == "propositions") {
      std::size_t err_col = 0;
      auto parsed = parse_atom_text(line.content, &err_col);
      if (!parsed) fail(line, static_cast<int>(err_col), "malformed atom");
      for (const Proposition& p : props) {
        if (p.text() == line.content) fail(line, 0, "duplicate proposition");
      }
      props.push_back({parsed->first, parsed->second, props.size()});
    } else if (section == "objects") {
      auto [name, description] = split_key(line);
      objects.push_back({name, description});
    } else if (section == "mutex") {
      mutex_lines.push_back(line);
    } else if (section == "rules") {
      auto [key, value] = split_key(line);
      if (key == "add_disjoint_pre") {
        out.rules.add_disjoint_pre = parse_bool(line, value);
      } else if (key == "del_subset_pre") {
        out.rules.del_subset_pre = parse_bool(line, value);
      } else {
        fail(line, 0, "unknown rule '" + key + "'");
      }
    } else if (section == "models") {
      model_lines.push_back(line);
    } else if (section == "policies") {
      if (line.indent == 2) {
        if (line.content.back() != ':') fail(line, 0, "expected '<policy id>:'");
        raw_policies.push_back({line, {}});
      } else {
        if (raw_policies.empty()) fail(line, 0, "policy field before any policy id");
        raw_policies.back().fields.push_back(line);
      }
    }
  }

  if (props.empty()) throw ParseError("domain declares no propositions", 1, 1);
  auto universe = std::make_shared<DomainUniverse>(std::move(props), std::move(objects));
  out.universe = universe;

  for (const Line& line : mutex_lines) {
    StateSet group = parse_whole_set(line, 0, *universe);
    if (group.count() < 2) fail(line, 0, "mutex group needs at least two atoms");
    out.rules.mutex_groups.push_back(group);
  }

  if (saw_models_section) {
    out.models = std::vector<ActionModel>{};
    for (const Line& line : model_lines) {
      ActionModel m = parse_model_line(line, *universe);
      for (const ActionModel& prev : *out.models) {
        if (prev.name == m.name) fail(line, 0, "duplicate model name '" + m.name + "'");
      }
      out.models->push_back(std::move(m));
    }
  }

  for (const RawPolicy& raw : raw_policies) {
    ControlPolicy p;
    p.id = raw.header.content.substr(0, raw.header.content.size() - 1);
    std::size_t err_col = 0;
    if (!parse_atom_text(p.id, &err_col)) {
      fail(raw.header, static_cast<int>(err_col), "malformed policy id '" + p.id + "'");
    }
    p.pre = universe->empty_set();
    p.add = universe->empty_set();
    p.del = universe->empty_set();
    p.failure_add = universe->empty_set();
    p.failure_del = universe->empty_set();
    for (const Line& field : raw.fields) {
      auto [key, value] = split_key(field);
      std::size_t pos = field.content.find(':') + 1;
      if (key == "description") {
        p.description = value;
      } else if (key == "pre") {
        p.pre = parse_set(field, pos, *universe);
      } else if (key == "add") {
        p.add = parse_set(field, pos, *universe);
      } else if (key == "del") {
        p.del = parse_set(field, pos, *universe);
      } else if (key == "fail_add") {
        p.failure_add = parse_set(field, pos, *universe);
      } else if (key == "fail_del") {
        p.failure_del = parse_set(field, pos, *universe);
      } else if (key == "duration") {
        try {
          p.duration_ticks = std::stoi(value);
        } catch (...) {
          fail(field, 0, "bad duration '" + value + "'");
        }
      } else if (key == "failure_prob") {
        try {
          p.failure_prob = std::stod(value);
        } catch (...) {
          fail(field, 0, "bad failure_prob '" + value + "'");
        }
        if (p.failure_prob < 0.0 || p.failure_prob > 1.0) {
          fail(field, 0, "failure_prob must lie in [0, 1]");
        }
      } else {
        fail(field, 0, "unknown policy field '" + key + "'");
      }
    }
    if (p.add.intersects(p.del)) {
      fail(raw.header, 0, "policy '" + p.id + "' has overlapping add and del sets");
    }
    for (const ControlPolicy& prev : out.policies) {
      if (prev.id == p.id) fail(raw.header, 0, "duplicate policy id '" + p.id + "'");
    }
    out.policies.push_back(std::move(p));
  }

  return out;
}

std::string serialize_domain(const DomainFile& domain) {
  const DomainUniverse& u = *domain.universe;
  std::string out = "domain " + domain.name + "\n";

  out += "\npropositions:\n";
  for (const Proposition& p : u.propositions()) out += "  " + p.text() + "\n";

  if (!u.objects().empty()) {
    out += "\nobjects:\n";
    for (const ObjectInfo& o : u.objects()) {
      out += "  " + o.name + ": " + o.description + "\n";
    }
  }

  if (!domain.rules.mutex_groups.empty()) {
    out += "\nmutex:\n";
    for (const StateSet& g : domain.rules.mutex_groups) {
      out += "  " + set_to_text(g, u) + "\n";
    }
  }

  out += "\nrules:\n";
  out += "  add_disjoint_pre: " + std::string(domain.rules.add_disjoint_pre ? "true" : "false") + "\n";
  out += "  del_subset_pre: " + std::string(domain.rules.del_subset_pre ? "true" : "false") + "\n";

  if (domain.models) {
    out += "\nmodels:\n";
    for (const ActionModel& m : *domain.models) {
      out += "  " + m.name + ": pre " + set_to_text(m.pre, u) + " add " +
             set_to_text(m.add, u) + " del " + set_to_text(m.del, u) + "\n";
    }
  }

  if (!domain.policies.empty()) {
    out += "\npolicies:\n";
    for (const ControlPolicy& p : domain.policies) {
      out += "  " + p.id + ":\n";
      out += "    description: " + p.description + "\n";
      out += "    pre: " + set_to_text(p.pre, u) + "\n";
      out += "    add: " + set_to_text(p.add, u) + "\n";
      out += "    del: " + set_to_text(p.del, u) + "\n";
      out += "    duration: " + std::to_string(p.duration_ticks) + "\n";
      out += "    failure_prob: " + format_double(p.failure_prob) + "\n";
      if (p.failure_add.any()) out += "    fail_add: " + set_to_text(p.failure_add, u) + "\n";
      if (p.failure_del.any()) out += "    fail_del: " + set_to_text(p.failure_del, u) + "\n";
    }
  }
  return out;
}

TaskSetFile parse_taskset(const std::string& text, const DomainUniverse& universe) {
  const std::vector<Line> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty task set file", 1, 1);

  std::size_t i = 0;
  if (lines[i].content.rfind("taskset ", 0) != 0) {
    fail(lines[i], 0, "expected 'taskset <name>' header");
  }
  TaskSetFile out;
  out.name = lines[i].content.substr(8);
  ++i;

  bool in_tasks = false;
  std::string current_task;
  for (; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.indent == 0) {
      if (line.content == "tasks:") {
        in_tasks = true;
        continue;
      }
      auto [key, value] = split_key(line);
      if (key == "domain") {
        out.domain_ref = value;
        continue;
      }
      fail(line, 0, "unexpected line");
    }
    if (!in_tasks) fail(line, 0, "content before 'tasks:'");
    if (line.indent == 2) {
      if (line.content.back() != ':') fail(line, 0, "expected '<task id>:'");
      current_task = line.content.substr(0, line.content.size() - 1);
      for (const Task& t : out.tasks) {
        if (t.id == current_task) fail(line, 0, "duplicate task id '" + current_task + "'");
      }
      out.tasks.push_back({current_task, universe.empty_set(), universe.empty_set()});
    } else {
      if (current_task.empty()) fail(line, 0, "task field before any task id");
      auto [key, value] = split_key(line);
      std::size_t pos = line.content.find(':') + 1;
      if (key == "start") {
        out.tasks.back().start = parse_set(line, pos, universe);
      } else if (key == "goal") {
        out.tasks.back().goal = parse_set(line, pos, universe);
      } else {
        fail(line, 0, "unknown task field '" + key + "'");
      }
    }
  }
  return out;
}

std::string serialize_taskset(const TaskSetFile& tasks, const DomainUniverse& u) {
  std::string out = "taskset " + tasks.name + "\n";
  out += "domain: " + tasks.domain_ref + "\n";
  out += "\ntasks:\n";
  for (const Task& t : tasks.tasks) {
    out += "  " + t.id + ":\n";
    out += "    start: " + set_to_text(t.start, u) + "\n";
    out += "    goal: " + set_to_text(t.goal, u) + "\n";
  }
  return out;
}

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

DomainFile load_domain_file(const std::string& path) { return parse_domain(read_file(path)); }

TaskSetFile load_taskset_file(const std::string& path, const DomainUniverse& universe) {
  return parse_taskset(read_file(path), universe);
}

Environment make_environment(const DomainFile& domain, EnvConfig cfg) {
  return Environment(domain.universe, domain.policies, domain.rules.mutex_groups, cfg);
}

GroundingProblem make_problem(const DomainFile& domain, const TaskSetFile& tasks) {
  GroundingProblem p;
  p.universe = domain.universe;
  p.tasks = tasks.tasks;
  p.rules = domain.rules;
  p.explicit_models = domain.models;
  for (const ControlPolicy& pol : domain.policies) {
    p.policy_catalog.push_back({pol.id, pol.description});
  }
  return p;
}

}  // namespace btground
