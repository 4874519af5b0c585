#include <sstream>

#include "btground/domain_io.hpp"

namespace btground {

namespace {

void render_node(const BTNode& node, const DomainUniverse& u, int depth,
                 std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  switch (node.kind()) {
    case BTNode::Kind::Condition: {
      out += "{";
      bool first = true;
      for (const std::string& a : u.atom_texts(node.condition_set())) {
        if (!first) out += ", ";
        out += a;
        first = false;
      }
      out += "}\n";
      return;
    }
    case BTNode::Kind::Action:
      out += node.action_name();
      out += "\n";
      return;
    case BTNode::Kind::Sequence:
      out += "->\n";
      break;
    case BTNode::Kind::Fallback:
      out += "?\n";
      break;
  }
  for (const BTNode& child : node.children()) {
    render_node(child, u, depth + 1, out);
  }
}

}  // namespace

std::string render_bt(const BTNode& tree, const DomainUniverse& universe) {
  std::string out;
  render_node(tree, universe, 0, out);
  return out;
}

BTNode parse_bt(const std::string& text, const DomainUniverse& universe) {
  struct Entry {
    int depth;
    bool internal;
    bool sequence;
    std::optional<BTNode> leaf;
    std::vector<BTNode> children;
  };
  std::vector<Entry> stack;
  std::optional<BTNode> root;
  int line_no = 0;

  auto collapse_to = [&](int depth) {
    while (!stack.empty() && stack.back().depth >= depth) {
      Entry done = std::move(stack.back());
      stack.pop_back();
      if (done.internal && done.children.empty()) {
        throw ParseError("internal node without children", line_no, 1);
      }
      BTNode node = done.internal
                        ? (done.sequence ? BTNode::sequence(std::move(done.children))
                                         : BTNode::fallback(std::move(done.children)))
                        : std::move(*done.leaf);
      if (stack.empty()) {
        root = std::move(node);
        return;
      }
      if (!stack.back().internal) {
        throw ParseError("leaf node cannot have children", line_no, 1);
      }
      stack.back().children.push_back(std::move(node));
    }
  };

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t indent = 0;
    while (indent < raw.size() && raw[indent] == ' ') ++indent;
    std::string content = raw.substr(indent);
    if (content.empty()) continue;
    if (indent % 2 != 0) throw ParseError("odd indentation", line_no, 1);
    const int depth = static_cast<int>(indent / 2);

    collapse_to(depth);
    if (root) throw ParseError("multiple roots in tree text", line_no, 1);
    if (depth > 0 && (stack.empty() || stack.back().depth != depth - 1)) {
      throw ParseError("indentation jumps a level", line_no, 1);
    }

    if (content == "?" || content == "->") {
      stack.push_back({depth, true, content == "->", std::nullopt, {}});
    } else if (content.front() == '{') {
      if (content.back() != '}') {
        throw ParseError("unterminated condition set", line_no,
                         static_cast<int>(indent + content.size()));
      }
      StateSet set(universe.size());
      std::string body = content.substr(1, content.size() - 2);
      std::size_t pos = 0;
      while (pos < body.size()) {
        while (pos < body.size() && (body[pos] == ' ' || body[pos] == ',')) ++pos;
        std::size_t start = pos;
        int depth = 0;
        while (pos < body.size()) {
          char c = body[pos];
          if (c == '(') ++depth;
          if (c == ')' && depth > 0) {
            --depth;
            ++pos;
            continue;
          }
          if (depth == 0 && (c == ',' || c == ' ')) break;
          ++pos;
        }
        if (start == pos) break;
        std::string atom = body.substr(start, pos - start);
        auto idx = universe.find(atom);
        if (!idx) {
          throw ParseError("unknown atom '" + atom + "'", line_no,
                           static_cast<int>(indent + 1 + start + 1));
        }
        set.set(*idx);
      }
      stack.push_back({depth, false, false, BTNode::condition(std::move(set)), {}});
    } else {
      std::size_t err_col = 0;
      if (!parse_atom_text(content, &err_col)) {
        throw ParseError("malformed action name", line_no,
                         static_cast<int>(indent + err_col + 1));
      }
      stack.push_back({depth, false, false, BTNode::action(content), {}});
    }
  }
  if (stack.empty() && !root) throw ParseError("empty tree text", 1, 1);
  collapse_to(0);
  if (!root || !stack.empty()) {
    throw ParseError("malformed tree structure", line_no, 1);
  }
  return std::move(*root);
}

namespace {

void dot_node(const BTNode& node, const DomainUniverse& u, int& counter,
              std::ostringstream& out, int parent) {
  const int id = counter++;
  std::string label;
  std::string shape = "box";
  switch (node.kind()) {
    case BTNode::Kind::Fallback:
      label = "?";
      shape = "ellipse";
      break;
    case BTNode::Kind::Sequence:
      label = "->";
      shape = "ellipse";
      break;
    case BTNode::Kind::Condition: {
      bool first = true;
      for (const std::string& a : u.atom_texts(node.condition_set())) {
        if (!first) label += "\\n";
        label += a;
        first = false;
      }
      if (label.empty()) label = "{}";
      break;
    }
    case BTNode::Kind::Action:
      label = node.action_name();
      shape = "oval";
      break;
  }
  out << "  n" << id << " [shape=" << shape << " label=\"" << label << "\"];\n";
  if (parent >= 0) out << "  n" << parent << " -> n" << id << ";\n";
  for (const BTNode& child : node.children()) {
    dot_node(child, u, counter, out, id);
  }
}

}  // namespace

std::string render_bt_dot(const BTNode& tree, const DomainUniverse& universe) {
  std::ostringstream out;
  out << "digraph bt {\n";
  int counter = 0;
  dot_node(tree, universe, counter, out, -1);
  out << "}\n";
  return out.str();
}

}  // namespace btground
