#include "btground/universe.hpp"

#include <cctype>

namespace btground {

namespace {
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '~';
}
}  // namespace

std::string Proposition::text() const {
  if (args.empty()) return predicate;
  std::string out = predicate;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += args[i];
  }
  out += ')';
  return out;
}

std::optional<std::pair<std::string, std::vector<std::string>>> parse_atom_text(
    std::string_view text, std::size_t* error_col) {
  auto fail = [&](std::size_t col) {
    if (error_col) *error_col = col;
    return std::nullopt;
  };
  std::size_t i = 0;
  if (text.empty()) return fail(0);
  while (i < text.size() && ident_char(text[i])) ++i;
  if (i == 0) return fail(0);
  std::string predicate(text.substr(0, i));
  std::vector<std::string> args;
  if (i == text.size()) return std::make_pair(predicate, args);
  if (text[i] != '(') return fail(i);
  ++i;
  while (true) {
    std::size_t start = i;
    while (i < text.size() && ident_char(text[i])) ++i;
    if (i == start) return fail(i);
    args.emplace_back(text.substr(start, i - start));
    if (i >= text.size()) return fail(i);  // unbalanced
    if (text[i] == ',') {
      ++i;
      continue;
    }
    if (text[i] == ')') {
      ++i;
      break;
    }
    return fail(i);
  }
  if (i != text.size()) return fail(i);
  return std::make_pair(predicate, args);
}

DomainUniverse::DomainUniverse(std::vector<Proposition> propositions,
                               std::vector<ObjectInfo> objects)
    : props_(std::move(propositions)), objects_(std::move(objects)) {
  if (props_.empty()) throw DomainError("universe must contain at least one proposition");
  for (std::size_t i = 0; i < props_.size(); ++i) {
    props_[i].index = i;
    auto [it, inserted] = by_text_.emplace(props_[i].text(), i);
    if (!inserted) {
      throw DomainError("duplicate proposition in universe: " + props_[i].text());
    }
  }
}

std::optional<std::size_t> DomainUniverse::find(std::string_view atom_text) const {
  auto it = by_text_.find(std::string(atom_text));
  if (it == by_text_.end()) return std::nullopt;
  return it->second;
}

StateSet DomainUniverse::full_set() const {
  StateSet s(size());
  for (std::size_t i = 0; i < size(); ++i) s.set(i);
  return s;
}

StateSet DomainUniverse::set_of(std::initializer_list<std::string_view> atoms) const {
  StateSet s(size());
  for (auto a : atoms) {
    auto idx = find(a);
    if (!idx) throw DomainError("unknown atom: " + std::string(a));
    s.set(*idx);
  }
  return s;
}

StateSet DomainUniverse::set_of(const std::vector<std::string>& atoms) const {
  StateSet s(size());
  for (const auto& a : atoms) {
    auto idx = find(a);
    if (!idx) throw DomainError("unknown atom: " + a);
    s.set(*idx);
  }
  return s;
}

std::vector<std::string> DomainUniverse::atom_texts(const StateSet& s) const {
  if (s.size() != size()) throw DomainError("set does not belong to this universe");
  std::vector<std::string> out;
  for (std::size_t i : s.indices()) out.push_back(props_[i].text());
  return out;
}

std::string DomainUniverse::set_text(const StateSet& s) const {
  std::string out = "{";
  bool first = true;
  for (const auto& a : atom_texts(s)) {
    if (!first) out += ", ";
    out += a;
    first = false;
  }
  out += "}";
  return out;
}

}  // namespace btground
