#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btground/state.hpp"

namespace btground {

/// One ground atom, e.g. Holding(apple) or HandEmpty. Equality within a
/// universe is by index; the textual form round-trips through the domain
/// parser.
struct Proposition {
  std::string predicate;
  std::vector<std::string> args;
  std::size_t index = 0;

  /// Canonical text: `Predicate` or `Predicate(arg1,arg2)`, no whitespace.
  std::string text() const;
};

/// Parse `Predicate(arg1,arg2)` into (predicate, args). Returns the column
/// (0-based) of the first offending character on failure via `error_col`.
std::optional<std::pair<std::string, std::vector<std::string>>> parse_atom_text(
    std::string_view text, std::size_t* error_col = nullptr);

struct ObjectInfo {
  std::string name;
  std::string description;
};

/// The finite proposition universe plus the object catalog used for
/// proposer prompts. Immutable after construction; indices are dense in
/// [0, n).
class DomainUniverse {
 public:
  DomainUniverse(std::vector<Proposition> propositions,
                 std::vector<ObjectInfo> objects = {});

  std::size_t size() const { return props_.size(); }
  const Proposition& at(std::size_t index) const { return props_.at(index); }
  const std::vector<Proposition>& propositions() const { return props_; }
  const std::vector<ObjectInfo>& objects() const { return objects_; }

  std::optional<std::size_t> find(std::string_view atom_text) const;

  /// Empty set of the universe's width.
  StateSet empty_set() const { return StateSet(size()); }
  StateSet full_set() const;

  /// Build a set from atom texts; unknown atoms throw DomainError.
  StateSet set_of(std::initializer_list<std::string_view> atoms) const;
  StateSet set_of(const std::vector<std::string>& atoms) const;

  /// Atom texts of the members, ascending by index.
  std::vector<std::string> atom_texts(const StateSet& s) const;
  std::string set_text(const StateSet& s) const;

 private:
  std::vector<Proposition> props_;
  std::vector<ObjectInfo> objects_;
  std::unordered_map<std::string, std::size_t> by_text_;
};

using UniversePtr = std::shared_ptr<const DomainUniverse>;

}  // namespace btground
