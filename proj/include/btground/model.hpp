#pragma once

#include <string>
#include <vector>

#include "btground/state.hpp"

namespace btground {

/// Declared intended transition of an action: apply in state s (with
/// pre ⊆ s) yields s ∪ add ∖ del.
struct ActionModel {
  std::string name;
  StateSet pre;
  StateSet add;
  StateSet del;

  bool operator==(const ActionModel&) const = default;

  /// Identity of the (pre, add, del) triple, ignoring the name. Used to
  /// deduplicate proposals.
  std::uint64_t triple_hash() const;
  bool same_triple(const ActionModel& other) const;
};

/// Domain-independent and domain-declared validity constraints on models.
/// add ∩ del = ∅ is always enforced; the two named rules are overridable
/// per domain; mutex groups come from the domain file.
struct ValidityRules {
  bool add_disjoint_pre = true;
  bool del_subset_pre = true;
  std::vector<StateSet> mutex_groups;
};

/// True iff: add ∩ del = ∅, the enabled configurable rules hold, and for
/// every mutex group m the precondition, the add set, and the forced
/// post-image (pre ∖ del) ∪ add each contain at most one atom of m.
bool is_valid_model(const ActionModel& h, const ValidityRules& rules);

/// Eq-style state transition: s ∪ add ∖ del. Throws PreconditionError if
/// pre does not hold in s.
StateSet apply_model(const ActionModel& h, const StateSet& s);

/// The symbolic outcome an execution must cover for the model to be
/// accepted: (pre ∪ add) ∖ del.
StateSet expected_outcome(const ActionModel& h);

}  // namespace btground
