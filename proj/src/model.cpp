#include "btground/model.hpp"

#include "btground/errors.hpp"

namespace btground {

std::uint64_t ActionModel::triple_hash() const {
  std::uint64_t h = pre.hash();
  h = h * 0x9e3779b97f4a7c15ull + add.hash();
  h = h * 0x9e3779b97f4a7c15ull + del.hash();
  return h;
}

bool ActionModel::same_triple(const ActionModel& other) const {
  return pre == other.pre && add == other.add && del == other.del;
}

bool is_valid_model(const ActionModel& h, const ValidityRules& rules) {
  if (h.add.intersects(h.del)) return false;
  if (rules.add_disjoint_pre && h.add.intersects(h.pre)) return false;
  if (rules.del_subset_pre && !h.pre.contains(h.del)) return false;
  if (!rules.mutex_groups.empty()) {
    const StateSet post = (h.pre - h.del) | h.add;
    for (const StateSet& group : rules.mutex_groups) {
      if ((h.pre & group).count() > 1) return false;
      if ((h.add & group).count() > 1) return false;
      if ((post & group).count() > 1) return false;
    }
  }
  return true;
}

StateSet apply_model(const ActionModel& h, const StateSet& s) {
  if (!holds(h.pre, s)) {
    throw PreconditionError("apply_model: precondition of '" + h.name +
                            "' does not hold");
  }
  return (s | h.add) - h.del;
}

StateSet expected_outcome(const ActionModel& h) {
  return (h.pre | h.add) - h.del;
}

}  // namespace btground
