#pragma once

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "btground/errors.hpp"

namespace btground {

/// Fixed-width bitset over a proposition universe. Used for both
/// environment states and conditions; a condition c holds in a state s
/// iff c is a subset of s.
///
/// The width is the universe size n; it is fixed at construction. Binary
/// operations on sets of different widths throw DomainError, which is how
/// universe mismatches surface.
class StateSet {
 public:
  StateSet() = default;
  explicit StateSet(std::size_t bit_count);

  static StateSet with_bits(std::size_t bit_count,
                            std::initializer_list<std::size_t> bits);
  /// Interpret the low `bit_count` bits of `mask` (bit i = proposition i).
  static StateSet from_mask(std::size_t bit_count, std::uint64_t mask);

  std::size_t size() const { return bit_count_; }
  bool empty() const { return bit_count_ == 0; }

  bool test(std::size_t bit) const;
  void set(std::size_t bit, bool value = true);
  void reset(std::size_t bit) { set(bit, false); }

  std::size_t count() const;
  bool none() const;
  bool any() const { return !none(); }

  /// True iff `other` is a subset of *this.
  bool contains(const StateSet& other) const;
  bool intersects(const StateSet& other) const;

  StateSet& operator|=(const StateSet& other);
  StateSet& operator&=(const StateSet& other);
  StateSet& operator-=(const StateSet& other);

  friend StateSet operator|(StateSet a, const StateSet& b) { return a |= b; }
  friend StateSet operator&(StateSet a, const StateSet& b) { return a &= b; }
  friend StateSet operator-(StateSet a, const StateSet& b) { return a -= b; }

  bool operator==(const StateSet& other) const = default;

  /// Indices of the member bits, ascending.
  std::vector<std::size_t> indices() const;

  /// Value of the set as a mask; only valid for size() <= 64.
  std::uint64_t mask() const;

  std::uint64_t hash() const;

  std::span<const std::uint64_t> words() const { return words_; }

 private:
  void check_same_width(const StateSet& other) const;

  std::size_t bit_count_ = 0;
  std::vector<std::uint64_t> words_;
};

struct StateSetHash {
  std::size_t operator()(const StateSet& s) const {
    return static_cast<std::size_t>(s.hash());
  }
};

/// Condition-hold test: c holds in s iff c is a subset of s.
bool holds(const StateSet& condition, const StateSet& state);

}  // namespace btground
