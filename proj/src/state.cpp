#include "btground/state.hpp"

#include <bit>

namespace btground {

namespace {
constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t bits) {
  return (bits + kWordBits - 1) / kWordBits;
}
}  // namespace

StateSet::StateSet(std::size_t bit_count)
    : bit_count_(bit_count), words_(word_count(bit_count), 0) {}

StateSet StateSet::with_bits(std::size_t bit_count,
                             std::initializer_list<std::size_t> bits) {
  StateSet s(bit_count);
  for (std::size_t b : bits) s.set(b);
  return s;
}

StateSet StateSet::from_mask(std::size_t bit_count, std::uint64_t mask) {
  StateSet s(bit_count);
  for (std::size_t i = 0; i < bit_count && i < kWordBits; ++i) {
    if (mask & (std::uint64_t{1} << i)) s.set(i);
  }
  return s;
}

bool StateSet::test(std::size_t bit) const {
  if (bit >= bit_count_) throw DomainError("StateSet bit out of range");
  return (words_[bit / kWordBits] >> (bit % kWordBits)) & 1u;
}

void StateSet::set(std::size_t bit, bool value) {
  if (bit >= bit_count_) throw DomainError("StateSet bit out of range");
  const std::uint64_t mask = std::uint64_t{1} << (bit % kWordBits);
  if (value) {
    words_[bit / kWordBits] |= mask;
  } else {
    words_[bit / kWordBits] &= ~mask;
  }
}

std::size_t StateSet::count() const {
  std::size_t total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

bool StateSet::none() const {
  for (std::uint64_t w : words_) {
    if (w != 0) return false;
  }
  return true;
}

void StateSet::check_same_width(const StateSet& other) const {
  if (bit_count_ != other.bit_count_) {
    throw DomainError("StateSet width mismatch: sets come from different universes");
  }
}

bool StateSet::contains(const StateSet& other) const {
  check_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((other.words_[i] & ~words_[i]) != 0) return false;
  }
  return true;
}

bool StateSet::intersects(const StateSet& other) const {
  check_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & other.words_[i]) != 0) return true;
  }
  return false;
}

StateSet& StateSet::operator|=(const StateSet& other) {
  check_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

StateSet& StateSet::operator&=(const StateSet& other) {
  check_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

StateSet& StateSet::operator-=(const StateSet& other) {
  check_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

std::vector<std::size_t> StateSet::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bit_count_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

std::uint64_t StateSet::mask() const {
  if (bit_count_ > kWordBits) {
    throw DomainError("StateSet::mask requires size() <= 64");
  }
  return words_.empty() ? 0 : words_[0];
}

std::uint64_t StateSet::hash() const {
  // FNV-1a over the words plus the width.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(bit_count_);
  for (std::uint64_t w : words_) mix(w);
  return h;
}

bool holds(const StateSet& condition, const StateSet& state) {
  return state.contains(condition);
}

}  // namespace btground
