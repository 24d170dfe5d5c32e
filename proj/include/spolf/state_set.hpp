#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spolf/grid.hpp"

namespace spolf {

/// Dense bitmap over a fixed state universe with a cached cardinality.
class StateSet {
 public:
  StateSet() = default;
  explicit StateSet(std::size_t universe) : bits_(universe, 0) {}

  static StateSet all(std::size_t universe);
  static StateSet of(std::size_t universe, std::span<const StateIndex> states);

  std::size_t universe() const { return bits_.size(); }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool contains(StateIndex s) const { return bits_[s] != 0; }
  bool insert(StateIndex s) {
    if (bits_[s]) return false;
    bits_[s] = 1;
    ++count_;
    return true;
  }
  void erase(StateIndex s) {
    if (!bits_[s]) return;
    bits_[s] = 0;
    --count_;
  }

  StateSet& operator&=(const StateSet& other);
  StateSet& operator|=(const StateSet& other);
  friend StateSet operator&(StateSet a, const StateSet& b) { return a &= b; }
  friend StateSet operator|(StateSet a, const StateSet& b) { return a |= b; }

  bool is_subset_of(const StateSet& other) const;
  std::vector<StateIndex> to_vector() const;
  /// Lowest member, or universe() when empty.
  StateIndex first() const;

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t s = 0; s < bits_.size(); ++s) {
      if (bits_[s]) fn(static_cast<StateIndex>(s));
    }
  }

  friend bool operator==(const StateSet& a, const StateSet& b) { return a.bits_ == b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

}  // namespace spolf
