#include "spolf/state_set.hpp"

#include <cassert>

namespace spolf {

StateSet StateSet::all(std::size_t universe) {
  StateSet s;
  s.bits_.assign(universe, 1);
  s.count_ = universe;
  return s;
}

StateSet StateSet::of(std::size_t universe, std::span<const StateIndex> states) {
  StateSet s(universe);
  for (StateIndex x : states) s.insert(x);
  return s;
}

StateSet& StateSet::operator&=(const StateSet& other) {
  assert(universe() == other.universe());
  count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    bits_[i] = bits_[i] & other.bits_[i];
    count_ += bits_[i];
  }
  return *this;
}

StateSet& StateSet::operator|=(const StateSet& other) {
  assert(universe() == other.universe());
  count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    bits_[i] = bits_[i] | other.bits_[i];
    count_ += bits_[i];
  }
  return *this;
}

bool StateSet::is_subset_of(const StateSet& other) const {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

std::vector<StateIndex> StateSet::to_vector() const {
  std::vector<StateIndex> out;
  out.reserve(count_);
  for_each([&](StateIndex s) { out.push_back(s); });
  return out;
}

StateIndex StateSet::first() const {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) return static_cast<StateIndex>(i);
  }
  return static_cast<StateIndex>(bits_.size());
}

}  // namespace spolf
