#include "spolf/grid.hpp"

#include <algorithm>

#include "spolf/errors.hpp"

namespace spolf {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kStay: return "stay";
    case Action::kUp: return "up";
    case Action::kRight: return "right";
    case Action::kDown: return "down";
    case Action::kLeft: return "left";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view name) {
  for (Action a : kActions) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

GridTopology::GridTopology(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidSpec("grid dimensions must be positive");
}

StateIndex GridTopology::step(StateIndex s, Action a) const {
  Cell c = cell(s);
  switch (a) {
    case Action::kStay: break;
    case Action::kUp: --c.y; break;
    case Action::kRight: ++c.x; break;
    case Action::kDown: ++c.y; break;
    case Action::kLeft: --c.x; break;
  }
  return contains(c) ? index(c) : s;
}

Successors GridTopology::successors(StateIndex s) const {
  Successors out;
  const Cell c = cell(s);
  // Ascending row-major order: up, left, self, right, down.
  if (c.y > 0) out.states_[out.count_++] = s - static_cast<StateIndex>(width_);
  if (c.x > 0) out.states_[out.count_++] = s - 1;
  out.states_[out.count_++] = s;
  if (c.x + 1 < width_) out.states_[out.count_++] = s + 1;
  if (c.y + 1 < height_) out.states_[out.count_++] = s + static_cast<StateIndex>(width_);
  return out;
}

std::optional<Action> GridTopology::action_between(StateIndex from, StateIndex to) const {
  for (Action a : kActions) {
    if (step(from, a) == to) return a;
  }
  return std::nullopt;
}

}  // namespace spolf
