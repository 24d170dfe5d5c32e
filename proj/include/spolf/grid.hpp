#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace spolf {

/// States are row-major cell indices: index = y * width + x.
using StateIndex = std::uint32_t;

enum class Action : std::uint8_t { kStay = 0, kUp, kRight, kDown, kLeft };

inline constexpr std::array<Action, 5> kActions = {Action::kStay, Action::kUp, Action::kRight,
                                                   Action::kDown, Action::kLeft};

std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view name);

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Distinct one-step successors of a state, ascending by index. Always
/// contains the state itself (stay).
class Successors {
 public:
  const StateIndex* begin() const { return states_.data(); }
  const StateIndex* end() const { return states_.data() + count_; }
  std::size_t size() const { return count_; }
  StateIndex operator[](std::size_t i) const { return states_[i]; }

 private:
  friend class GridTopology;
  std::array<StateIndex, 5> states_{};
  std::uint8_t count_ = 0;
};

/// Deterministic 4-connected grid with a stay action. "Up" decreases the row
/// (y); moves that would leave the grid are self-loops.
class GridTopology {
 public:
  GridTopology() = default;
  GridTopology(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t num_states() const { return static_cast<std::size_t>(width_) * height_; }

  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  StateIndex index(Cell c) const { return static_cast<StateIndex>(c.y * width_ + c.x); }
  Cell cell(StateIndex s) const {
    return {static_cast<int>(s % width_), static_cast<int>(s / width_)};
  }

  StateIndex step(StateIndex s, Action a) const;

  /// Successor set. Since every move has an inverse move (or is a boundary
  /// self-loop), the predecessor set of a state equals its successor set.
  Successors successors(StateIndex s) const;

  /// Lowest-numbered action that moves `from` to `to`, if any.
  std::optional<Action> action_between(StateIndex from, StateIndex to) const;

 private:
  int width_ = 0;
  int height_ = 0;
};

}  // namespace spolf
