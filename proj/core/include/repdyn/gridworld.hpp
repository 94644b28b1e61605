#pragma once

#include "repdyn/mdp.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace repdyn {

/// Plain-text grid: '#' is a wall, '.' an open cell. Open cells are numbered
/// in row-major order, which fixes the state index of every cell.
class GridMap {
 public:
  static GridMap parse(std::string_view text);
  static GridMap load(const std::filesystem::path& path);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int n_open() const noexcept { return static_cast<int>(cells_.size()); }

  std::pair<int, int> cell(int state) const { return cells_.at(state); }
  std::optional<int> state_at(int row, int col) const;
  bool is_open(int row, int col) const { return state_at(row, col).has_value(); }

  std::string to_text() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::pair<int, int>> cells_;
  std::vector<int> index_;  // rows*cols, -1 for walls
};

enum GridAction : int { kUp = 0, kDown = 1, kWest = 2, kEast = 3 };

/// Four deterministic moves; bumping into a wall leaves the agent in place.
/// All rewards are zero.
Mdp build_gridworld(const GridMap& map);

/// The shipped four-rooms layout (105 open cells).
const GridMap& four_rooms_map();
std::string_view four_rooms_map_text();

/// Four-rooms MDP together with the uniform random policy.
std::pair<Mdp, Policy> build_four_rooms();

}  // namespace repdyn
