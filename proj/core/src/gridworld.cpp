#include "repdyn/gridworld.hpp"

#include "repdyn/errors.hpp"

#include <fstream>
#include <sstream>

namespace repdyn {
namespace {

constexpr std::string_view kFourRoomsText =
#include "four_rooms_map.inc"
    ;

}  // namespace

GridMap GridMap::parse(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(std::move(line));
  }
  if (lines.empty()) throw ConfigurationError("GridMap: empty map");

  GridMap map;
  map.rows_ = static_cast<int>(lines.size());
  map.cols_ = static_cast<int>(lines.front().size());
  map.index_.assign(static_cast<std::size_t>(map.rows_) * map.cols_, -1);
  for (int r = 0; r < map.rows_; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != map.cols_) {
      throw ConfigurationError("GridMap: row " + std::to_string(r) + " has width " +
                               std::to_string(line.size()) + ", expected " + std::to_string(map.cols_));
    }
    for (int c = 0; c < map.cols_; ++c) {
      if (line[static_cast<std::size_t>(c)] == '.') {
        map.index_[static_cast<std::size_t>(r) * map.cols_ + c] = static_cast<int>(map.cells_.size());
        map.cells_.emplace_back(r, c);
      } else if (line[static_cast<std::size_t>(c)] != '#') {
        throw ConfigurationError(std::string("GridMap: unexpected character '") + line[static_cast<std::size_t>(c)] +
                                 "' at row " + std::to_string(r));
      }
    }
  }
  if (map.cells_.empty()) throw ConfigurationError("GridMap: no open cells");
  return map;
}

GridMap GridMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("GridMap: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<int> GridMap::state_at(int row, int col) const {
  if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return std::nullopt;
  const int s = index_[static_cast<std::size_t>(row) * cols_ + col];
  if (s < 0) return std::nullopt;
  return s;
}

std::string GridMap::to_text() const {
  std::string out;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) out.push_back(is_open(r, c) ? '.' : '#');
    out.push_back('\n');
  }
  return out;
}

Mdp build_gridworld(const GridMap& map) {
  const int n = map.n_open();
  constexpr int kOffsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  std::vector<Matrix> kernel(4, Matrix::Zero(n, n));
  for (int s = 0; s < n; ++s) {
    const auto [r, c] = map.cell(s);
    for (int a = 0; a < 4; ++a) {
      const auto next = map.state_at(r + kOffsets[a][0], c + kOffsets[a][1]);
      kernel[static_cast<std::size_t>(a)](s, next.value_or(s)) = 1.0;
    }
  }
  return Mdp(std::move(kernel), Matrix::Zero(n, 4));
}

std::string_view four_rooms_map_text() { return kFourRoomsText; }

const GridMap& four_rooms_map() {
  static const GridMap map = GridMap::parse(kFourRoomsText);
  return map;
}

std::pair<Mdp, Policy> build_four_rooms() {
  Mdp mdp = build_gridworld(four_rooms_map());
  Policy uniform = Policy::uniform(mdp.n_states(), mdp.n_actions());
  return {std::move(mdp), std::move(uniform)};
}

}  // namespace repdyn
