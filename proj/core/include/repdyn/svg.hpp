#pragma once

#include "repdyn/gridworld.hpp"
#include "repdyn/mdp.hpp"

#include <string>
#include <vector>

namespace repdyn {

enum class PlotKind {
  /// One colored cell per matrix entry.
  kHeatmap,
  /// Column 0 is the x axis, every further column is one series.
  kLine,
  /// A single column of per-state values drawn on the grid map; walls blank.
  kGridworld,
};

struct SvgOptions {
  std::string title;
  std::vector<std::string> series_labels;  // kLine only
  const GridMap* map = nullptr;            // kGridworld; defaults to four-rooms
};

/// Self-contained SVG with the color (or y) range annotated. Throws
/// RenderError naming the first non-finite entry.
std::string emit_svg(const Matrix& table, PlotKind kind, const SvgOptions& options = {});

}  // namespace repdyn
