#pragma once

#include "repdyn/dynamics.hpp"

#include <string>
#include <string_view>

namespace repdyn {

// Both formats start with one "# key=value" line per meta entry.

/// t,v_0,...,v_{n-1}; every state must be a single column.
std::string trajectory_to_wide_csv(const Trajectory& traj);

/// t,entry_row,entry_col,value with entries in column-major order.
std::string trajectory_to_long_csv(const Trajectory& traj);

Trajectory trajectory_from_wide_csv(std::string_view text);

}  // namespace repdyn
