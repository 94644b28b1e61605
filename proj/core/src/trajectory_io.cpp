#include "repdyn/trajectory_io.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"

#include <sstream>

namespace repdyn {
namespace {

void write_meta(std::ostringstream& os, const Trajectory& traj) {
  for (const auto& [key, value] : traj.meta) os << "# " << key << '=' << value << '\n';
}

}  // namespace

std::string trajectory_to_wide_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_meta(os, traj);
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().rows();
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) os << ",v_" << i;
  os << '\n';
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const Matrix& v = traj.states[s];
    if (v.cols() != 1 || v.rows() != n) {
      throw ConfigurationError("trajectory_to_wide_csv: states must be |X| x 1 value vectors");
    }
    os << format_double(traj.times[s]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(v(i, 0));
    os << '\n';
  }
  return os.str();
}

std::string trajectory_to_long_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_meta(os, traj);
  os << "t,entry_row,entry_col,value\n";
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const Matrix& m = traj.states[s];
    const std::string t = format_double(traj.times[s]);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) os << t << ',' << r << ',' << c << ',' << format_double(m(r, c)) << '\n';
  }
  return os.str();
}

Trajectory trajectory_from_wide_csv(std::string_view text) {
  Trajectory traj;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) != 0) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigurationError("trajectory csv: malformed meta line '" + line + "'");
    traj.add_meta(line.substr(2, eq - 2), line.substr(eq + 1));
  }
  const Matrix table = matrix_from_csv(text, true);
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    traj.times.push_back(table(r, 0));
    traj.states.emplace_back(table.row(r).tail(table.cols() - 1).transpose());
  }
  return traj;
}

}  // namespace repdyn
