#include "repdyn/svg.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace repdyn {
namespace {

constexpr const char* kVersionComment = "<!-- repdyn 0.1.0 -->";
constexpr double kCell = 24.0;
constexpr double kMargin = 40.0;

std::string num(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Blue (low) to yellow (high) through teal.
std::string color(double value, double lo, double hi) {
  const double u = hi > lo ? std::clamp((value - lo) / (hi - lo), 0.0, 1.0) : 0.5;
  static constexpr std::array<std::array<double, 3>, 3> stops{{{68, 1, 84}, {33, 145, 140}, {253, 231, 37}}};
  const double pos = u * 2.0;
  const int i = std::min(static_cast<int>(pos), 1);
  const double f = pos - i;
  std::array<char, 8> buf{};
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  }
  std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf.data();
}

void check_finite(const Matrix& t) {
  for (Eigen::Index c = 0; c < t.cols(); ++c)
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      if (!std::isfinite(t(r, c))) {
        throw RenderError("emit_svg: non-finite value " + format_double(t(r, c)) + " at cell (" + std::to_string(r) +
                          ", " + std::to_string(c) + ")");
      }
}

void open(std::ostringstream& os, double width, double height, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
     << kVersionComment << '\n'
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << num(kMargin) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << escape(title)
       << "</text>\n";
  }
}

void legend(std::ostringstream& os, double x, double y, double lo, double hi) {
  os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\"" << color(lo, lo, hi)
     << "\"/>\n"
     << "<text x=\"" << num(x + 16) << "\" y=\"" << num(y + 10) << "\">min=" << format_double(lo) << "</text>\n"
     << "<rect x=\"" << num(x + 120) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\""
     << color(hi, lo, hi) << "\"/>\n"
     << "<text x=\"" << num(x + 136) << "\" y=\"" << num(y + 10) << "\">max=" << format_double(hi);
  if (!(hi > lo)) os << " (degenerate range)";
  os << "</text>\n</g>\n";
}

std::string heatmap(const Matrix& t, const SvgOptions& o) {
  const double lo = t.minCoeff();
  const double hi = t.maxCoeff();
  const double width = 2 * kMargin + kCell * static_cast<double>(t.cols());
  const double height = 2 * kMargin + kCell * static_cast<double>(t.rows()) + 20;
  std::ostringstream os;
  open(os, std::max(width, 320.0), height, o.title);
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      os << "<rect x=\"" << num(kMargin + kCell * c) << "\" y=\"" << num(kMargin + kCell * r) << "\" width=\""
         << num(kCell) << "\" height=\"" << num(kCell) << "\" fill=\"" << color(t(r, c), lo, hi) << "\"><title>("
         << r << "," << c << ") " << format_double(t(r, c)) << "</title></rect>\n";
    }
  legend(os, kMargin, height - kMargin + 10, lo, hi);
  os << "</svg>\n";
  return os.str();
}

std::string line_plot(const Matrix& t, const SvgOptions& o) {
  if (t.cols() < 2 || t.rows() < 1) throw RenderError("emit_svg: line plot needs an x column and >= 1 series");
  const double w = 480, h = 300;
  const double x_lo = t.col(0).minCoeff(), x_hi = t.col(0).maxCoeff();
  const Matrix ys = t.rightCols(t.cols() - 1);
  const double y_lo = ys.minCoeff(), y_hi = ys.maxCoeff();
  auto sx = [&](double x) { return kMargin + (x_hi > x_lo ? (x - x_lo) / (x_hi - x_lo) : 0.5) * w; };
  auto sy = [&](double y) { return kMargin + h - (y_hi > y_lo ? (y - y_lo) / (y_hi - y_lo) : 0.5) * h; };
  std::ostringstream os;
  open(os, w + 2 * kMargin + 140, h + 2 * kMargin + 20, o.title);
  os << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(w) << "\" height=\""
     << num(h) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (Eigen::Index s = 0; s < ys.cols(); ++s) {
    const std::string stroke = color(static_cast<double>(s), 0.0, static_cast<double>(std::max<Eigen::Index>(1, ys.cols() - 1)));
    os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (r) os << ' ';
      os << num(sx(t(r, 0))) << ',' << num(sy(ys(r, s)));
    }
    os << "\"/>\n";
    const std::string label = static_cast<std::size_t>(s) < o.series_labels.size()
                                  ? o.series_labels[static_cast<std::size_t>(s)]
                                  : "series " + std::to_string(s);
    os << "<text x=\"" << num(kMargin + w + 8) << "\" y=\"" << num(kMargin + 12 + 14 * static_cast<double>(s))
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << stroke << "\">" << escape(label) << "</text>\n";
  }
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<text x=\"" << num(kMargin) << "\" y=\"" << num(kMargin + h + 14) << "\">x: " << format_double(x_lo)
     << " .. " << format_double(x_hi) << "</text>\n"
     << "<text x=\"" << num(kMargin) << "\" y=\"" << num(kMargin + h + 28) << "\">y: min=" << format_double(y_lo)
     << " max=" << format_double(y_hi) << "</text>\n</g>\n</svg>\n";
  return os.str();
}

std::string gridworld(const Matrix& t, const SvgOptions& o) {
  const GridMap& map = o.map ? *o.map : four_rooms_map();
  if (t.cols() != 1 || t.rows() != map.n_open()) {
    throw RenderError("emit_svg: gridworld plot needs one value per open cell (" + std::to_string(map.n_open()) +
                      "), got " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
  }
  const double lo = t.minCoeff();
  const double hi = t.maxCoeff();
  // Crop to the bounding box of the open cells so the outer wall is not drawn.
  int r0 = map.rows(), r1 = -1, c0 = map.cols(), c1 = -1;
  for (int s = 0; s < map.n_open(); ++s) {
    const auto [r, c] = map.cell(s);
    r0 = std::min(r0, r);
    r1 = std::max(r1, r);
    c0 = std::min(c0, c);
    c1 = std::max(c1, c);
  }
  const int rows = r1 - r0 + 1;
  const int cols = c1 - c0 + 1;
  const double height = 2 * kMargin + kCell * rows + 20;
  std::ostringstream os;
  open(os, std::max(2 * kMargin + kCell * cols, 320.0), height, o.title);
  os << "<g class=\"grid\" data-rows=\"" << rows << "\" data-cols=\"" << cols << "\">\n";
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const auto state = map.state_at(r0 + r, c0 + c);
      os << "<rect x=\"" << num(kMargin + kCell * c) << "\" y=\"" << num(kMargin + kCell * r) << "\" width=\""
         << num(kCell) << "\" height=\"" << num(kCell) << "\" ";
      if (state) {
        os << "fill=\"" << color(t(*state, 0), lo, hi) << "\"><title>state " << *state << ' '
           << format_double(t(*state, 0)) << "</title></rect>\n";
      } else {
        os << "fill=\"#ffffff\" stroke=\"#dddddd\"/>\n";
      }
    }
  os << "</g>\n";
  legend(os, kMargin, height - kMargin + 10, lo, hi);
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string emit_svg(const Matrix& table, PlotKind kind, const SvgOptions& options) {
  if (table.size() == 0) throw RenderError("emit_svg: empty table");
  check_finite(table);
  switch (kind) {
    case PlotKind::kHeatmap: return heatmap(table, options);
    case PlotKind::kLine: return line_plot(table, options);
    case PlotKind::kGridworld: return gridworld(table, options);
  }
  throw RenderError("emit_svg: unknown plot kind");
}

}  // namespace repdyn
