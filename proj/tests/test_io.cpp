#include "oracles.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/dynamics.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/gridworld.hpp"
#include "repdyn/report.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/svg.hpp"
#include "repdyn/trajectory_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace repdyn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("repdyn_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Csv, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Csv, MatrixRoundTripWithHeaderAndComments) {
  std::mt19937_64 rng(2);
  const Matrix m = oracle::gaussian(rng, 4, 3);
  const std::string text = "# note\n" + matrix_to_csv(m, {"a", "b", "c"});
  EXPECT_EQ(matrix_from_csv(text, true), m);
  EXPECT_THROW(matrix_from_csv("1,2\n3\n", false), ConfigurationError);
  EXPECT_THROW(matrix_from_csv("1,x\n", false), ConfigurationError);
}

TEST(TrajectoryIo, WideRoundTripKeepsMetaAndValues) {
  Trajectory t;
  t.times = {0.0, 0.5, 1.0};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3; ++i) t.states.push_back(oracle::gaussian(rng, 4, 1));
  t.add_meta("flow", "td");
  t.add_meta("gamma", 0.9);
  const Trajectory back = trajectory_from_wide_csv(trajectory_to_wide_csv(t));
  EXPECT_EQ(back.times, t.times);
  ASSERT_EQ(back.states.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(back.states[i], t.states[i]);
  EXPECT_EQ(back.meta, t.meta);
}

TEST(TrajectoryIo, LongFormatIsColumnMajor) {
  Trajectory t;
  t.times = {2.0};
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  t.states.push_back(m);
  EXPECT_EQ(trajectory_to_long_csv(t), "t,entry_row,entry_col,value\n2,0,0,1\n2,1,0,3\n2,0,1,2\n2,1,1,4\n");
  EXPECT_THROW(trajectory_to_wide_csv(t), ConfigurationError);
}

TEST(Svg, LineHeatmapAndGridworld) {
  Matrix line(3, 3);
  line << 0, 1, 2, 1, 3, 1, 2, 2, 0;
  SvgOptions opts;
  opts.title = "demo <&>";
  opts.series_labels = {"a", "b"};
  const std::string svg = emit_svg(line, PlotKind::kLine, opts);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<!-- repdyn 0.1.0 -->"), std::string::npos);
  EXPECT_NE(svg.find("demo &lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(svg, emit_svg(line, PlotKind::kLine, opts));

  const std::string heat = emit_svg(Matrix::Constant(2, 2, 1.0), PlotKind::kHeatmap);
  EXPECT_NE(heat.find("degenerate range"), std::string::npos);

  const Vector values = Vector::LinSpaced(105, 0.0, 1.0);
  const std::string grid = emit_svg(values, PlotKind::kGridworld);
  EXPECT_NE(grid.find("data-rows=\"11\""), std::string::npos);
  EXPECT_NE(grid.find("data-cols=\"11\""), std::string::npos);
}

TEST(Svg, ErrorsNameTheOffendingCell) {
  Matrix m = Matrix::Ones(2, 3);
  m(1, 2) = std::numeric_limits<double>::infinity();
  try {
    emit_svg(m, PlotKind::kHeatmap);
    FAIL() << "expected RenderError";
  } catch (const RenderError& e) {
    EXPECT_NE(std::string(e.what()).find("(1, 2)"), std::string::npos);
  }
  EXPECT_THROW(emit_svg(Matrix::Ones(3, 1), PlotKind::kLine), RenderError);
  EXPECT_THROW(emit_svg(Vector::Ones(10), PlotKind::kGridworld), RenderError);
  EXPECT_THROW(emit_svg(Matrix(0, 0), PlotKind::kHeatmap), RenderError);
}

TEST(Report, OverridesParseEveryType) {
  bool flag = false;
  int count = 1;
  std::uint64_t seed = 0;
  double x = 0.0;
  std::string mode = "a";
  std::vector<double> list;
  const std::vector<Param> params{{"flag", &flag}, {"count", &count}, {"seed", &seed},
                                  {"x", &x},       {"mode", &mode},   {"list", &list}};
  apply_overrides(params, {{"flag", "true"}, {"count", "1e4"}, {"seed", "42"}, {"x", "-2.5"}, {"mode", "b"},
                           {"list", "1,2.5,1e3"}});
  EXPECT_TRUE(flag);
  EXPECT_EQ(count, 10000);
  EXPECT_EQ(seed, 42u);
  EXPECT_EQ(x, -2.5);
  EXPECT_EQ(mode, "b");
  EXPECT_EQ(list, (std::vector<double>{1, 2.5, 1000}));

  const ConfigRecord rec = make_record(params);
  ASSERT_EQ(rec.size(), 6u);
  EXPECT_EQ(std::get<std::int64_t>(rec[1].second), 10000);
}

TEST(Report, OverrideErrors) {
  int count = 1;
  bool flag = false;
  const std::vector<Param> params{{"count", &count}, {"flag", &flag}};
  try {
    apply_overrides(params, {{"cuont", "3"}});
    FAIL() << "expected ConfigurationError";
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("known: count, flag"), std::string::npos);
  }
  EXPECT_THROW(apply_overrides(params, {{"count", "2.5"}}), ConfigurationError);
  EXPECT_THROW(apply_overrides(params, {{"count", "abc"}}), ConfigurationError);
  EXPECT_THROW(apply_overrides(params, {{"count", "1e20"}}), ConfigurationError);
  EXPECT_THROW(apply_overrides(params, {{"flag", "yes"}}), ConfigurationError);
}

TEST(Report, CompareSemantics) {
  EXPECT_TRUE(compare(1.0, "<", 2.0));
  EXPECT_FALSE(compare(2.0, "<", 2.0));
  EXPECT_TRUE(compare(2.0, "<=", 2.0));
  EXPECT_TRUE(compare(3.0, ">", 2.0));
  EXPECT_TRUE(compare(2.0, ">=", 2.0));
  EXPECT_TRUE(compare(0.0, "==", 0.0));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const char* op : {"<", "<=", ">", ">=", "=="}) EXPECT_FALSE(compare(nan, op, 1.0)) << op;
  EXPECT_THROW(compare(1.0, "!=", 1.0), ConfigurationError);
}

TEST(Report, BundleWritesAllFiles) {
  ReportBundle b;
  b.name = "demo";
  b.config = {{"seed", std::int64_t{3}}, {"gamma", 0.9}, {"mode", std::string("x")}};
  b.add_table("t", "a\n1\n");
  b.add_figure("f", "<svg/>");
  b.add_check("ok", 1.0, "<", 2.0, "t");
  b.add_check("bad", std::numeric_limits<double>::quiet_NaN(), "<", 2.0, "t");
  EXPECT_FALSE(b.all_passed());
  const fs::path dir = fresh_dir("bundle");
  write_bundle(b, dir);
  EXPECT_EQ(slurp(dir / "tables" / "t.csv"), "a\n1\n");
  EXPECT_EQ(slurp(dir / "figures" / "f.svg"), "<svg/>");
  const auto config = nlohmann::json::parse(slurp(dir / "config.json"));
  EXPECT_EQ(config.at("experiment"), "demo");
  EXPECT_EQ(config.at("config").at("seed"), 3);
  const auto checks = nlohmann::json::parse(slurp(dir / "checks.json"));
  ASSERT_TRUE(checks.is_array());
  ASSERT_EQ(checks.size(), 2u);
  EXPECT_EQ(checks[1].at("passed"), false);
  EXPECT_EQ(checks[1].at("measured"), "nan");
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
  fs::remove_all(dir);

  b.add_check("orphan", 1.0, "<", 2.0, "missing");
  EXPECT_THROW(write_bundle(b, fresh_dir("orphan")), ConfigurationError);
}

TEST(Rng, StreamsAreReproducibleAndIndependent) {
  Rng a = make_stream(5, 1), b = make_stream(5, 1), c = make_stream(5, 2), d = make_stream(6, 1);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_EQ(derive_seed(5, 1), x);
  EXPECT_NE(derive_seed(5, 1), derive_seed(5, 2));
  // High bits of the seed matter.
  EXPECT_NE(derive_seed(1, 0), derive_seed(1 + (std::uint64_t{1} << 32), 0));
}

TEST(Rng, NormalMatrixFillsColumnMajor) {
  Rng a = make_stream(8), b = make_stream(8);
  const Matrix m = normal_matrix(a, 3, 2, 2.0);
  std::normal_distribution<double> n(0.0, 2.0);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_EQ(m(i), n(b));
}
