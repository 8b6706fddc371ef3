#include "mrtp/render.hpp"

#include <cstdio>
#include <sstream>
#include <vector>

namespace mrtp {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

const char* color_of(int index) {
  return kPalette[index % kPaletteSize];
}

}  // namespace

std::string render_svg(const SimTrace& trace, const OccupancyGrid& grid,
                       const RenderStyle& style) {
  const double res = grid.resolution();
  const double map_w = grid.width() * res * style.scale;
  const double map_h = grid.height() * res * style.scale;
  const double m = style.margin;
  const double chart_top = m + map_h + m;
  const double total_w = map_w + 2 * m;
  const double total_h = chart_top + style.chart_height + m;

  // World coordinates have y up; SVG has y down.
  auto px = [&](double x) { return m + x * style.scale; };
  auto py = [&](double y) { return m + map_h - y * style.scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(total_w)
      << "\" height=\"" << fmt(total_h) << "\" viewBox=\"0 0 " << fmt(total_w)
      << " " << fmt(total_h) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(total_w) << "\" height=\""
      << fmt(total_h) << "\" fill=\"#ffffff\"/>\n";
  svg << "<rect x=\"" << fmt(m) << "\" y=\"" << fmt(m) << "\" width=\""
      << fmt(map_w) << "\" height=\"" << fmt(map_h)
      << "\" fill=\"#f4f4f4\" stroke=\"#888888\"/>\n";

  // Occupied cells, run-length merged per row.
  for (int row = 0; row < grid.height(); ++row) {
    int col = 0;
    while (col < grid.width()) {
      if (!grid.occupied(CellIndex{row, col})) {
        ++col;
        continue;
      }
      int end = col;
      while (end < grid.width() && grid.occupied(CellIndex{row, end})) ++end;
      const double x0 = px(col * res);
      const double y0 = py((row + 1) * res);
      svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
          << fmt((end - col) * res * style.scale) << "\" height=\""
          << fmt(res * style.scale) << "\" fill=\"#444444\"/>\n";
      col = end;
    }
  }

  if (trace.ticks.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }
  const std::size_t n = trace.ticks.front().robots.size();

  // Communication rings at a fixed tick period.
  for (std::size_t ti = 0; ti < trace.ticks.size();
       ti += static_cast<std::size_t>(style.circle_period)) {
    const TickRecord& rec = trace.ticks[ti];
    for (std::size_t i = 0; i < rec.robots.size(); ++i) {
      const RobotTick& r = rec.robots[i];
      svg << "<circle cx=\"" << fmt(px(r.x)) << "\" cy=\"" << fmt(py(r.y))
          << "\" r=\"" << fmt(style.comm_radius * style.scale)
          << "\" fill=\"none\" stroke=\"" << color_of(static_cast<int>(i))
          << "\" stroke-opacity=\"0.25\"/>\n";
    }
  }

  // Trails: one polyline per robot sampled at a fixed stride.
  for (std::size_t i = 0; i < n; ++i) {
    svg << "<polyline fill=\"none\" stroke=\"" << color_of(static_cast<int>(i))
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t ti = 0; ti < trace.ticks.size();
         ti += static_cast<std::size_t>(style.trail_stride)) {
      const RobotTick& r = trace.ticks[ti].robots[i];
      if (!first) svg << " ";
      svg << fmt(px(r.x)) << "," << fmt(py(r.y));
      first = false;
    }
    const RobotTick& last = trace.ticks.back().robots[i];
    if (!first) svg << " ";
    svg << fmt(px(last.x)) << "," << fmt(py(last.y));
    svg << "\"/>\n";
  }

  // Start and goal markers. Goals come from the embedded scenario config;
  // starts are the first tick poses.
  std::vector<std::pair<double, double>> goals(n, {0.0, 0.0});
  bool have_goals = false;
  if (trace.header.contains("config") &&
      trace.header["config"].contains("robots")) {
    const auto& robots = trace.header["config"]["robots"];
    if (robots.is_array() && robots.size() == n) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& goal = robots[i]["goal"];
        goals[i] = {goal[0].get<double>(), goal[1].get<double>()};
      }
      have_goals = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const RobotTick& start = trace.ticks.front().robots[i];
    svg << "<circle cx=\"" << fmt(px(start.x)) << "\" cy=\""
        << fmt(py(start.y)) << "\" r=\"4.000\" fill=\"#2ca02c\"/>\n";
    if (have_goals) {
      svg << "<circle cx=\"" << fmt(px(goals[i].first)) << "\" cy=\""
          << fmt(py(goals[i].second)) << "\" r=\"4.000\" fill=\"#d62728\"/>\n";
    }
    const RobotTick& last = trace.ticks.back().robots[i];
    svg << "<text x=\"" << fmt(px(last.x) + 5.0) << "\" y=\""
        << fmt(py(last.y) - 5.0) << "\" font-size=\"11\" fill=\""
        << color_of(static_cast<int>(i)) << "\">" << last.id << "</text>\n";
  }

  // Completion chart: path completion ratio against time.
  const auto series = completion_series(trace);
  const double t_end = trace.ticks.back().t;
  const double cx0 = m;
  const double cy0 = chart_top;
  const double ch = style.chart_height;
  svg << "<rect x=\"" << fmt(cx0) << "\" y=\"" << fmt(cy0) << "\" width=\""
      << fmt(map_w) << "\" height=\"" << fmt(ch)
      << "\" fill=\"#fbfbfb\" stroke=\"#888888\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << color_of(static_cast<int>(i))
        << "\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    for (const CompletionPoint& p : series[i]) {
      const double x = t_end > 1e-9 ? cx0 + (p.t / t_end) * map_w : cx0;
      const double y = cy0 + ch - p.ratio * ch;
      if (!first) svg << " ";
      svg << fmt(x) << "," << fmt(y);
      first = false;
    }
    svg << "\"/>\n";
  }
  svg << "<text x=\"" << fmt(cx0 + 2.0) << "\" y=\"" << fmt(cy0 + 12.0)
      << "\" font-size=\"10\" fill=\"#666666\">completion</text>\n";
  svg << "<text x=\"" << fmt(cx0 + map_w - 40.0) << "\" y=\""
      << fmt(cy0 + ch - 4.0) << "\" font-size=\"10\" fill=\"#666666\">t="
      << fmt(t_end) << "s</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mrtp
