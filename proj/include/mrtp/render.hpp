#pragma once

#include <string>

#include "mrtp/grid_map.hpp"
#include "mrtp/simulator.hpp"

namespace mrtp {

/// Layout knobs for the trace renderer. All defaults are deterministic;
/// rendering the same trace twice yields byte-identical output.
struct RenderStyle {
  double scale = 24.0;       // pixels per meter
  int trail_stride = 10;     // control ticks between trail samples
  int circle_period = 400;   // control ticks between communication rings
  double comm_radius = 1.5;  // ring radius in meters
  int chart_height = 120;    // completion chart pane height in pixels
  int margin = 16;
};

/// Renders a simulation trace over its map: occupancy cells, start and goal
/// markers, robot trails, periodic communication rings, and a completion
/// chart underneath.
std::string render_svg(const SimTrace& trace, const OccupancyGrid& grid,
                       const RenderStyle& style = RenderStyle{});

}  // namespace mrtp
