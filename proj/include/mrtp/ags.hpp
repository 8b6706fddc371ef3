#pragma once

#include <optional>
#include <vector>

#include "mrtp/grid_map.hpp"

namespace mrtp {

/// An 8-connected cell path and its accumulated cost (step lengths in
/// meters plus any per-cell penalty surcharges).
struct SearchPath {
  std::vector<CellIndex> cells;
  double cost = 0.0;
};

/// Result of the iterated search. order_paths[k] holds the order k+1 path;
/// the selected path is the middle order, and the corridor is the free
/// region enclosed between the first- and highest-order paths (diagnostic).
struct AgsResult {
  std::vector<SearchPath> order_paths;
  int selected_order = 1;  // 1-based
  std::vector<CellIndex> corridor;

  const SearchPath& selected() const {
    return order_paths[static_cast<std::size_t>(selected_order - 1)];
  }
};

/// Reusable search buffers. One instance may serve many searches on grids
/// of the same size; reuse avoids re-zeroing whole-grid arrays per query.
class SearchWorkspace {
 public:
  void prepare(const OccupancyGrid& grid);

  // Epoch-stamped per-cell scratch. Values are only valid for the current
  // search generation, so resetting is O(1).
  struct Scratch {
    std::vector<double> g;
    std::vector<int32_t> parent;
    std::vector<uint32_t> stamp;
    std::vector<uint8_t> closed;
    std::vector<uint32_t> virtual_stamp;
    uint32_t generation = 0;
    uint32_t virtual_generation = 0;
  };
  Scratch scratch;
};

/// Minimal-cost 8-connected path under cost = octile step length +
/// per-cell penalty, ties broken lexicographically by (f, h, row, col).
/// Diagonal steps through diagonally adjacent occupied pairs are forbidden.
/// Cells listed in `virtual_obstacles` are treated as occupied.
std::optional<SearchPath> best_first_search(
    const OccupancyGrid& grid, CellIndex start, CellIndex goal,
    const std::vector<CellIndex>& virtual_obstacles, SearchWorkspace& ws);

std::optional<SearchPath> best_first_search(const OccupancyGrid& grid,
                                            CellIndex start, CellIndex goal);

/// Interior cells where the step direction changes.
std::vector<CellIndex> turning_points(const SearchPath& path);

/// Iterated search: order 1 runs on the raw grid; order k+1 additionally
/// treats the accumulated turning points of orders <= k as obstacles.
/// Stops early at the last successful order. Returns nullopt only when
/// order 1 already has no path. The selected path is order ceil(N/2)
/// (clamped to the achieved order count).
std::optional<AgsResult> ags_plan(const OccupancyGrid& grid, CellIndex start,
                                  CellIndex goal, int max_order,
                                  SearchWorkspace& ws);

std::optional<AgsResult> ags_plan(const OccupancyGrid& grid, CellIndex start,
                                  CellIndex goal, int max_order = 4);

/// Replanning entry point: identical machinery, run on the grid's current
/// penalty layer (callers install surcharges via apply_penalty first).
std::optional<AgsResult> replan_search(const OccupancyGrid& grid,
                                       CellIndex start, CellIndex goal,
                                       int max_order, SearchWorkspace& ws);

}  // namespace mrtp
