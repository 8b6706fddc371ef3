#pragma once

#include <vector>

#include "mrtp/coordinator.hpp"
#include "mrtp/grid_map.hpp"

namespace mrtp {

/// One start/goal crossing used by the planner benchmark.
struct BenchSlot {
  WorldPoint start;
  WorldPoint goal;
};

/// Averaged planning cost for one fleet size.
struct BenchRow {
  int n = 0;
  double search_seconds = 0.0;
  double fit_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Produces `n` crossings of the map: starts spread along the left free
/// column, goals spread along the right free column in reverse order, so
/// slot 0 runs corner to corner. Throws ConfigError if the map cannot host
/// that many slots.
std::vector<BenchSlot> bench_slots(const OccupancyGrid& grid, int n);

/// Runs plan_all for each fleet size in `counts`, `reps` times each with a
/// fresh search workspace, and reports mean timings. Throws PlanningError
/// if any slot fails to plan.
std::vector<BenchRow> bench_scaling(const OccupancyGrid& grid,
                                    const std::vector<int>& counts, int reps,
                                    const CoordinatorConfig& cfg =
                                        CoordinatorConfig{});

}  // namespace mrtp
