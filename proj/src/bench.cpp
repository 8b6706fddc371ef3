#include "mrtp/bench.hpp"

#include <chrono>
#include <string>

#include "mrtp/scenario.hpp"

namespace mrtp {

namespace {

std::vector<int> free_rows(const OccupancyGrid& grid, int col) {
  std::vector<int> rows;
  for (int row = 0; row < grid.height(); ++row) {
    if (!grid.occupied(CellIndex{row, col})) rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<BenchSlot> bench_slots(const OccupancyGrid& grid, int n) {
  if (n <= 0) throw ConfigError("bench slot count must be positive");
  int left_col = -1;
  std::vector<int> left;
  for (int col = 0; col < grid.width(); ++col) {
    left = free_rows(grid, col);
    if (static_cast<int>(left.size()) >= n) {
      left_col = col;
      break;
    }
  }
  int right_col = -1;
  std::vector<int> right;
  for (int col = grid.width() - 1; col >= 0; --col) {
    right = free_rows(grid, col);
    if (static_cast<int>(right.size()) >= n) {
      right_col = col;
      break;
    }
  }
  if (left_col < 0 || right_col < 0 || left_col >= right_col) {
    throw ConfigError("map cannot host " + std::to_string(n) +
                      " benchmark slots");
  }

  std::vector<BenchSlot> slots;
  slots.reserve(static_cast<std::size_t>(n));
  const int lmax = static_cast<int>(left.size()) - 1;
  const int rmax = static_cast<int>(right.size()) - 1;
  for (int i = 0; i < n; ++i) {
    const int li = n > 1 ? i * lmax / (n - 1) : 0;
    const int ri = n > 1 ? rmax - i * rmax / (n - 1) : rmax;
    BenchSlot slot;
    slot.start = grid.cell_to_world(
        CellIndex{left[static_cast<std::size_t>(li)], left_col});
    slot.goal = grid.cell_to_world(
        CellIndex{right[static_cast<std::size_t>(ri)], right_col});
    slots.push_back(slot);
  }
  return slots;
}

std::vector<BenchRow> bench_scaling(const OccupancyGrid& grid,
                                    const std::vector<int>& counts, int reps,
                                    const CoordinatorConfig& cfg) {
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (const int n : counts) {
    const auto slots = bench_slots(grid, n);
    std::vector<WorldPoint> starts;
    std::vector<WorldPoint> goals;
    for (const BenchSlot& slot : slots) {
      starts.push_back(slot.start);
      goals.push_back(slot.goal);
    }
    BenchRow row;
    row.n = n;
    for (int rep = 0; rep < reps; ++rep) {
      SearchWorkspace ws;
      PlanTimings timings;
      const auto t0 = clock::now();
      const auto outcomes = plan_all(grid, starts, goals, cfg, ws, &timings);
      const auto t1 = clock::now();
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].path) {
          throw PlanningError("bench slot " + std::to_string(i) + ": " +
                              outcomes[i].error);
        }
      }
      row.search_seconds += timings.search_seconds;
      row.fit_seconds += timings.fit_seconds;
      row.total_seconds +=
          std::chrono::duration<double>(t1 - t0).count();
    }
    const double denom = std::max(1, reps);
    row.search_seconds /= denom;
    row.fit_seconds /= denom;
    row.total_seconds /= denom;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mrtp
