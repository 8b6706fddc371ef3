#include "mrtp/ags.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mrtp {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct OpenEntry {
  double f;
  double h;
  int row;
  int col;

  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    if (row != o.row) return row > o.row;
    return col > o.col;
  }
};

double octile(CellIndex a, CellIndex b, double res) {
  const double dr = std::abs(a.row - b.row);
  const double dc = std::abs(a.col - b.col);
  return res * (std::max(dr, dc) + (kSqrt2 - 1.0) * std::min(dr, dc));
}

}  // namespace

void SearchWorkspace::prepare(const OccupancyGrid& grid) {
  const std::size_t n =
      static_cast<std::size_t>(grid.width()) * grid.height();
  if (scratch.g.size() != n) {
    scratch.g.assign(n, 0.0);
    scratch.parent.assign(n, -1);
    scratch.stamp.assign(n, 0);
    scratch.closed.assign(n, 0);
    scratch.virtual_stamp.assign(n, 0);
    scratch.generation = 0;
    scratch.virtual_generation = 0;
  }
}

std::optional<SearchPath> best_first_search(
    const OccupancyGrid& grid, CellIndex start, CellIndex goal,
    const std::vector<CellIndex>& virtual_obstacles, SearchWorkspace& ws) {
  if (!grid.in_bounds(start) || !grid.in_bounds(goal) ||
      grid.occupied(start) || grid.occupied(goal)) {
    return std::nullopt;
  }
  ws.prepare(grid);
  auto& s = ws.scratch;
  const int w = grid.width();
  auto idx = [w](CellIndex c) {
    return static_cast<std::size_t>(c.row) * w + c.col;
  };

  s.virtual_generation++;
  for (CellIndex c : virtual_obstacles) {
    if (grid.in_bounds(c)) {
      s.virtual_stamp[idx(c)] = s.virtual_generation;
    }
  }
  auto blocked = [&](CellIndex c) {
    return grid.occupied(c) || s.virtual_stamp[idx(c)] == s.virtual_generation;
  };
  if (blocked(start) || blocked(goal)) {
    return std::nullopt;
  }

  s.generation++;
  const uint32_t gen = s.generation;
  const double res = grid.resolution();

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  s.g[idx(start)] = 0.0;
  s.parent[idx(start)] = -1;
  s.stamp[idx(start)] = gen;
  s.closed[idx(start)] = 0;
  open.push({octile(start, goal, res), octile(start, goal, res), start.row,
             start.col});

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const CellIndex cur{top.row, top.col};
    const std::size_t ci = idx(cur);
    if (s.closed[ci] && s.stamp[ci] == gen) {
      continue;
    }
    s.closed[ci] = 1;
    s.stamp[ci] = gen;
    if (cur == goal) {
      SearchPath path;
      path.cost = s.g[ci];
      for (int32_t at = static_cast<int32_t>(ci); at >= 0;
           at = s.parent[static_cast<std::size_t>(at)]) {
        path.cells.push_back({at / w, at % w});
      }
      std::reverse(path.cells.begin(), path.cells.end());
      return path;
    }

    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const CellIndex nb{cur.row + dr, cur.col + dc};
        if (!grid.in_bounds(nb) || blocked(nb)) continue;
        if (dr != 0 && dc != 0) {
          // Diagonal steps must not cut corners past occupied cells.
          if (blocked({cur.row + dr, cur.col}) ||
              blocked({cur.row, cur.col + dc})) {
            continue;
          }
        }
        const std::size_t ni = idx(nb);
        if (s.closed[ni] && s.stamp[ni] == gen) continue;
        const double step = (dr != 0 && dc != 0) ? kSqrt2 * res : res;
        const double cand = s.g[ci] + step + grid.penalty(nb);
        if (s.stamp[ni] != gen || cand < s.g[ni]) {
          s.g[ni] = cand;
          s.parent[ni] = static_cast<int32_t>(ci);
          if (s.stamp[ni] != gen) {
            s.closed[ni] = 0;
          }
          s.stamp[ni] = gen;
          const double h = octile(nb, goal, res);
          open.push({cand + h, h, nb.row, nb.col});
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<SearchPath> best_first_search(const OccupancyGrid& grid,
                                            CellIndex start, CellIndex goal) {
  SearchWorkspace ws;
  return best_first_search(grid, start, goal, {}, ws);
}

std::vector<CellIndex> turning_points(const SearchPath& path) {
  std::vector<CellIndex> points;
  for (std::size_t i = 1; i + 1 < path.cells.size(); ++i) {
    const int dr0 = path.cells[i].row - path.cells[i - 1].row;
    const int dc0 = path.cells[i].col - path.cells[i - 1].col;
    const int dr1 = path.cells[i + 1].row - path.cells[i].row;
    const int dc1 = path.cells[i + 1].col - path.cells[i].col;
    if (dr0 != dr1 || dc0 != dc1) {
      points.push_back(path.cells[i]);
    }
  }
  return points;
}

namespace {

// Free cells enclosed between the two paths, found by blocking both paths
// (diagonal steps thickened so the loop is watertight for a 4-connected
// fill) and flood-filling the exterior from the map border.
std::vector<CellIndex> enclosed_corridor(const OccupancyGrid& grid,
                                         const SearchPath& first,
                                         const SearchPath& last) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<uint8_t> wall(static_cast<std::size_t>(w) * h, 0);
  auto idx = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

  auto block_path = [&](const SearchPath& p) {
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const CellIndex c = p.cells[i];
      wall[idx(c.row, c.col)] = 1;
      if (i + 1 < p.cells.size()) {
        const CellIndex n = p.cells[i + 1];
        if (n.row != c.row && n.col != c.col) {
          wall[idx(c.row, n.col)] = 1;
          wall[idx(n.row, c.col)] = 1;
        }
      }
    }
  };
  block_path(first);
  block_path(last);

  std::vector<uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
  std::vector<CellIndex> stack;
  auto push = [&](int r, int c) {
    if (r < 0 || r >= h || c < 0 || c >= w) return;
    const std::size_t i = idx(r, c);
    if (outside[i] || wall[i]) return;
    outside[i] = 1;
    stack.push_back({r, c});
  };
  for (int r = 0; r < h; ++r) {
    push(r, 0);
    push(r, w - 1);
  }
  for (int c = 0; c < w; ++c) {
    push(0, c);
    push(h - 1, c);
  }
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    push(c.row + 1, c.col);
    push(c.row - 1, c.col);
    push(c.row, c.col + 1);
    push(c.row, c.col - 1);
  }

  std::vector<CellIndex> corridor;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!outside[idx(r, c)] && grid.free({r, c})) {
        corridor.push_back({r, c});
      }
    }
  }
  return corridor;
}

}  // namespace

std::optional<AgsResult> ags_plan(const OccupancyGrid& grid, CellIndex start,
                                  CellIndex goal, int max_order,
                                  SearchWorkspace& ws) {
  max_order = std::max(1, max_order);
  AgsResult result;
  std::vector<CellIndex> virtual_obstacles;
  for (int order = 1; order <= max_order; ++order) {
    auto path = best_first_search(grid, start, goal, virtual_obstacles, ws);
    if (!path) {
      break;
    }
    const auto turns = turning_points(*path);
    virtual_obstacles.insert(virtual_obstacles.end(), turns.begin(),
                             turns.end());
    result.order_paths.push_back(std::move(*path));
  }
  if (result.order_paths.empty()) {
    return std::nullopt;
  }
  const int achieved = static_cast<int>(result.order_paths.size());
  result.selected_order = std::min((max_order + 1) / 2, achieved);
  result.corridor = enclosed_corridor(grid, result.order_paths.front(),
                                      result.order_paths.back());
  return result;
}

std::optional<AgsResult> ags_plan(const OccupancyGrid& grid, CellIndex start,
                                  CellIndex goal, int max_order) {
  SearchWorkspace ws;
  return ags_plan(grid, start, goal, max_order, ws);
}

std::optional<AgsResult> replan_search(const OccupancyGrid& grid,
                                       CellIndex start, CellIndex goal,
                                       int max_order, SearchWorkspace& ws) {
  return ags_plan(grid, start, goal, max_order, ws);
}

}  // namespace mrtp
