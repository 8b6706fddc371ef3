#include "mrtp/grid_map.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mrtp {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution)
    : width_(width), height_(height), resolution_(resolution) {
  if (width <= 0 || height <= 0) {
    throw MapParseError("grid dimensions must be positive");
  }
  if (!(resolution > 0.0)) {
    throw MapParseError("grid resolution must be positive");
  }
  occupancy_.assign(static_cast<std::size_t>(width) * height, 0);
  penalty_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

int OccupancyGrid::occupied_count() const {
  return static_cast<int>(std::count(occupancy_.begin(), occupancy_.end(), 1));
}

std::optional<CellIndex> OccupancyGrid::world_to_cell(WorldPoint p) const {
  if (p.x < 0.0 || p.y < 0.0 || p.x >= world_width() || p.y >= world_height()) {
    return std::nullopt;
  }
  CellIndex c{static_cast<int>(p.y / resolution_),
              static_cast<int>(p.x / resolution_)};
  // Guard against floating rounding at the upper edges.
  c.row = std::min(c.row, height_ - 1);
  c.col = std::min(c.col, width_ - 1);
  return c;
}

WorldPoint OccupancyGrid::cell_to_world(CellIndex c) const {
  return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_};
}

bool OccupancyGrid::segment_free(WorldPoint a, WorldPoint b,
                                 double step) const {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const WorldPoint p{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
    const auto cell = world_to_cell(p);
    if (!cell || occupied(*cell)) {
      return false;
    }
  }
  return true;
}

void OccupancyGrid::apply_penalty(const std::vector<CellIndex>& cells,
                                  double value) {
  for (const CellIndex& c : cells) {
    if (in_bounds(c)) {
      penalty_[index(c)] = value;
    }
  }
}

void OccupancyGrid::clear_penalties() {
  std::fill(penalty_.begin(), penalty_.end(), 0.0);
}

OccupancyGrid load_ascii(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  double resolution = 0.0;
  if (!(in >> tag >> resolution) || tag != "resolution") {
    throw MapParseError("expected 'resolution <m-per-cell>' header");
  }
  if (!(resolution > 0.0)) {
    throw MapParseError("resolution must be positive");
  }
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');

  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    rows.push_back(line);
  }
  if (rows.empty()) {
    throw MapParseError("map has no rows");
  }
  const std::size_t width = rows.front().size();
  for (const std::string& row : rows) {
    if (row.size() != width) {
      throw MapParseError("ragged map rows");
    }
  }

  OccupancyGrid grid(static_cast<int>(width), static_cast<int>(rows.size()),
                     resolution);
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (ch == '#') {
        grid.set_occupied({r, c}, true);
      } else if (ch != '.') {
        throw MapParseError(std::string("unknown map character '") + ch + "'");
      }
    }
  }
  return grid;
}

namespace {

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_pgm_token(const std::vector<uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char ch = static_cast<char>(bytes[pos]);
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') {
        ++pos;
      }
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos]));
    ++pos;
  }
  return token;
}

int parse_pgm_int(const std::vector<uint8_t>& bytes, std::size_t& pos,
                  const char* what) {
  const std::string token = next_pgm_token(bytes, pos);
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) {
      throw std::invalid_argument(token);
    }
    return value;
  } catch (const std::exception&) {
    throw MapParseError(std::string("bad PGM ") + what);
  }
}

}  // namespace

OccupancyGrid load_bitmap(const std::vector<uint8_t>& bytes, int threshold,
                          double resolution) {
  std::size_t pos = 0;
  if (next_pgm_token(bytes, pos) != "P5") {
    throw MapParseError("not a binary PGM (P5) file");
  }
  const int width = parse_pgm_int(bytes, pos, "width");
  const int height = parse_pgm_int(bytes, pos, "height");
  const int maxval = parse_pgm_int(bytes, pos, "maxval");
  if (width <= 0 || height <= 0) {
    throw MapParseError("bad PGM dimensions");
  }
  if (maxval <= 0 || maxval > 255) {
    throw MapParseError("PGM maxval out of range (must be 1..255)");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  if (bytes.size() < pos + pixels) {
    throw MapParseError("truncated PGM pixel data");
  }

  OccupancyGrid grid(width, height, resolution);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const uint8_t value = bytes[pos + static_cast<std::size_t>(r) * width + c];
      if (value < threshold) {
        grid.set_occupied({r, c}, true);
      }
    }
  }
  return grid;
}

std::vector<std::pair<CellIndex, double>> cells_near_occupied(
    const OccupancyGrid& grid, double radius) {
  std::vector<std::pair<CellIndex, double>> near;
  if (radius <= 0.0) return near;

  // Offsets whose cell rectangles lie within `radius` of the origin cell,
  // sorted by distance so the first occupied neighbor found is the nearest.
  // Rect-to-rect distance between cells k apart along an axis is (k-1)*res.
  const double res = grid.resolution();
  const int reach = static_cast<int>(std::ceil(radius / res)) + 1;
  std::vector<std::pair<double, CellIndex>> stamp;
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      const double gap_r = std::max(std::abs(dr) - 1, 0) * res;
      const double gap_c = std::max(std::abs(dc) - 1, 0) * res;
      const double d2 = gap_r * gap_r + gap_c * gap_c;
      if (d2 < radius * radius) {
        stamp.emplace_back(std::sqrt(d2), CellIndex{dr, dc});
      }
    }
  }
  std::sort(stamp.begin(), stamp.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const CellIndex cell{r, c};
      if (grid.occupied(cell)) continue;
      for (const auto& [dist, d] : stamp) {
        const CellIndex nb{r + d.row, c + d.col};
        if (grid.in_bounds(nb) && grid.occupied(nb)) {
          near.emplace_back(cell, dist);
          break;
        }
      }
    }
  }
  return near;
}

double occupied_clearance(const OccupancyGrid& grid, WorldPoint p,
                          double cap) {
  const double res = grid.resolution();
  const int reach = static_cast<int>(std::ceil(cap / res)) + 1;
  const auto center = grid.world_to_cell(p);
  int row0 = 0;
  int col0 = 0;
  if (center) {
    row0 = center->row;
    col0 = center->col;
  } else {
    row0 = static_cast<int>(std::floor(p.y / res));
    col0 = static_cast<int>(std::floor(p.x / res));
  }
  double best = cap;
  for (int row = row0 - reach; row <= row0 + reach; ++row) {
    for (int col = col0 - reach; col <= col0 + reach; ++col) {
      const CellIndex cell{row, col};
      if (!grid.in_bounds(cell) || !grid.occupied(cell)) continue;
      const double x0 = col * res;
      const double y0 = row * res;
      const double dx = std::max({x0 - p.x, 0.0, p.x - (x0 + res)});
      const double dy = std::max({y0 - p.y, 0.0, p.y - (y0 + res)});
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
  }
  return best;
}

OccupancyGrid load_map_file(const std::string& path, int pgm_threshold,
                            double pgm_resolution) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MapParseError("cannot open map file: " + path);
  }
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return load_bitmap(bytes, pgm_threshold, pgm_resolution);
  }
  return load_ascii(std::string(bytes.begin(), bytes.end()));
}

}  // namespace mrtp
