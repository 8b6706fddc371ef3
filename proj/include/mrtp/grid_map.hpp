#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrtp {

/// Planar position in meters.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Grid coordinate. row 0 is the first map line, col 0 the first character.
struct CellIndex {
  int row = 0;
  int col = 0;

  bool operator==(const CellIndex&) const = default;
};

struct MapParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Axis-aligned occupancy grid with a mutable per-cell penalty layer.
///
/// World frame: cell (r, c) covers [c*res, (c+1)*res) x [r*res, (r+1)*res),
/// so the map spans [0, width*res) x [0, height*res), upper edges exclusive.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double world_width() const { return width_ * resolution_; }
  double world_height() const { return height_ * resolution_; }

  bool in_bounds(CellIndex c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  bool occupied(CellIndex c) const { return occupancy_[index(c)]; }
  bool free(CellIndex c) const { return !occupancy_[index(c)]; }
  void set_occupied(CellIndex c, bool value) { occupancy_[index(c)] = value; }

  double penalty(CellIndex c) const { return penalty_[index(c)]; }
  int occupied_count() const;

  /// Maps a world point to its containing cell; empty outside the map extent.
  std::optional<CellIndex> world_to_cell(WorldPoint p) const;

  /// Center of a cell. Precondition: in_bounds(c).
  WorldPoint cell_to_world(CellIndex c) const;

  /// True iff every sample at spacing <= step along [a, b] (endpoints
  /// included) lies in a free in-bounds cell. Sampling is symmetric in a/b.
  bool segment_free(WorldPoint a, WorldPoint b, double step) const;

  /// Writes `value` into the penalty layer for each listed cell
  /// (last write wins, out-of-bounds entries ignored).
  void apply_penalty(const std::vector<CellIndex>& cells, double value);
  void clear_penalties();

 private:
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * width_ + c.col;
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.0;
  std::vector<uint8_t> occupancy_;
  std::vector<double> penalty_;
};

/// Free cells whose rectangle comes within `radius` meters of an occupied
/// cell, each with that rectangle-to-rectangle distance. Useful for cost
/// shaping: surcharging these steers searches toward the middle of free
/// channels without closing tight passages.
std::vector<std::pair<CellIndex, double>> cells_near_occupied(
    const OccupancyGrid& grid, double radius);

/// Distance from `p` to the nearest occupied cell rectangle, capped at
/// `cap`; only cells within that range are examined.
double occupied_clearance(const OccupancyGrid& grid, WorldPoint p,
                          double cap);

/// Parses the ASCII map format:
///   resolution <meters-per-cell>
///   <rows of '#' (occupied) and '.' (free)>
/// Rows must be equal length. Throws MapParseError on malformed input.
OccupancyGrid load_ascii(const std::string& text);

/// Parses a binary PGM (P5, maxval <= 255). A pixel is occupied iff its
/// value < threshold. Resolution is not part of PGM and must be supplied.
OccupancyGrid load_bitmap(const std::vector<uint8_t>& bytes, int threshold,
                          double resolution);

OccupancyGrid load_map_file(const std::string& path, int pgm_threshold = 128,
                            double pgm_resolution = 0.05);

}  // namespace mrtp
