#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mrtp/coordinator.hpp"
#include "mrtp/grid_map.hpp"

namespace mrtp {

/// Line-delimited records shared by the coordinator and the robots. The
/// same encoding doubles as the wire format, so field order is fixed and
/// every record is one line of JSON with a leading "type" field.

struct SnapshotMsg {
  struct Robot {
    int id = -1;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v_r = 0.0;
    double v_l = 0.0;
    double weight = 0.0;
  };
  long tick = 0;
  std::vector<Robot> robots;
};

struct NeighborsMsg {
  int id = -1;
  std::vector<int> neighbor_ids;
  std::vector<PriorityEntry> priorities;
};

struct ReplanRequestMsg {
  int id = -1;
  double x = 0.0;
  double y = 0.0;
  std::string reason;
};

struct PathUpdateMsg {
  int id = -1;
  std::vector<WorldPoint> waypoints;
  std::vector<double> knots;
  std::vector<WorldPoint> control_points;
  std::vector<double> weights;
};

std::string encode(const SnapshotMsg& msg);
std::string encode(const NeighborsMsg& msg);
std::string encode(const ReplanRequestMsg& msg);
std::string encode(const PathUpdateMsg& msg);

/// Path geometry sourced from a fitted global path.
PathUpdateMsg path_update_from(const GlobalPath& path);

using Message =
    std::variant<std::monostate, SnapshotMsg, NeighborsMsg, ReplanRequestMsg,
                 PathUpdateMsg>;

/// Parses one record line; monostate on malformed input or unknown type.
Message parse_message(const std::string& line);

}  // namespace mrtp
