#include "mrtp/messages.hpp"

#include <nlohmann/json.hpp>

namespace mrtp {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json point_array(const WorldPoint& p) {
  return ordered_json::array({p.x, p.y});
}

std::vector<WorldPoint> parse_points(const ordered_json& arr) {
  std::vector<WorldPoint> out;
  out.reserve(arr.size());
  for (const auto& entry : arr) {
    out.push_back(WorldPoint{entry.at(0).get<double>(),
                             entry.at(1).get<double>()});
  }
  return out;
}

}  // namespace

std::string encode(const SnapshotMsg& msg) {
  ordered_json j;
  j["type"] = "snapshot";
  j["tick"] = msg.tick;
  ordered_json robots = ordered_json::array();
  for (const SnapshotMsg::Robot& r : msg.robots) {
    ordered_json entry;
    entry["id"] = r.id;
    entry["x"] = r.x;
    entry["y"] = r.y;
    entry["theta"] = r.theta;
    entry["v_r"] = r.v_r;
    entry["v_l"] = r.v_l;
    entry["weight"] = r.weight;
    robots.push_back(std::move(entry));
  }
  j["robots"] = std::move(robots);
  return j.dump();
}

std::string encode(const NeighborsMsg& msg) {
  ordered_json j;
  j["type"] = "neighbors";
  j["id"] = msg.id;
  j["neighbor_ids"] = msg.neighbor_ids;
  ordered_json prio = ordered_json::array();
  for (const PriorityEntry& p : msg.priorities) {
    prio.push_back(ordered_json::array({p.id, p.weight}));
  }
  j["priorities"] = std::move(prio);
  return j.dump();
}

std::string encode(const ReplanRequestMsg& msg) {
  ordered_json j;
  j["type"] = "replan_request";
  j["id"] = msg.id;
  j["x"] = msg.x;
  j["y"] = msg.y;
  j["reason"] = msg.reason;
  return j.dump();
}

std::string encode(const PathUpdateMsg& msg) {
  ordered_json j;
  j["type"] = "path_update";
  j["id"] = msg.id;
  ordered_json wps = ordered_json::array();
  for (const WorldPoint& p : msg.waypoints) wps.push_back(point_array(p));
  j["waypoints"] = std::move(wps);
  j["knots"] = msg.knots;
  ordered_json ctrl = ordered_json::array();
  for (const WorldPoint& p : msg.control_points) ctrl.push_back(point_array(p));
  j["control_points"] = std::move(ctrl);
  j["weights"] = msg.weights;
  return j.dump();
}

PathUpdateMsg path_update_from(const GlobalPath& path) {
  PathUpdateMsg msg;
  msg.id = path.robot_id;
  msg.waypoints = path.waypoints;
  msg.knots = path.curve.knots;
  msg.control_points.reserve(path.curve.ctrl.size());
  for (const Eigen::Vector2d& c : path.curve.ctrl) {
    msg.control_points.push_back(WorldPoint{c.x(), c.y()});
  }
  msg.weights = path.curve.weights;
  return msg;
}

Message parse_message(const std::string& line) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("type")) {
    return std::monostate{};
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "snapshot") {
      SnapshotMsg msg;
      msg.tick = j.at("tick").get<long>();
      for (const auto& entry : j.at("robots")) {
        SnapshotMsg::Robot r;
        r.id = entry.at("id").get<int>();
        r.x = entry.at("x").get<double>();
        r.y = entry.at("y").get<double>();
        r.theta = entry.at("theta").get<double>();
        r.v_r = entry.at("v_r").get<double>();
        r.v_l = entry.at("v_l").get<double>();
        r.weight = entry.at("weight").get<double>();
        msg.robots.push_back(r);
      }
      return msg;
    }
    if (type == "neighbors") {
      NeighborsMsg msg;
      msg.id = j.at("id").get<int>();
      msg.neighbor_ids = j.at("neighbor_ids").get<std::vector<int>>();
      for (const auto& entry : j.at("priorities")) {
        msg.priorities.push_back(PriorityEntry{entry.at(0).get<int>(),
                                               entry.at(1).get<double>()});
      }
      return msg;
    }
    if (type == "replan_request") {
      ReplanRequestMsg msg;
      msg.id = j.at("id").get<int>();
      msg.x = j.at("x").get<double>();
      msg.y = j.at("y").get<double>();
      msg.reason = j.at("reason").get<std::string>();
      return msg;
    }
    if (type == "path_update") {
      PathUpdateMsg msg;
      msg.id = j.at("id").get<int>();
      msg.waypoints = parse_points(j.at("waypoints"));
      msg.knots = j.at("knots").get<std::vector<double>>();
      msg.control_points = parse_points(j.at("control_points"));
      msg.weights = j.at("weights").get<std::vector<double>>();
      return msg;
    }
  } catch (const ordered_json::exception&) {
    return std::monostate{};
  }
  return std::monostate{};
}

}  // namespace mrtp
