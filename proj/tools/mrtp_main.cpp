#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrtp/bench.hpp"
#include "mrtp/coordinator.hpp"
#include "mrtp/grid_map.hpp"
#include "mrtp/messages.hpp"
#include "mrtp/render.hpp"
#include "mrtp/scenario.hpp"
#include "mrtp/simulator.hpp"

namespace {

using mrtp::ConfigError;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

int run_plan(const std::string& scenario_path, const std::string& out_path) {
  const mrtp::ScenarioConfig cfg = mrtp::load_scenario(scenario_path);
  const mrtp::OccupancyGrid grid = mrtp::load_map_file(cfg.map_path);
  mrtp::validate_scenario(cfg, grid);

  mrtp::SearchWorkspace ws;
  std::vector<mrtp::WorldPoint> starts;
  std::vector<mrtp::WorldPoint> goals;
  for (const mrtp::RobotSpec& r : cfg.robots) {
    starts.push_back({r.x, r.y});
    goals.push_back({r.goal_x, r.goal_y});
  }
  const auto outcomes =
      mrtp::plan_all(grid, starts, goals, cfg.coordinator, ws, nullptr);

  std::ostringstream lines;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].path) {
      throw mrtp::PlanningError("robot " + std::to_string(cfg.robots[i].id) +
                                ": " + outcomes[i].error);
    }
    mrtp::GlobalPath path = *outcomes[i].path;
    path.robot_id = cfg.robots[i].id;
    lines << mrtp::encode(mrtp::path_update_from(path)) << '\n';
  }
  if (out_path.empty()) {
    std::cout << lines.str();
  } else {
    open_out(out_path) << lines.str();
  }
  return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                 bool no_render) {
  const mrtp::ScenarioConfig cfg = mrtp::load_scenario(scenario_path);
  const mrtp::OccupancyGrid grid = mrtp::load_map_file(cfg.map_path);
  const mrtp::SimResult result = mrtp::run_scenario(cfg, grid);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    auto out = open_out((dir / "trace.jsonl").string());
    result.trace.write(out);
  }
  open_out((dir / "metrics.json").string())
      << result.metrics.to_json().dump(2) << '\n';
  if (!no_render) {
    open_out((dir / "render.svg").string()) << render_svg(result.trace, grid);
  }
  std::cout << "makespan=" << result.metrics.makespan
            << " deadline_exceeded=" << result.metrics.deadline_exceeded
            << " solves=" << result.metrics.solve_count
            << " fallbacks=" << result.metrics.fallback_count
            << " replans=" << result.metrics.replan_count << '\n';
  return 0;
}

int run_bench(const std::string& map_path, const std::vector<int>& counts,
              int reps, const std::string& out_path) {
  const mrtp::OccupancyGrid grid = mrtp::load_map_file(map_path);
  const auto rows = mrtp::bench_scaling(grid, counts, reps);
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const mrtp::BenchRow& row : rows) {
    j.push_back({{"n", row.n},
                 {"search_seconds", row.search_seconds},
                 {"fit_seconds", row.fit_seconds},
                 {"total_seconds", row.total_seconds}});
  }
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    open_out(out_path) << j.dump(2) << '\n';
  }
  return 0;
}

int run_render(const std::string& trace_path, std::string map_path,
               const std::string& out_path) {
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file: " + trace_path);
  const mrtp::SimTrace trace = mrtp::SimTrace::read(in);
  if (map_path.empty()) {
    if (trace.header.contains("config")) {
      map_path = trace.header["config"].value("map", "");
    }
    if (map_path.empty()) {
      throw ConfigError("trace header carries no map path; pass --map");
    }
  }
  const mrtp::OccupancyGrid grid = mrtp::load_map_file(map_path);
  const std::string svg = mrtp::render_svg(trace, grid);
  if (out_path.empty()) {
    std::cout << svg;
  } else {
    open_out(out_path) << svg;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot route planning and trajectory optimization"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string out_dir = "out";
  std::string map_path;
  std::string trace_path;
  std::vector<int> counts{1, 4, 8, 16, 32};
  int reps = 3;
  bool no_render = false;

  auto* plan = app.add_subcommand(
      "plan", "Plan fleet routes and emit path update records");
  plan->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  plan->add_option("--out", out_path, "Output file (default: stdout)");

  auto* simulate =
      app.add_subcommand("simulate", "Run a scenario and write its artifacts");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  simulate->add_option("--out-dir", out_dir,
                       "Directory for trace.jsonl, metrics.json, render.svg");
  simulate->add_flag("--no-render", no_render, "Skip the SVG rendering");

  auto* bench =
      app.add_subcommand("bench", "Measure global planning cost by fleet size");
  bench->add_option("--map", map_path, "Map file (ASCII grid or PGM)")
      ->required();
  bench->add_option("--counts", counts, "Fleet sizes to measure")
      ->delimiter(',');
  bench->add_option("--reps", reps, "Repetitions per fleet size");
  bench->add_option("--out", out_path, "Output file (default: stdout)");

  auto* render = app.add_subcommand("render", "Render a trace file to SVG");
  render->add_option("--trace", trace_path, "Trace file (JSON lines)")
      ->required();
  render->add_option("--map", map_path,
                     "Map file (default: path recorded in the trace)");
  render->add_option("--out", out_path, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plan->parsed()) return run_plan(scenario_path, out_path);
    if (simulate->parsed()) return run_simulate(scenario_path, out_dir, no_render);
    if (bench->parsed()) return run_bench(map_path, counts, reps, out_path);
    if (render->parsed()) return run_render(trace_path, map_path, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mrtp::MapParseError& e) {
    std::cerr << "map error: " << e.what() << '\n';
    return 2;
  } catch (const mrtp::PlanningError& e) {
    std::cerr << "planning error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
