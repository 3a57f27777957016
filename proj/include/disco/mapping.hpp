#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disco/render.hpp"
#include "disco/world.hpp"

namespace disco {

// Agent pose relative to the episode anchor (the starting cell center).
struct PoseEstimate {
  double x = 0.0;  // meters
  double z = 0.0;
  int yaw = 0;
  int horizon = kInitialHorizon;
  friend bool operator==(const PoseEstimate&, const PoseEstimate&) = default;
};

PoseEstimate initial_pose(const AgentState& agent);
// Dead-reckoning: applies the action's nominal motion only when it succeeded.
PoseEstimate update_pose(const PoseEstimate& pose, const Action& action, const StepResult& result);

struct SemanticPoint {
  double x = 0.0;
  double z = 0.0;
  int cls = 0;  // index into the semantic space
};

std::vector<SemanticPoint> project_frame(const EgoFrame& frame, const PoseEstimate& pose);

struct MapConfig {
  int M = 80;
  double cell = kCellSize;

  int grids() const { return M * M; }
  // Grid containing a point in anchor-relative meters; nullopt outside the extent.
  std::optional<int> grid_of(double x, double z) const;
  int gx(int grid) const { return grid % M; }
  int gz(int grid) const { return grid / M; }
  // Anchor-relative center of a grid.
  double center_x(int grid) const { return (gx(grid) - M / 2) * cell; }
  double center_z(int grid) const { return (gz(grid) - M / 2) * cell; }
};

// Translate between world cells and map grids given the anchor cell.
int grid_of_cell(const MapConfig& cfg, Cell anchor, Cell c);
Cell cell_of_grid(const MapConfig& cfg, Cell anchor, int grid);

using ClassCounts = std::array<int, kNumSemanticClasses>;

struct GridObservation {
  std::vector<int> c;                  // points per grid, length M^2
  std::map<int, ClassCounts> c_class;  // only grids with points
  long dropped = 0;                    // points outside the extent
};

GridObservation bin_points(const std::vector<SemanticPoint>& points, const MapConfig& cfg);

using ClassValues = std::array<double, kNumSemanticClasses>;

struct SoftLabels {
  std::map<int, ClassValues> y;  // grids with c_i > 0; classes absent from a grid are 0
  std::vector<char> v;           // visibility per grid
  int rho = 8;

  std::vector<int> visible() const;
};

SoftLabels soft_labels(const GridObservation& obs, int rho);

// One line of JSON with the nonzero counts, for debugging dumps.
std::string observation_json(int step, const PoseEstimate& pose, const GridObservation& obs);

}  // namespace disco
