#pragma once

#include <optional>
#include <vector>

#include "disco/world.hpp"

namespace disco {

struct RenderConfig {
  int rays = 120;
  double fov_deg = 60.0;      // horizontal and vertical
  double max_range = 5.0;     // meters
  int samples_per_cell = 4;   // free-floor samples per cell length along a ray
  double eye_height = 1.5;    // camera above the floor
  double surface_height = 0.9;  // nominal height of every object's visible surface
  // Noise model. Zero rates make the frame a pure function of (scene, agent, cfg).
  double class_flip = 0.0;
  double depth_jitter = 0.0;  // stddev in meters
  unsigned long long noise_seed = 0;
};

struct RayHit {
  double distance = 0.0;
  std::optional<ObjectClass> cls;
  AffordanceMask affordances = 0;
  std::optional<ObjectId> object;
};

struct FreeSample {
  int ray = 0;
  double distance = 0.0;
};

struct EgoFrame {
  std::vector<RayHit> rays;
  std::vector<FreeSample> free_samples;
  double fov_deg = 60.0;
  double max_range = 5.0;

  int width() const { return static_cast<int>(rays.size()); }
  // Bearing offset of a ray relative to the agent's yaw, in degrees.
  double ray_offset_deg(int col) const;
  bool sees_object(ObjectId id) const;
  bool sees_class(ObjectClass c) const;
};

// World-space center of a cell, in meters.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};
Vec2 cell_center(Cell c);
double cell_distance(Cell a, Cell b);
// Bearing in degrees clockwise from +z of the vector (dx, dz), in [0, 360).
double bearing_deg(double dx, double dz);

// Vertical field-of-view tests at a given horizontal distance.
bool object_in_vertical_view(double distance, int horizon, const RenderConfig& cfg);
bool floor_in_vertical_view(double distance, int horizon, const RenderConfig& cfg);

// Interaction predicate evaluated against an already rendered noise-free frame.
StepResult check_interaction(const GridScene& scene, const AgentState& agent, const Action& action,
                             const EgoFrame& frame);

EgoFrame render_egocentric(const GridScene& scene, const AgentState& agent,
                           const RenderConfig& cfg);

}  // namespace disco
