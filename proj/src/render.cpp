#include "disco/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "disco/random.hpp"

namespace disco {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

// Depression angle (degrees below the optical horizontal) of a point `drop`
// meters below the eye at horizontal distance `distance`.
bool in_vertical_view(double distance, double drop, int horizon, double vfov) {
  const double depression = std::atan2(drop, std::max(distance, 0.0)) / kDeg;
  const double half = vfov / 2.0;
  return depression >= horizon - half && depression <= horizon + half;
}

}  // namespace

double EgoFrame::ray_offset_deg(int col) const {
  return fov_deg * (static_cast<double>(col) / static_cast<double>(width()) - 0.5);
}

bool EgoFrame::sees_object(ObjectId id) const {
  return std::any_of(rays.begin(), rays.end(), [&](const RayHit& r) { return r.object == id; });
}

bool EgoFrame::sees_class(ObjectClass c) const {
  return std::any_of(rays.begin(), rays.end(), [&](const RayHit& r) { return r.cls == c; });
}

Vec2 cell_center(Cell c) { return {(c.x + 0.5) * kCellSize, (c.z + 0.5) * kCellSize}; }

double cell_distance(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.z - b.z)) * kCellSize;
}

double bearing_deg(double dx, double dz) {
  double b = std::atan2(dx, dz) / kDeg;
  if (b < 0.0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

bool object_in_vertical_view(double distance, int horizon, const RenderConfig& cfg) {
  return in_vertical_view(distance, cfg.eye_height - cfg.surface_height, horizon, cfg.fov_deg);
}

bool floor_in_vertical_view(double distance, int horizon, const RenderConfig& cfg) {
  return in_vertical_view(distance, cfg.eye_height, horizon, cfg.fov_deg);
}

EgoFrame render_egocentric(const GridScene& scene, const AgentState& agent,
                           const RenderConfig& cfg) {
  EgoFrame frame;
  frame.fov_deg = cfg.fov_deg;
  frame.max_range = cfg.max_range;
  frame.rays.resize(static_cast<std::size_t>(cfg.rays));

  const bool noisy = cfg.class_flip > 0.0 || cfg.depth_jitter > 0.0;
  Rng rng(cfg.noise_seed);
  const Vec2 origin = cell_center(agent.cell);
  const double sample_step = kCellSize / std::max(cfg.samples_per_cell, 1);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  for (int col = 0; col < cfg.rays; ++col) {
    const double theta = (agent.yaw + frame.ray_offset_deg(col)) * kDeg;
    const double dx = std::sin(theta);
    const double dz = std::cos(theta);

    // Grid traversal (Amanatides & Woo).
    Cell cell = agent.cell;
    const int step_x = dx > 0 ? 1 : -1;
    const int step_z = dz > 0 ? 1 : -1;
    const double t_delta_x = std::abs(dx) > 1e-12 ? kCellSize / std::abs(dx) : kInf;
    const double t_delta_z = std::abs(dz) > 1e-12 ? kCellSize / std::abs(dz) : kInf;
    const double fx = origin.x - cell.x * kCellSize;  // offset inside the cell
    const double fz = origin.z - cell.z * kCellSize;
    double t_max_x = std::abs(dx) > 1e-12 ? (dx > 0 ? kCellSize - fx : fx) / std::abs(dx) : kInf;
    double t_max_z = std::abs(dz) > 1e-12 ? (dz > 0 ? kCellSize - fz : fz) / std::abs(dz) : kInf;

    RayHit& hit = frame.rays[static_cast<std::size_t>(col)];
    hit.distance = cfg.max_range;
    double free_until = cfg.max_range;
    bool found = false;
    while (true) {
      double t_in = 0.0;
      if (t_max_x < t_max_z) {
        cell.x += step_x;
        t_in = t_max_x;
        t_max_x += t_delta_x;
      } else {
        cell.z += step_z;
        t_in = t_max_z;
        t_max_z += t_delta_z;
      }
      if (t_in > cfg.max_range) break;
      if (!scene.occludes(cell)) continue;
      const double t_out = std::min(t_max_x, t_max_z);
      const double mid = 0.5 * (t_in + t_out);
      free_until = t_in;
      if (mid > cfg.max_range) break;
      found = true;
      hit.distance = mid;
      if (scene.in_bounds(cell) && object_in_vertical_view(mid, agent.horizon, cfg)) {
        const auto stack = scene.visible_stack(cell);
        if (!stack.empty()) {
          const ObjectId id = stack[static_cast<std::size_t>(col) % stack.size()];
          const ObjectInstance& obj = scene.object(id);
          hit.cls = obj.cls;
          hit.affordances = obj.affordances;
          hit.object = id;
        }
      }
      break;
    }

    for (int k = 1;; ++k) {
      const double d = k * sample_step;
      if (d >= free_until - 1e-6 || d > cfg.max_range) break;  // a sample on the entry boundary belongs to the hit cell
      if (floor_in_vertical_view(d, agent.horizon, cfg)) frame.free_samples.push_back({col, d});
    }

    if (noisy && found) {
      if (hit.cls && cfg.class_flip > 0.0 && rng.uniform() < cfg.class_flip) {
        int other = rng.index(kNumObjectClasses - 1);
        if (other >= to_index(*hit.cls)) ++other;
        hit.cls = to_class(other);
      }
      if (cfg.depth_jitter > 0.0) {
        hit.distance = std::clamp(hit.distance + cfg.depth_jitter * rng.normal(), 0.0, cfg.max_range);
      }
    }
  }
  return frame;
}

}  // namespace disco
