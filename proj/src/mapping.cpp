#include "disco/mapping.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace disco {

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

int wrap(int yaw) { return ((yaw % 360) + 360) % 360; }

void translate(PoseEstimate& p, int heading) {
  switch (wrap(heading)) {
    case 0: p.z += kCellSize; break;
    case 90: p.x += kCellSize; break;
    case 180: p.z -= kCellSize; break;
    default: p.x -= kCellSize; break;
  }
}

}  // namespace

PoseEstimate initial_pose(const AgentState& agent) { return PoseEstimate{0.0, 0.0, agent.yaw, agent.horizon}; }

PoseEstimate update_pose(const PoseEstimate& pose, const Action& action, const StepResult& result) {
  if (!result.success) return pose;
  PoseEstimate p = pose;
  switch (action.type) {
    case ActionType::MoveAhead: translate(p, p.yaw); break;
    case ActionType::MoveRight: translate(p, p.yaw + 90); break;
    case ActionType::MoveBack: translate(p, p.yaw + 180); break;
    case ActionType::MoveLeft: translate(p, p.yaw + 270); break;
    case ActionType::RotateRight: p.yaw = wrap(p.yaw + 90); break;
    case ActionType::RotateLeft: p.yaw = wrap(p.yaw - 90); break;
    case ActionType::LookUp: p.horizon -= kHorizonStep; break;
    case ActionType::LookDown: p.horizon += kHorizonStep; break;
    default: break;
  }
  return p;
}

std::vector<SemanticPoint> project_frame(const EgoFrame& frame, const PoseEstimate& pose) {
  std::vector<SemanticPoint> out;
  out.reserve(frame.rays.size() * 3 + frame.free_samples.size());
  auto along = [&](int col, double d, int cls) {
    const double th = (pose.yaw + frame.ray_offset_deg(col)) * kDeg;
    out.push_back({pose.x + d * std::sin(th), pose.z + d * std::cos(th), cls});
  };
  for (int col = 0; col < frame.width(); ++col) {
    const RayHit& r = frame.rays[static_cast<std::size_t>(col)];
    if (!r.cls) continue;
    along(col, r.distance, to_index(*r.cls));
    for (int a = 0; a < kNumInteractionAffordances; ++a) {
      if (r.affordances & (1u << a)) along(col, r.distance, affordance_class(static_cast<Affordance>(a)));
    }
  }
  for (const auto& s : frame.free_samples) along(s.ray, s.distance, kNavigableClass);
  return out;
}

std::optional<int> MapConfig::grid_of(double x, double z) const {
  const int ix = static_cast<int>(std::floor(x / cell + 0.5)) + M / 2;
  const int iz = static_cast<int>(std::floor(z / cell + 0.5)) + M / 2;
  if (ix < 0 || iz < 0 || ix >= M || iz >= M) return std::nullopt;
  return iz * M + ix;
}

int grid_of_cell(const MapConfig& cfg, Cell anchor, Cell c) {
  const int ix = c.x - anchor.x + cfg.M / 2;
  const int iz = c.z - anchor.z + cfg.M / 2;
  if (ix < 0 || iz < 0 || ix >= cfg.M || iz >= cfg.M) throw std::out_of_range("cell outside the map extent");
  return iz * cfg.M + ix;
}

Cell cell_of_grid(const MapConfig& cfg, Cell anchor, int grid) {
  return {cfg.gx(grid) - cfg.M / 2 + anchor.x, cfg.gz(grid) - cfg.M / 2 + anchor.z};
}

GridObservation bin_points(const std::vector<SemanticPoint>& points, const MapConfig& cfg) {
  GridObservation obs;
  obs.c.assign(static_cast<std::size_t>(cfg.grids()), 0);
  for (const auto& p : points) {
    const auto g = cfg.grid_of(p.x, p.z);
    if (!g) {
      ++obs.dropped;
      continue;
    }
    ++obs.c[static_cast<std::size_t>(*g)];
    auto [it, fresh] = obs.c_class.try_emplace(*g);
    if (fresh) it->second.fill(0);
    ++it->second[static_cast<std::size_t>(p.cls)];
  }
  return obs;
}

std::vector<int> SoftLabels::visible() const {
  std::vector<int> out;
  for (const auto& [g, _] : y) {
    if (v[static_cast<std::size_t>(g)]) out.push_back(g);
  }
  return out;
}

SoftLabels soft_labels(const GridObservation& obs, int rho) {
  SoftLabels labels;
  labels.rho = rho;
  labels.v.assign(obs.c.size(), 0);
  ClassValues max_p{};
  for (const auto& [g, counts] : obs.c_class) {
    const double c = obs.c[static_cast<std::size_t>(g)];
    for (int j = 0; j < kNumSemanticClasses; ++j) {
      max_p[static_cast<std::size_t>(j)] = std::max(max_p[static_cast<std::size_t>(j)], counts[static_cast<std::size_t>(j)] / c);
    }
  }
  for (const auto& [g, counts] : obs.c_class) {
    const int c = obs.c[static_cast<std::size_t>(g)];
    ClassValues y{};
    for (int j = 0; j < kNumSemanticClasses; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (counts[jj] > 0) y[jj] = (counts[jj] / static_cast<double>(c)) / max_p[jj];
    }
    labels.y.emplace(g, y);
    labels.v[static_cast<std::size_t>(g)] = c > rho ? 1 : 0;
  }
  return labels;
}

std::string observation_json(int step, const PoseEstimate& pose, const GridObservation& obs) {
  nlohmann::json j;
  j["step"] = step;
  j["pose"] = {pose.x, pose.z, pose.yaw, pose.horizon};
  nlohmann::json grids = nlohmann::json::array();
  for (const auto& [g, counts] : obs.c_class) {
    nlohmann::json classes = nlohmann::json::object();
    for (int k = 0; k < kNumSemanticClasses; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) classes[semantic_class_name(k)] = counts[static_cast<std::size_t>(k)];
    }
    grids.push_back({{"grid", g}, {"c", obs.c[static_cast<std::size_t>(g)]}, {"classes", classes}});
  }
  j["grids"] = grids;
  j["dropped"] = obs.dropped;
  return j.dump();
}

}  // namespace disco
