#include "disco/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace disco {

GridPose grid_pose(const PoseEstimate& pose, const MapConfig& cfg) {
  const auto g = cfg.grid_of(pose.x, pose.z);
  if (!g) throw std::out_of_range("pose outside the map extent");
  return {cfg.gx(*g), cfg.gz(*g), pose.yaw};
}

int NavMap::count() const { return static_cast<int>(std::count(free.begin(), free.end(), 1)); }

NavMap make_navmap(const Eigen::VectorXd& p_nav, int M, double tau, int agent_grid) {
  NavMap nav;
  nav.M = M;
  nav.free.resize(static_cast<std::size_t>(M * M));
  for (int g = 0; g < M * M; ++g) nav.free[static_cast<std::size_t>(g)] = p_nav[g] > tau ? 1 : 0;
  nav.free[static_cast<std::size_t>(agent_grid)] = 1;
  return nav;
}

CoarseTarget random_walk_target(const NavMap& nav, int agent_grid, Rng& rng) {
  std::vector<int> candidates;
  for (int g = 0; g < nav.M * nav.M; ++g) {
    if (g != agent_grid && nav.free[static_cast<std::size_t>(g)]) candidates.push_back(g);
  }
  if (candidates.empty()) throw NoNavigableCell("no navigable grid besides the agent's");
  CoarseTarget t;
  t.target_grid = candidates[static_cast<std::size_t>(rng.index(static_cast<int>(candidates.size())))];
  t.destinations = {t.target_grid};
  t.source = CoarseTarget::Source::Random;
  return t;
}

std::vector<int> expand_destinations(int center, int M, double radius_m, double cell) {
  const int cx = center % M, cz = center / M;
  const int r = static_cast<int>(std::floor(radius_m / cell + 1e-9));
  const double r2 = (radius_m / cell) * (radius_m / cell) + 1e-9;
  std::vector<int> out;
  for (int z = std::max(cz - r, 0); z <= std::min(cz + r, M - 1); ++z) {
    for (int x = std::max(cx - r, 0); x <= std::min(cx + r, M - 1); ++x) {
      const double d2 = static_cast<double>((x - cx) * (x - cx) + (z - cz) * (z - cz));
      if (d2 <= r2) out.push_back(z * M + x);
    }
  }
  return out;
}

CoarseTarget coarse_target(const Eigen::VectorXd& p_obj, const Eigen::VectorXd& p_aff, int agent_grid, int M,
                           double expansion_m, double cell, double tie_eps, const std::vector<char>* excluded) {
  const int n = M * M;
  auto skip = [&](int g) { return excluded && (*excluded)[static_cast<std::size_t>(g)]; };
  Eigen::VectorXd u = p_aff.size() == 0 ? p_obj : Eigen::VectorXd(p_obj.cwiseProduct(p_aff));
  double best = -1.0;
  for (int g = 0; g < n; ++g) {
    if (!skip(g)) best = std::max(best, u[g]);
  }
  const int ax = agent_grid % M, az = agent_grid / M;
  int chosen = agent_grid;
  long chosen_d2 = -1;
  for (int g = 0; g < n; ++g) {
    if (skip(g) || u[g] < best - tie_eps) continue;
    const long dx = g % M - ax, dz = g / M - az;
    const long d2 = dx * dx + dz * dz;
    if (chosen_d2 < 0 || d2 < chosen_d2) {
      chosen = g;
      chosen_d2 = d2;
    }
  }
  CoarseTarget t;
  t.target_grid = chosen;
  t.destinations = expand_destinations(chosen, M, expansion_m, cell);
  return t;
}

namespace {

constexpr std::array<int, 4> kYaws{0, 90, 180, 270};

int yaw_index(int yaw) { return (((yaw % 360) + 360) % 360) / 90; }

void heading(int yaw, int& dx, int& dz) {
  switch (yaw_index(yaw)) {
    case 0: dx = 0, dz = 1; break;
    case 1: dx = 1, dz = 0; break;
    case 2: dx = 0, dz = -1; break;
    default: dx = -1, dz = 0; break;
  }
}

}  // namespace

std::optional<std::vector<ActionType>> bfs_plan(const NavMap& nav, const GridPose& start,
                                                const std::vector<int>& goals) {
  const int M = nav.M;
  std::vector<char> goal(static_cast<std::size_t>(M * M), 0);
  for (int g : goals) {
    if (g >= 0 && g < M * M) goal[static_cast<std::size_t>(g)] = 1;
  }
  const int start_grid = start.gz * M + start.gx;
  if (goal[static_cast<std::size_t>(start_grid)]) return std::vector<ActionType>{};

  const auto state = [&](int grid, int yi) { return grid * 4 + yi; };
  std::vector<int> parent(static_cast<std::size_t>(M * M * 4), -1);
  std::vector<ActionType> via(parent.size(), ActionType::MoveAhead);
  const int s0 = state(start_grid, yaw_index(start.yaw));
  parent[static_cast<std::size_t>(s0)] = s0;
  std::deque<int> queue{s0};
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    const int grid = s / 4, yi = s % 4;
    const int gx = grid % M, gz = grid / M;
    for (ActionType a : {ActionType::MoveAhead, ActionType::RotateRight, ActionType::RotateLeft}) {
      int ngrid = grid, nyi = yi;
      if (a == ActionType::MoveAhead) {
        int dx, dz;
        heading(kYaws[static_cast<std::size_t>(yi)], dx, dz);
        if (!nav.navigable(gx + dx, gz + dz)) continue;
        ngrid = (gz + dz) * M + gx + dx;
      } else {
        nyi = (yi + (a == ActionType::RotateRight ? 1 : 3)) % 4;
      }
      const int ns = state(ngrid, nyi);
      if (parent[static_cast<std::size_t>(ns)] >= 0) continue;
      parent[static_cast<std::size_t>(ns)] = s;
      via[static_cast<std::size_t>(ns)] = a;
      if (goal[static_cast<std::size_t>(ngrid)]) {
        std::vector<ActionType> plan;
        for (int cur = ns; cur != s0; cur = parent[static_cast<std::size_t>(cur)]) {
          plan.push_back(via[static_cast<std::size_t>(cur)]);
        }
        std::reverse(plan.begin(), plan.end());
        return plan;
      }
      queue.push_back(ns);
    }
  }
  return std::nullopt;
}

std::vector<ActionType> face_target(const GridPose& pose, int target_grid, int M) {
  const int dx = target_grid % M - pose.gx;
  const int dz = target_grid / M - pose.gz;
  if (dx == 0 && dz == 0) return {};
  const double b = bearing_deg(dx, dz);
  const int q = (static_cast<int>(std::floor((b + 45.0) / 90.0)) % 4) * 90;
  switch ((q - pose.yaw + 720) % 360) {
    case 90: return {ActionType::RotateRight};
    case 180: return {ActionType::RotateRight, ActionType::RotateRight};
    case 270: return {ActionType::RotateLeft};
    default: return {};
  }
}

// ----------------------------------------------------------------------------
// Fine control

namespace {

constexpr std::array<std::string_view, kNumFineActions> kFineNames{
    "MoveAhead", "MoveLeft", "MoveRight", "MoveBack", "RotateLeft", "RotateRight", "LookUp", "LookDown", "Interact"};

constexpr int kOffsetWindow = 7;
constexpr int kJointWindow = 6;
constexpr int kDistanceBuckets = 13;

constexpr int kOffsetBase = feat::kDense;
constexpr int kOffsetSize = (2 * kOffsetWindow + 1) * (2 * kOffsetWindow + 1) + 1;
constexpr int kJointBase = kOffsetBase + kOffsetSize;
constexpr int kJointSize = ((2 * kJointWindow + 1) * (2 * kJointWindow + 1) + 1) * kNumHorizons;
constexpr int kVisBase = kJointBase + kJointSize;
constexpr int kVisSize = 4 * kNumHorizons;
constexpr int kBlockBase = kVisBase + kVisSize;
constexpr int kBlockSize = 16 * 4;
constexpr int kDistBase = kBlockBase + kBlockSize;
constexpr int kDistSize = kDistanceBuckets * kNumHorizons;
constexpr int kLookBase = kDistBase + kDistSize;
constexpr int kLookSize = 8 * 5;  // per navigation action: blocked, unknown, closer, level, farther
constexpr int kDepthBase = kLookBase + kLookSize;
constexpr int kDepthSize = 8 * 2;  // estimated steps to go (0-6, unknown) x visible
constexpr int kDim = kDepthBase + kDepthSize;

constexpr int kReachCells = 6;
constexpr int kLookWindow = 10;
constexpr int kLookCap = 6;
constexpr int kLookSide = 2 * kLookWindow + 1;

int field_index(int lx, int lz, int y, int h) { return ((lz * kLookSide + lx) * 4 + y) * kNumHorizons + h; }

// Depths (meters) at which the rays of a pose first enter the target cell,
// treating every non-navigable grid as an occluder. Mirrors the renderer's
// traversal in grid units.
std::vector<double> target_depths(const NavMap& nav, int x, int z, int yaw, int tx, int tz, const RenderConfig& rc) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> out;
  const double range = rc.max_range / kCellSize;
  for (int col = 0; col < rc.rays; ++col) {
    const double th = (yaw + rc.fov_deg * (static_cast<double>(col) / rc.rays - 0.5)) * kDeg;
    const double dx = std::sin(th), dz = std::cos(th);
    int cx = x, cz = z;
    const int sx = dx > 0 ? 1 : -1, sz = dz > 0 ? 1 : -1;
    const double tdx = std::abs(dx) > 1e-12 ? 1.0 / std::abs(dx) : kInf;
    const double tdz = std::abs(dz) > 1e-12 ? 1.0 / std::abs(dz) : kInf;
    double tmx = std::abs(dx) > 1e-12 ? 0.5 / std::abs(dx) : kInf;
    double tmz = std::abs(dz) > 1e-12 ? 0.5 / std::abs(dz) : kInf;
    while (true) {
      double t_in;
      if (tmx < tmz) {
        cx += sx;
        t_in = tmx;
        tmx += tdx;
      } else {
        cz += sz;
        t_in = tmz;
        tmz += tdz;
      }
      if (t_in > range) break;
      if (cx == tx && cz == tz) {
        out.push_back(0.5 * (t_in + std::min(tmx, tmz)) * kCellSize);
        break;
      }
      if (!nav.navigable(cx, cz)) break;
    }
  }
  return out;
}

}  // namespace

LookaheadField lookahead_field(const NavMap& nav, int target_grid, const RenderConfig& render) {
  if (nav.M <= 0) throw std::invalid_argument("lookahead_field: empty navigation map");
  LookaheadField f;
  f.tx = target_grid % nav.M;
  f.tz = target_grid / nav.M;
  f.dist.assign(static_cast<std::size_t>(kLookSide * kLookSide * 4 * kNumHorizons), -1);
  const int tx = f.tx, tz = f.tz;
  auto free = [&](int x, int z) {
    return std::abs(x - tx) <= kLookWindow && std::abs(z - tz) <= kLookWindow && nav.navigable(x, z);
  };
  auto id = [&](int x, int z, int y, int h) { return field_index(x - tx + kLookWindow, z - tz + kLookWindow, y, h); };
  std::deque<std::array<int, 4>> queue;
  for (int z = tz - kReachCells; z <= tz + kReachCells; ++z) {
    for (int x = tx - kReachCells; x <= tx + kReachCells; ++x) {
      if (!free(x, z) || (x - tx) * (x - tx) + (z - tz) * (z - tz) > kReachCells * kReachCells) continue;
      for (int y = 0; y < 4; ++y) {
        const std::vector<double> depths = target_depths(nav, x, z, 90 * y, tx, tz, render);
        for (int h = 0; h < kNumHorizons; ++h) {
          const int horizon = kHorizonMin + kHorizonStep * h;
          const bool seen = std::any_of(depths.begin(), depths.end(), [&](double m) {
            return m <= render.max_range && object_in_vertical_view(m, horizon, render);
          });
          if (!seen) continue;
          f.dist[static_cast<std::size_t>(id(x, z, y, h))] = 0;
          queue.push_back({x, z, y, h});
        }
      }
    }
  }
  static constexpr std::array<int, 4> kDx{0, 1, 0, -1}, kDz{1, 0, -1, 0};
  while (!queue.empty()) {
    const auto [x, z, y, h] = queue.front();
    queue.pop_front();
    const int d = f.dist[static_cast<std::size_t>(id(x, z, y, h))];
    if (d >= kLookCap) continue;
    auto relax = [&, d = d](int px, int pz, int py, int ph) {
      if (ph < 0 || ph >= kNumHorizons || !free(px, pz)) return;
      auto& slot = f.dist[static_cast<std::size_t>(id(px, pz, py, ph))];
      if (slot >= 0) return;
      slot = d + 1;
      queue.push_back({px, pz, py, ph});
    };
    for (int turn : {0, 2, 3, 1}) {  // predecessors by MoveAhead, MoveBack, MoveLeft, MoveRight
      const int m = (y + turn) % 4;
      relax(x - kDx[static_cast<std::size_t>(m)], z - kDz[static_cast<std::size_t>(m)], y, h);
    }
    relax(x, z, (y + 1) % 4, h);
    relax(x, z, (y + 3) % 4, h);
    relax(x, z, y, h + 1);
    relax(x, z, y, h - 1);
  }
  return f;
}

namespace {

struct Lookahead {
  int here = -1;              // estimated steps to an interactable pose, -1 beyond the cap
  std::array<int, 8> next{};  // per fine navigation action; -2 when the move is impossible
};

Lookahead lookahead(const LookaheadField& f, const NavMap& nav, const GridPose& gp, int horizon) {
  auto at = [&](int x, int z, int y, int h) {
    if (h < 0 || h >= kNumHorizons) return -2;
    if (!(x == gp.gx && z == gp.gz) && !nav.navigable(x, z)) return -2;
    if (std::abs(x - f.tx) > kLookWindow || std::abs(z - f.tz) > kLookWindow) return -1;
    return f.dist[static_cast<std::size_t>(field_index(x - f.tx + kLookWindow, z - f.tz + kLookWindow, y, h))];
  };
  static constexpr std::array<int, 4> kDx{0, 1, 0, -1}, kDz{1, 0, -1, 0};
  Lookahead out;
  const int y0 = gp.yaw / 90 % 4;
  const int h0 = (horizon - kHorizonMin) / kHorizonStep;
  out.here = at(gp.gx, gp.gz, y0, h0);
  // Fine action order: MoveAhead, MoveLeft, MoveRight, MoveBack, RotateLeft, RotateRight, LookUp, LookDown.
  const std::array<int, 4> turns{0, 3, 1, 2};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto m = static_cast<std::size_t>((y0 + turns[k]) % 4);
    out.next[k] = at(gp.gx + kDx[m], gp.gz + kDz[m], y0, h0);
  }
  out.next[4] = at(gp.gx, gp.gz, (y0 + 3) % 4, h0);
  out.next[5] = at(gp.gx, gp.gz, (y0 + 1) % 4, h0);
  out.next[6] = at(gp.gx, gp.gz, y0, h0 - 1);
  out.next[7] = at(gp.gx, gp.gz, y0, h0 + 1);
  return out;
}
}  // namespace

std::string_view fine_action_name(FineAction a) { return kFineNames[static_cast<std::size_t>(a)]; }

ActionType to_action_type(FineAction a) {
  switch (a) {
    case FineAction::MoveAhead: return ActionType::MoveAhead;
    case FineAction::MoveLeft: return ActionType::MoveLeft;
    case FineAction::MoveRight: return ActionType::MoveRight;
    case FineAction::MoveBack: return ActionType::MoveBack;
    case FineAction::RotateLeft: return ActionType::RotateLeft;
    case FineAction::RotateRight: return ActionType::RotateRight;
    case FineAction::LookUp: return ActionType::LookUp;
    case FineAction::LookDown: return ActionType::LookDown;
    default: throw std::invalid_argument("Interact has no simulator action");
  }
}

double Features::get(int i) const {
  const auto it = std::lower_bound(idx.begin(), idx.end(), i);
  return it != idx.end() && *it == i ? val[static_cast<std::size_t>(it - idx.begin())] : 0.0;
}

Eigen::VectorXd Features::dense(int dim) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = val[k];
  return x;
}

int fine_feature_dim() { return kDim; }

std::vector<int> target_rays(const EgoFrame& frame, const PoseEstimate& pose, const MapConfig& cfg,
                             int target_grid, ObjectClass target_class) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  std::vector<int> out;
  for (int col = 0; col < frame.width(); ++col) {
    const RayHit& r = frame.rays[static_cast<std::size_t>(col)];
    if (r.cls != target_class) continue;
    const double th = (pose.yaw + frame.ray_offset_deg(col)) * kDeg;
    const auto g = cfg.grid_of(pose.x + r.distance * std::sin(th), pose.z + r.distance * std::cos(th));
    if (g == target_grid) out.push_back(col);
  }
  return out;
}

Features fine_features(const EgoFrame& frame, const PoseEstimate& pose, const MapConfig& cfg, int target_grid,
                       ObjectClass target_class, const NavMap& nav, const RenderConfig& render,
                       const LookaheadField* field) {
  const GridPose gp = grid_pose(pose, cfg);
  struct {
    bool left, right, back;
  } sides{};
  {
    int hx, hz;
    heading(gp.yaw + 270, hx, hz);
    sides.left = !nav.navigable(gp.gx + hx, gp.gz + hz);
    heading(gp.yaw + 90, hx, hz);
    sides.right = !nav.navigable(gp.gx + hx, gp.gz + hz);
    heading(gp.yaw + 180, hx, hz);
    sides.back = !nav.navigable(gp.gx + hx, gp.gz + hz);
  }
  const int dx = cfg.gx(target_grid) - gp.gx;
  const int dz = cfg.gz(target_grid) - gp.gz;
  int fx, fz;
  heading(gp.yaw, fx, fz);
  const int forward = dx * fx + dz * fz;
  const int right = dx * fz - dz * fx;  // right of heading (fx, fz) is (fz, -fx)
  const double distance = std::hypot(static_cast<double>(dx), static_cast<double>(dz)) * cfg.cell;
  const int h = std::clamp((pose.horizon - kHorizonMin) / kHorizonStep, 0, kNumHorizons - 1);

  const std::vector<int> rays = target_rays(frame, pose, cfg, target_grid, target_class);
  const bool visible = !rays.empty();
  double min_hit = 1.0;
  for (int col : rays) min_hit = std::min(min_hit, frame.rays[static_cast<std::size_t>(col)].distance / frame.max_range);
  const bool reach = distance <= kReachDistance + 1e-9;
  const bool ahead = frame.width() > 0 && frame.rays[static_cast<std::size_t>(frame.width() / 2)].distance < 1.5 * cfg.cell;

  std::vector<std::pair<int, double>> f = {
      {feat::kBias, 1.0},
      {feat::kRight, right / 8.0},
      {feat::kForward, forward / 8.0},
      {feat::kDistance, distance / 3.0},
      {feat::kHorizon, pose.horizon / 60.0},
      {feat::kVisible, visible ? 1.0 : 0.0},
      {feat::kRayFraction, frame.width() ? static_cast<double>(rays.size()) / frame.width() : 0.0},
      {feat::kMinHit, min_hit},
      {feat::kReach, reach ? 1.0 : 0.0},
      {feat::kBlockedAhead, ahead ? 1.0 : 0.0},
      {feat::kBlockedLeft, sides.left ? 1.0 : 0.0},
      {feat::kBlockedRight, sides.right ? 1.0 : 0.0},
      {feat::kBlockedBack, sides.back ? 1.0 : 0.0},
      {feat::kVisibleInReach, visible && reach ? 1.0 : 0.0},
  };
  const int side_o = 2 * kOffsetWindow + 1;
  if (std::abs(right) <= kOffsetWindow && std::abs(forward) <= kOffsetWindow) {
    f.push_back({kOffsetBase + (forward + kOffsetWindow) * side_o + right + kOffsetWindow, 1.0});
  } else {
    f.push_back({kOffsetBase + side_o * side_o, 1.0});
  }
  const int side_j = 2 * kJointWindow + 1;
  int joint = side_j * side_j;
  if (std::abs(right) <= kJointWindow && std::abs(forward) <= kJointWindow) {
    joint = (forward + kJointWindow) * side_j + right + kJointWindow;
  }
  f.push_back({kJointBase + joint * kNumHorizons + h, 1.0});
  f.push_back({kVisBase + ((visible ? 2 : 0) + (reach ? 1 : 0)) * kNumHorizons + h, 1.0});
  int quadrant = 0;  // target ahead / right / behind / left in the agent frame
  if (dx != 0 || dz != 0) {
    const double b = bearing_deg(right, forward);
    quadrant = static_cast<int>(std::floor((b + 45.0) / 90.0)) % 4;
  }
  const int blocked = (ahead ? 1 : 0) | (sides.left ? 2 : 0) | (sides.right ? 4 : 0) | (sides.back ? 8 : 0);
  f.push_back({kBlockBase + blocked * 4 + quadrant, 1.0});
  const int bucket = std::min(static_cast<int>(distance / cfg.cell + 1e-9), kDistanceBuckets - 1);
  f.push_back({kDistBase + bucket * kNumHorizons + h, 1.0});

  const Lookahead look = field ? lookahead(*field, nav, gp, pose.horizon)
                               : lookahead(lookahead_field(nav, target_grid, render), nav, gp, pose.horizon);
  for (int a = 0; a < 8; ++a) {
    const int n = look.next[static_cast<std::size_t>(a)];
    int kind = 1;
    if (n == -2) kind = 0;
    else if (n >= 0 && (look.here < 0 || n < look.here)) kind = 2;
    else if (n >= 0 && n == look.here) kind = 3;
    else if (n >= 0) kind = 4;
    f.push_back({kLookBase + a * 5 + kind, 1.0});
  }
  const int depth = look.here < 0 ? kLookCap + 1 : look.here;
  f.push_back({kDepthBase + depth * 2 + (visible ? 1 : 0), 1.0});

  std::sort(f.begin(), f.end());
  Features out;
  for (const auto& [i, v] : f) {
    if (v == 0.0) continue;
    out.idx.push_back(i);
    out.val.push_back(v);
  }
  return out;
}

PolicyParams PolicyParams::init(int dim, int hidden, std::uint64_t seed) {
  PolicyParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.seed = seed;
  Rng rng(seed);
  p.W.resize(hidden, dim);
  for (Eigen::Index i = 0; i < p.W.size(); ++i) p.W.data()[i] = 0.1 * rng.normal();
  for (int c = 0; c < kNumObjectClasses; ++c) {
    Eigen::MatrixXd a(kNumFineActions, hidden);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = 0.1 * rng.normal();
    p.A.push_back(a);
    p.b.push_back(Eigen::VectorXd::Zero(kNumFineActions));
  }
  return p;
}

Eigen::VectorXd PolicyParams::logits(const Features& x, ObjectClass cls) const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden);
  for (std::size_t k = 0; k < x.idx.size(); ++k) {
    if (x.idx[k] < dim) h += x.val[k] * W.col(x.idx[k]);
  }
  const auto c = static_cast<std::size_t>(to_index(cls));
  return A[c] * h + b[c];
}

FineAction fine_policy(const Features& x, ObjectClass target_class, const PolicyParams& params) {
  if (!params.trained) throw UntrainedPolicy("fine policy parameters are untrained");
  const Eigen::VectorXd z = params.logits(x, target_class);
  int best = 0;
  for (int a = 1; a < kNumFineActions; ++a) {
    if (z[a] > z[best]) best = a;
  }
  return static_cast<FineAction>(best);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j, int rows, int cols) {
  if (static_cast<int>(j.size()) != rows) throw std::runtime_error("policy matrix has the wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != cols) throw std::runtime_error("policy matrix has the wrong column count");
    for (int c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string policy_to_json(const PolicyParams& p) {
  nlohmann::json j;
  j["version"] = 1;
  j["dim"] = p.dim;
  j["hidden"] = p.hidden;
  j["classes"] = kNumObjectClasses;
  j["actions"] = kNumFineActions;
  j["seed"] = p.seed;
  j["trained"] = p.trained;
  j["W"] = matrix_json(p.W);
  nlohmann::json heads = nlohmann::json::array();
  for (std::size_t c = 0; c < p.A.size(); ++c) {
    heads.push_back({{"class", std::string(class_name(to_class(static_cast<int>(c))))},
                     {"A", matrix_json(p.A[c])},
                     {"b", matrix_json(p.b[c].transpose())[0]}});
  }
  j["heads"] = heads;
  return j.dump() + "\n";
}

PolicyParams policy_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported policy version");
    if (j.at("classes").get<int>() != kNumObjectClasses || j.at("actions").get<int>() != kNumFineActions) {
      throw std::runtime_error("policy shape does not match this build");
    }
    PolicyParams p;
    p.dim = j.at("dim").get<int>();
    p.hidden = j.at("hidden").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.trained = j.at("trained").get<bool>();
    p.W = matrix_from(j.at("W"), p.hidden, p.dim);
    for (const auto& h : j.at("heads")) {
      p.A.push_back(matrix_from(h.at("A"), kNumFineActions, p.hidden));
      const auto& b = h.at("b");
      Eigen::VectorXd v(kNumFineActions);
      for (int a = 0; a < kNumFineActions; ++a) v[a] = b.at(static_cast<std::size_t>(a)).get<double>();
      p.b.push_back(v);
    }
    if (static_cast<int>(p.A.size()) != kNumObjectClasses) throw std::runtime_error("policy head count mismatch");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("policy file error: ") + e.what());
  }
}

}  // namespace disco
