#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disco/mapping.hpp"
#include "disco/random.hpp"
#include "disco/scene_repr.hpp"

namespace disco {

class NoNavigableCell : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UntrainedPolicy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Agent pose on the map grid. Yaw as in the world (0 faces +z, 90 faces +x).
struct GridPose {
  int gx = 0;
  int gz = 0;
  int yaw = 0;
  friend bool operator==(const GridPose&, const GridPose&) = default;
};

GridPose grid_pose(const PoseEstimate& pose, const MapConfig& cfg);

struct NavMap {
  int M = 0;
  std::vector<char> free;

  bool navigable(int gx, int gz) const {
    return gx >= 0 && gz >= 0 && gx < M && gz < M && free[static_cast<std::size_t>(gz * M + gx)];
  }
  int count() const;
};

// Strict threshold p > tau; the agent's own grid is forced free.
NavMap make_navmap(const Eigen::VectorXd& p_nav, int M, double tau, int agent_grid);

struct CoarseTarget {
  enum class Source { ObjectQuery, Random };
  int target_grid = 0;
  std::vector<int> destinations;  // sorted grid indices
  Source source = Source::ObjectQuery;
};

// Uniform over free grids other than the agent's.
CoarseTarget random_walk_target(const NavMap& nav, int agent_grid, Rng& rng);

// argmax of u = p_obj * p_aff (p_aff may be empty: u = p_obj). Values within
// `tie_eps` of the maximum count as ties, broken by distance to the agent and
// then by grid index. Grids flagged in `excluded` are skipped.
CoarseTarget coarse_target(const Eigen::VectorXd& p_obj, const Eigen::VectorXd& p_aff, int agent_grid, int M,
                           double expansion_m, double cell = kCellSize, double tie_eps = 0.0,
                           const std::vector<char>* excluded = nullptr);

// Grids within `radius_m` (Euclidean, grid centers) of `center`.
std::vector<int> expand_destinations(int center, int M, double radius_m, double cell = kCellSize);

// Minimum-length MoveAhead/RotateRight/RotateLeft program from `start` to any
// goal grid over the free grids of `nav`; nullopt when unreachable.
std::optional<std::vector<ActionType>> bfs_plan(const NavMap& nav, const GridPose& start,
                                                const std::vector<int>& goals);

// 0-2 rotations snapping the yaw to the quantized bearing of the target.
std::vector<ActionType> face_target(const GridPose& pose, int target_grid, int M);

// ----------------------------------------------------------------------------
// Fine control

enum class FineAction : int {
  MoveAhead,
  MoveLeft,
  MoveRight,
  MoveBack,
  RotateLeft,
  RotateRight,
  LookUp,
  LookDown,
  Interact,
};

inline constexpr int kNumFineActions = 9;

std::string_view fine_action_name(FineAction a);
ActionType to_action_type(FineAction a);  // not defined for Interact

// Sparse feature vector: sorted unique indices with values.
struct Features {
  std::vector<int> idx;
  std::vector<double> val;

  double get(int i) const;
  Eigen::VectorXd dense(int dim) const;
  friend bool operator==(const Features&, const Features&) = default;
};

// Named positions of the dense head of the feature vector.
namespace feat {
inline constexpr int kBias = 0;
inline constexpr int kRight = 1;     // target offset to the agent's right, cells / 8
inline constexpr int kForward = 2;   // target offset ahead, cells / 8
inline constexpr int kDistance = 3;  // meters / 3
inline constexpr int kHorizon = 4;   // degrees / 60
inline constexpr int kVisible = 5;
inline constexpr int kRayFraction = 6;
inline constexpr int kMinHit = 7;  // meters / max_range, 1 when unseen
inline constexpr int kReach = 8;
inline constexpr int kBlockedAhead = 9;
inline constexpr int kBlockedLeft = 10;
inline constexpr int kBlockedRight = 11;
inline constexpr int kBlockedBack = 12;
inline constexpr int kVisibleInReach = 13;
inline constexpr int kDense = 14;
}  // namespace feat

int fine_feature_dim();

// Rays whose class is `target_class` and whose hit falls in `target_grid`.
std::vector<int> target_rays(const EgoFrame& frame, const PoseEstimate& pose, const MapConfig& cfg,
                             int target_grid, ObjectClass target_class);

// Steps from each pose near the target to one where the target grid is within
// reach and first hit by some ray at a depth the vertical view admits, taking
// the non-navigable grids of `nav` as the only occluders. Capped at 6 steps.
struct LookaheadField {
  int tx = 0;
  int tz = 0;
  std::vector<int> dist;  // -1 beyond the cap or outside the window
};

LookaheadField lookahead_field(const NavMap& nav, int target_grid, const RenderConfig& render);

// `nav` supplies the blocked neighbours and the lookahead; `field` may carry a
// precomputed lookahead_field for the same map and target.
Features fine_features(const EgoFrame& frame, const PoseEstimate& pose, const MapConfig& cfg, int target_grid,
                       ObjectClass target_class, const NavMap& nav, const RenderConfig& render = {},
                       const LookaheadField* field = nullptr);

// Shared linear map W (hidden x dim) followed by one softmax head per object class.
struct PolicyParams {
  int dim = 0;
  int hidden = 0;
  Eigen::MatrixXd W;
  std::vector<Eigen::MatrixXd> A;  // per class, actions x hidden
  std::vector<Eigen::VectorXd> b;  // per class, actions
  std::uint64_t seed = 0;
  bool trained = false;

  static PolicyParams init(int dim, int hidden, std::uint64_t seed);
  Eigen::VectorXd logits(const Features& x, ObjectClass cls) const;
};

FineAction fine_policy(const Features& x, ObjectClass target_class, const PolicyParams& params);

std::string policy_to_json(const PolicyParams& p);
PolicyParams policy_from_json(const std::string& text);

}  // namespace disco
