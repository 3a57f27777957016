#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "disco/control.hpp"

namespace disco {

class NoInteractableState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDataset : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every (cell, yaw, horizon) over the navigable cells of a scene, with the
// successor of each fine navigation action.
class PoseGraph {
 public:
  explicit PoseGraph(const GridScene& scene);

  int size() const { return static_cast<int>(poses_.size()); }
  // Pose with an empty hand.
  const AgentState& pose(int i) const { return poses_[static_cast<std::size_t>(i)]; }
  std::optional<int> index(const AgentState& a) const;
  // -1 when the action is blocked; `a` must not be Interact.
  int successor(int i, FineAction a) const { return succ_[static_cast<std::size_t>(i) * 8 + static_cast<std::size_t>(a)]; }

 private:
  int width_ = 0;
  std::vector<int> slot_;  // per cell, -1 when not navigable
  std::vector<AgentState> poses_;
  std::vector<int> succ_;
};

// Noise-free rays for every pose of a graph (free-space samples dropped).
std::vector<EgoFrame> render_pose_frames(const GridScene& scene, const PoseGraph& graph, const RenderConfig& render);

// The one interaction the expert labels for an object: PickUp for items, Open
// for closed openables, Put (holding `held`) for other receptacles, ToggleOn
// for switchables.
struct InteractionSpec {
  Action action;
  std::optional<ObjectId> held;
};

std::optional<InteractionSpec> canonical_interaction(const GridScene& scene, ObjectId id);

// The scene as the expert sees it for `spec`: the held item moved into the hand.
GridScene staged_scene(const GridScene& scene, const InteractionSpec& spec);

// Poses from which the interaction succeeds. `frames` must be
// render_pose_frames of the unstaged scene.
std::vector<int> expert_interactable_states(const GridScene& staged, const PoseGraph& graph,
                                            const InteractionSpec& spec, const std::vector<EgoFrame>& frames);

struct ExpertLabel {
  int pose = 0;
  FineAction action = FineAction::Interact;
  int steps = 0;
};

// Labels every pose within `radius` steps of an interactable pose with the
// first action of a shortest path, ties broken by the fine action order.
// Throws NoInteractableState when `interactable` is empty.
std::vector<ExpertLabel> expert_label_short_horizon(const PoseGraph& graph, const std::vector<int>& interactable,
                                                    int radius = 4);

// Forward search from the agent's pose for the cheapest pose where `action`
// succeeds in the live scene; the fine navigation actions to get there.
std::optional<std::vector<FineAction>> expert_path(const GridScene& scene, const AgentState& agent,
                                                   const Action& action, const RenderConfig& render);

// Ground-truth navigability on the map grid of an episode anchored at `anchor`.
NavMap true_navmap(const GridScene& scene, const MapConfig& cfg, Cell anchor);

// ----------------------------------------------------------------------------
// Behavior cloning

struct BCSample {
  Features x;
  ObjectClass cls = ObjectClass::Apple;
  FineAction action = FineAction::Interact;
  int steps = 0;
  int scene = 0;
  ObjectId object = 0;
};

struct BCDataset {
  std::vector<BCSample> train;
  std::vector<BCSample> heldout;
  int labeled_states = 0;  // before subsampling
  int skipped = 0;         // objects without an interactable pose
};

struct CollectConfig {
  int radius = 4;
  int per_level = 16;   // samples kept per (object, distance); 0 keeps all
  int heldout_mod = 5;  // scene i is heldout when i % heldout_mod == heldout_mod - 1
  std::uint64_t seed = 0;
  RenderConfig render;
  MapConfig map;
};

BCDataset collect_dataset(const std::vector<GridScene>& scenes, const CollectConfig& cfg);
// Columnar CSV: split, scene, object, class, steps, action, sparse features.
std::string dataset_csv(const BCDataset& d);

struct TrainConfig {
  int hidden = 64;
  double lr = 0.05;
  double momentum = 0.9;
  double lr_decay = 0.2;  // epoch e uses lr / (1 + lr_decay * e)
  int epochs = 30;
  int batch = 64;
  std::uint64_t seed = 0;
};

struct TrainReport {
  PolicyParams params;
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  std::vector<double> epoch_loss;  // mean training cross-entropy after each epoch
  std::vector<std::string> warnings;
};

struct BCGradients {
  double loss = 0.0;  // mean cross-entropy over the batch
  Eigen::MatrixXd dW;
  std::vector<Eigen::MatrixXd> dA;
  std::vector<Eigen::VectorXd> db;
};

BCGradients bc_gradients(const PolicyParams& p, const std::vector<BCSample>& data,
                         const std::vector<std::size_t>& batch);
double bc_loss(const PolicyParams& p, const std::vector<BCSample>& data);
double bc_accuracy(const PolicyParams& p, const std::vector<BCSample>& data);

// Throws DegenerateDataset on an empty training split.
TrainReport train_bc(const BCDataset& data, const TrainConfig& cfg);

std::string train_report_json(const TrainReport& r, const BCDataset& d, const TrainConfig& cfg);

}  // namespace disco
