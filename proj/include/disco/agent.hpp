#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "disco/control.hpp"
#include "disco/task.hpp"

namespace disco {

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ControlConfig {
  double tau_nav = 0.5;
  double expansion_m = 1.0;  // coarse destination radius
  int fine_steps = 8;        // F
  int retries = 3;           // K
  int subgoal_budget = 250;
  int episode_budget = 1000;
  int rho = 8;
  double tie_eps = 0.01;  // u values this close to the maximum are ties
  bool close_after_put = false;
  int max_replans = 30;
  double detect_p = 0.6;  // map evidence needed before a grid can be a target
};

// The five switches of the ablation study; all on is the full method.
struct AblationMode {
  bool differentiable = true;
  bool interactive_affordance = true;
  bool navigation_affordance = true;
  bool coarse = true;
  bool fine = true;

  std::string name() const;
  static AblationMode from_name(const std::string& name);  // throws std::invalid_argument
  static std::vector<std::string> names();
  friend bool operator==(const AblationMode&, const AblationMode&) = default;
};

struct AgentConfig {
  RenderConfig render;
  MapConfig map;
  ControlConfig control;
};

enum class Phase { RandomWalk, Coarse, Align, Fine, Interact, Done, Failed };
std::string_view phase_name(Phase p);

enum class SubgoalFailure { None, ObjectNotFound, Unreachable, InteractionFailure, BudgetExhausted };
std::string_view subgoal_failure_name(SubgoalFailure f);

struct SubgoalResult {
  Subgoal subgoal;
  bool success = false;
  SubgoalFailure failure = SubgoalFailure::None;
  int steps = 0;
  int attempts = 0;
  int collisions = 0;
};

// One embodied episode's controller state: world handles, dead-reckoned pose,
// the scene map, and the per-subgoal state machine.
class Agent {
 public:
  Agent(GridScene& scene, AgentState& agent, const AgentConfig& cfg, SceneMap& map, const PolicyParams* policy,
        AblationMode mode, std::uint64_t seed);

  // One simulator step followed by perception and a single map update.
  StepResult execute(const Action& action);
  void warm_up();
  SubgoalResult run_subgoal(const Subgoal& subgoal, int budget);

  int steps() const { return steps_; }
  void set_step_limit(int limit) { episode_limit_ = limit; }
  const PoseEstimate& pose() const { return pose_; }
  const EgoFrame& frame() const { return frame_; }
  const SceneMap& map() const { return map_; }
  int agent_grid() const;
  Cell anchor() const { return anchor_; }
  NavMap current_navmap() const;
  const std::vector<int>& trajectory() const { return trajectory_; }
  // Some grid of the map holds the class with probability above detect_p.
  bool detected(ObjectClass c) const;

  // JSON-lines trace of phases, targets, plans and step results.
  std::vector<std::string>* trace = nullptr;
  std::function<void(const Agent&)> on_step;

 private:
  static constexpr int kReobserve = 3;
  static constexpr int kSightingRays = 3;

  struct Target {
    std::vector<ObjectClass> classes;  // candidates; more than one only for AnySurface
    int affordance = -1;               // semantic class, -1 for none
  };

  Target resolve(const Subgoal& sg) const;
  // Best map candidate; failing that, a sighting in the current frame (`sighted` set).
  std::optional<CoarseTarget> choose_target(const Subgoal& sg, const Target& t, ObjectClass& cls,
                                            bool* sighted = nullptr) const;
  // Nearest grid where at least kSightingRays rays of the frame hit class c.
  std::optional<int> sighting(ObjectClass c, const std::vector<char>& excluded) const;
  bool walk_until_detected(const Subgoal& sg, const Target& t);
  bool follow(const CoarseTarget& goal, int& collisions);
  void align(int target_grid);
  int refine_target_grid(int target_grid, ObjectClass cls) const;
  bool fine_control(int& target_grid, ObjectClass cls);
  std::optional<ObjectId> interaction_target(int target_grid, ObjectClass cls) const;
  std::vector<Action> program(const Subgoal& sg, ObjectId target, int target_grid) const;
  bool grid_free(int grid) const;
  bool blind_spot(int grid) const;
  void log(const std::string& json_line);

  GridScene& scene_;
  AgentState& agent_;
  AgentConfig cfg_;
  SceneMap& map_;
  const PolicyParams* policy_;
  AblationMode mode_;
  std::uint64_t seed_;
  Rng rng_;

  Cell anchor_;
  PoseEstimate pose_;
  EgoFrame frame_;
  int steps_ = 0;
  int episode_limit_ = 1 << 30;
  int subgoal_limit_ = 1 << 30;
  std::vector<char> visited_;
  std::vector<char> obstacles_;
  std::vector<char> observed_;
  std::vector<int> seen_count_;  // map updates in which each grid was visible
  std::vector<int> trajectory_;
  std::optional<ObjectId> held_;
  std::optional<ObjectClass> held_class_;
  std::optional<ObjectId> macro_item_;
  std::map<ObjectClass, std::vector<int>> put_grids_;
  std::map<ObjectClass, std::vector<std::pair<int, int>>> picked_grids_;  // grid, seen_count_ at pickup
  std::map<ObjectClass, int> located_;
  std::size_t macro_progress_ = 0;
};

}  // namespace disco
