#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "disco/classes.hpp"
#include "disco/task.hpp"

namespace disco {

inline constexpr double kCellSize = 0.25;       // meters; equals the move step
inline constexpr double kReachDistance = 1.5;   // meters, cell center to cell center
inline constexpr int kHorizonStep = 15;
inline constexpr int kHorizonMin = -30;         // negative looks up
inline constexpr int kHorizonMax = 60;
inline constexpr int kInitialHorizon = 45;      // positive looks down
inline constexpr int kNumHorizons = (kHorizonMax - kHorizonMin) / kHorizonStep + 1;

struct Cell {
  int x = 0;
  int z = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class CellKind : std::uint8_t { Floor, Wall, ReceptacleSurface };

using ObjectId = int;

struct Held {
  friend bool operator==(const Held&, const Held&) = default;
};
struct InContainer {
  ObjectId container;
  friend bool operator==(const InContainer&, const InContainer&) = default;
};
using Placement = std::variant<Cell, InContainer, Held>;

struct ObjectState {
  bool is_open = false;
  bool is_toggled = false;
  bool is_sliced = false;
  bool is_heated = false;
  bool is_cooled = false;
  bool is_cleaned = false;
  friend bool operator==(const ObjectState&, const ObjectState&) = default;
};

struct ObjectInstance {
  ObjectId id = 0;
  ObjectClass cls = ObjectClass::Apple;
  Placement placement = Held{};
  AffordanceMask affordances = 0;
  ObjectState state;
  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

// Yaw in degrees, one of 0/90/180/270, measured clockwise from +z.
struct AgentState {
  Cell cell;
  int yaw = 0;
  int horizon = kInitialHorizon;
  std::optional<ObjectId> held;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

class GridScene {
 public:
  GridScene() = default;
  GridScene(int width, int height, unsigned long long seed);

  int width() const { return width_; }
  int height() const { return height_; }
  unsigned long long seed() const { return seed_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.z >= 0 && c.x < width_ && c.z < height_; }
  CellKind kind(Cell c) const;
  void set_kind(Cell c, CellKind k);

  // Floor and not occupied by furniture.
  bool navigable(Cell c) const;
  // Walls, furniture cells and everything out of bounds stop rays.
  bool occludes(Cell c) const;

  const std::vector<ObjectInstance>& objects() const { return objects_; }
  std::vector<ObjectInstance>& objects() { return objects_; }
  const ObjectInstance& object(ObjectId id) const;
  ObjectInstance& object(ObjectId id);
  bool has_object(ObjectId id) const { return id >= 0 && id < static_cast<int>(objects_.size()); }

  ObjectId add_object(ObjectClass cls, Placement placement);

  // Furniture object standing on the cell, if any.
  std::optional<ObjectId> furniture_at(Cell c) const;
  // Direct contents of a container, ordered by id.
  std::vector<ObjectId> contents(ObjectId container) const;
  // Cell of the outermost container; nullopt when the object is held.
  std::optional<Cell> root_cell(ObjectId id) const;
  // True if `id` is `ancestor` or nested anywhere inside it.
  bool is_within(ObjectId id, ObjectId ancestor) const;
  // Furniture followed by the visible (not shut inside a closed container) contents,
  // depth first in id order.
  std::vector<ObjectId> visible_stack(Cell c) const;

  AgentState agent_start;

  friend bool operator==(const GridScene&, const GridScene&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  unsigned long long seed_ = 0;
  std::vector<CellKind> cells_;
  std::vector<ObjectId> furniture_;  // per cell, -1 when empty; furniture never moves
  std::vector<ObjectInstance> objects_;
};

// ----------------------------------------------------------------------------
// Actions

enum class ActionType : std::uint8_t {
  MoveAhead,
  RotateRight,
  RotateLeft,
  LookUp,
  LookDown,
  MoveLeft,
  MoveRight,
  MoveBack,
  PickUp,
  Put,
  Open,
  Close,
  ToggleOn,
  ToggleOff,
  Slice,
};

inline constexpr int kNumActionTypes = 15;

std::string_view action_name(ActionType a);
std::optional<ActionType> action_from_name(std::string_view name);
bool is_navigation(ActionType a);

struct Action {
  ActionType type = ActionType::MoveAhead;
  std::optional<ObjectId> target;  // the mask surrogate for interactive actions

  static Action nav(ActionType t) { return Action{t, std::nullopt}; }
  static Action interact(ActionType t, ObjectId id) { return Action{t, id}; }
  friend bool operator==(const Action&, const Action&) = default;
};

std::string to_string(const Action& a);

enum class FailureReason : std::uint8_t {
  None,
  Collision,
  OutOfReach,
  NotVisible,
  AffordanceViolation,
  HandOccupied,
  HandEmpty,
  ClosedReceptacle,
  AlreadyInState,
  NoKnife,
  HorizonLimit,
  InvalidTarget,
};

std::string_view failure_name(FailureReason r);

struct StepResult {
  bool success = true;
  FailureReason reason = FailureReason::None;
  static StepResult ok() { return {}; }
  static StepResult fail(FailureReason r) { return StepResult{false, r}; }
};

struct RenderConfig;

// Pose-only successor of a navigation action; nullopt if the move is blocked
// or the horizon would leave its range. Interactive actions return the input.
std::optional<AgentState> navigation_successor(const GridScene& scene, const AgentState& agent,
                                               ActionType a);

// Checks whether an interactive action would succeed without mutating anything.
StepResult check_interaction(const GridScene& scene, const AgentState& agent, const Action& action,
                             const RenderConfig& render);

// Applies one action in place. On failure scene and agent are untouched.
StepResult step(GridScene& scene, AgentState& agent, const Action& action,
                const RenderConfig& render);

// ----------------------------------------------------------------------------
// Scene generation

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObjectRequest {
  ObjectClass cls;
  int count = 1;
};

struct SceneGenConfig {
  int width = 12;
  int height = 12;
  int wall_segments = 1;           // short internal wall runs
  std::vector<ObjectRequest> furniture;
  std::vector<ObjectRequest> items;  // placed on open surfaces
  // Items of these classes are never placed on these receptacle classes.
  std::vector<std::pair<ObjectClass, ObjectClass>> forbidden_placements;
  int max_items_per_receptacle = 2;
  int max_retries = 200;

  static SceneGenConfig household();  // the default kitchen-like roster
  static SceneGenConfig empty(int width, int height);
};

GridScene generate_scene(const SceneGenConfig& config, unsigned long long seed);

// Flood fill over navigable cells from `start`.
std::vector<Cell> reachable_cells(const GridScene& scene, Cell start);
bool floor_connected(const GridScene& scene);

// ----------------------------------------------------------------------------
// Goal conditions

class UnknownTask : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConditionReport {
  std::vector<std::pair<std::string, bool>> conditions;
  int satisfied() const;
  int total() const { return static_cast<int>(conditions.size()); }
  bool all() const { return satisfied() == total(); }
};

ConditionReport check_goal_conditions(const GridScene& scene, const AgentState& agent,
                                      const TaskSpec& task);

// Serialization (versioned JSON). Save -> load -> save is byte-identical.
std::string scene_to_json(const GridScene& scene);
GridScene scene_from_json(std::string_view text);

}  // namespace disco
