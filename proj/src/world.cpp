#include "disco/world.hpp"

#include <algorithm>
#include <array>
#include <functional>

#include "disco/render.hpp"

namespace disco {

// ----------------------------------------------------------------------------
// GridScene

GridScene::GridScene(int width, int height, unsigned long long seed)
    : width_(width), height_(height), seed_(seed),
      cells_(static_cast<std::size_t>(std::max(width, 0) * std::max(height, 0)), CellKind::Floor),
      furniture_(cells_.size(), -1) {
  if (width <= 0 || height <= 0) throw ConfigError("scene dimensions must be positive");
}

CellKind GridScene::kind(Cell c) const {
  if (!in_bounds(c)) return CellKind::Wall;
  return cells_[static_cast<std::size_t>(c.z * width_ + c.x)];
}

void GridScene::set_kind(Cell c, CellKind k) {
  if (!in_bounds(c)) throw std::out_of_range("cell out of bounds");
  cells_[static_cast<std::size_t>(c.z * width_ + c.x)] = k;
}

bool GridScene::navigable(Cell c) const {
  return kind(c) == CellKind::Floor && !furniture_at(c).has_value();
}

bool GridScene::occludes(Cell c) const {
  const CellKind k = kind(c);
  if (k != CellKind::Floor) return true;
  return furniture_at(c).has_value();
}

const ObjectInstance& GridScene::object(ObjectId id) const {
  if (!has_object(id)) throw std::out_of_range("unknown object id");
  return objects_[static_cast<std::size_t>(id)];
}

ObjectInstance& GridScene::object(ObjectId id) {
  if (!has_object(id)) throw std::out_of_range("unknown object id");
  return objects_[static_cast<std::size_t>(id)];
}

ObjectId GridScene::add_object(ObjectClass cls, Placement placement) {
  ObjectInstance obj;
  obj.id = static_cast<ObjectId>(objects_.size());
  obj.cls = cls;
  obj.placement = placement;
  obj.affordances = class_info(cls).affordances;
  if (const auto* c = std::get_if<Cell>(&placement)) {
    if (!in_bounds(*c)) throw std::out_of_range("furniture cell out of bounds");
    if (furniture_[static_cast<std::size_t>(c->z * width_ + c->x)] >= 0) {
      throw std::logic_error("cell already holds furniture");
    }
    furniture_[static_cast<std::size_t>(c->z * width_ + c->x)] = obj.id;
  }
  objects_.push_back(obj);
  return obj.id;
}

std::optional<ObjectId> GridScene::furniture_at(Cell c) const {
  if (!in_bounds(c)) return std::nullopt;
  const ObjectId id = furniture_[static_cast<std::size_t>(c.z * width_ + c.x)];
  if (id < 0) return std::nullopt;
  return id;
}

std::vector<ObjectId> GridScene::contents(ObjectId container) const {
  std::vector<ObjectId> out;
  for (const auto& o : objects_) {
    if (const auto* p = std::get_if<InContainer>(&o.placement); p && p->container == container) {
      out.push_back(o.id);
    }
  }
  return out;
}

std::optional<Cell> GridScene::root_cell(ObjectId id) const {
  ObjectId cur = id;
  for (std::size_t guard = 0; guard <= objects_.size(); ++guard) {
    const auto& p = object(cur).placement;
    if (const auto* c = std::get_if<Cell>(&p)) return *c;
    if (const auto* in = std::get_if<InContainer>(&p)) {
      cur = in->container;
      continue;
    }
    return std::nullopt;
  }
  throw std::logic_error("containment cycle");
}

bool GridScene::is_within(ObjectId id, ObjectId ancestor) const {
  ObjectId cur = id;
  for (std::size_t guard = 0; guard <= objects_.size(); ++guard) {
    if (cur == ancestor) return true;
    const auto* in = std::get_if<InContainer>(&object(cur).placement);
    if (!in) return false;
    cur = in->container;
  }
  throw std::logic_error("containment cycle");
}

std::vector<ObjectId> GridScene::visible_stack(Cell c) const {
  std::vector<ObjectId> out;
  const auto root = furniture_at(c);
  if (!root) return out;
  std::function<void(ObjectId)> visit = [&](ObjectId id) {
    out.push_back(id);
    const auto& o = object(id);
    if (has(o.affordances, Affordance::Openable) && !o.state.is_open) return;
    for (ObjectId child : contents(id)) visit(child);
  };
  visit(*root);
  return out;
}

// ----------------------------------------------------------------------------
// Actions

namespace {

constexpr std::array<std::string_view, kNumActionTypes> kActionNames{
    "MoveAhead", "RotateRight", "RotateLeft", "LookUp",   "LookDown",
    "MoveLeft",  "MoveRight",   "MoveBack",   "PickUp",   "Put",
    "Open",      "Close",       "ToggleOn",   "ToggleOff", "Slice"};

constexpr std::array<std::string_view, 12> kFailureNames{
    "none",          "collision",         "out-of-reach",     "not-visible",
    "affordance-violation", "hand-occupied", "hand-empty",   "closed-receptacle",
    "already-in-state", "no-knife",       "horizon-limit",    "invalid-target"};

Cell offset(Cell c, int yaw) {
  switch (((yaw % 360) + 360) % 360) {
    case 0: return {c.x, c.z + 1};
    case 90: return {c.x + 1, c.z};
    case 180: return {c.x, c.z - 1};
    default: return {c.x - 1, c.z};
  }
}

int wrap_yaw(int yaw) { return ((yaw % 360) + 360) % 360; }

void for_each_nested(GridScene& scene, ObjectId container, const std::function<void(ObjectInstance&)>& fn) {
  for (ObjectId child : scene.contents(container)) {
    fn(scene.object(child));
    for_each_nested(scene, child, fn);
  }
}

}  // namespace

std::string_view action_name(ActionType a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<ActionType> action_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<ActionType>(i);
  }
  return std::nullopt;
}

bool is_navigation(ActionType a) { return static_cast<int>(a) <= static_cast<int>(ActionType::MoveBack); }

std::string to_string(const Action& a) {
  std::string s(action_name(a.type));
  if (a.target) s += "(" + std::to_string(*a.target) + ")";
  return s;
}

std::string_view failure_name(FailureReason r) { return kFailureNames[static_cast<std::size_t>(r)]; }

std::optional<AgentState> navigation_successor(const GridScene& scene, const AgentState& agent,
                                               ActionType a) {
  AgentState next = agent;
  int move_yaw = -1;
  switch (a) {
    case ActionType::MoveAhead: move_yaw = agent.yaw; break;
    case ActionType::MoveRight: move_yaw = agent.yaw + 90; break;
    case ActionType::MoveBack: move_yaw = agent.yaw + 180; break;
    case ActionType::MoveLeft: move_yaw = agent.yaw + 270; break;
    case ActionType::RotateRight: next.yaw = wrap_yaw(agent.yaw + 90); return next;
    case ActionType::RotateLeft: next.yaw = wrap_yaw(agent.yaw - 90); return next;
    case ActionType::LookUp:
      if (agent.horizon - kHorizonStep < kHorizonMin) return std::nullopt;
      next.horizon -= kHorizonStep;
      return next;
    case ActionType::LookDown:
      if (agent.horizon + kHorizonStep > kHorizonMax) return std::nullopt;
      next.horizon += kHorizonStep;
      return next;
    default: return next;
  }
  const Cell target = offset(agent.cell, move_yaw);
  if (!scene.navigable(target)) return std::nullopt;
  next.cell = target;
  return next;
}

StepResult check_interaction(const GridScene& scene, const AgentState& agent, const Action& action,
                             const EgoFrame& frame);

StepResult check_interaction(const GridScene& scene, const AgentState& agent, const Action& action,
                             const RenderConfig& render) {
  RenderConfig clean = render;
  clean.class_flip = 0.0;
  clean.depth_jitter = 0.0;
  return check_interaction(scene, agent, action, render_egocentric(scene, agent, clean));
}

StepResult check_interaction(const GridScene& scene, const AgentState& agent, const Action& action,
                             const EgoFrame& frame) {
  if (is_navigation(action.type)) return StepResult::fail(FailureReason::InvalidTarget);
  if (!action.target || !scene.has_object(*action.target)) {
    return StepResult::fail(FailureReason::InvalidTarget);
  }
  const ObjectId id = *action.target;
  const ObjectInstance& obj = scene.object(id);
  if (std::holds_alternative<Held>(obj.placement)) return StepResult::fail(FailureReason::InvalidTarget);

  const AffordanceMask f = obj.affordances;
  switch (action.type) {
    case ActionType::PickUp:
      if (!has(f, Affordance::Pickupable)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    case ActionType::Put:
      if (!has(f, Affordance::Receptacle)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    case ActionType::Open:
      if (!has(f, Affordance::Openable)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    case ActionType::Close:
      if (!has(f, Affordance::Closeable)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    case ActionType::ToggleOn:
      if (!has(f, Affordance::ToggleableOn)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    case ActionType::ToggleOff:
      if (!has(f, Affordance::ToggleableOff)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    case ActionType::Slice:
      if (!has(f, Affordance::Sliceable)) return StepResult::fail(FailureReason::AffordanceViolation);
      break;
    default: return StepResult::fail(FailureReason::InvalidTarget);
  }

  if (!frame.sees_object(id)) return StepResult::fail(FailureReason::NotVisible);
  const auto cell = scene.root_cell(id);
  if (!cell || cell_distance(agent.cell, *cell) > kReachDistance + 1e-9) {
    return StepResult::fail(FailureReason::OutOfReach);
  }

  switch (action.type) {
    case ActionType::PickUp:
      if (agent.held) return StepResult::fail(FailureReason::HandOccupied);
      break;
    case ActionType::Put:
      if (!agent.held) return StepResult::fail(FailureReason::HandEmpty);
      if (has(f, Affordance::Openable) && !obj.state.is_open) {
        return StepResult::fail(FailureReason::ClosedReceptacle);
      }
      if (scene.is_within(id, *agent.held)) return StepResult::fail(FailureReason::InvalidTarget);
      break;
    case ActionType::Open:
      if (obj.state.is_open) return StepResult::fail(FailureReason::AlreadyInState);
      break;
    case ActionType::Close:
      if (!obj.state.is_open) return StepResult::fail(FailureReason::AlreadyInState);
      break;
    case ActionType::ToggleOn:
      if (obj.state.is_toggled) return StepResult::fail(FailureReason::AlreadyInState);
      break;
    case ActionType::ToggleOff:
      if (!obj.state.is_toggled) return StepResult::fail(FailureReason::AlreadyInState);
      break;
    case ActionType::Slice:
      if (!agent.held || scene.object(*agent.held).cls != ObjectClass::Knife) {
        return StepResult::fail(FailureReason::NoKnife);
      }
      if (obj.state.is_sliced) return StepResult::fail(FailureReason::AlreadyInState);
      break;
    default: break;
  }
  return StepResult::ok();
}

StepResult step(GridScene& scene, AgentState& agent, const Action& action, const RenderConfig& render) {
  if (is_navigation(action.type)) {
    const auto next = navigation_successor(scene, agent, action.type);
    if (!next) {
      const bool look = action.type == ActionType::LookUp || action.type == ActionType::LookDown;
      return StepResult::fail(look ? FailureReason::HorizonLimit : FailureReason::Collision);
    }
    agent = *next;
    return StepResult::ok();
  }

  const StepResult check = check_interaction(scene, agent, action, render);
  if (!check.success) return check;

  const ObjectId id = *action.target;
  switch (action.type) {
    case ActionType::PickUp:
      scene.object(id).placement = Held{};
      agent.held = id;
      break;
    case ActionType::Put:
      scene.object(*agent.held).placement = InContainer{id};
      agent.held.reset();
      break;
    case ActionType::Open: scene.object(id).state.is_open = true; break;
    case ActionType::Close:
      scene.object(id).state.is_open = false;
      if (scene.object(id).cls == ObjectClass::Fridge) {
        for_each_nested(scene, id, [](ObjectInstance& o) { o.state.is_cooled = true; });
      }
      break;
    case ActionType::ToggleOn:
      scene.object(id).state.is_toggled = true;
      if (scene.object(id).cls == ObjectClass::SinkBasin) {
        for_each_nested(scene, id, [](ObjectInstance& o) { o.state.is_cleaned = true; });
      }
      break;
    case ActionType::ToggleOff:
      scene.object(id).state.is_toggled = false;
      if (scene.object(id).cls == ObjectClass::Microwave) {
        for_each_nested(scene, id, [](ObjectInstance& o) { o.state.is_heated = true; });
      }
      break;
    case ActionType::Slice: scene.object(id).state.is_sliced = true; break;
    default: break;
  }
  return StepResult::ok();
}

}  // namespace disco
