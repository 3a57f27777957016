#include "disco/agent.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

namespace disco {

// ----------------------------------------------------------------------------
// Names

namespace {

constexpr std::array<std::string_view, 6> kAblationNames{
    "full", "no-differentiable", "no-interactive-affordance", "no-navigation-affordance", "no-coarse", "no-fine"};

}  // namespace

std::vector<std::string> AblationMode::names() { return {kAblationNames.begin(), kAblationNames.end()}; }

std::string AblationMode::name() const {
  std::string out;
  auto add = [&](bool on, std::string_view n) {
    if (on) return;
    if (!out.empty()) out += "+";
    out += n;
  };
  add(differentiable, kAblationNames[1]);
  add(interactive_affordance, kAblationNames[2]);
  add(navigation_affordance, kAblationNames[3]);
  add(coarse, kAblationNames[4]);
  add(fine, kAblationNames[5]);
  return out.empty() ? std::string(kAblationNames[0]) : out;
}

AblationMode AblationMode::from_name(const std::string& name) {
  AblationMode m;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t end = std::min(name.find('+', start), name.size());
    const std::string part = name.substr(start, end - start);
    if (part == kAblationNames[0] && name == part) return m;
    if (part == kAblationNames[1]) m.differentiable = false;
    else if (part == kAblationNames[2]) m.interactive_affordance = false;
    else if (part == kAblationNames[3]) m.navigation_affordance = false;
    else if (part == kAblationNames[4]) m.coarse = false;
    else if (part == kAblationNames[5]) m.fine = false;
    else throw std::invalid_argument("unknown ablation mode '" + part + "'");
    start = end + 1;
  }
  return m;
}

std::string_view phase_name(Phase p) {
  static constexpr std::array<std::string_view, 7> names{"RandomWalk", "Coarse", "Align", "Fine",
                                                         "Interact",   "Done",   "Failed"};
  return names[static_cast<std::size_t>(p)];
}

std::string_view subgoal_failure_name(SubgoalFailure f) {
  static constexpr std::array<std::string_view, 5> names{"none", "object-not-found", "unreachable",
                                                         "interaction-failure", "budget-exhausted"};
  return names[static_cast<std::size_t>(f)];
}

// ----------------------------------------------------------------------------
// Agent

namespace {

Cell step_cell(Cell c, int yaw) {
  switch (((yaw % 360) + 360) % 360) {
    case 0: return {c.x, c.z + 1};
    case 90: return {c.x + 1, c.z};
    case 180: return {c.x, c.z - 1};
    default: return {c.x - 1, c.z};
  }
}

int move_heading(ActionType a, int yaw) {
  switch (a) {
    case ActionType::MoveAhead: return yaw;
    case ActionType::MoveRight: return yaw + 90;
    case ActionType::MoveBack: return yaw + 180;
    case ActionType::MoveLeft: return yaw + 270;
    default: return -1;
  }
}

bool needs_held(SubgoalVerb v) {
  return v == SubgoalVerb::Put || v == SubgoalVerb::Heat || v == SubgoalVerb::Cool || v == SubgoalVerb::Clean;
}

bool tolerable(const Action& a, const StepResult& r) {
  if (r.reason != FailureReason::AlreadyInState) return false;
  return a.type == ActionType::Open || a.type == ActionType::Close || a.type == ActionType::ToggleOn ||
         a.type == ActionType::ToggleOff;
}

}  // namespace

Agent::Agent(GridScene& scene, AgentState& agent, const AgentConfig& cfg, SceneMap& map, const PolicyParams* policy,
             AblationMode mode, std::uint64_t seed)
    : scene_(scene), agent_(agent), cfg_(cfg), map_(map), policy_(policy), mode_(mode), seed_(seed),
      rng_(Rng::derive(seed, 0x5eed)), anchor_(agent.cell), pose_(initial_pose(agent)) {
  visited_.assign(static_cast<std::size_t>(cfg_.map.grids()), 0);
  obstacles_.assign(visited_.size(), 0);
  observed_.assign(visited_.size(), 0);
  seen_count_.assign(visited_.size(), 0);
  held_ = agent.held;
  if (held_) held_class_ = scene_.object(*held_).cls;
  RenderConfig rc = cfg_.render;
  rc.noise_seed = Rng::derive(seed_, 0);
  frame_ = render_egocentric(scene_, agent_, rc);
  visited_[static_cast<std::size_t>(agent_grid())] = 1;
  trajectory_.push_back(agent_grid());
}

bool Agent::detected(ObjectClass c) const { return map_.query(to_index(c)).maxCoeff() > cfg_.control.detect_p; }

int Agent::agent_grid() const { return *cfg_.map.grid_of(pose_.x, pose_.z); }

void Agent::log(const std::string& line) {
  if (trace) trace->push_back(line);
}

StepResult Agent::execute(const Action& action) {
  if (steps_ >= std::min(episode_limit_, subgoal_limit_)) throw BudgetExhausted("step budget exhausted");
  const int heading = move_heading(action.type, pose_.yaw);
  const StepResult r = step(scene_, agent_, action, cfg_.render);
  ++steps_;
  if (!r.success && r.reason == FailureReason::Collision && heading >= 0) {
    const Cell blocked = step_cell(cell_of_grid(cfg_.map, anchor_, agent_grid()), heading);
    if (const auto g = cfg_.map.grid_of((blocked.x - anchor_.x) * cfg_.map.cell, (blocked.z - anchor_.z) * cfg_.map.cell)) {
      obstacles_[static_cast<std::size_t>(*g)] = 1;
    }
  }
  pose_ = update_pose(pose_, action, r);
  if (r.success && action.type == ActionType::PickUp) held_ = action.target;
  if (r.success && action.type == ActionType::Put) held_.reset();

  RenderConfig rc = cfg_.render;
  rc.noise_seed = Rng::derive(seed_, static_cast<std::uint64_t>(steps_));
  frame_ = render_egocentric(scene_, agent_, rc);
  const SoftLabels labels = soft_labels(bin_points(project_frame(frame_, pose_), cfg_.map), cfg_.control.rho);
  map_.update(labels);
  for (std::size_t g = 0; g < labels.v.size(); ++g) {
    observed_[g] = observed_[g] || labels.v[g];
    seen_count_[g] += labels.v[g] ? 1 : 0;
  }
  visited_[static_cast<std::size_t>(agent_grid())] = 1;
  obstacles_[static_cast<std::size_t>(agent_grid())] = 0;
  trajectory_.push_back(agent_grid());

  if (trace) {
    nlohmann::json j = {{"event", "step"}, {"t", steps_}, {"action", to_string(action)}, {"success", r.success}};
    if (!r.success) j["reason"] = std::string(failure_name(r.reason));
    log(j.dump());
  }
  if (on_step) on_step(*this);
  return r;
}

void Agent::warm_up() {
  for (int i = 0; i < 4; ++i) execute(Action::nav(ActionType::RotateRight));
}

bool Agent::grid_free(int grid) const {
  if (grid == agent_grid()) return true;
  if (!mode_.navigation_affordance) {
    return visited_[static_cast<std::size_t>(grid)] || !obstacles_[static_cast<std::size_t>(grid)];
  }
  return map_.query_at(grid, kNavigableClass) > cfg_.control.tau_nav || blind_spot(grid);
}

// The floor right next to the agent is below the camera's view; until it has
// been seen or bumped into, it counts as free.
bool Agent::blind_spot(int grid) const {
  const int M = cfg_.map.M;
  const int here = agent_grid();
  const auto g = static_cast<std::size_t>(grid);
  return std::abs(grid % M - here % M) <= 1 && std::abs(grid / M - here / M) <= 1 && !observed_[g] && !obstacles_[g];
}

NavMap Agent::current_navmap() const {
  const int M = cfg_.map.M;
  if (mode_.navigation_affordance) {
    NavMap nav = make_navmap(map_.query(kNavigableClass), M, cfg_.control.tau_nav, agent_grid());
    const int here = agent_grid();
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = here % M + dx, z = here / M + dz;
        if (x >= 0 && z >= 0 && x < M && z < M && blind_spot(z * M + x)) nav.free[static_cast<std::size_t>(z * M + x)] = 1;
      }
    }
    return nav;
  }
  // Obstacle-point map: everything is optimistically free except cells where
  // the agent has bumped into something.
  NavMap nav;
  nav.M = M;
  nav.free.resize(static_cast<std::size_t>(M * M));
  for (std::size_t g = 0; g < nav.free.size(); ++g) nav.free[g] = visited_[g] || !obstacles_[g] ? 1 : 0;
  nav.free[static_cast<std::size_t>(agent_grid())] = 1;
  return nav;
}

Agent::Target Agent::resolve(const Subgoal& sg) const {
  Target t;
  if (sg.noun.is_any_surface()) {
    t.classes = {ObjectClass::CounterTop, ObjectClass::DiningTable};
  } else {
    t.classes = {*sg.noun.cls};
  }
  auto aff = [](Affordance a) { return affordance_class(a); };
  switch (sg.verb) {
    case SubgoalVerb::PickUp: t.affordance = aff(Affordance::Pickupable); break;
    case SubgoalVerb::Put:
    case SubgoalVerb::Heat:
    case SubgoalVerb::Cool:
    case SubgoalVerb::Clean: t.affordance = aff(Affordance::Receptacle); break;
    case SubgoalVerb::Slice: t.affordance = aff(Affordance::Sliceable); break;
    case SubgoalVerb::Toggle: t.affordance = aff(Affordance::ToggleableOn); break;
    case SubgoalVerb::GotoLocation: {
      const AffordanceMask m = class_info(t.classes.front()).affordances;
      t.affordance = has(m, Affordance::Pickupable) ? aff(Affordance::Pickupable) : aff(Affordance::Receptacle);
      break;
    }
  }
  return t;
}

std::optional<int> Agent::sighting(ObjectClass c, const std::vector<char>& excluded) const {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const int M = cfg_.map.M;
  std::map<int, int> hits;
  for (int col = 0; col < frame_.width(); ++col) {
    const RayHit& r = frame_.rays[static_cast<std::size_t>(col)];
    if (r.cls != c) continue;
    const double th = (pose_.yaw + frame_.ray_offset_deg(col)) * kDeg;
    if (const auto g = cfg_.map.grid_of(pose_.x + r.distance * std::sin(th), pose_.z + r.distance * std::cos(th))) {
      if (!excluded[static_cast<std::size_t>(*g)]) ++hits[*g];
    }
  }
  const int here = agent_grid();
  std::optional<int> best;
  long best_d2 = 0;
  for (const auto& [g, n] : hits) {
    if (n < kSightingRays) continue;
    const long dx = g % M - here % M, dz = g / M - here / M;
    if (!best || dx * dx + dz * dz < best_d2) {
      best = g;
      best_d2 = dx * dx + dz * dz;
    }
  }
  return best;
}

std::optional<CoarseTarget> Agent::choose_target(const Subgoal& sg, const Target& t, ObjectClass& cls,
                                                 bool* sighted) const {
  if (sighted) *sighted = false;
  const int M = cfg_.map.M;
  const int here = agent_grid();
  if (sg.verb == SubgoalVerb::PickUp) {
    if (const auto it = located_.find(t.classes.front()); it != located_.end()) {
      cls = it->first;
      CoarseTarget ct;
      ct.target_grid = it->second;
      ct.destinations = expand_destinations(it->second, M, cfg_.control.expansion_m, cfg_.map.cell);
      return ct;
    }
  }
  const bool use_aff = mode_.interactive_affordance && t.affordance >= 0;
  const Eigen::VectorXd p_aff = use_aff ? map_.query(t.affordance) : Eigen::VectorXd();
  std::optional<CoarseTarget> best;
  double best_u = -1.0;
  long best_d2 = 0;
  std::optional<std::pair<int, ObjectClass>> seen;
  for (ObjectClass c : t.classes) {
    std::vector<char> excluded(static_cast<std::size_t>(M * M), 0);
    auto exclude = [&](const std::map<ObjectClass, std::vector<int>>& grids) {
      if (const auto it = grids.find(c); it != grids.end()) {
        for (int g : it->second) excluded[static_cast<std::size_t>(g)] = 1;
      }
    };
    if (sg.verb == SubgoalVerb::PickUp || sg.verb == SubgoalVerb::GotoLocation) exclude(put_grids_);
    if (sg.verb == SubgoalVerb::GotoLocation) {
      // Where an instance was picked up, until the map has had a few fresh looks.
      if (const auto it = picked_grids_.find(c); it != picked_grids_.end()) {
        for (const auto& [g, seen] : it->second) {
          if (seen_count_[static_cast<std::size_t>(g)] - seen < kReobserve) excluded[static_cast<std::size_t>(g)] = 1;
        }
      }
    }
    if (!seen) {
      if (const auto g = sighting(c, excluded)) seen.emplace(*g, c);
    }
    const Eigen::VectorXd p_obj = map_.query(to_index(c));
    bool any = false;
    for (int g = 0; g < M * M; ++g) {
      auto& e = excluded[static_cast<std::size_t>(g)];
      e = e || p_obj[g] <= cfg_.control.detect_p;
      any = any || !e;
    }
    if (!any) continue;
    const CoarseTarget ct = coarse_target(p_obj, p_aff, here, M, cfg_.control.expansion_m, cfg_.map.cell,
                                          cfg_.control.tie_eps, &excluded);
    const double u = p_obj[ct.target_grid] * (use_aff ? p_aff[ct.target_grid] : 1.0);
    const long dx = ct.target_grid % M - here % M, dz = ct.target_grid / M - here / M;
    const long d2 = dx * dx + dz * dz;
    if (!best || u > best_u + cfg_.control.tie_eps || (u >= best_u - cfg_.control.tie_eps && d2 < best_d2)) {
      best = ct;
      best_u = u;
      best_d2 = d2;
      cls = c;
    }
  }
  if (best || !seen) return best;
  // Seen in the current frame but not yet on the map: head for the sighting.
  if (sighted) *sighted = true;
  cls = seen->second;
  CoarseTarget ct;
  ct.target_grid = seen->first;
  ct.destinations = expand_destinations(seen->first, M, cfg_.control.expansion_m, cfg_.map.cell);
  return ct;
}

bool Agent::walk_until_detected(const Subgoal& sg, const Target& t) {
  auto found = [&] {
    ObjectClass cls = t.classes.front();
    return choose_target(sg, t, cls).has_value();
  };
  if (!mode_.coarse) {
    // Without the map planner the walk is undirected: forward twice as often as either turn.
    static constexpr std::array<ActionType, 4> kSteps{ActionType::MoveAhead, ActionType::MoveAhead,
                                                      ActionType::RotateLeft, ActionType::RotateRight};
    if (!found()) log(nlohmann::json{{"event", "phase"}, {"phase", "RandomWalk"}, {"leg", 0}}.dump());
    while (!found()) execute(Action::nav(kSteps[static_cast<std::size_t>(rng_.index(4))]));
    return true;
  }
  int legs = 0;
  while (!found()) {
    ++legs;
    log(nlohmann::json{{"event", "phase"}, {"phase", "RandomWalk"}, {"leg", legs}}.dump());
    const NavMap nav = current_navmap();
    std::optional<std::vector<ActionType>> plan;
    CoarseTarget wp;
    for (int tries = 0; tries < 20 && !plan; ++tries) {
      try {
        wp = random_walk_target(nav, agent_grid(), rng_);
      } catch (const NoNavigableCell&) {
        break;
      }
      plan = bfs_plan(nav, grid_pose(pose_, cfg_.map), wp.destinations);
    }
    if (!plan) {
      execute(Action::nav(ActionType::RotateRight));
      continue;
    }
    for (ActionType a : *plan) {
      if (found()) return true;
      if (a == ActionType::MoveAhead) {
        const GridPose gp = grid_pose(pose_, cfg_.map);
        const Cell next = step_cell(Cell{gp.gx, gp.gz}, gp.yaw);
        if (!grid_free(next.z * cfg_.map.M + next.x)) break;
      }
      if (!execute(Action::nav(a)).success) break;
    }
    for (int r = 0; r < 3 && !found(); ++r) execute(Action::nav(ActionType::RotateRight));
  }
  return true;
}

bool Agent::follow(const CoarseTarget& goal, int& collisions) {
  const int M = cfg_.map.M;
  for (int round = 0; round < cfg_.control.max_replans; ++round) {
    const int here = agent_grid();
    if (std::binary_search(goal.destinations.begin(), goal.destinations.end(), here)) return true;
    const NavMap nav = current_navmap();
    const auto plan = bfs_plan(nav, grid_pose(pose_, cfg_.map), goal.destinations);
    if (!plan) return false;
    if (trace) {
      std::vector<std::string> names;
      for (ActionType a : *plan) names.emplace_back(action_name(a));
      log(nlohmann::json{{"event", "plan"}, {"target", goal.target_grid}, {"actions", names}}.dump());
    }
    bool clean = true;
    for (ActionType a : *plan) {
      if (a == ActionType::MoveAhead) {
        const GridPose gp = grid_pose(pose_, cfg_.map);
        const Cell next = step_cell(Cell{gp.gx, gp.gz}, gp.yaw);
        if (!grid_free(next.z * M + next.x)) {
          clean = false;
          break;
        }
      }
      if (!execute(Action::nav(a)).success) {
        ++collisions;
        clean = false;
        break;
      }
    }
    if (clean && std::binary_search(goal.destinations.begin(), goal.destinations.end(), agent_grid())) return true;
  }
  return false;
}

void Agent::align(int target_grid) {
  for (ActionType a : face_target(grid_pose(pose_, cfg_.map), target_grid, cfg_.map.M)) execute(Action::nav(a));
}

int Agent::refine_target_grid(int target_grid, ObjectClass cls) const {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const int M = cfg_.map.M;
  std::map<int, int> hits;
  for (int col = 0; col < frame_.width(); ++col) {
    const RayHit& r = frame_.rays[static_cast<std::size_t>(col)];
    if (r.cls != cls) continue;
    const double th = (pose_.yaw + frame_.ray_offset_deg(col)) * kDeg;
    if (const auto g = cfg_.map.grid_of(pose_.x + r.distance * std::sin(th), pose_.z + r.distance * std::cos(th))) {
      ++hits[*g];
    }
  }
  if (hits.count(target_grid)) return target_grid;
  int best = target_grid, best_n = 0;
  long best_d2 = 0;
  const double r_cells = cfg_.control.expansion_m / cfg_.map.cell;
  for (const auto& [g, n] : hits) {
    const long dx = g % M - target_grid % M, dz = g / M - target_grid / M;
    const long d2 = dx * dx + dz * dz;
    if (static_cast<double>(d2) > r_cells * r_cells + 1e-9) continue;
    if (n > best_n || (n == best_n && d2 < best_d2)) {
      best = g;
      best_n = n;
      best_d2 = d2;
    }
  }
  return best;
}

bool Agent::fine_control(int& target_grid, ObjectClass cls) {
  if (!mode_.fine) return true;
  if (!policy_) throw UntrainedPolicy("fine control needs a policy");
  for (int k = 0; k < cfg_.control.fine_steps; ++k) {
    target_grid = refine_target_grid(target_grid, cls);
    const NavMap nav = current_navmap();
    const Features x = fine_features(frame_, pose_, cfg_.map, target_grid, cls, nav, cfg_.render);
    const FineAction a = fine_policy(x, cls, *policy_);
    log(nlohmann::json{{"event", "fine"}, {"action", std::string(fine_action_name(a))}}.dump());
    if (a == FineAction::Interact) return true;
    execute(Action::nav(to_action_type(a)));
  }
  target_grid = refine_target_grid(target_grid, cls);
  return true;
}

std::optional<ObjectId> Agent::interaction_target(int target_grid, ObjectClass cls) const {
  auto vote = [&](const std::vector<int>& cols) -> std::optional<ObjectId> {
    std::map<ObjectId, int> votes;
    for (int c : cols) {
      const auto& r = frame_.rays[static_cast<std::size_t>(c)];
      if (r.object) ++votes[*r.object];
    }
    std::optional<ObjectId> best;
    int best_n = 0;
    for (const auto& [id, n] : votes) {
      if (n > best_n) {
        best = id;
        best_n = n;
      }
    }
    return best;
  };
  if (auto id = vote(target_rays(frame_, pose_, cfg_.map, target_grid, cls))) return id;
  std::vector<int> all;
  for (int c = 0; c < frame_.width(); ++c) {
    if (frame_.rays[static_cast<std::size_t>(c)].cls == cls) all.push_back(c);
  }
  return vote(all);
}

std::vector<Action> Agent::program(const Subgoal& sg, ObjectId target, int target_grid) const {
  using A = ActionType;
  auto on = [&](A t) { return Action::interact(t, target); };
  const ObjectId item = macro_item_.value_or(-1);
  switch (sg.verb) {
    case SubgoalVerb::PickUp: return {on(A::PickUp)};
    case SubgoalVerb::Slice: return {on(A::Slice)};
    case SubgoalVerb::Toggle: return {on(A::ToggleOn)};
    case SubgoalVerb::Heat:
      return {on(A::Open), on(A::Put), on(A::Close), on(A::ToggleOn), on(A::ToggleOff), on(A::Open),
              Action::interact(A::PickUp, item), on(A::Close)};
    case SubgoalVerb::Cool:
      return {on(A::Open), on(A::Put), on(A::Close), on(A::Open), Action::interact(A::PickUp, item), on(A::Close)};
    case SubgoalVerb::Clean:
      return {on(A::Put), on(A::ToggleOn), on(A::ToggleOff), Action::interact(A::PickUp, item)};
    case SubgoalVerb::Put: {
      bool openable = false;
      if (mode_.interactive_affordance) {
        openable = map_.query_at(target_grid, affordance_class(Affordance::Openable)) > 0.5;
        for (const auto& r : frame_.rays) {
          if (r.object == target && has(r.affordances, Affordance::Openable)) openable = true;
        }
      }
      std::vector<Action> p;
      if (openable) p.push_back(on(A::Open));
      p.push_back(on(A::Put));
      if (openable && cfg_.control.close_after_put) p.push_back(on(A::Close));
      return p;
    }
    case SubgoalVerb::GotoLocation: return {};
  }
  return {};
}

SubgoalResult Agent::run_subgoal(const Subgoal& sg, int budget) {
  SubgoalResult res;
  res.subgoal = sg;
  const int start = steps_;
  subgoal_limit_ = steps_ + std::max(budget, 0);
  macro_progress_ = 0;
  macro_item_ = held_;
  log(nlohmann::json{{"event", "subgoal"}, {"subgoal", to_string(sg)}}.dump());
  auto phase = [&](Phase p) { log(nlohmann::json{{"event", "phase"}, {"phase", std::string(phase_name(p))}}.dump()); };
  try {
    const Target t = resolve(sg);
    if (needs_held(sg.verb) && !held_) {
      res.failure = SubgoalFailure::InteractionFailure;
    } else {
      for (int attempt = 0; attempt < cfg_.control.retries && !res.success; ++attempt) {
        res.attempts = attempt + 1;
        phase(Phase::RandomWalk);
        walk_until_detected(sg, t);
        ObjectClass cls = t.classes.front();
        bool sighted = false;
        std::optional<CoarseTarget> goal = choose_target(sg, t, cls, &sighted);
        if (!goal) {
          res.failure = SubgoalFailure::ObjectNotFound;
          continue;
        }
        if (mode_.coarse) {
          phase(Phase::Coarse);
          bool reached = false;
          for (int round = 0; round < 3 && !reached; ++round) {
            log(nlohmann::json{{"event", "target"}, {"class", std::string(class_name(cls))}, {"grid", goal->target_grid},
                               {"sighted", sighted}}.dump());
            reached = follow(*goal, res.collisions);
            if (reached && sighted) {
              // Close to the sighting the map has its own evidence; aim at that.
              bool again = false;
              if (auto g = choose_target(sg, t, cls, &again)) {
                goal = g;
                sighted = again;
                reached = std::binary_search(goal->destinations.begin(), goal->destinations.end(), agent_grid());
              }
            }
            if (reached) break;
            // Look around from elsewhere and re-query the map.
            Target any = t;
            walk_until_detected(sg, any);
            execute(Action::nav(ActionType::RotateRight));
            if (auto g = choose_target(sg, t, cls, &sighted)) goal = g;
          }
          if (!reached) {
            res.failure = SubgoalFailure::Unreachable;
            continue;
          }
        }
        phase(Phase::Align);
        align(goal->target_grid);
        if (sg.verb == SubgoalVerb::GotoLocation) {
          located_[cls] = goal->target_grid;
          res.success = true;
          break;
        }
        phase(Phase::Fine);
        int tg = goal->target_grid;
        fine_control(tg, cls);
        phase(Phase::Interact);
        const auto id = interaction_target(tg, cls);
        if (!id) {
          res.failure = SubgoalFailure::InteractionFailure;
          continue;
        }
        const std::vector<Action> prog = program(sg, *id, tg);
        bool ok = true;
        for (std::size_t i = macro_progress_; i < prog.size(); ++i) {
          const StepResult r = execute(prog[i]);
          if (!r.success && !tolerable(prog[i], r)) {
            ok = false;
            break;
          }
          macro_progress_ = i + 1;
          if (!r.success) continue;
          if (prog[i].type == ActionType::Put && held_class_) {
            put_grids_[*held_class_].push_back(tg);
            held_class_.reset();
          }
          if (prog[i].type == ActionType::PickUp) {
            held_class_ = scene_.object(*prog[i].target).cls;  // the class the agent asked for
            if (sg.verb == SubgoalVerb::PickUp) {
              held_class_ = cls;
              picked_grids_[cls].emplace_back(tg, seen_count_[static_cast<std::size_t>(tg)]);
              located_.erase(cls);
            }
          }
          if (prog[i].type == ActionType::Slice) located_[cls] = tg;
        }
        if (ok) {
          res.success = true;
        } else {
          res.failure = SubgoalFailure::InteractionFailure;
        }
      }
    }
  } catch (const BudgetExhausted&) {
    res.failure = SubgoalFailure::BudgetExhausted;
  }
  if (res.success) res.failure = SubgoalFailure::None;
  phase(res.success ? Phase::Done : Phase::Failed);
  subgoal_limit_ = 1 << 30;
  res.steps = steps_ - start;
  return res;
}

}  // namespace disco
