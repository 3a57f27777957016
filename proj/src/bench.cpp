#include "disco/bench.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "disco/parallel.hpp"
#include "disco/random.hpp"

namespace disco {

using nlohmann::json;

// ----------------------------------------------------------------------------
// Config

namespace {

// Visits every configurable scalar as (section, key, reference).
template <typename Cfg, typename F>
void for_each_field(Cfg& c, F&& f) {
  f("render", "rays", c.agent.render.rays);
  f("render", "fov_deg", c.agent.render.fov_deg);
  f("render", "max_range", c.agent.render.max_range);
  f("render", "samples_per_cell", c.agent.render.samples_per_cell);
  f("render", "eye_height", c.agent.render.eye_height);
  f("render", "surface_height", c.agent.render.surface_height);
  f("render", "class_flip", c.agent.render.class_flip);
  f("render", "depth_jitter", c.agent.render.depth_jitter);
  f("map", "M", c.agent.map.M);
  f("map", "cell", c.agent.map.cell);
  f("map", "C", c.repr.C);
  f("map", "alpha", c.repr.alpha);
  f("map", "iters", c.repr.iters);
  f("map", "rho", c.agent.control.rho);
  f("map", "persist_queries", c.repr.persist_queries);
  f("control", "tau_nav", c.agent.control.tau_nav);
  f("control", "expansion_m", c.agent.control.expansion_m);
  f("control", "fine_steps", c.agent.control.fine_steps);
  f("control", "retries", c.agent.control.retries);
  f("control", "subgoal_budget", c.agent.control.subgoal_budget);
  f("control", "episode_budget", c.agent.control.episode_budget);
  f("control", "tie_eps", c.agent.control.tie_eps);
  f("control", "close_after_put", c.agent.control.close_after_put);
  f("control", "max_replans", c.agent.control.max_replans);
  f("control", "detect_p", c.agent.control.detect_p);
  f("dataset", "radius", c.collect.radius);
  f("dataset", "per_level", c.collect.per_level);
  f("dataset", "heldout_mod", c.collect.heldout_mod);
  f("train", "hidden", c.train.hidden);
  f("train", "lr", c.train.lr);
  f("train", "momentum", c.train.momentum);
  f("train", "lr_decay", c.train.lr_decay);
  f("train", "epochs", c.train.epochs);
  f("train", "batch", c.train.batch);
}

}  // namespace

json config_to_json(const RunConfig& cfg) {
  json j;
  for_each_field(cfg, [&](const char* section, const char* key, const auto& v) { j[section][key] = v; });
  j["map"]["loss"] = cfg.repr.loss == ReprLoss::Linear ? "linear" : "cross_entropy";
  j["seed"] = cfg.seed;
  return j;
}

RunConfig config_from_json(const json& j, RunConfig base) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  std::set<std::string> known{"seed"};
  for_each_field(base, [&](const char* section, const char* key, auto& v) {
    known.insert(section);
    if (!j.contains(section) || !j[section].is_object() || !j[section].contains(key)) return;
    const json& x = j[section][key];
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, bool>) {
      if (!x.is_boolean()) throw std::invalid_argument(std::string("config: ") + section + "." + key + " must be a boolean");
    } else if (!x.is_number()) {
      throw std::invalid_argument(std::string("config: ") + section + "." + key + " must be a number");
    }
    v = x.get<T>();
  });
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
    if (k == "seed") continue;
    if (!v.is_object()) throw std::invalid_argument("config: section '" + k + "' must be an object");
    for (const auto& [key, _] : v.items()) {
      bool found = key == "loss" && k == "map";
      for_each_field(base, [&](const char* s, const char* f, auto&) { found = found || (k == s && key == f); });
      if (!found) throw std::invalid_argument("config: unknown key '" + k + "." + key + "'");
    }
  }
  if (j.contains("map") && j["map"].contains("loss")) {
    const std::string loss = j["map"]["loss"].get<std::string>();
    if (loss == "linear") {
      base.repr.loss = ReprLoss::Linear;
    } else if (loss == "cross_entropy") {
      base.repr.loss = ReprLoss::CrossEntropy;
    } else {
      throw std::invalid_argument("config: map.loss must be 'linear' or 'cross_entropy'");
    }
  }
  if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
  base.repr.M = base.agent.map.M;
  return base;
}

// ----------------------------------------------------------------------------
// Scenes and the expert

GridScene scene_for_task(const TaskSpec& task) {
  if (!task.scene_seed) throw InvalidSpec("task has no scene seed");
  SceneGenConfig gen = SceneGenConfig::household();
  if (task.type == TaskType::PlaceTwo) {
    gen.max_items_per_receptacle = 3;  // room for the extra instance
    for (auto& r : gen.items) {
      if (r.cls == task.object) r.count = std::max(r.count, 2);
    }
  }
  return generate_scene(gen, *task.scene_seed);
}

namespace {

using A = ActionType;

struct ExpertState {
  GridScene scene;
  AgentState agent;
  RenderConfig render;
  std::vector<Action> actions;
  std::map<ObjectClass, ObjectId> put_into;  // PlaceTwo puts both items into one instance
  std::set<ObjectId> placed;
};

bool expert_do(ExpertState& st, const Action& a) {
  if (!check_interaction(st.scene, st.agent, a, st.render).success) {
    const auto path = expert_path(st.scene, st.agent, a, st.render);
    if (!path) return false;
    for (FineAction m : *path) {
      const Action nav = Action::nav(to_action_type(m));
      if (!step(st.scene, st.agent, nav, st.render).success) return false;
      st.actions.push_back(nav);
    }
  }
  if (!step(st.scene, st.agent, a, st.render).success) return false;
  st.actions.push_back(a);
  return true;
}

// The candidate whose first action is reachable soonest; ids break ties.
std::optional<ObjectId> nearest(const ExpertState& st, const std::vector<ObjectId>& candidates,
                                const std::function<Action(ObjectId)>& first) {
  std::optional<ObjectId> best;
  std::size_t best_len = 0;
  for (ObjectId id : candidates) {
    const Action a = first(id);
    std::size_t len = 0;
    if (!check_interaction(st.scene, st.agent, a, st.render).success) {
      const auto path = expert_path(st.scene, st.agent, a, st.render);
      if (!path) continue;
      len = path->size();
    }
    if (!best || len < best_len) {
      best = id;
      best_len = len;
    }
  }
  return best;
}

std::vector<ObjectId> instances(const GridScene& scene, const std::vector<ObjectClass>& classes) {
  std::vector<ObjectId> out;
  for (const auto& o : scene.objects()) {
    if (std::find(classes.begin(), classes.end(), o.cls) != classes.end() &&
        !std::holds_alternative<Held>(o.placement)) {
      out.push_back(o.id);
    }
  }
  return out;
}

bool expert_subgoal(ExpertState& st, const Subgoal& sg) {
  const std::vector<ObjectClass> classes = sg.noun.is_any_surface()
                                               ? std::vector<ObjectClass>{ObjectClass::CounterTop, ObjectClass::DiningTable}
                                               : std::vector<ObjectClass>{*sg.noun.cls};
  std::vector<ObjectId> cand = instances(st.scene, classes);
  auto closed_openable = [&](ObjectId id) {
    const auto& o = st.scene.object(id);
    return has(o.affordances, Affordance::Openable) && !o.state.is_open;
  };
  auto open_or = [&](ActionType t) {
    return [&, t](ObjectId id) { return Action::interact(closed_openable(id) ? A::Open : t, id); };
  };
  auto run = [&](const std::vector<Action>& prog) {
    return std::all_of(prog.begin(), prog.end(), [&](const Action& a) { return expert_do(st, a); });
  };

  switch (sg.verb) {
    case SubgoalVerb::GotoLocation: return true;
    case SubgoalVerb::PickUp: {
      std::erase_if(cand, [&](ObjectId id) { return st.placed.count(id) > 0; });
      const auto id = nearest(st, cand, [](ObjectId i) { return Action::interact(A::PickUp, i); });
      return id && run({Action::interact(A::PickUp, *id)});
    }
    case SubgoalVerb::Slice: {
      std::erase_if(cand, [&](ObjectId id) { return st.scene.object(id).state.is_sliced; });
      const auto id = nearest(st, cand, [](ObjectId i) { return Action::interact(A::Slice, i); });
      return id && run({Action::interact(A::Slice, *id)});
    }
    case SubgoalVerb::Toggle: {
      std::erase_if(cand, [&](ObjectId id) { return st.scene.object(id).state.is_toggled; });
      const auto id = nearest(st, cand, [](ObjectId i) { return Action::interact(A::ToggleOn, i); });
      return id && run({Action::interact(A::ToggleOn, *id)});
    }
    case SubgoalVerb::Put: {
      if (!st.agent.held) return false;
      const ObjectId item = *st.agent.held;
      if (!sg.noun.is_any_surface()) {
        if (const auto it = st.put_into.find(*sg.noun.cls); it != st.put_into.end()) cand = {it->second};
      }
      std::erase_if(cand, [&](ObjectId id) { return st.scene.is_within(id, item); });
      const auto id = nearest(st, cand, open_or(A::Put));
      if (!id) return false;
      std::vector<Action> prog;
      if (closed_openable(*id)) prog.push_back(Action::interact(A::Open, *id));
      prog.push_back(Action::interact(A::Put, *id));
      if (!run(prog)) return false;
      if (!sg.noun.is_any_surface()) st.put_into[*sg.noun.cls] = *id;
      st.placed.insert(item);
      return true;
    }
    case SubgoalVerb::Heat:
    case SubgoalVerb::Cool:
    case SubgoalVerb::Clean: {
      if (!st.agent.held) return false;
      const ObjectId item = *st.agent.held;
      const auto id = nearest(st, cand, open_or(A::Put));
      if (!id) return false;
      auto on = [&](ActionType t) { return Action::interact(t, *id); };
      std::vector<Action> prog;
      if (closed_openable(*id)) prog.push_back(on(A::Open));
      const Action take = Action::interact(A::PickUp, item);
      if (sg.verb == SubgoalVerb::Heat) {
        for (const Action& a : {on(A::Put), on(A::Close), on(A::ToggleOn), on(A::ToggleOff), on(A::Open), take, on(A::Close)}) {
          prog.push_back(a);
        }
      } else if (sg.verb == SubgoalVerb::Cool) {
        for (const Action& a : {on(A::Put), on(A::Close), on(A::Open), take, on(A::Close)}) prog.push_back(a);
      } else {
        for (const Action& a : {on(A::Put), on(A::ToggleOn), on(A::ToggleOff), take}) prog.push_back(a);
      }
      return run(prog);
    }
  }
  return false;
}

}  // namespace

ExpertRun expert_solve(const GridScene& scene, const AgentState& agent, const TaskSpec& task,
                       const RenderConfig& render) {
  ExpertState st{scene, agent, render, {}, {}, {}};
  st.render.class_flip = 0.0;
  st.render.depth_jitter = 0.0;
  ExpertRun out;
  bool ok = true;
  for (const Subgoal& sg : plan_from_task(task)) {
    if (!expert_subgoal(st, sg)) {
      ok = false;
      break;
    }
  }
  out.solved = ok && check_goal_conditions(st.scene, st.agent, task).all();
  out.actions = std::move(st.actions);
  return out;
}

// ----------------------------------------------------------------------------
// Episodes

double EpisodeResult::weight() const {
  if (expert_steps <= 0) return 0.0;
  return static_cast<double>(expert_steps) / std::max(expert_steps, agent_steps);
}

double EpisodeResult::goal_fraction() const {
  return conditions_total > 0 ? static_cast<double>(conditions_met) / conditions_total : 0.0;
}

namespace {

std::string failure_tag(SubgoalFailure f) {
  switch (f) {
    case SubgoalFailure::None: return "none";
    case SubgoalFailure::ObjectNotFound: return "object not found";
    case SubgoalFailure::Unreachable: return "navigation collision";
    case SubgoalFailure::InteractionFailure: return "interaction failure";
    case SubgoalFailure::BudgetExhausted: return "others";
  }
  return "others";
}

constexpr int kWarmUpSteps = 4;

void score(EpisodeResult& r, const GridScene& scene, const AgentState& agent) {
  const ConditionReport c = check_goal_conditions(scene, agent, r.task);
  r.conditions_met = c.satisfied();
  r.conditions_total = c.total();
  r.success = c.all();
  if (r.success) r.failure = "none";
}

std::uint64_t episode_seed(const RunConfig& cfg, const TaskSpec& task) {
  return Rng::derive(cfg.seed, *task.scene_seed);
}

}  // namespace

EpisodeResult run_episode(const TaskSpec& task, const RunConfig& cfg, AblationMode mode, const PolicyParams* policy,
                          int budget, const EpisodeHooks& hooks) {
  validate(task);
  if (mode.fine && (policy == nullptr || !policy->trained)) {
    throw std::invalid_argument("run_episode: fine control needs a trained policy");
  }
  GridScene scene = scene_for_task(task);
  AgentState agent = scene.agent_start;
  EpisodeResult r;
  r.task = task;
  r.mode = mode.name();
  r.expert_steps = kWarmUpSteps + static_cast<int>(expert_solve(scene, agent, task, cfg.agent.render).actions.size());

  const std::uint64_t seed = episode_seed(cfg, task);
  RunConfig c = cfg;
  c.agent.render.noise_seed = seed;
  std::unique_ptr<SceneMap> map;
  if (mode.differentiable) {
    map = std::make_unique<SceneRepresentation>(c.repr, Rng::derive(seed, 1));
  } else {
    map = std::make_unique<CellMap>(c.agent.map.M);
  }
  Agent a(scene, agent, c.agent, *map, policy, mode, seed);
  a.set_step_limit(budget < 0 ? c.agent.control.episode_budget : budget);
  a.trace = hooks.trace;
  if (hooks.render_dir) {
    std::filesystem::create_directories(*hooks.render_dir);
    a.on_step = [&](const Agent& ag) {
      std::ostringstream name;
      name << "step_" << std::setw(5) << std::setfill('0') << ag.steps() << ".ppm";
      std::ofstream out(*hooks.render_dir / name.str(), std::ios::binary);
      out << map_snapshot_ppm(ag.map(), ag.trajectory(), c.agent.map.M);
    };
  }

  try {
    a.warm_up();
    score(r, scene, agent);
    if (!r.success) {
      for (const Subgoal& sg : plan_from_task(task)) {
        SubgoalResult s = a.run_subgoal(sg, c.agent.control.subgoal_budget);
        r.subgoals.push_back(s);
        if (!s.success) {
          r.failure = failure_tag(s.failure);
          break;
        }
      }
    }
  } catch (const BudgetExhausted&) {
    r.failure = "others";
  }
  r.agent_steps = a.steps();
  score(r, scene, agent);
  if (!r.success && r.failure == "none") r.failure = "others";
  return r;
}

EpisodeResult run_expert_episode(const TaskSpec& task, const RunConfig& cfg) {
  validate(task);
  GridScene scene = scene_for_task(task);
  AgentState agent = scene.agent_start;
  EpisodeResult r;
  r.task = task;
  r.mode = "expert";
  const ExpertRun ex = expert_solve(scene, agent, task, cfg.agent.render);
  r.expert_steps = kWarmUpSteps + static_cast<int>(ex.actions.size());
  int steps = 0;
  for (int i = 0; i < kWarmUpSteps; ++i, ++steps) step(scene, agent, Action::nav(A::RotateRight), cfg.agent.render);
  for (const Action& act : ex.actions) {
    if (steps >= cfg.agent.control.episode_budget) break;
    step(scene, agent, act, cfg.agent.render);
    ++steps;
  }
  r.agent_steps = steps;
  score(r, scene, agent);
  if (!r.success) r.failure = "others";
  return r;
}

Metrics metrics(const std::vector<EpisodeResult>& results) {
  if (results.empty()) throw EmptyResults("metrics: no episodes");
  Metrics m;
  m.episodes = static_cast<int>(results.size());
  for (const auto& r : results) {
    const double w = r.weight();
    m.sr += r.success ? 1.0 : 0.0;
    m.gc += r.goal_fraction();
    m.plwsr += r.success ? w : 0.0;
    m.plwgc += r.goal_fraction() * w;
  }
  const double n = static_cast<double>(m.episodes);
  m.sr /= n;
  m.gc /= n;
  m.plwsr /= n;
  m.plwgc /= n;
  return m;
}

// ----------------------------------------------------------------------------
// Suites

namespace {

using C = ObjectClass;

template <typename T>
T pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.index(static_cast<int>(v.size())))];
}

TaskSpec sample_task(TaskType type, Rng& rng) {
  const std::vector<C> surfaces{C::DiningTable, C::CounterTop, C::Fridge,      C::Microwave, C::SinkBasin,
                                C::Drawer,      C::Cabinet,    C::StoveBurner, C::GarbageCan};
  auto except = [&](C c) {
    std::vector<C> v = surfaces;
    std::erase(v, c);
    return v;
  };
  TaskSpec t;
  t.type = type;
  switch (type) {
    case TaskType::LookExamine:
      t.object = pick(rng, std::vector<C>{C::Apple, C::Egg, C::Lettuce, C::Tomato, C::Bread, C::Mug, C::Bowl, C::Pot,
                                          C::Knife, C::Book});
      break;
    case TaskType::PickPlace:
      t.object = pick(rng, std::vector<C>{C::Apple, C::Egg, C::Lettuce, C::Tomato, C::Bread, C::Mug, C::Bowl, C::Pot,
                                          C::Book});
      t.receptacle = pick(rng, surfaces);
      break;
    case TaskType::PlaceTwo:
      t.object = pick(rng, std::vector<C>{C::Apple, C::Egg, C::Lettuce, C::Tomato, C::Bread, C::Mug, C::Book});
      t.receptacle = pick(rng, except(C::CounterTop));  // one instance, so both items meet
      break;
    case TaskType::Stack:
      t.movable_receptacle = pick(rng, std::vector<C>{C::Pot, C::Bowl, C::Mug});
      t.object = pick(rng, std::vector<C>{C::Apple, C::Egg, C::Lettuce, C::Tomato, C::Bread});
      t.receptacle = pick(rng, std::vector<C>{C::DiningTable, C::CounterTop, C::StoveBurner, C::Fridge, C::Cabinet});
      break;
    case TaskType::HeatPlace:
      t.object = pick(rng, std::vector<C>{C::Apple, C::Egg, C::Tomato, C::Bread, C::Mug, C::Bowl});
      t.receptacle = pick(rng, except(C::Microwave));
      break;
    case TaskType::CoolPlace:
      t.object = pick(rng, std::vector<C>{C::Apple, C::Egg, C::Lettuce, C::Tomato, C::Bread, C::Mug, C::Bowl, C::Pot});
      t.receptacle = pick(rng, except(C::Fridge));
      break;
    case TaskType::CleanPlace:
      t.object = pick(rng, std::vector<C>{C::Apple, C::Lettuce, C::Tomato, C::Mug, C::Bowl, C::Pot, C::Knife});
      t.receptacle = pick(rng, except(C::SinkBasin));
      break;
  }
  const double slice_rate = type == TaskType::LookExamine || type == TaskType::Stack ? 0.0 : 0.25;
  t.slice = has(class_info(t.object).affordances, Affordance::Sliceable) && rng.uniform() < slice_rate;
  return t;
}

}  // namespace

std::vector<TaskSpec> build_suite(int n, std::uint64_t seed, const RunConfig& cfg) {
  std::vector<TaskSpec> out(static_cast<std::size_t>(std::max(n, 0)));
  parallel_for(n, [&](int i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng(Rng::derive(Rng::derive(seed, static_cast<std::uint64_t>(i)), attempt));
      TaskSpec t = sample_task(static_cast<TaskType>(i % kNumTaskTypes), rng);
      t.scene_seed = rng.next() >> 16;
      const GridScene scene = scene_for_task(t);
      if (check_goal_conditions(scene, scene.agent_start, t).all()) continue;
      if (!expert_solve(scene, scene.agent_start, t, cfg.agent.render).solved) continue;
      out[static_cast<std::size_t>(i)] = t;
      return;
    }
  });
  return out;
}

bool needs_openable(const TaskSpec& task) {
  for (const Subgoal& sg : plan_from_task(task)) {
    if (sg.verb == SubgoalVerb::Put && sg.noun.cls && has(class_info(*sg.noun.cls).affordances, Affordance::Openable)) {
      return true;
    }
  }
  return false;
}

std::vector<EpisodeResult> run_suite(const std::vector<TaskSpec>& tasks, const RunConfig& cfg, const AblationArm& arm,
                                     const PolicyParams* policy, const std::optional<std::filesystem::path>& render_dir) {
  RunConfig c = cfg;
  c.agent.render.class_flip = arm.class_flip;
  std::vector<EpisodeResult> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int i) {
    const TaskSpec& t = tasks[static_cast<std::size_t>(i)];
    EpisodeResult r;
    if (arm.expert) {
      r = run_expert_episode(t, c);
    } else {
      EpisodeHooks hooks;
      if (render_dir) hooks.render_dir = *render_dir / ("episode_" + std::to_string(i));
      r = run_episode(t, c, arm.mode, arm.mode.fine ? policy : nullptr, -1, hooks);
    }
    r.mode = arm.label;
    out[static_cast<std::size_t>(i)] = std::move(r);
  });
  return out;
}

std::vector<ArmReport> run_ablation_matrix(const std::vector<TaskSpec>& tasks, const RunConfig& cfg,
                                           const std::vector<AblationArm>& arms, const PolicyParams* policy) {
  std::vector<ArmReport> out;
  for (const AblationArm& arm : arms) {
    ArmReport r{arm, run_suite(tasks, cfg, arm, policy), {}};
    r.m = metrics(r.results);
    out.push_back(std::move(r));
  }
  return out;
}

// ----------------------------------------------------------------------------
// Reports

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

json metrics_json(const Metrics& m) {
  return json{{"SR", m.sr}, {"GC", m.gc}, {"PLWSR", m.plwsr}, {"PLWGC", m.plwgc}, {"episodes", m.episodes}};
}

}  // namespace

std::string results_csv(const std::vector<ArmReport>& arms) {
  std::ostringstream out;
  out << "mode,episode,type,object,receptacle,movable_receptacle,slice,scene_seed,success,conditions_met,"
         "conditions_total,agent_steps,expert_steps,weight,subgoals_done,failure\n";
  for (const ArmReport& a : arms) {
    for (std::size_t i = 0; i < a.results.size(); ++i) {
      const EpisodeResult& r = a.results[i];
      const TaskSpec& t = r.task;
      const auto done = std::count_if(r.subgoals.begin(), r.subgoals.end(), [](const SubgoalResult& s) { return s.success; });
      out << a.arm.label << ',' << i << ',' << task_type_name(t.type) << ',' << class_name(t.object) << ','
          << (t.receptacle ? class_name(*t.receptacle) : "") << ','
          << (t.movable_receptacle ? class_name(*t.movable_receptacle) : "") << ',' << (t.slice ? 1 : 0) << ','
          << t.scene_seed.value_or(0) << ',' << (r.success ? 1 : 0) << ',' << r.conditions_met << ','
          << r.conditions_total << ',' << r.agent_steps << ',' << r.expert_steps << ',' << fmt(r.weight()) << ','
          << done << ',' << r.failure << '\n';
    }
  }
  return out.str();
}

std::string report_json(const std::vector<ArmReport>& arms, const RunConfig& cfg) {
  json modes = json::array();
  for (const ArmReport& a : arms) {
    json fails = json::object();
    for (const auto& r : a.results) {
      if (!r.success) fails[r.failure] = fails.value(r.failure, 0) + 1;
    }
    json entry{{"label", a.arm.label},
               {"mode", a.arm.expert ? std::string("expert") : a.arm.mode.name()},
               {"class_flip", a.arm.class_flip},
               {"metrics", metrics_json(a.m)},
               {"failures", fails}};
    if (!arms.empty() && &a != &arms.front()) {
      const Metrics& b = arms.front().m;
      entry["delta_vs_" + arms.front().arm.label] = json{
          {"SR", a.m.sr - b.sr}, {"GC", a.m.gc - b.gc}, {"PLWSR", a.m.plwsr - b.plwsr}, {"PLWGC", a.m.plwgc - b.plwgc}};
    }
    modes.push_back(std::move(entry));
  }
  return json{{"version", 1}, {"modes", modes}, {"config", config_to_json(cfg)}}.dump(2) + "\n";
}

std::string map_snapshot_ppm(const SceneMap& map, const std::vector<int>& trajectory, int M) {
  constexpr int kCols = 7;
  const int tiles = kNumObjectClasses + 1;  // objects, then navigable
  const int rows = (tiles + kCols - 1) / kCols;
  const int W = kCols * (M + 1) - 1, H = rows * (M + 1) - 1;
  std::string px(static_cast<std::size_t>(W * H * 3), '\0');
  auto put = [&](int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    const std::size_t i = static_cast<std::size_t>((y * W + x) * 3);
    px[i] = static_cast<char>(r);
    px[i + 1] = static_cast<char>(g);
    px[i + 2] = static_cast<char>(b);
  };
  for (int t = 0; t < tiles; ++t) {
    const int ox = (t % kCols) * (M + 1), oy = (t / kCols) * (M + 1);
    const Eigen::VectorXd p = map.query(t < kNumObjectClasses ? t : kNavigableClass);
    for (int g = 0; g < M * M; ++g) {
      const double v = std::clamp(p[g], 0.0, 1.0);
      const auto hot = static_cast<unsigned char>(255.0 * v);
      const auto warm = static_cast<unsigned char>(255.0 * v * v);
      put(ox + g % M, oy + g / M, hot, warm, static_cast<unsigned char>(64.0 * (1.0 - v)));
    }
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
      const int g = trajectory[k];
      const bool last = k + 1 == trajectory.size();
      put(ox + g % M, oy + g / M, last ? 255 : 0, 255, last ? 255 : 0);
    }
  }
  return "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n" + px;
}

}  // namespace disco
