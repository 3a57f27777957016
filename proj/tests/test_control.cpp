#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <queue>
#include <tuple>

#include <json.hpp>

#include "disco/agent.hpp"
#include "disco/imitation.hpp"
#include "disco/render.hpp"

using namespace disco;

namespace {

// Uniform-cost search over (x, z, heading) with unit costs, using a priority
// queue rather than a FIFO frontier.
int dijkstra_cost(const NavMap& nav, const GridPose& start, const std::vector<int>& goals) {
  const int M = nav.M;
  std::vector<char> goal(static_cast<std::size_t>(M * M), 0);
  for (int g : goals) goal[static_cast<std::size_t>(g)] = 1;
  constexpr std::array<int, 4> dx{0, 1, 0, -1}, dz{1, 0, -1, 0};
  std::vector<int> dist(static_cast<std::size_t>(M * M * 4), INT32_MAX);
  using Item = std::tuple<int, int, int, int>;  // cost, x, z, heading
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const int h0 = start.yaw / 90;
  dist[static_cast<std::size_t>((start.gz * M + start.gx) * 4 + h0)] = 0;
  pq.emplace(0, start.gx, start.gz, h0);
  while (!pq.empty()) {
    const auto [d, x, z, h] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>((z * M + x) * 4 + h)]) continue;
    if (goal[static_cast<std::size_t>(z * M + x)]) return d;
    std::vector<std::tuple<int, int, int>> next{{x, z, (h + 1) % 4}, {x, z, (h + 3) % 4}};
    if (nav.navigable(x + dx[h], z + dz[h])) next.emplace_back(x + dx[h], z + dz[h], h);
    for (const auto& [nx, nz, nh] : next) {
      auto& slot = dist[static_cast<std::size_t>((nz * M + nx) * 4 + nh)];
      if (d + 1 < slot) {
        slot = d + 1;
        pq.emplace(d + 1, nx, nz, nh);
      }
    }
  }
  return -1;
}

// Executes a plan on the map; returns the final pose or nullopt on an illegal move.
std::optional<GridPose> simulate(const NavMap& nav, GridPose p, const std::vector<ActionType>& plan) {
  for (ActionType a : plan) {
    if (a == ActionType::RotateRight) p.yaw = (p.yaw + 90) % 360;
    else if (a == ActionType::RotateLeft) p.yaw = (p.yaw + 270) % 360;
    else {
      const int nx = p.gx + (p.yaw == 90 ? 1 : p.yaw == 270 ? -1 : 0);
      const int nz = p.gz + (p.yaw == 0 ? 1 : p.yaw == 180 ? -1 : 0);
      if (!nav.navigable(nx, nz)) return std::nullopt;
      p.gx = nx;
      p.gz = nz;
    }
  }
  return p;
}

NavMap open_map(int M) {
  NavMap nav;
  nav.M = M;
  nav.free.assign(static_cast<std::size_t>(M * M), 1);
  return nav;
}

struct Kitchen {
  GridScene scene;
  ObjectId microwave, table, fridge, sink, egg, knife, apple;
  AgentState agent;
};

Kitchen kitchen() {
  Kitchen k{GridScene(6, 6, 3), 0, 0, 0, 0, 0, 0, 0, {}};
  auto put_furniture = [&](ObjectClass c, Cell at) {
    k.scene.set_kind(at, CellKind::ReceptacleSurface);
    return k.scene.add_object(c, at);
  };
  k.microwave = put_furniture(ObjectClass::Microwave, {2, 5});
  k.table = put_furniture(ObjectClass::DiningTable, {0, 2});
  k.fridge = put_furniture(ObjectClass::Fridge, {4, 5});
  k.sink = put_furniture(ObjectClass::SinkBasin, {5, 2});
  k.egg = k.scene.add_object(ObjectClass::Egg, InContainer{k.table});
  k.knife = k.scene.add_object(ObjectClass::Knife, InContainer{k.table});
  k.apple = k.scene.add_object(ObjectClass::Apple, InContainer{k.table});
  k.agent = AgentState{{2, 3}, 0, 45, std::nullopt};
  return k;
}

void hold(Kitchen& k, ObjectId id) {
  k.scene.object(id).placement = Held{};
  k.agent.held = id;
}

// Counts updates on the way through to a real representation.
class CountingMap : public SceneMap {
 public:
  explicit CountingMap(SceneMap& inner) : inner_(inner) {}
  int grids() const override { return inner_.grids(); }
  int classes() const override { return inner_.classes(); }
  Eigen::VectorXd query(int j) const override { return inner_.query(j); }
  double query_at(int g, int j) const override { return inner_.query_at(g, j); }
  void update(const SoftLabels& l) override {
    ++updates;
    inner_.update(l);
  }
  void reset(std::uint64_t seed) override { inner_.reset(seed); }
  int updates = 0;

 private:
  SceneMap& inner_;
};

AblationMode without_fine() {
  AblationMode m;
  m.fine = false;
  return m;
}

}  // namespace

TEST_CASE("bfs_plan: trivial cases") {
  NavMap nav = open_map(10);
  CHECK(bfs_plan(nav, {3, 3, 0}, {33})->empty());
  const auto straight = bfs_plan(nav, {3, 3, 0}, {6 * 10 + 3});
  REQUIRE(straight);
  CHECK(*straight == std::vector<ActionType>(3, ActionType::MoveAhead));
  // Wall the goal off.
  for (int x = 0; x < 10; ++x) nav.free[static_cast<std::size_t>(7 * 10 + x)] = 0;
  CHECK_FALSE(bfs_plan(nav, {3, 3, 0}, {9 * 10 + 3}));
}

TEST_CASE("bfs_plan: cost equals a uniform-cost-search oracle on 200 random maps") {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  int reachable = 0, agree = 0;
  for (int t = 0; t < 200; ++t) {
    NavMap nav = open_map(20);
    for (auto& f : nav.free) f = rng.uniform() < 0.7 ? 1 : 0;
    std::vector<int> free;
    for (int g = 0; g < 400; ++g)
      if (nav.free[static_cast<std::size_t>(g)]) free.push_back(g);
    const int s = free[static_cast<std::size_t>(rng.index(static_cast<int>(free.size())))];
    const int target = free[static_cast<std::size_t>(rng.index(static_cast<int>(free.size())))];
    const GridPose start{s % 20, s / 20, 90 * rng.index(4)};
    const std::vector<int> goals = t % 2 ? std::vector<int>{target} : expand_destinations(target, 20, 1.0);
    const int oracle = dijkstra_cost(nav, start, goals);
    const auto plan = bfs_plan(nav, start, goals);
    if (oracle < 0) {
      agree += !plan;
      continue;
    }
    ++reachable;
    REQUIRE(plan);
    const auto end = simulate(nav, start, *plan);
    REQUIRE(end);
    CHECK(std::find(goals.begin(), goals.end(), end->gz * 20 + end->gx) != goals.end());
    agree += static_cast<int>(plan->size()) == oracle;
  }
  CHECK(agree == 200);
  CHECK(reachable > 100);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(10));
}

TEST_CASE("random_walk_target: forced choice, determinism and uniformity") {
  NavMap nav = open_map(6);
  std::fill(nav.free.begin(), nav.free.end(), 0);
  nav.free[7] = nav.free[20] = 1;
  Rng rng(1);
  CHECK(random_walk_target(nav, 7, rng).target_grid == 20);
  nav.free[20] = 0;
  CHECK_THROWS_AS(random_walk_target(nav, 7, rng), NoNavigableCell);

  NavMap ten = open_map(6);
  std::fill(ten.free.begin(), ten.free.end(), 0);
  for (int g = 0; g <= 10; ++g) ten.free[static_cast<std::size_t>(g * 3)] = 1;
  Rng a(9), b(9);
  for (int i = 0; i < 20; ++i) CHECK(random_walk_target(ten, 0, a).target_grid == random_walk_target(ten, 0, b).target_grid);

  std::map<int, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const CoarseTarget ct = random_walk_target(ten, 0, a);
    CHECK_FALSE(ct.target_grid == 0);
    ++counts[ct.target_grid];
  }
  CHECK(counts.size() == 10);
  for (const auto& [g, n] : counts) CHECK(std::abs(n - draws / 10) < draws / 10 * 0.05);
}

TEST_CASE("coarse_target: hand examples") {
  const int M = 8;
  const int agent = 3 * M + 3;
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(M * M, 0.5);
  const CoarseTarget fresh = coarse_target(half, half, agent, M, 1.0);
  CHECK(fresh.target_grid == agent);

  Eigen::VectorXd p_obj = Eigen::VectorXd::Zero(M * M), p_aff = Eigen::VectorXd::Zero(M * M);
  const int g1 = 1 * M + 1, g2 = 6 * M + 6;
  p_obj[g1] = 0.9;
  p_aff[g1] = 0.5;
  p_obj[g2] = 0.6;
  p_aff[g2] = 0.9;
  CHECK(coarse_target(p_obj, p_aff, agent, M, 1.0).target_grid == g2);

  Rng rng(3);
  for (int i = 0; i < M * M; ++i) p_obj[i] = 0.05 + 0.9 * rng.uniform();
  p_aff.setZero();
  p_aff[45] = 0.3;
  CHECK(coarse_target(p_obj, p_aff, agent, M, 1.0).target_grid == 45);

  // Without an affordance map the object map alone decides.
  CHECK(coarse_target(p_obj, Eigen::VectorXd(), agent, M, 1.0).target_grid ==
        static_cast<int>(std::max_element(p_obj.data(), p_obj.data() + p_obj.size()) - p_obj.data()));
}

TEST_CASE("coarse_target: destinations are within 1 m and include the target") {
  const int M = 12;
  for (int center : {0, 5, 66, 143}) {
    const auto d = expand_destinations(center, M, 1.0);
    REQUIRE_FALSE(d.empty());
    CHECK(std::is_sorted(d.begin(), d.end()));
    CHECK(std::find(d.begin(), d.end(), center) != d.end());
    for (int g : d) {
      const double dx = g % M - center % M, dz = g / M - center / M;
      CHECK(std::hypot(dx, dz) * kCellSize <= 1.0 + 1e-9);
    }
  }
  // Interior grid: every lattice point within radius 4 cells.
  CHECK(expand_destinations(6 * M + 6, M, 1.0).size() == 49);
}

TEST_CASE("face_target: quantized bearings") {
  const int M = 10;
  const GridPose p{5, 5, 0};
  CHECK(face_target(p, 8 * M + 5, M).empty());
  CHECK(face_target(p, 5 * M + 2, M) == std::vector<ActionType>{ActionType::RotateLeft});
  CHECK(face_target(p, 5 * M + 8, M) == std::vector<ActionType>{ActionType::RotateRight});
  CHECK(face_target(p, 2 * M + 5, M) == std::vector<ActionType>{ActionType::RotateRight, ActionType::RotateRight});
  CHECK(face_target({5, 5, 90}, 8 * M + 6, M) == std::vector<ActionType>{ActionType::RotateLeft});
  CHECK(face_target(p, 5 * M + 5, M).empty());
}

TEST_CASE("fine_features: geometry, visibility and determinism") {
  Kitchen k = kitchen();
  const RenderConfig rc;
  const MapConfig cfg;
  k.agent.cell = {2, 4};
  const PoseEstimate pose = initial_pose(k.agent);
  const int target = grid_of_cell(cfg, k.agent.cell, {2, 5});
  const EgoFrame frame = render_egocentric(k.scene, k.agent, rc);
  const NavMap nav = true_navmap(k.scene, cfg, k.agent.cell);
  const Features x = fine_features(frame, pose, cfg, target, ObjectClass::Microwave, nav);
  CHECK(x.get(feat::kBias) == 1.0);
  CHECK(x.get(feat::kRight) == 0.0);
  CHECK(x.get(feat::kForward) == doctest::Approx(1.0 / 8));
  CHECK(x.get(feat::kDistance) * 3.0 == doctest::Approx(0.25));
  CHECK(x.get(feat::kReach) == 1.0);
  CHECK(x.get(feat::kBlockedAhead) == 1.0);
  CHECK(x == fine_features(render_egocentric(k.scene, k.agent, rc), pose, cfg, target, ObjectClass::Microwave, nav));
  CHECK(std::is_sorted(x.idx.begin(), x.idx.end()));
  CHECK(x.idx.back() < fine_feature_dim());

  // Rotated frame: target to the left.
  k.agent.yaw = 90;
  const Features left = fine_features(render_egocentric(k.scene, k.agent, rc), initial_pose(k.agent), cfg, target,
                                      ObjectClass::Microwave, nav);
  CHECK(left.get(feat::kRight) == doctest::Approx(-1.0 / 8));
  CHECK(left.get(feat::kForward) == 0.0);

  k.agent.yaw = 180;
  const Features away = fine_features(render_egocentric(k.scene, k.agent, rc), initial_pose(k.agent), cfg, target,
                                      ObjectClass::Microwave, nav);
  CHECK(away.get(feat::kVisible) == 0.0);
  CHECK(away.get(feat::kRayFraction) == 0.0);
  CHECK(away.get(feat::kMinHit) == 1.0);
}

TEST_CASE("fine_policy: untrained parameters are rejected, ties go to the smaller index") {
  PolicyParams p = PolicyParams::init(fine_feature_dim(), 8, 1);
  Features x;
  x.idx = {0};
  x.val = {1.0};
  CHECK_THROWS_AS(fine_policy(x, ObjectClass::Apple, p), UntrainedPolicy);
  p.trained = true;
  p.W.setZero();
  for (auto& b : p.b) b.setZero();
  CHECK(fine_policy(x, ObjectClass::Apple, p) == FineAction::MoveAhead);
  p.b[to_index(ObjectClass::Apple)][8] = 1.0;
  CHECK(fine_policy(x, ObjectClass::Apple, p) == FineAction::Interact);
  CHECK(fine_policy(x, ObjectClass::Egg, p) == FineAction::MoveAhead);
  const PolicyParams q = policy_from_json(policy_to_json(p));
  CHECK(policy_to_json(q) == policy_to_json(p));
}

TEST_CASE("agent: one map update per executed step") {
  Kitchen k = kitchen();
  SceneRepresentation repr(ReprConfig{}, 1);
  CountingMap counting(repr);
  Agent agent(k.scene, k.agent, AgentConfig{}, counting, nullptr, without_fine(), 5);
  CHECK(counting.updates == 0);
  agent.warm_up();
  CHECK(agent.steps() == 4);
  CHECK(counting.updates == 4);
  agent.run_subgoal({SubgoalVerb::PickUp, Noun::of(ObjectClass::Apple)}, 200);
  CHECK(counting.updates == agent.steps());
  CHECK(agent.trajectory().size() == static_cast<std::size_t>(agent.steps()) + 1);
}

TEST_CASE("agent: heat macro leaves the egg heated and in hand") {
  Kitchen k = kitchen();
  hold(k, k.egg);
  SceneRepresentation repr(ReprConfig{}, 1);
  Agent agent(k.scene, k.agent, AgentConfig{}, repr, nullptr, without_fine(), 5);
  agent.warm_up();
  const SubgoalResult r = agent.run_subgoal({SubgoalVerb::Heat, Noun::of(ObjectClass::Microwave)}, 200);
  CHECK(r.success);
  CHECK(k.scene.object(k.egg).state.is_heated);
  CHECK(k.agent.held == k.egg);
  CHECK_FALSE(k.scene.object(k.microwave).state.is_open);
}

TEST_CASE("agent: put into a closed openable receptacle opens it first") {
  Kitchen k = kitchen();
  hold(k, k.egg);
  SceneRepresentation repr(ReprConfig{}, 1);
  std::vector<std::string> trace;
  Agent agent(k.scene, k.agent, AgentConfig{}, repr, nullptr, without_fine(), 5);
  agent.trace = &trace;
  agent.warm_up();
  const SubgoalResult r = agent.run_subgoal({SubgoalVerb::Put, Noun::of(ObjectClass::Microwave)}, 200);
  CHECK(r.success);
  CHECK(std::get<InContainer>(k.scene.object(k.egg).placement).container == k.microwave);
  std::vector<std::string> interactions;
  for (const auto& line : trace) {
    const auto j = nlohmann::json::parse(line);
    if (j["event"] == "step" && j["action"].get<std::string>().find('(') != std::string::npos) {
      interactions.push_back(j["action"]);
    }
  }
  const std::string mw = std::to_string(k.microwave);
  CHECK(interactions == std::vector<std::string>{"Open(" + mw + ")", "Put(" + mw + ")"});

  // Without the openable affordance the bare Put hits the closed door.
  Kitchen k2 = kitchen();
  hold(k2, k2.egg);
  SceneRepresentation repr2(ReprConfig{}, 1);
  AblationMode m = without_fine();
  m.interactive_affordance = false;
  Agent blind(k2.scene, k2.agent, AgentConfig{}, repr2, nullptr, m, 5);
  blind.warm_up();
  const SubgoalResult r2 = blind.run_subgoal({SubgoalVerb::Put, Noun::of(ObjectClass::Microwave)}, 200);
  CHECK_FALSE(r2.success);
  CHECK(r2.failure == SubgoalFailure::InteractionFailure);
  CHECK(k2.agent.held == k2.egg);
}

TEST_CASE("agent: put on a plain surface is a single action") {
  Kitchen k = kitchen();
  hold(k, k.egg);
  k.agent.cell = {1, 2};
  k.agent.yaw = 270;
  SceneRepresentation repr(ReprConfig{}, 1);
  std::vector<std::string> trace;
  Agent agent(k.scene, k.agent, AgentConfig{}, repr, nullptr, without_fine(), 5);
  agent.trace = &trace;
  agent.warm_up();
  CHECK(agent.run_subgoal({SubgoalVerb::Put, Noun::of(ObjectClass::DiningTable)}, 200).success);
  int interactions = 0;
  for (const auto& line : trace) {
    const auto j = nlohmann::json::parse(line);
    interactions += j["event"] == "step" && j["action"].get<std::string>().find('(') != std::string::npos;
  }
  CHECK(interactions == 1);
}

TEST_CASE("agent: walled-off target fails within budget") {
  GridScene scene(8, 8, 1);
  for (int x = 0; x < 8; ++x) scene.set_kind({x, 4}, CellKind::Wall);
  scene.set_kind({4, 6}, CellKind::ReceptacleSurface);
  const ObjectId table = scene.add_object(ObjectClass::DiningTable, Cell{4, 6});
  scene.add_object(ObjectClass::Apple, InContainer{table});
  AgentState a{{2, 1}, 0, 45, std::nullopt};
  SceneRepresentation repr(ReprConfig{}, 1);
  Agent agent(scene, a, AgentConfig{}, repr, nullptr, without_fine(), 3);
  agent.warm_up();
  const SubgoalResult r = agent.run_subgoal({SubgoalVerb::PickUp, Noun::of(ObjectClass::Apple)}, 150);
  CHECK_FALSE(r.success);
  CHECK(r.failure != SubgoalFailure::None);
  CHECK(r.steps <= 150);
  CHECK_FALSE(a.held);
}

TEST_CASE("agent: held-object verbs fail at once with an empty hand") {
  Kitchen k = kitchen();
  SceneRepresentation repr(ReprConfig{}, 1);
  Agent agent(k.scene, k.agent, AgentConfig{}, repr, nullptr, without_fine(), 5);
  const SubgoalResult r = agent.run_subgoal({SubgoalVerb::Put, Noun::of(ObjectClass::DiningTable)}, 100);
  CHECK_FALSE(r.success);
  CHECK(r.steps == 0);
}

TEST_CASE("agent: budget zero is a typed failure") {
  Kitchen k = kitchen();
  SceneRepresentation repr(ReprConfig{}, 1);
  Agent agent(k.scene, k.agent, AgentConfig{}, repr, nullptr, without_fine(), 5);
  const SubgoalResult r = agent.run_subgoal({SubgoalVerb::PickUp, Noun::of(ObjectClass::Apple)}, 0);
  CHECK(r.failure == SubgoalFailure::BudgetExhausted);
  CHECK(agent.steps() == 0);
}

TEST_CASE("ablation names round-trip") {
  for (const auto& n : AblationMode::names()) CHECK(AblationMode::from_name(n).name() == n);
  AblationMode m;
  m.coarse = false;
  m.fine = false;
  CHECK(AblationMode::from_name(m.name()) == m);
  CHECK_THROWS_AS(AblationMode::from_name("bogus"), std::invalid_argument);
}
