#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "disco/imitation.hpp"
#include "disco/render.hpp"

using namespace disco;

namespace {

std::vector<GridScene> household_scenes(int n, unsigned long long base = 500) {
  std::vector<GridScene> out;
  for (int i = 0; i < n; ++i) out.push_back(generate_scene(SceneGenConfig::household(), base + static_cast<unsigned long long>(i)));
  return out;
}

// Single table with one apple in an open 8x8 room.
GridScene apple_room() {
  GridScene s(8, 8, 1);
  s.set_kind({4, 6}, CellKind::ReceptacleSurface);
  const ObjectId table = s.add_object(ObjectClass::DiningTable, Cell{4, 6});
  s.add_object(ObjectClass::Apple, InContainer{table});
  s.agent_start = AgentState{{1, 1}, 0, kInitialHorizon, std::nullopt};
  return s;
}

struct Labeled {
  GridScene staged;
  InteractionSpec spec;
  PoseGraph graph;
  std::vector<ExpertLabel> labels;
};

Labeled label_object(const GridScene& scene, ObjectId id, const std::vector<EgoFrame>& frames, const PoseGraph& g) {
  const auto spec = canonical_interaction(scene, id);
  REQUIRE(spec);
  GridScene staged = staged_scene(scene, *spec);
  const auto inter = expert_interactable_states(staged, g, *spec, frames);
  return {staged, *spec, g, expert_label_short_horizon(g, inter)};
}

}  // namespace

TEST_CASE("expert: interactable set matches direct simulation") {
  const GridScene scene = apple_room();
  const PoseGraph g(scene);
  const auto frames = render_pose_frames(scene, g, RenderConfig{});
  const ObjectId apple = 1;
  const auto spec = canonical_interaction(scene, apple);
  REQUIRE(spec);
  CHECK(spec->action.type == ActionType::PickUp);
  const auto inter = expert_interactable_states(scene, g, *spec, frames);
  REQUIRE_FALSE(inter.empty());
  std::vector<char> in(static_cast<std::size_t>(g.size()), 0);
  for (int i : inter) {
    in[static_cast<std::size_t>(i)] = 1;
    CHECK(cell_distance(g.pose(i).cell, {4, 6}) <= kReachDistance + 1e-9);
  }
  // Every pose, checked by stepping a fresh copy of the world.
  int mismatches = 0;
  for (int i = 0; i < g.size(); ++i) {
    GridScene copy = scene;
    AgentState a = g.pose(i);
    const bool ok = step(copy, a, spec->action, RenderConfig{}).success;
    mismatches += ok != static_cast<bool>(in[static_cast<std::size_t>(i)]);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("expert: object shut in a closed receptacle has no interactable pose") {
  GridScene s = apple_room();
  s.set_kind({2, 6}, CellKind::ReceptacleSurface);
  const ObjectId fridge = s.add_object(ObjectClass::Fridge, Cell{2, 6});
  const ObjectId egg = s.add_object(ObjectClass::Egg, InContainer{fridge});
  const PoseGraph g(s);
  const auto frames = render_pose_frames(s, g, RenderConfig{});
  const auto spec = canonical_interaction(s, egg);
  REQUIRE(spec);
  const auto inter = expert_interactable_states(s, g, *spec, frames);
  CHECK(inter.empty());
  CHECK_THROWS_AS(expert_label_short_horizon(g, inter), NoInteractableState);
  CHECK(canonical_interaction(s, fridge)->action.type == ActionType::Open);
}

TEST_CASE("expert: labels at distance zero and one") {
  const GridScene scene = apple_room();
  const PoseGraph g(scene);
  const auto frames = render_pose_frames(scene, g, RenderConfig{});
  const Labeled l = label_object(scene, 1, frames, g);
  std::map<int, ExpertLabel> by_pose;
  for (const auto& e : l.labels) by_pose[e.pose] = e;
  // In front of the table, facing it, looking down at the surface.
  const int here = *g.index(AgentState{{4, 5}, 0, 45, std::nullopt});
  REQUIRE(by_pose.count(here));
  CHECK(by_pose[here].action == FineAction::Interact);
  CHECK(by_pose[here].steps == 0);
  // Facing along the table edge: stepping back brings its cell into the left
  // of the view, and MoveBack precedes RotateRight in the action order.
  const int side = *g.index(AgentState{{4, 5}, 270, 45, std::nullopt});
  CHECK(by_pose.at(side).steps == 1);
  CHECK(by_pose.at(side).action == FineAction::MoveBack);
  int one_step = 0;
  for (const auto& lab : l.labels) {
    if (lab.steps != 1) continue;
    const int next = g.successor(lab.pose, lab.action);
    REQUIRE(next >= 0);
    CHECK(by_pose.at(next).steps == 0);
    ++one_step;
  }
  CHECK(one_step > 0);
  for (const auto& lab : l.labels) CHECK(lab.steps <= 4);
}

TEST_CASE("expert: label rollouts succeed in exactly the labeled steps") {
  const auto scenes = household_scenes(3);
  long states = 0, failures = 0;
  for (const auto& scene : scenes) {
    const PoseGraph g(scene);
    const auto frames = render_pose_frames(scene, g, RenderConfig{});
    for (const auto& obj : scene.objects()) {
      const auto spec = canonical_interaction(scene, obj.id);
      if (!spec) continue;
      const GridScene staged = staged_scene(scene, *spec);
      const auto inter = expert_interactable_states(staged, g, *spec, frames);
      if (inter.empty()) continue;
      const auto labels = expert_label_short_horizon(g, inter);
      std::vector<int> action(static_cast<std::size_t>(g.size()), -1);
      for (const auto& l : labels) action[static_cast<std::size_t>(l.pose)] = static_cast<int>(l.action);
      std::map<int, bool> final_ok;
      for (const auto& l : labels) {
        ++states;
        AgentState a = g.pose(l.pose);
        a.held = spec->held;
        GridScene copy = staged;
        int steps = 0;
        bool ok = true;
        for (;;) {
          const int idx = *g.index(a);
          const int act = action[static_cast<std::size_t>(idx)];
          if (act < 0) {
            ok = false;
            break;
          }
          if (static_cast<FineAction>(act) == FineAction::Interact) break;
          ok = ok && step(copy, a, Action::nav(to_action_type(static_cast<FineAction>(act))), RenderConfig{}).success;
          if (!ok || ++steps > 4) {
            ok = false;
            break;
          }
        }
        if (ok) {
          const int end = *g.index(a);
          auto it = final_ok.find(end);
          if (it == final_ok.end()) {
            it = final_ok.emplace(end, check_interaction(copy, a, spec->action, RenderConfig{}).success).first;
          }
          ok = it->second && steps == l.steps;
        }
        failures += !ok;
      }
    }
  }
  CHECK(states > 1000);
  CHECK(failures == 0);
}

TEST_CASE("expert: labeled distance equals a forward search in the live world") {
  const auto scenes = household_scenes(2, 900);
  Rng rng(4);
  int checked = 0;
  for (const auto& scene : scenes) {
    const PoseGraph g(scene);
    const auto frames = render_pose_frames(scene, g, RenderConfig{});
    for (const auto& obj : scene.objects()) {
      const auto spec = canonical_interaction(scene, obj.id);
      if (!spec) continue;
      const GridScene staged = staged_scene(scene, *spec);
      const auto inter = expert_interactable_states(staged, g, *spec, frames);
      if (inter.empty()) continue;
      const auto labels = expert_label_short_horizon(g, inter);
      for (int k = 0; k < 8; ++k) {
        const auto& l = labels[static_cast<std::size_t>(rng.index(static_cast<int>(labels.size())))];
        AgentState a = g.pose(l.pose);
        a.held = spec->held;
        const auto path = expert_path(staged, a, spec->action, RenderConfig{});
        REQUIRE(path);
        CHECK(static_cast<int>(path->size()) == l.steps);
        if (l.steps > 0) CHECK(path->front() == l.action);
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("collect_dataset: one object, all labels kept") {
  const GridScene scene = apple_room();
  CollectConfig cfg;
  cfg.per_level = 0;
  cfg.heldout_mod = 0;
  const BCDataset d = collect_dataset({scene}, cfg);
  // The table (Put) and the apple (PickUp) both get labels.
  const PoseGraph g(scene);
  const auto frames = render_pose_frames(scene, g, RenderConfig{});
  std::size_t apple_labels = label_object(scene, 1, frames, g).labels.size();
  std::size_t apple_rows = 0;
  for (const auto& r : d.train) apple_rows += r.object == 1;
  CHECK(apple_rows == apple_labels);
  CHECK(d.labeled_states == static_cast<int>(d.train.size()));
  CHECK(d.heldout.empty());
}

TEST_CASE("collect_dataset: deterministic, split by scene") {
  const auto scenes = household_scenes(5);
  CollectConfig cfg;
  const BCDataset a = collect_dataset(scenes, cfg), b = collect_dataset(scenes, cfg);
  CHECK(dataset_csv(a) == dataset_csv(b));
  for (const auto& r : a.train) CHECK(r.scene % 5 != 4);
  for (const auto& r : a.heldout) CHECK(r.scene == 4);
  CHECK_FALSE(a.heldout.empty());
  for (const auto& r : a.train) CHECK(r.x.idx.back() < fine_feature_dim());
}

TEST_CASE("bc_gradients: analytic gradients match central differences") {
  Rng rng(12);
  const int dim = 10, hidden = 4;
  std::vector<BCSample> data;
  for (int i = 0; i < 12; ++i) {
    BCSample s;
    for (int j = 0; j < dim; ++j) {
      if (rng.uniform() < 0.4) {
        s.x.idx.push_back(j);
        s.x.val.push_back(rng.normal());
      }
    }
    s.cls = to_class(rng.index(3) + 10);
    s.action = static_cast<FineAction>(rng.index(kNumFineActions));
    data.push_back(s);
  }
  std::vector<std::size_t> batch(data.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  PolicyParams p = PolicyParams::init(dim, hidden, 3);
  for (auto& b : p.b)
    for (int k = 0; k < b.size(); ++k) b[k] = 0.3 * rng.normal();
  const BCGradients g = bc_gradients(p, data, batch);
  CHECK(g.loss == doctest::Approx(bc_loss(p, data)).epsilon(1e-12));
  const double eps = 1e-5;
  double worst = 0.0;
  auto compare = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& analytic) {
    Eigen::MatrixXd numeric(param.rows(), param.cols());
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double keep = param.data()[i];
      param.data()[i] = keep + eps;
      const double up = bc_loss(p, data);
      param.data()[i] = keep - eps;
      const double down = bc_loss(p, data);
      param.data()[i] = keep;
      numeric.data()[i] = (up - down) / (2 * eps);
    }
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
    worst = std::max(worst, (analytic - numeric).cwiseAbs().maxCoeff() / scale);
  };
  compare(p.W, g.dW);
  for (int c = 10; c < 13; ++c) {
    compare(p.A[static_cast<std::size_t>(c)], g.dA[static_cast<std::size_t>(c)]);
    Eigen::MatrixXd b = p.b[static_cast<std::size_t>(c)];
    // Route the bias through a matrix view.
    Eigen::MatrixXd analytic = g.db[static_cast<std::size_t>(c)];
    Eigen::MatrixXd numeric(b.rows(), 1);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double keep = p.b[static_cast<std::size_t>(c)][i];
      p.b[static_cast<std::size_t>(c)][i] = keep + eps;
      const double up = bc_loss(p, data);
      p.b[static_cast<std::size_t>(c)][i] = keep - eps;
      const double down = bc_loss(p, data);
      p.b[static_cast<std::size_t>(c)][i] = keep;
      numeric(i, 0) = (up - down) / (2 * eps);
    }
    worst = std::max(worst, (analytic - numeric).cwiseAbs().maxCoeff() / std::max(analytic.cwiseAbs().maxCoeff(), 1e-12));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("train_bc: single example is memorized, empty split rejected") {
  BCDataset d;
  BCSample s;
  s.x.idx = {0, 20, 40};
  s.x.val = {1.0, 1.0, 0.5};
  s.cls = ObjectClass::Mug;
  s.action = FineAction::LookDown;
  d.train.push_back(s);
  TrainConfig cfg;
  cfg.epochs = 20;
  const TrainReport r = train_bc(d, cfg);
  CHECK(fine_policy(s.x, s.cls, r.params) == FineAction::LookDown);
  CHECK(r.train_accuracy == 1.0);
  CHECK(r.warnings.size() == 1);
  CHECK_THROWS_AS(train_bc(BCDataset{}, cfg), DegenerateDataset);
}

TEST_CASE("train_bc: seeded runs are identical and the loss falls") {
  const BCDataset d = collect_dataset(household_scenes(5), CollectConfig{});
  TrainConfig cfg;
  cfg.epochs = 10;
  const TrainReport a = train_bc(d, cfg), b = train_bc(d, cfg);
  CHECK(policy_to_json(a.params) == policy_to_json(b.params));
  for (std::size_t e = 1; e < a.epoch_loss.size(); ++e) CHECK(a.epoch_loss[e] <= a.epoch_loss[e - 1]);
  CHECK(a.train_accuracy > 0.9);
  cfg.seed = 1;
  CHECK_FALSE(policy_to_json(train_bc(d, cfg).params) == policy_to_json(a.params));
}
