#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "disco/bench.hpp"

using namespace disco;

namespace {

EpisodeResult result(bool success, int met, int total, int expert, int agent) {
  EpisodeResult r;
  r.success = success;
  r.conditions_met = met;
  r.conditions_total = total;
  r.expert_steps = expert;
  r.agent_steps = agent;
  return r;
}

AblationMode no_fine() { return AblationMode::from_name("no-fine"); }

}  // namespace

TEST_CASE("metrics: hand-computed examples") {
  // Fast success at twice the expert length, and a failure shorter than the expert.
  const std::vector<EpisodeResult> rs{result(true, 2, 2, 10, 20), result(false, 1, 2, 10, 5)};
  CHECK(rs[0].weight() == doctest::Approx(0.5));
  CHECK(rs[1].weight() == doctest::Approx(1.0));
  const Metrics m = metrics(rs);
  CHECK(m.episodes == 2);
  CHECK(m.sr == doctest::Approx(0.5));
  CHECK(m.gc == doctest::Approx(0.75));
  CHECK(m.plwsr == doctest::Approx(0.25));
  CHECK(m.plwgc == doctest::Approx(0.5));
  CHECK(result(true, 1, 1, 0, 3).weight() == 0.0);
  CHECK(result(false, 0, 0, 5, 5).goal_fraction() == 0.0);
  CHECK_THROWS_AS(metrics({}), EmptyResults);
}

TEST_CASE("metrics: weighted rates never exceed the unweighted ones") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EpisodeResult> rs;
    const int n = 1 + rng.index(20);
    for (int i = 0; i < n; ++i) {
      const int total = 1 + rng.index(4);
      const int met = rng.index(total + 1);
      rs.push_back(result(met == total, met, total, 1 + rng.index(50), rng.index(200)));
    }
    const Metrics m = metrics(rs);
    CHECK(m.plwsr <= m.sr);
    CHECK(m.plwgc <= m.gc);
    CHECK(m.sr <= m.gc + 1e-12);
    CHECK(m.gc <= 1.0);
  }
}

TEST_CASE("config: defaults round trip, overlays, unknown keys") {
  const RunConfig base;
  CHECK(config_to_json(config_from_json(config_to_json(base))) == config_to_json(base));

  nlohmann::json j = {{"map", {{"M", 40}, {"loss", "linear"}}}, {"train", {{"epochs", 3}}}, {"seed", 9}};
  const RunConfig c = config_from_json(j);
  CHECK(c.agent.map.M == 40);
  CHECK(c.repr.M == 40);
  CHECK(c.repr.loss == ReprLoss::Linear);
  CHECK(c.train.epochs == 3);
  CHECK(c.seed == 9);
  CHECK(c.train.lr == base.train.lr);

  // A later overlay wins over an earlier one.
  const RunConfig d = config_from_json({{"train", {{"epochs", 5}}}}, c);
  CHECK(d.train.epochs == 5);
  CHECK(d.agent.map.M == 40);

  CHECK_THROWS_AS(config_from_json({{"mapp", {{"M", 3}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"map", {{"MM", 3}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"map", {{"M", "big"}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"map", {{"loss", "l2"}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), std::invalid_argument);
}

TEST_CASE("suite: types cycle, tasks are seeded, unsolved and expert-solvable") {
  const RunConfig cfg;
  const auto suite = build_suite(14, 5, cfg);
  REQUIRE(suite.size() == 14);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const TaskSpec& t = suite[i];
    CHECK(static_cast<int>(t.type) == static_cast<int>(i % kNumTaskTypes));
    REQUIRE(t.scene_seed.has_value());
    const GridScene scene = scene_for_task(t);
    CHECK_FALSE(check_goal_conditions(scene, scene.agent_start, t).all());
    CHECK(expert_solve(scene, scene.agent_start, t, cfg.agent.render).solved);
  }
  CHECK(build_suite(14, 5, cfg) == suite);
  CHECK(build_suite(14, 6, cfg) != suite);
}

TEST_CASE("expert episodes succeed with path weight one") {
  const RunConfig cfg;
  const auto suite = build_suite(7, 11, cfg);
  const auto rs = run_suite(suite, cfg, {"expert", {}, 0.0, true}, nullptr);
  for (const auto& r : rs) {
    CHECK(r.success);
    CHECK(r.agent_steps == r.expert_steps);
    CHECK(r.failure == "none");
  }
  const Metrics m = metrics(rs);
  CHECK(m.plwsr == m.sr);
  CHECK(m.plwgc == m.gc);
}

TEST_CASE("run_episode: budget, missing policy, task without a scene") {
  const RunConfig cfg;
  const auto suite = build_suite(3, 21, cfg);
  for (const TaskSpec& t : suite) {
    const EpisodeResult r = run_episode(t, cfg, no_fine(), nullptr, 0);
    const GridScene scene = scene_for_task(t);
    const ConditionReport initial = check_goal_conditions(scene, scene.agent_start, t);
    CHECK_FALSE(r.success);
    CHECK(r.agent_steps == 0);
    CHECK(r.failure == "others");
    CHECK(r.conditions_met == initial.satisfied());
    CHECK(r.conditions_total == initial.total());
  }
  CHECK_THROWS_AS(run_episode(suite[0], cfg, AblationMode{}, nullptr), std::invalid_argument);
  TaskSpec unseeded = suite[0];
  unseeded.scene_seed.reset();
  CHECK_THROWS_AS(run_episode(unseeded, cfg, no_fine(), nullptr), InvalidSpec);
}

TEST_CASE("run_episode: a task satisfied at the start ends after the warm-up") {
  const RunConfig cfg;
  bool tried = false;
  for (std::uint64_t seed = 1; seed < 40 && !tried; ++seed) {
    TaskSpec probe;
    probe.type = TaskType::PickPlace;
    probe.object = ObjectClass::Apple;
    probe.receptacle = ObjectClass::DiningTable;
    probe.scene_seed = seed;
    const GridScene scene = scene_for_task(probe);
    for (const ObjectInstance& o : scene.objects()) {
      const auto* in = std::get_if<InContainer>(&o.placement);
      if (in == nullptr || !has(o.affordances, Affordance::Pickupable)) continue;
      TaskSpec t = probe;
      t.object = o.cls;
      t.receptacle = scene.object(in->container).cls;
      try {
        validate(t);
      } catch (const InvalidSpec&) {
        continue;
      }
      if (!check_goal_conditions(scene, scene.agent_start, t).all()) continue;
      const EpisodeResult r = run_episode(t, cfg, no_fine(), nullptr);
      CHECK(r.success);
      CHECK(r.subgoals.empty());
      CHECK(r.agent_steps == 4);
      tried = true;
      break;
    }
  }
  CHECK(tried);
}

TEST_CASE("reports: same seed gives byte-identical CSV and JSON") {
  const RunConfig cfg;
  const auto suite = build_suite(4, 2, cfg);
  const std::vector<AblationArm> arms{{"no-fine", no_fine(), 0.0, false}, {"expert", {}, 0.0, true}};
  const auto a = run_ablation_matrix(suite, cfg, arms, nullptr);
  const auto b = run_ablation_matrix(suite, cfg, arms, nullptr);
  CHECK(results_csv(a) == results_csv(b));
  CHECK(report_json(a, cfg) == report_json(b, cfg));

  const std::string csv = results_csv(a);
  CHECK(csv.rfind("mode,episode,type,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 4);

  const auto rep = nlohmann::json::parse(report_json(a, cfg));
  CHECK(rep["version"] == 1);
  REQUIRE(rep["modes"].size() == 2);
  CHECK_FALSE(rep["modes"][0].contains("delta_vs_no-fine"));
  CHECK(rep["modes"][1]["delta_vs_no-fine"]["SR"].get<double>() ==
        doctest::Approx(a[1].m.sr - a[0].m.sr));
  for (const auto& m : rep["modes"]) {
    CHECK(m["metrics"]["PLWSR"].get<double>() <= m["metrics"]["SR"].get<double>());
    CHECK(m["metrics"]["PLWGC"].get<double>() <= m["metrics"]["GC"].get<double>());
  }
  CHECK(rep["config"] == config_to_json(cfg));
}

TEST_CASE("map snapshot: PPM layout and trajectory colours") {
  const int M = 8;
  CellMap map(M);
  const std::string ppm = map_snapshot_ppm(map, {0, 9, 18}, M);
  const int W = 7 * (M + 1) - 1, H = 3 * (M + 1) - 1;
  const std::string header = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  REQUIRE(ppm.rfind(header, 0) == 0);
  CHECK(ppm.size() == header.size() + static_cast<std::size_t>(W * H * 3));
  auto pixel = [&](int x, int y) {
    const std::size_t i = header.size() + static_cast<std::size_t>((y * W + x) * 3);
    return std::array<int, 3>{static_cast<unsigned char>(ppm[i]), static_cast<unsigned char>(ppm[i + 1]),
                              static_cast<unsigned char>(ppm[i + 2])};
  };
  CHECK(pixel(0, 0) == std::array<int, 3>{0, 255, 0});
  CHECK(pixel(1, 1) == std::array<int, 3>{0, 255, 0});
  CHECK(pixel(2, 2) == std::array<int, 3>{255, 255, 255});
  // The same trajectory is drawn on the next tile.
  CHECK(pixel(M + 1 + 2, 2) == std::array<int, 3>{255, 255, 255});
}
