#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "disco/planner.hpp"

using namespace disco;

namespace {

using V = SubgoalVerb;
using C = ObjectClass;

Subgoal sg(V v, C c) { return {v, Noun::of(c)}; }

TaskSpec task(TaskType t, C obj, std::optional<C> rec = std::nullopt, std::optional<C> mov = std::nullopt,
              bool slice = false) {
  TaskSpec s;
  s.type = t;
  s.object = obj;
  s.receptacle = rec;
  s.movable_receptacle = mov;
  s.slice = slice;
  return s;
}

std::string names(const std::vector<Subgoal>& plan) {
  std::string out;
  for (const auto& s : plan) out += to_string(s);
  return out;
}

// Every valid task over the roster, one slice flag at a time.
std::vector<TaskSpec> all_tasks() {
  std::vector<TaskSpec> out;
  for (int t = 0; t < kNumTaskTypes; ++t) {
    for (int o = 0; o < kNumObjectClasses; ++o) {
      for (int r = -1; r < kNumObjectClasses; ++r) {
        for (int m = -1; m < kNumObjectClasses; ++m) {
          for (bool slice : {false, true}) {
            TaskSpec s = task(static_cast<TaskType>(t), static_cast<C>(o),
                              r < 0 ? std::nullopt : std::optional<C>(static_cast<C>(r)),
                              m < 0 ? std::nullopt : std::optional<C>(static_cast<C>(m)), slice);
            try {
              validate(s);
              out.push_back(s);
            } catch (const InvalidSpec&) {
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("plan_from_task: one golden plan per task type") {
  CHECK(plan_from_task(task(TaskType::LookExamine, C::Book)) ==
        std::vector<Subgoal>{sg(V::PickUp, C::Book), sg(V::Toggle, C::Lamp)});
  CHECK(plan_from_task(task(TaskType::PickPlace, C::Apple, C::Drawer)) ==
        std::vector<Subgoal>{sg(V::PickUp, C::Apple), sg(V::Put, C::Drawer)});
  CHECK(plan_from_task(task(TaskType::PlaceTwo, C::Apple, C::GarbageCan)) ==
        std::vector<Subgoal>{sg(V::PickUp, C::Apple), sg(V::GotoLocation, C::Apple), sg(V::Put, C::GarbageCan),
                             sg(V::PickUp, C::Apple), sg(V::Put, C::GarbageCan)});
  CHECK(plan_from_task(task(TaskType::Stack, C::Tomato, C::StoveBurner, C::Pot)) ==
        std::vector<Subgoal>{sg(V::PickUp, C::Tomato), sg(V::Put, C::Pot), sg(V::PickUp, C::Pot),
                             sg(V::Put, C::StoveBurner)});
  CHECK(plan_from_task(task(TaskType::HeatPlace, C::Egg, C::DiningTable)) ==
        std::vector<Subgoal>{sg(V::PickUp, C::Egg), sg(V::Heat, C::Microwave), sg(V::Put, C::DiningTable)});
  CHECK(plan_from_task(task(TaskType::CoolPlace, C::Mug, C::CounterTop)) ==
        std::vector<Subgoal>{sg(V::PickUp, C::Mug), sg(V::Cool, C::Fridge), sg(V::Put, C::CounterTop)});
  CHECK(names(plan_from_task(task(TaskType::CleanPlace, C::Lettuce, C::DiningTable))) ==
        "(PickUp, Lettuce)(Clean, SinkBasin)(Put, DiningTable)");
}

TEST_CASE("plan_from_task: slice prefix comes strictly first") {
  const auto plan = plan_from_task(task(TaskType::HeatPlace, C::Bread, C::CounterTop, std::nullopt, true));
  CHECK(names(plan) ==
        "(PickUp, Knife)(Slice, Bread)(Put, AnySurface)(PickUp, Bread)(Heat, Microwave)(Put, CounterTop)");
}

TEST_CASE("plan_from_task: properties over every valid task") {
  const auto tasks = all_tasks();
  REQUIRE(tasks.size() > 500);
  for (const TaskSpec& t : tasks) {
    const auto plan = plan_from_task(t);
    REQUIRE(!plan.empty());
    if (t.slice) {
      TaskSpec plain = t;
      plain.slice = false;
      std::vector<Subgoal> expect{sg(V::PickUp, C::Knife), sg(V::Slice, t.object), {V::Put, Noun::any_surface()}};
      const auto rest = plan_from_task(plain);
      expect.insert(expect.end(), rest.begin(), rest.end());
      CHECK(plan == expect);
    }
    const auto count = [&](V v) { return std::count_if(plan.begin(), plan.end(), [&](const Subgoal& s) { return s.verb == v; }); };
    const long slice_extra = t.slice ? 1 : 0;
    CHECK(count(V::GotoLocation) == (t.type == TaskType::PlaceTwo ? 1 : 0));
    if (t.type == TaskType::PlaceTwo) {
      CHECK(count(V::PickUp) == 2 + slice_extra);
      CHECK(count(V::Put) == 2 + slice_extra);
      // The GotoLocation precedes the first Put of the main template.
      const auto go = std::find_if(plan.begin(), plan.end(), [](const Subgoal& s) { return s.verb == V::GotoLocation; });
      const auto put = std::find_if(plan.begin() + 3 * slice_extra, plan.end(), [](const Subgoal& s) { return s.verb == V::Put; });
      CHECK(go < put);
    }
    // The object is picked up before anything is put, and nothing is put without something held.
    int held = 0;
    for (const auto& s : plan) {
      if (s.verb == V::PickUp) ++held;
      if (s.verb == V::Put) {
        CHECK(held > 0);
        --held;
      }
    }
  }
}

TEST_CASE("plan_from_task: invalid specs are rejected") {
  CHECK_THROWS_AS(plan_from_task(task(TaskType::PickPlace, C::Apple)), InvalidSpec);
  CHECK_THROWS_AS(plan_from_task(task(TaskType::Stack, C::Apple, C::DiningTable)), InvalidSpec);
  CHECK_THROWS_AS(plan_from_task(task(TaskType::PickPlace, C::Egg, C::Drawer, std::nullopt, true)), InvalidSpec);
  CHECK_THROWS_AS(plan_from_task(task(TaskType::PickPlace, C::Fridge, C::Drawer)), InvalidSpec);
  CHECK_THROWS_AS(plan_from_task(task(TaskType::PickPlace, C::Apple, C::Lamp)), InvalidSpec);
  CHECK_THROWS_AS(plan_from_task(task(TaskType::PickPlace, C::Apple, C::Drawer, C::Pot)), InvalidSpec);
}

TEST_CASE("task files: round trip, empty list, diagnostics") {
  CHECK(parse_tasks(R"({"version": 1, "tasks": []})").empty());

  const auto tasks = all_tasks();
  std::vector<TaskSpec> sample;
  for (std::size_t i = 0; i < tasks.size(); i += 37) sample.push_back(tasks[i]);
  sample.back().scene_seed = 12345678901234ULL;
  const std::string text = tasks_to_json(sample);
  CHECK(parse_tasks(text) == sample);
  CHECK(tasks_to_json(parse_tasks(text)) == text);

  auto message = [](std::string_view s) {
    try {
      parse_tasks(s);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"version": 1, "tasks": [{"type": "PickAndPlace", "object": "Apple", "receptacle": "Drawer"}]})")
            .find("tasks[0].type") != std::string::npos);
  CHECK(message(R"({"version": 1, "tasks": [{"type": "PickPlace", "object": "Aple", "receptacle": "Drawer"}]})")
            .find("tasks[0].object") != std::string::npos);
  CHECK(message(R"({"version": 1, "tasks": [{"type": "PickPlace", "object": "Apple", "receptacle": "Drawer", "colour": 1}]})")
            .find("tasks[0].colour") != std::string::npos);
  CHECK(message(R"({"version": 1, "tasks": [{"type": "PickPlace", "object": "Apple", "slice": "yes", "receptacle": "Drawer"}]})")
            .find("tasks[0].slice") != std::string::npos);
  CHECK(message(R"({"version": 2, "tasks": []})").find("version") != std::string::npos);
  CHECK(message(R"({"tasks": []})").find("version") != std::string::npos);
  CHECK(message(R"({"version": 1, "tasks": [], "extra": 0})").find("extra") != std::string::npos);
  CHECK(message("{\"version\": 1,\n\"tasks\": [\n{\"type\": }]}").find("line 3") != std::string::npos);
  CHECK(message(R"({"version": 1, "tasks": [{"type": "PickPlace", "object": "Apple"}]})").find("receptacle") !=
        std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "disco_test_planner";
  std::filesystem::create_directories(dir);
  const auto path = dir / "tasks.json";
  std::ofstream(path) << text;
  CHECK(parse_task_file(path) == sample);
  CHECK_THROWS_AS(parse_task_file(dir / "missing.json"), ParseError);
  std::filesystem::remove_all(dir);
}
