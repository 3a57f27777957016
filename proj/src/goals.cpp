#include <algorithm>
#include <functional>

#include "disco/world.hpp"

namespace disco {

int ConditionReport::satisfied() const {
  return static_cast<int>(std::count_if(conditions.begin(), conditions.end(),
                                        [](const auto& c) { return c.second; }));
}

namespace {

std::optional<ObjectId> container_of(const GridScene& scene, ObjectId id) {
  if (const auto* in = std::get_if<InContainer>(&scene.object(id).placement)) return in->container;
  return std::nullopt;
}

bool directly_in_class(const GridScene& scene, ObjectId id, ObjectClass receptacle) {
  const auto c = container_of(scene, id);
  return c && scene.object(*c).cls == receptacle;
}

}  // namespace

ConditionReport check_goal_conditions(const GridScene& scene, const AgentState& agent,
                                      const TaskSpec& task) {
  try {
    validate(task);
  } catch (const InvalidSpec& e) {
    throw UnknownTask(e.what());
  }

  ConditionReport report;
  const std::string obj_name(class_name(task.object));
  auto add = [&](std::string label, bool value) { report.conditions.emplace_back(std::move(label), value); };

  // An instance qualifies once it carries every state change the task asks for.
  std::function<bool(const ObjectInstance&)> qualifies = [&](const ObjectInstance& o) {
    if (o.cls != task.object) return false;
    if (task.slice && !o.state.is_sliced) return false;
    switch (task.type) {
      case TaskType::HeatPlace: return o.state.is_heated;
      case TaskType::CoolPlace: return o.state.is_cooled;
      case TaskType::CleanPlace: return o.state.is_cleaned;
      default: return true;
    }
  };
  const auto& objs = scene.objects();
  auto any = [&](auto pred) { return std::any_of(objs.begin(), objs.end(), pred); };

  if (task.slice) {
    add(obj_name + " sliced", any([&](const ObjectInstance& o) { return o.cls == task.object && o.state.is_sliced; }));
  }

  switch (task.type) {
    case TaskType::LookExamine:
      add("holding " + obj_name, agent.held && qualifies(scene.object(*agent.held)));
      add("lamp on", any([](const ObjectInstance& o) { return o.cls == ObjectClass::Lamp && o.state.is_toggled; }));
      break;
    case TaskType::PickPlace:
      add(obj_name + " in " + std::string(class_name(*task.receptacle)),
          any([&](const ObjectInstance& o) { return qualifies(o) && directly_in_class(scene, o.id, *task.receptacle); }));
      break;
    case TaskType::PlaceTwo: {
      const std::string rec(class_name(*task.receptacle));
      add(obj_name + " in " + rec,
          any([&](const ObjectInstance& o) { return qualifies(o) && directly_in_class(scene, o.id, *task.receptacle); }));
      bool two = false;
      for (const auto& r : objs) {
        if (r.cls != *task.receptacle) continue;
        int n = 0;
        for (ObjectId c : scene.contents(r.id)) n += qualifies(scene.object(c)) ? 1 : 0;
        two = two || n >= 2;
      }
      add("two " + obj_name + " in one " + rec, two);
      break;
    }
    case TaskType::Stack: {
      const std::string mov(class_name(*task.movable_receptacle));
      add(obj_name + " in " + mov,
          any([&](const ObjectInstance& o) { return qualifies(o) && directly_in_class(scene, o.id, *task.movable_receptacle); }));
      add(mov + " with " + obj_name + " in " + std::string(class_name(*task.receptacle)),
          any([&](const ObjectInstance& o) {
            if (!qualifies(o) || !directly_in_class(scene, o.id, *task.movable_receptacle)) return false;
            return directly_in_class(scene, *container_of(scene, o.id), *task.receptacle);
          }));
      break;
    }
    case TaskType::HeatPlace:
    case TaskType::CoolPlace:
    case TaskType::CleanPlace: {
      const char* state = task.type == TaskType::HeatPlace  ? "heated"
                          : task.type == TaskType::CoolPlace ? "cooled"
                                                             : "cleaned";
      add(obj_name + " " + state, any([&](const ObjectInstance& o) { return qualifies(o); }));
      add(std::string(state) + " " + obj_name + " in " + std::string(class_name(*task.receptacle)),
          any([&](const ObjectInstance& o) { return qualifies(o) && directly_in_class(scene, o.id, *task.receptacle); }));
      break;
    }
  }
  return report;
}

}  // namespace disco
