#include "disco/task.hpp"

#include <array>

namespace disco {
namespace {

constexpr std::array<std::string_view, kNumTaskTypes> kTaskNames{
    "LookExamine", "PickPlace", "PlaceTwo", "Stack", "HeatPlace", "CoolPlace", "CleanPlace"};

constexpr std::array<std::string_view, 8> kVerbNames{
    "GotoLocation", "PickUp", "Put", "Slice", "Toggle", "Heat", "Cool", "Clean"};

void require_receptacle(const std::optional<ObjectClass>& c, std::string_view what) {
  if (!c) throw InvalidSpec("missing argument: " + std::string(what));
  if (!has(class_info(*c).affordances, Affordance::Receptacle)) {
    throw InvalidSpec(std::string(what) + " '" + std::string(class_name(*c)) + "' is not a receptacle");
  }
}

}  // namespace

std::string_view task_type_name(TaskType t) { return kTaskNames[static_cast<std::size_t>(t)]; }

std::optional<TaskType> task_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == name) return static_cast<TaskType>(i);
  }
  return std::nullopt;
}

std::string_view verb_name(SubgoalVerb v) { return kVerbNames[static_cast<std::size_t>(v)]; }

std::string Noun::name() const { return cls ? std::string(class_name(*cls)) : std::string("AnySurface"); }

std::string to_string(const Subgoal& s) {
  return "(" + std::string(verb_name(s.verb)) + ", " + s.noun.name() + ")";
}

void validate(const TaskSpec& task) {
  const int t = static_cast<int>(task.type);
  if (t < 0 || t >= kNumTaskTypes) throw InvalidSpec("unknown task type");
  const ClassInfo& obj = class_info(task.object);
  if (!has(obj.affordances, Affordance::Pickupable)) {
    throw InvalidSpec("object '" + std::string(obj.name) + "' is not pickupable");
  }
  if (task.slice && !has(obj.affordances, Affordance::Sliceable)) {
    throw InvalidSpec("object '" + std::string(obj.name) + "' is not sliceable");
  }
  switch (task.type) {
    case TaskType::LookExamine: break;
    case TaskType::Stack:
      require_receptacle(task.movable_receptacle, "movable_receptacle");
      if (!has(class_info(*task.movable_receptacle).affordances, Affordance::Pickupable)) {
        throw InvalidSpec("movable_receptacle must be pickupable");
      }
      require_receptacle(task.receptacle, "receptacle");
      break;
    default: require_receptacle(task.receptacle, "receptacle"); break;
  }
  if (task.type != TaskType::Stack && task.movable_receptacle) {
    throw InvalidSpec("movable_receptacle is only valid for Stack tasks");
  }
}

}  // namespace disco
