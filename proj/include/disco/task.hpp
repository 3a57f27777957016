#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "disco/classes.hpp"

namespace disco {

enum class TaskType {
  LookExamine,
  PickPlace,
  PlaceTwo,
  Stack,
  HeatPlace,
  CoolPlace,
  CleanPlace,
};

inline constexpr int kNumTaskTypes = 7;

std::string_view task_type_name(TaskType t);
std::optional<TaskType> task_type_from_name(std::string_view name);

struct TaskSpec {
  TaskType type = TaskType::PickPlace;
  ObjectClass object = ObjectClass::Apple;
  std::optional<ObjectClass> receptacle;
  std::optional<ObjectClass> movable_receptacle;  // Stack only
  bool slice = false;
  std::optional<unsigned long long> scene_seed;  // optional binding to a generated scene

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

class InvalidSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws InvalidSpec when a required argument is missing or inconsistent.
void validate(const TaskSpec& task);

enum class SubgoalVerb {
  GotoLocation,
  PickUp,
  Put,
  Slice,
  Toggle,
  Heat,
  Cool,
  Clean,
};

std::string_view verb_name(SubgoalVerb v);

// A subgoal noun is an object class or the unbound "any surface" placeholder
// used by the slice prefix.
struct Noun {
  std::optional<ObjectClass> cls;  // nullopt means AnySurface

  static Noun of(ObjectClass c) { return Noun{c}; }
  static Noun any_surface() { return Noun{std::nullopt}; }
  bool is_any_surface() const { return !cls.has_value(); }
  std::string name() const;

  friend bool operator==(const Noun&, const Noun&) = default;
};

struct Subgoal {
  SubgoalVerb verb;
  Noun noun;

  friend bool operator==(const Subgoal&, const Subgoal&) = default;
};

std::string to_string(const Subgoal& s);

}  // namespace disco
