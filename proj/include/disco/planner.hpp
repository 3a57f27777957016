#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "disco/task.hpp"

namespace disco {

// Subgoals for a task: the type's template, preceded by the slice prefix when
// the object must be sliced. Throws InvalidSpec.
std::vector<Subgoal> plan_from_task(const TaskSpec& task);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kTaskFileVersion = 1;

// {"version": 1, "tasks": [{"type", "object", "receptacle", "movable_receptacle", "slice", "scene_seed"}]}
// Unknown fields are rejected. Tasks keep file order.
std::vector<TaskSpec> parse_tasks(std::string_view text);
std::vector<TaskSpec> parse_task_file(const std::filesystem::path& path);
std::string tasks_to_json(const std::vector<TaskSpec>& tasks);

}  // namespace disco
