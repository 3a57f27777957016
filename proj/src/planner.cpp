#include "disco/planner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace disco {

using nlohmann::json;

std::vector<Subgoal> plan_from_task(const TaskSpec& task) {
  validate(task);
  using V = SubgoalVerb;
  const Noun obj = Noun::of(task.object);
  auto sg = [](V v, Noun n) { return Subgoal{v, n}; };

  std::vector<Subgoal> plan;
  if (task.slice) {
    plan = {sg(V::PickUp, Noun::of(ObjectClass::Knife)), sg(V::Slice, obj), sg(V::Put, Noun::any_surface())};
  }
  auto add = [&](std::initializer_list<Subgoal> s) { plan.insert(plan.end(), s); };
  switch (task.type) {
    case TaskType::LookExamine: add({sg(V::PickUp, obj), sg(V::Toggle, Noun::of(ObjectClass::Lamp))}); break;
    case TaskType::PickPlace: add({sg(V::PickUp, obj), sg(V::Put, Noun::of(*task.receptacle))}); break;
    case TaskType::PlaceTwo: {
      const Noun rec = Noun::of(*task.receptacle);
      add({sg(V::PickUp, obj), sg(V::GotoLocation, obj), sg(V::Put, rec), sg(V::PickUp, obj), sg(V::Put, rec)});
      break;
    }
    case TaskType::Stack: {
      const Noun mov = Noun::of(*task.movable_receptacle);
      add({sg(V::PickUp, obj), sg(V::Put, mov), sg(V::PickUp, mov), sg(V::Put, Noun::of(*task.receptacle))});
      break;
    }
    case TaskType::HeatPlace:
      add({sg(V::PickUp, obj), sg(V::Heat, Noun::of(ObjectClass::Microwave)), sg(V::Put, Noun::of(*task.receptacle))});
      break;
    case TaskType::CoolPlace:
      add({sg(V::PickUp, obj), sg(V::Cool, Noun::of(ObjectClass::Fridge)), sg(V::Put, Noun::of(*task.receptacle))});
      break;
    case TaskType::CleanPlace:
      add({sg(V::PickUp, obj), sg(V::Clean, Noun::of(ObjectClass::SinkBasin)), sg(V::Put, Noun::of(*task.receptacle))});
      break;
  }
  return plan;
}

namespace {

std::string where(std::size_t i, const std::string& field) {
  return "tasks[" + std::to_string(i) + "]." + field;
}

ObjectClass parse_class(const json& v, std::size_t i, const std::string& field) {
  if (!v.is_string()) throw ParseError(where(i, field) + ": expected a class name string");
  const auto c = class_from_name(v.get<std::string>());
  if (!c) throw ParseError(where(i, field) + ": unknown class '" + v.get<std::string>() + "'");
  return *c;
}

TaskSpec parse_task(const json& t, std::size_t i) {
  if (!t.is_object()) throw ParseError("tasks[" + std::to_string(i) + "]: expected an object");
  static const char* const kFields[] = {"type", "object", "receptacle", "movable_receptacle", "slice", "scene_seed"};
  for (const auto& [key, _] : t.items()) {
    if (std::find(std::begin(kFields), std::end(kFields), key) == std::end(kFields)) {
      throw ParseError(where(i, key) + ": unknown field");
    }
  }
  TaskSpec s;
  if (!t.contains("type") || !t["type"].is_string()) throw ParseError(where(i, "type") + ": missing or not a string");
  const auto type = task_type_from_name(t["type"].get<std::string>());
  if (!type) throw ParseError(where(i, "type") + ": unknown task type '" + t["type"].get<std::string>() + "'");
  s.type = *type;
  if (!t.contains("object")) throw ParseError(where(i, "object") + ": missing");
  s.object = parse_class(t["object"], i, "object");
  if (t.contains("receptacle") && !t["receptacle"].is_null()) s.receptacle = parse_class(t["receptacle"], i, "receptacle");
  if (t.contains("movable_receptacle") && !t["movable_receptacle"].is_null()) {
    s.movable_receptacle = parse_class(t["movable_receptacle"], i, "movable_receptacle");
  }
  if (t.contains("slice")) {
    if (!t["slice"].is_boolean()) throw ParseError(where(i, "slice") + ": expected a boolean");
    s.slice = t["slice"].get<bool>();
  }
  if (t.contains("scene_seed") && !t["scene_seed"].is_null()) {
    if (!t["scene_seed"].is_number_unsigned()) throw ParseError(where(i, "scene_seed") + ": expected an unsigned integer");
    s.scene_seed = t["scene_seed"].get<unsigned long long>();
  }
  try {
    validate(s);
  } catch (const InvalidSpec& e) {
    throw ParseError("tasks[" + std::to_string(i) + "]: " + e.what());
  }
  return s;
}

}  // namespace

std::vector<TaskSpec> parse_tasks(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line number for the diagnostic.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("top level: expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "version" && key != "tasks") throw ParseError(key + ": unknown field");
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer()) throw ParseError("version: missing or not an integer");
  if (doc["version"].get<int>() != kTaskFileVersion) {
    throw ParseError("version: unsupported value " + doc["version"].dump());
  }
  if (!doc.contains("tasks") || !doc["tasks"].is_array()) throw ParseError("tasks: missing or not an array");
  std::vector<TaskSpec> out;
  for (std::size_t i = 0; i < doc["tasks"].size(); ++i) out.push_back(parse_task(doc["tasks"][i], i));
  return out;
}

std::vector<TaskSpec> parse_task_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_tasks(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string tasks_to_json(const std::vector<TaskSpec>& tasks) {
  json arr = json::array();
  for (const TaskSpec& t : tasks) {
    json j;
    j["type"] = std::string(task_type_name(t.type));
    j["object"] = std::string(class_name(t.object));
    if (t.receptacle) j["receptacle"] = std::string(class_name(*t.receptacle));
    if (t.movable_receptacle) j["movable_receptacle"] = std::string(class_name(*t.movable_receptacle));
    j["slice"] = t.slice;
    if (t.scene_seed) j["scene_seed"] = *t.scene_seed;
    arr.push_back(std::move(j));
  }
  return json{{"version", kTaskFileVersion}, {"tasks", arr}}.dump(2) + "\n";
}

}  // namespace disco
