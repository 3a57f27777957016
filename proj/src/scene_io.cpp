#include <json.hpp>

#include "disco/world.hpp"

namespace disco {

using nlohmann::json;

namespace {

constexpr int kSceneVersion = 1;

char kind_char(CellKind k) {
  switch (k) {
    case CellKind::Floor: return '.';
    case CellKind::Wall: return '#';
    case CellKind::ReceptacleSurface: return 'R';
  }
  return '?';
}

CellKind kind_from_char(char c) {
  switch (c) {
    case '.': return CellKind::Floor;
    case '#': return CellKind::Wall;
    case 'R': return CellKind::ReceptacleSurface;
    default: throw ConfigError(std::string("unknown cell kind '") + c + "'");
  }
}

json agent_json(const AgentState& a) {
  json j = {{"x", a.cell.x}, {"z", a.cell.z}, {"yaw", a.yaw}, {"horizon", a.horizon}};
  j["held"] = a.held ? json(*a.held) : json(nullptr);
  return j;
}

}  // namespace

std::string scene_to_json(const GridScene& scene) {
  json j;
  j["version"] = kSceneVersion;
  j["width"] = scene.width();
  j["height"] = scene.height();
  j["seed"] = scene.seed();
  json rows = json::array();
  for (int z = 0; z < scene.height(); ++z) {
    std::string row;
    for (int x = 0; x < scene.width(); ++x) row.push_back(kind_char(scene.kind({x, z})));
    rows.push_back(row);
  }
  j["cells"] = rows;
  json objs = json::array();
  for (const auto& o : scene.objects()) {
    json jo;
    jo["id"] = o.id;
    jo["class"] = std::string(class_name(o.cls));
    if (const auto* c = std::get_if<Cell>(&o.placement)) {
      jo["placement"] = {{"cell", {c->x, c->z}}};
    } else if (const auto* in = std::get_if<InContainer>(&o.placement)) {
      jo["placement"] = {{"container", in->container}};
    } else {
      jo["placement"] = {{"held", true}};
    }
    jo["affordances"] = o.affordances;
    jo["state"] = {{"open", o.state.is_open},     {"toggled", o.state.is_toggled},
                   {"sliced", o.state.is_sliced}, {"heated", o.state.is_heated},
                   {"cooled", o.state.is_cooled}, {"cleaned", o.state.is_cleaned}};
    objs.push_back(jo);
  }
  j["objects"] = objs;
  j["agent_start"] = agent_json(scene.agent_start);
  return j.dump(1) + "\n";
}

GridScene scene_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scene parse error: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kSceneVersion) throw ConfigError("unsupported scene version");
    GridScene scene(j.at("width").get<int>(), j.at("height").get<int>(),
                    j.at("seed").get<unsigned long long>());
    const auto& rows = j.at("cells");
    if (static_cast<int>(rows.size()) != scene.height()) throw ConfigError("cell rows do not match height");
    for (int z = 0; z < scene.height(); ++z) {
      const auto row = rows[static_cast<std::size_t>(z)].get<std::string>();
      if (static_cast<int>(row.size()) != scene.width()) throw ConfigError("cell row does not match width");
      for (int x = 0; x < scene.width(); ++x) scene.set_kind({x, z}, kind_from_char(row[static_cast<std::size_t>(x)]));
    }
    for (const auto& jo : j.at("objects")) {
      const auto cls = class_from_name(jo.at("class").get<std::string>());
      if (!cls) throw ConfigError("unknown object class " + jo.at("class").get<std::string>());
      const auto& p = jo.at("placement");
      Placement placement = Held{};
      if (p.contains("cell")) {
        placement = Cell{p["cell"][0].get<int>(), p["cell"][1].get<int>()};
      } else if (p.contains("container")) {
        placement = InContainer{p["container"].get<int>()};
      }
      const ObjectId id = scene.add_object(*cls, placement);
      if (id != jo.at("id").get<int>()) throw ConfigError("object ids must be dense and ordered");
      auto& o = scene.object(id);
      o.affordances = jo.at("affordances").get<AffordanceMask>();
      const auto& s = jo.at("state");
      o.state = {s.at("open").get<bool>(),   s.at("toggled").get<bool>(), s.at("sliced").get<bool>(),
                 s.at("heated").get<bool>(), s.at("cooled").get<bool>(),  s.at("cleaned").get<bool>()};
    }
    const auto& a = j.at("agent_start");
    scene.agent_start.cell = {a.at("x").get<int>(), a.at("z").get<int>()};
    scene.agent_start.yaw = a.at("yaw").get<int>();
    scene.agent_start.horizon = a.at("horizon").get<int>();
    if (!a.at("held").is_null()) scene.agent_start.held = a.at("held").get<int>();
    return scene;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene schema error: ") + e.what());
  }
}

}  // namespace disco
