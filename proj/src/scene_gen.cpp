#include <algorithm>
#include <deque>

#include "disco/random.hpp"
#include "disco/world.hpp"

namespace disco {

SceneGenConfig SceneGenConfig::household() {
  SceneGenConfig c;
  c.width = 16;
  c.height = 16;
  c.wall_segments = 2;
  c.furniture = {
      {ObjectClass::DiningTable, 1}, {ObjectClass::CounterTop, 4}, {ObjectClass::Fridge, 1},
      {ObjectClass::Microwave, 1},   {ObjectClass::SinkBasin, 1},  {ObjectClass::Drawer, 1},
      {ObjectClass::Cabinet, 1},     {ObjectClass::StoveBurner, 1}, {ObjectClass::GarbageCan, 1},
      {ObjectClass::Lamp, 1},
  };
  c.items = {
      {ObjectClass::Apple, 1}, {ObjectClass::Egg, 1},  {ObjectClass::Lettuce, 1},
      {ObjectClass::Tomato, 1}, {ObjectClass::Bread, 1}, {ObjectClass::Mug, 1},
      {ObjectClass::Bowl, 1},  {ObjectClass::Pot, 1},  {ObjectClass::Knife, 1},
      {ObjectClass::Book, 1},
  };
  return c;
}

SceneGenConfig SceneGenConfig::empty(int width, int height) {
  SceneGenConfig c;
  c.width = width;
  c.height = height;
  c.wall_segments = 0;
  return c;
}

std::vector<Cell> reachable_cells(const GridScene& scene, Cell start) {
  std::vector<Cell> out;
  if (!scene.navigable(start)) return out;
  std::vector<char> seen(static_cast<std::size_t>(scene.width() * scene.height()), 0);
  std::deque<Cell> queue{start};
  seen[static_cast<std::size_t>(start.z * scene.width() + start.x)] = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    out.push_back(c);
    for (const Cell n : {Cell{c.x + 1, c.z}, Cell{c.x - 1, c.z}, Cell{c.x, c.z + 1}, Cell{c.x, c.z - 1}}) {
      if (!scene.navigable(n)) continue;
      auto& s = seen[static_cast<std::size_t>(n.z * scene.width() + n.x)];
      if (s) continue;
      s = 1;
      queue.push_back(n);
    }
  }
  return out;
}

bool floor_connected(const GridScene& scene) {
  std::optional<Cell> first;
  std::size_t count = 0;
  for (int z = 0; z < scene.height(); ++z) {
    for (int x = 0; x < scene.width(); ++x) {
      if (!scene.navigable({x, z})) continue;
      ++count;
      if (!first) first = Cell{x, z};
    }
  }
  if (!first) return false;
  return reachable_cells(scene, *first).size() == count;
}

namespace {

bool has_navigable_neighbour(const GridScene& scene, Cell c) {
  for (const Cell n : {Cell{c.x + 1, c.z}, Cell{c.x - 1, c.z}, Cell{c.x, c.z + 1}, Cell{c.x, c.z - 1}}) {
    if (scene.navigable(n)) return true;
  }
  return false;
}

bool is_placement_surface(ObjectClass c) {
  return c == ObjectClass::DiningTable || c == ObjectClass::CounterTop;
}

std::optional<GridScene> try_generate(const SceneGenConfig& config, unsigned long long seed, Rng& rng) {
  GridScene scene(config.width, config.height, seed);

  for (int s = 0; s < config.wall_segments; ++s) {
    if (config.width < 6 || config.height < 6) break;
    const bool horizontal = rng.index(2) == 0;
    const int length = 2 + rng.index(2);
    const int x0 = 2 + rng.index(std::max(config.width - 4 - (horizontal ? length : 1), 1));
    const int z0 = 2 + rng.index(std::max(config.height - 4 - (horizontal ? 1 : length), 1));
    for (int k = 0; k < length; ++k) {
      const Cell c = horizontal ? Cell{x0 + k, z0} : Cell{x0, z0 + k};
      if (scene.in_bounds(c)) scene.set_kind(c, CellKind::Wall);
    }
  }
  if (config.width * config.height > 1 && !floor_connected(scene)) return std::nullopt;

  // Furniture hugs the room boundary, like counters and appliances along walls.
  std::vector<Cell> ring;
  for (int z = 0; z < config.height; ++z) {
    for (int x = 0; x < config.width; ++x) {
      const bool edge = x == 0 || z == 0 || x == config.width - 1 || z == config.height - 1;
      const bool corner = (x == 0 || x == config.width - 1) && (z == 0 || z == config.height - 1);
      if (edge && !corner && scene.navigable({x, z})) ring.push_back({x, z});
    }
  }
  rng.shuffle(ring);
  std::size_t next_ring = 0;
  std::vector<ObjectId> surfaces;
  for (const auto& req : config.furniture) {
    for (int k = 0; k < req.count; ++k) {
      bool placed = false;
      while (next_ring < ring.size() && !placed) {
        const Cell c = ring[next_ring++];
        if (!scene.navigable(c)) continue;
        scene.set_kind(c, CellKind::ReceptacleSurface);
        // Tentatively occupy; reject if it splits the floor.
        GridScene probe = scene;
        probe.add_object(req.cls, c);
        if (!floor_connected(probe)) {
          scene.set_kind(c, CellKind::Floor);
          continue;
        }
        const ObjectId id = scene.add_object(req.cls, c);
        if (is_placement_surface(req.cls)) surfaces.push_back(id);
        placed = true;
      }
      if (!placed) return std::nullopt;
    }
  }
  for (const auto& o : scene.objects()) {
    if (const auto* c = std::get_if<Cell>(&o.placement); c && !has_navigable_neighbour(scene, *c)) {
      return std::nullopt;
    }
  }

  std::vector<int> load(scene.objects().size(), 0);
  for (const auto& req : config.items) {
    for (int k = 0; k < req.count; ++k) {
      std::vector<ObjectId> candidates;
      for (ObjectId s : surfaces) {
        const ObjectClass sc = scene.object(s).cls;
        const bool forbidden = std::any_of(
            config.forbidden_placements.begin(), config.forbidden_placements.end(),
            [&](const auto& p) { return p.first == req.cls && p.second == sc; });
        if (!forbidden && load[static_cast<std::size_t>(s)] < config.max_items_per_receptacle) {
          candidates.push_back(s);
        }
      }
      if (candidates.empty()) return std::nullopt;
      const ObjectId host = candidates[static_cast<std::size_t>(rng.index(static_cast<int>(candidates.size())))];
      ++load[static_cast<std::size_t>(host)];
      scene.add_object(req.cls, InContainer{host});
    }
  }

  std::vector<Cell> free;
  for (int z = 0; z < config.height; ++z) {
    for (int x = 0; x < config.width; ++x) {
      if (scene.navigable({x, z})) free.push_back({x, z});
    }
  }
  if (free.empty()) return std::nullopt;
  scene.agent_start.cell = free[static_cast<std::size_t>(rng.index(static_cast<int>(free.size())))];
  scene.agent_start.yaw = 90 * rng.index(4);
  scene.agent_start.horizon = kInitialHorizon;
  return scene;
}

}  // namespace

GridScene generate_scene(const SceneGenConfig& config, unsigned long long seed) {
  if (config.width <= 0 || config.height <= 0) throw ConfigError("scene dimensions must be positive");
  Rng rng(seed);
  for (int attempt = 0; attempt < std::max(config.max_retries, 1); ++attempt) {
    if (auto scene = try_generate(config, seed, rng)) return std::move(*scene);
  }
  throw ConfigError("could not place the requested objects after " +
                    std::to_string(config.max_retries) + " attempts");
}

}  // namespace disco
