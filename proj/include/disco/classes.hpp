#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace disco {

// Object roster. Fixed furniture occupies a cell; everything else lives inside
// a receptacle or in the agent's hand.
enum class ObjectClass : int {
  DiningTable = 0,
  CounterTop,
  Fridge,
  Microwave,
  SinkBasin,
  Drawer,
  Cabinet,
  StoveBurner,
  GarbageCan,
  Lamp,
  Apple,
  Egg,
  Lettuce,
  Tomato,
  Bread,
  Mug,
  Bowl,
  Pot,
  Knife,
  Book,
};

inline constexpr int kNumObjectClasses = 20;

// Interaction affordance bits, in the order they appear in the affordance
// class block of the semantic index space.
enum class Affordance : int {
  Pickupable = 0,
  Receptacle,
  Openable,
  Closeable,
  ToggleableOn,
  ToggleableOff,
  Sliceable,
};

inline constexpr int kNumInteractionAffordances = 7;

using AffordanceMask = std::uint8_t;

constexpr AffordanceMask bit(Affordance a) {
  return static_cast<AffordanceMask>(1u << static_cast<int>(a));
}

constexpr bool has(AffordanceMask mask, Affordance a) { return (mask & bit(a)) != 0; }

// Semantic index space shared by mapping and the scene representation:
// [0, N_o) object classes, then navigable, then the 7 interaction affordances.
inline constexpr int kNavigableClass = kNumObjectClasses;
inline constexpr int kNumAffordanceClasses = 1 + kNumInteractionAffordances;
inline constexpr int kNumSemanticClasses = kNumObjectClasses + kNumAffordanceClasses;

constexpr int affordance_class(Affordance a) {
  return kNavigableClass + 1 + static_cast<int>(a);
}

struct ClassInfo {
  std::string_view name;
  bool fixed;  // furniture: occupies a cell, blocks navigation and rays
  AffordanceMask affordances;
};

const ClassInfo& class_info(ObjectClass c);
std::string_view class_name(ObjectClass c);
std::optional<ObjectClass> class_from_name(std::string_view name);

// Names for every index of the semantic space (objects, then affordances).
std::string semantic_class_name(int semantic_index);

constexpr int to_index(ObjectClass c) { return static_cast<int>(c); }
constexpr ObjectClass to_class(int i) { return static_cast<ObjectClass>(i); }

}  // namespace disco
