#include "disco/classes.hpp"

#include <stdexcept>

namespace disco {
namespace {

constexpr AffordanceMask kOpen = bit(Affordance::Openable) | bit(Affordance::Closeable);
constexpr AffordanceMask kToggle = bit(Affordance::ToggleableOn) | bit(Affordance::ToggleableOff);
constexpr AffordanceMask kRecep = bit(Affordance::Receptacle);
constexpr AffordanceMask kPick = bit(Affordance::Pickupable);
constexpr AffordanceMask kSlice = bit(Affordance::Sliceable);

constexpr std::array<ClassInfo, kNumObjectClasses> kRoster{{
    {"DiningTable", true, kRecep},
    {"CounterTop", true, kRecep},
    {"Fridge", true, kRecep | kOpen},
    {"Microwave", true, kRecep | kOpen | kToggle},
    {"SinkBasin", true, kRecep | kToggle},  // toggling stands for the faucet
    {"Drawer", true, kRecep | kOpen},
    {"Cabinet", true, kRecep | kOpen},
    {"StoveBurner", true, kRecep | kToggle},
    {"GarbageCan", true, kRecep},
    {"Lamp", true, kToggle},
    {"Apple", false, kPick | kSlice},
    {"Egg", false, kPick},
    {"Lettuce", false, kPick | kSlice},
    {"Tomato", false, kPick | kSlice},
    {"Bread", false, kPick | kSlice},
    {"Mug", false, kPick | kRecep},
    {"Bowl", false, kPick | kRecep},
    {"Pot", false, kPick | kRecep},
    {"Knife", false, kPick},
    {"Book", false, kPick},
}};

constexpr std::array<std::string_view, kNumAffordanceClasses> kAffordanceNames{
    "Navigable", "Pickupable", "Receptacle", "Openable",
    "Closeable", "ToggleableOn", "ToggleableOff", "Sliceable"};

}  // namespace

const ClassInfo& class_info(ObjectClass c) {
  const int i = to_index(c);
  if (i < 0 || i >= kNumObjectClasses) throw std::out_of_range("object class out of range");
  return kRoster[static_cast<std::size_t>(i)];
}

std::string_view class_name(ObjectClass c) { return class_info(c).name; }

std::optional<ObjectClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kNumObjectClasses; ++i) {
    if (kRoster[static_cast<std::size_t>(i)].name == name) return to_class(i);
  }
  return std::nullopt;
}

std::string semantic_class_name(int semantic_index) {
  if (semantic_index >= 0 && semantic_index < kNumObjectClasses) {
    return std::string(class_name(to_class(semantic_index)));
  }
  const int a = semantic_index - kNumObjectClasses;
  if (a >= 0 && a < kNumAffordanceClasses) {
    return std::string(kAffordanceNames[static_cast<std::size_t>(a)]);
  }
  throw std::out_of_range("semantic class out of range");
}

}  // namespace disco
