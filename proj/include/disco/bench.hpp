#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "disco/agent.hpp"
#include "disco/imitation.hpp"
#include "disco/planner.hpp"
#include "disco/scene_repr.hpp"

namespace disco {

class EmptyResults : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a command needs besides file paths. Defaults are the method's.
struct RunConfig {
  AgentConfig agent;
  ReprConfig repr;
  CollectConfig collect;
  TrainConfig train;
  std::uint64_t seed = 0;
};

nlohmann::json config_to_json(const RunConfig& cfg);
// Overlays the keys present in `j` onto `base`. Unknown keys throw std::invalid_argument.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

// The household roster, with a second instance of the object for PlaceTwo.
GridScene scene_for_task(const TaskSpec& task);

struct ExpertRun {
  bool solved = false;  // every action succeeded and all goal conditions hold
  std::vector<Action> actions;
};

// Full-knowledge execution of a plan from the agent's pose: each interaction
// is preceded by the shortest fine navigation to a pose where it succeeds.
ExpertRun expert_solve(const GridScene& scene, const AgentState& agent, const TaskSpec& task,
                       const RenderConfig& render);

struct EpisodeResult {
  TaskSpec task;
  std::string mode;
  bool success = false;
  int conditions_met = 0;
  int conditions_total = 0;
  int agent_steps = 0;   // L-hat, warm-up included
  int expert_steps = 0;  // L*, warm-up included
  std::vector<SubgoalResult> subgoals;
  std::string failure = "none";  // object not found, navigation collision, interaction failure, others

  double weight() const;  // L* / max(L*, L-hat)
  double goal_fraction() const;
};

struct EpisodeHooks {
  std::vector<std::string>* trace = nullptr;
  std::optional<std::filesystem::path> render_dir;  // one PPM per executed step
};

// Generates the task's scene, warms up, runs the plan and scores the final state.
// `budget` < 0 uses the configured episode budget. The task must carry a scene seed.
EpisodeResult run_episode(const TaskSpec& task, const RunConfig& cfg, AblationMode mode, const PolicyParams* policy,
                          int budget = -1, const EpisodeHooks& hooks = {});
// The same episode driven by the expert's actions.
EpisodeResult run_expert_episode(const TaskSpec& task, const RunConfig& cfg);

struct Metrics {
  double sr = 0.0;
  double gc = 0.0;
  double plwsr = 0.0;
  double plwgc = 0.0;
  int episodes = 0;
};

Metrics metrics(const std::vector<EpisodeResult>& results);  // throws EmptyResults

// `n` expert-solvable tasks cycling through the seven types, each bound to a scene seed.
std::vector<TaskSpec> build_suite(int n, std::uint64_t seed, const RunConfig& cfg);

// A mode plus the perception noise it runs under.
struct AblationArm {
  std::string label;
  AblationMode mode;
  double class_flip = 0.0;
  bool expert = false;
};

std::vector<EpisodeResult> run_suite(const std::vector<TaskSpec>& tasks, const RunConfig& cfg, const AblationArm& arm,
                                     const PolicyParams* policy, const std::optional<std::filesystem::path>& render_dir = {});

struct ArmReport {
  AblationArm arm;
  std::vector<EpisodeResult> results;
  Metrics m;
};

std::vector<ArmReport> run_ablation_matrix(const std::vector<TaskSpec>& tasks, const RunConfig& cfg,
                                           const std::vector<AblationArm>& arms, const PolicyParams* policy);

// True when the plan puts something into an openable receptacle.
bool needs_openable(const TaskSpec& task);

std::string results_csv(const std::vector<ArmReport>& arms);
// Per-arm metrics, deltas against the first arm, and the effective config.
std::string report_json(const std::vector<ArmReport>& arms, const RunConfig& cfg);

// Tiled per-class probability maps with the trajectory drawn on each tile.
std::string map_snapshot_ppm(const SceneMap& map, const std::vector<int>& trajectory, int M);

}  // namespace disco
