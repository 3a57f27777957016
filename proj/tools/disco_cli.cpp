#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "disco/bench.hpp"
#include "disco/parallel.hpp"

using namespace disco;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error(p.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error(p.string() + ": cannot write");
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON config file");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--noise", noise, "perception class-flip probability")->check(CLI::Range(0.0, 1.0));
  }

  // Defaults, then the config file, then flags.
  RunConfig resolve() const {
    RunConfig cfg;
    if (!config.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(config));
      } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(config + ": " + e.what());
      }
      cfg = config_from_json(j, cfg);
    }
    if (seed) cfg.seed = *seed;
    if (noise) cfg.agent.render.class_flip = *noise;
    cfg.collect.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    cfg.collect.render = cfg.agent.render;
    cfg.collect.map = cfg.agent.map;
    return cfg;
  }
};

std::vector<fs::path> scene_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int gen_scenes(int count, std::uint64_t seed, const fs::path& out) {
  fs::create_directories(out);
  std::vector<std::string> text(static_cast<std::size_t>(count));
  parallel_for(count, [&](int i) {
    const GridScene s = generate_scene(SceneGenConfig::household(), Rng::derive(seed, static_cast<std::uint64_t>(i)));
    text[static_cast<std::size_t>(i)] = scene_to_json(s);
  });
  for (int i = 0; i < count; ++i) {
    std::ostringstream name;
    name << "scene_" << std::setw(4) << std::setfill('0') << i << ".json";
    write_file(out / name.str(), text[static_cast<std::size_t>(i)]);
  }
  std::cout << "wrote " << count << " scenes to " << out.string() << "\n";
  return 0;
}

int make_suite(int count, std::uint64_t seed, const fs::path& out, const RunConfig& cfg) {
  write_file(out, tasks_to_json(build_suite(count, seed, cfg)));
  std::cout << "wrote " << count << " tasks to " << out.string() << "\n";
  return 0;
}

int train_policy(const fs::path& dir, const fs::path& out, const RunConfig& cfg) {
  const auto files = scene_files(dir);
  if (files.empty()) throw std::runtime_error(dir.string() + ": no scene files");
  std::vector<GridScene> scenes;
  for (const auto& f : files) scenes.push_back(scene_from_json(read_file(f)));
  const BCDataset data = collect_dataset(scenes, cfg.collect);
  const TrainReport rep = train_bc(data, cfg.train);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  write_file(out, policy_to_json(rep.params));

  nlohmann::json metrics = nlohmann::json::parse(train_report_json(rep, data, cfg.train));
  metrics["scenes"] = files.size();
  metrics["run_config"] = config_to_json(cfg);
  fs::path mpath = out;
  mpath += ".metrics.json";
  write_file(mpath, metrics.dump(2) + "\n");
  std::cout << "scenes " << files.size() << "  train rows " << data.train.size() << "  heldout rows "
            << data.heldout.size() << "\n"
            << "train accuracy " << rep.train_accuracy << "  heldout accuracy " << rep.heldout_accuracy << "\n"
            << "wrote " << out.string() << " and " << mpath.string() << "\n";
  return 0;
}

int run(const fs::path& tasks_path, const std::string& policy_path, const std::vector<std::string>& modes, bool render,
        const fs::path& out, const RunConfig& cfg) {
  const auto tasks = parse_task_file(tasks_path);
  std::vector<AblationArm> arms;
  for (const std::string& m : modes.empty() ? std::vector<std::string>{"full"} : modes) {
    if (m == "expert") {
      arms.push_back({m, {}, cfg.agent.render.class_flip, true});
    } else {
      arms.push_back({m, AblationMode::from_name(m), cfg.agent.render.class_flip, false});
    }
  }
  const bool needs_policy = std::any_of(arms.begin(), arms.end(), [](const AblationArm& a) { return !a.expert && a.mode.fine; });
  PolicyParams policy;
  if (!policy_path.empty()) {
    policy = policy_from_json(read_file(policy_path));
  } else if (needs_policy) {
    throw std::runtime_error("--policy is required unless every mode disables fine control");
  }

  std::cout << "effective config\n" << config_to_json(cfg).dump(2) << "\n";
  std::vector<ArmReport> reports;
  for (const AblationArm& arm : arms) {
    std::optional<fs::path> rdir;
    if (render) rdir = out / "render" / arm.label;
    ArmReport r{arm, run_suite(tasks, cfg, arm, &policy, rdir), {}};
    if (!tasks.empty()) r.m = metrics(r.results);
    std::cout << std::left << std::setw(28) << arm.label << " SR " << std::fixed << std::setprecision(3) << r.m.sr
              << "  GC " << r.m.gc << "  PLWSR " << r.m.plwsr << "  PLWGC " << r.m.plwgc << "\n";
    std::cout.unsetf(std::ios::floatfield);
    reports.push_back(std::move(r));
  }
  write_file(out / "results.csv", results_csv(reports));
  write_file(out / "report.json", report_json(reports, cfg));
  std::cout << "wrote " << (out / "results.csv").string() << " and " << (out / "report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-world embodied instruction following with a learned scene representation"};
  app.require_subcommand(1);

  int count = 0;
  std::uint64_t gen_seed = 0;
  std::string out;
  auto* gen = app.add_subcommand("gen-scenes", "write seeded household scenes as JSON");
  gen->add_option("--count", count, "number of scenes")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "scene seed")->required();
  gen->add_option("--out", out, "output directory")->required();

  Common suite_opts;
  int suite_count = 0;
  std::uint64_t suite_seed = 0;
  std::string suite_out;
  auto* suite = app.add_subcommand("make-suite", "write a seeded task file cycling through the task types");
  suite->add_option("--count", suite_count, "number of tasks")->required()->check(CLI::NonNegativeNumber);
  suite->add_option("--suite-seed", suite_seed, "task sampling seed")->required();
  suite->add_option("--out", suite_out, "task file")->required();
  suite_opts.add_to(suite);

  Common train_opts;
  std::string scenes_dir, policy_out;
  auto* train = app.add_subcommand("train-policy", "collect expert data from scenes and fit the fine policy");
  train->add_option("--scenes", scenes_dir, "directory of scene JSON files")->required();
  train->add_option("--out", policy_out, "policy file; metrics go to FILE.metrics.json")->required();
  train_opts.add_to(train);

  Common run_opts;
  std::string tasks_file, policy_file, run_out = "results";
  std::vector<std::string> modes;
  bool render = false;
  auto* runc = app.add_subcommand("run", "run a task file under one or more modes and write reports");
  runc->add_option("--tasks", tasks_file, "task file")->required();
  runc->add_option("--policy", policy_file, "policy file from train-policy");
  runc->add_option("--ablation", modes,
                   "mode, repeatable: full, expert, no-<component> or a '+' joined combination");
  runc->add_flag("--render", render, "write a map snapshot PPM for every step");
  runc->add_option("--out", run_out, "output directory");
  run_opts.add_to(runc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_scenes(count, gen_seed, out);
    if (*suite) return make_suite(suite_count, suite_seed, suite_out, suite_opts.resolve());
    if (*train) return train_policy(scenes_dir, policy_out, train_opts.resolve());
    if (*runc) return run(tasks_file, policy_file, modes, render, run_out, run_opts.resolve());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
