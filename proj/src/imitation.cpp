#include "disco/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include <json.hpp>

#include "disco/parallel.hpp"

namespace disco {

namespace {

constexpr std::array<FineAction, 8> kMoves{FineAction::MoveAhead,  FineAction::MoveLeft,    FineAction::MoveRight,
                                           FineAction::MoveBack,   FineAction::RotateLeft,  FineAction::RotateRight,
                                           FineAction::LookUp,     FineAction::LookDown};

int yaw_slot(int yaw) { return (((yaw % 360) + 360) % 360) / 90; }
int horizon_slot(int h) { return (h - kHorizonMin) / kHorizonStep; }

bool within_reach(const GridScene& scene, const AgentState& a, ObjectId id) {
  const auto cell = scene.root_cell(id);
  return cell && cell_distance(a.cell, *cell) <= kReachDistance + 1e-9;
}

}  // namespace

// ----------------------------------------------------------------------------
// Pose graph

PoseGraph::PoseGraph(const GridScene& scene) : width_(scene.width()) {
  slot_.assign(static_cast<std::size_t>(scene.width() * scene.height()), -1);
  int slots = 0;
  for (int z = 0; z < scene.height(); ++z) {
    for (int x = 0; x < scene.width(); ++x) {
      if (!scene.navigable({x, z})) continue;
      slot_[static_cast<std::size_t>(z * width_ + x)] = slots++;
      for (int y = 0; y < 4; ++y) {
        for (int h = 0; h < kNumHorizons; ++h) {
          poses_.push_back(AgentState{{x, z}, 90 * y, kHorizonMin + kHorizonStep * h, std::nullopt});
        }
      }
    }
  }
  succ_.assign(poses_.size() * 8, -1);
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    for (std::size_t k = 0; k < kMoves.size(); ++k) {
      const auto next = navigation_successor(scene, poses_[i], to_action_type(kMoves[k]));
      if (next) succ_[i * 8 + k] = *index(*next);
    }
  }
}

std::optional<int> PoseGraph::index(const AgentState& a) const {
  if (a.cell.x < 0 || a.cell.z < 0 || a.cell.x >= width_ ||
      a.cell.z * width_ + a.cell.x >= static_cast<int>(slot_.size())) {
    return std::nullopt;
  }
  const int s = slot_[static_cast<std::size_t>(a.cell.z * width_ + a.cell.x)];
  if (s < 0) return std::nullopt;
  return (s * 4 + yaw_slot(a.yaw)) * kNumHorizons + horizon_slot(a.horizon);
}

std::vector<EgoFrame> render_pose_frames(const GridScene& scene, const PoseGraph& graph, const RenderConfig& render) {
  RenderConfig clean = render;
  clean.class_flip = 0.0;
  clean.depth_jitter = 0.0;
  std::vector<EgoFrame> frames(static_cast<std::size_t>(graph.size()));
  for (int i = 0; i < graph.size(); ++i) {
    EgoFrame f = render_egocentric(scene, graph.pose(i), clean);
    f.free_samples.clear();
    f.free_samples.shrink_to_fit();
    frames[static_cast<std::size_t>(i)] = std::move(f);
  }
  return frames;
}

// ----------------------------------------------------------------------------
// Expert

std::optional<InteractionSpec> canonical_interaction(const GridScene& scene, ObjectId id) {
  const ObjectInstance& obj = scene.object(id);
  if (std::holds_alternative<Held>(obj.placement)) return std::nullopt;
  const AffordanceMask f = obj.affordances;
  if (has(f, Affordance::Pickupable)) return InteractionSpec{Action::interact(ActionType::PickUp, id), std::nullopt};
  if (has(f, Affordance::Openable) && !obj.state.is_open) {
    return InteractionSpec{Action::interact(ActionType::Open, id), std::nullopt};
  }
  if (has(f, Affordance::Receptacle)) {
    // Hold an item resting somewhere else, so the target's own stack is unchanged.
    const auto here = scene.root_cell(id);
    for (const auto& o : scene.objects()) {
      if (!has(o.affordances, Affordance::Pickupable) || std::holds_alternative<Held>(o.placement)) continue;
      if (scene.root_cell(o.id) == here) continue;
      return InteractionSpec{Action::interact(ActionType::Put, id), o.id};
    }
    return std::nullopt;
  }
  if (has(f, Affordance::ToggleableOn) && !obj.state.is_toggled) {
    return InteractionSpec{Action::interact(ActionType::ToggleOn, id), std::nullopt};
  }
  return std::nullopt;
}

GridScene staged_scene(const GridScene& scene, const InteractionSpec& spec) {
  GridScene s = scene;
  if (spec.held) s.object(*spec.held).placement = Held{};
  return s;
}

std::vector<int> expert_interactable_states(const GridScene& staged, const PoseGraph& graph,
                                            const InteractionSpec& spec, const std::vector<EgoFrame>& frames) {
  std::vector<int> out;
  for (int i = 0; i < graph.size(); ++i) {
    AgentState a = graph.pose(i);
    a.held = spec.held;
    if (!within_reach(staged, a, *spec.action.target)) continue;
    if (check_interaction(staged, a, spec.action, frames[static_cast<std::size_t>(i)]).success) out.push_back(i);
  }
  return out;
}

std::vector<ExpertLabel> expert_label_short_horizon(const PoseGraph& graph, const std::vector<int>& interactable,
                                                    int radius) {
  if (interactable.empty()) throw NoInteractableState("no pose can perform the interaction");
  const int n = graph.size();
  std::vector<std::vector<int>> pred(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (FineAction a : kMoves) {
      const int j = graph.successor(i, a);
      if (j >= 0) pred[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::deque<int> queue;
  for (int i : interactable) {
    dist[static_cast<std::size_t>(i)] = 0;
    queue.push_back(i);
  }
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(j)];
    if (d >= radius) continue;
    for (int i : pred[static_cast<std::size_t>(j)]) {
      if (dist[static_cast<std::size_t>(i)] >= 0) continue;
      dist[static_cast<std::size_t>(i)] = d + 1;
      queue.push_back(i);
    }
  }
  std::vector<ExpertLabel> labels;
  for (int i = 0; i < n; ++i) {
    const int d = dist[static_cast<std::size_t>(i)];
    if (d < 0) continue;
    ExpertLabel l{i, FineAction::Interact, d};
    if (d > 0) {
      for (FineAction a : kMoves) {
        const int j = graph.successor(i, a);
        if (j >= 0 && dist[static_cast<std::size_t>(j)] == d - 1) {
          l.action = a;
          break;
        }
      }
    }
    labels.push_back(l);
  }
  return labels;
}

std::optional<std::vector<FineAction>> expert_path(const GridScene& scene, const AgentState& agent,
                                                   const Action& action, const RenderConfig& render) {
  if (!action.target || !scene.has_object(*action.target)) return std::nullopt;
  const PoseGraph graph(scene);
  const auto start = graph.index(agent);
  if (!start) return std::nullopt;
  RenderConfig clean = render;
  clean.class_flip = 0.0;
  clean.depth_jitter = 0.0;
  std::vector<int> parent(static_cast<std::size_t>(graph.size()), -1);
  std::vector<FineAction> via(parent.size(), FineAction::Interact);
  parent[static_cast<std::size_t>(*start)] = *start;
  std::deque<int> queue{*start};
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    AgentState a = graph.pose(i);
    a.held = agent.held;
    if (within_reach(scene, a, *action.target) && check_interaction(scene, a, action, clean).success) {
      std::vector<FineAction> path;
      for (int cur = i; cur != *start; cur = parent[static_cast<std::size_t>(cur)]) {
        path.push_back(via[static_cast<std::size_t>(cur)]);
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (FineAction m : kMoves) {
      const int j = graph.successor(i, m);
      if (j < 0 || parent[static_cast<std::size_t>(j)] >= 0) continue;
      parent[static_cast<std::size_t>(j)] = i;
      via[static_cast<std::size_t>(j)] = m;
      queue.push_back(j);
    }
  }
  return std::nullopt;
}

NavMap true_navmap(const GridScene& scene, const MapConfig& cfg, Cell anchor) {
  NavMap nav;
  nav.M = cfg.M;
  nav.free.assign(static_cast<std::size_t>(cfg.grids()), 0);
  for (int g = 0; g < cfg.grids(); ++g) {
    nav.free[static_cast<std::size_t>(g)] = scene.navigable(cell_of_grid(cfg, anchor, g)) ? 1 : 0;
  }
  return nav;
}

// ----------------------------------------------------------------------------
// Dataset

BCDataset collect_dataset(const std::vector<GridScene>& scenes, const CollectConfig& cfg) {
  struct Part {
    std::vector<BCSample> rows;
    int labeled = 0;
    int skipped = 0;
  };
  std::vector<Part> parts(scenes.size());
  parallel_for(static_cast<int>(scenes.size()), [&](int s) {
    const GridScene& scene = scenes[static_cast<std::size_t>(s)];
    Part& part = parts[static_cast<std::size_t>(s)];
    const PoseGraph graph(scene);
    const std::vector<EgoFrame> frames = render_pose_frames(scene, graph, cfg.render);
    const Cell anchor = scene.agent_start.cell;
    const NavMap nav = true_navmap(scene, cfg.map, anchor);
    for (const ObjectInstance& obj : scene.objects()) {
      const auto spec = canonical_interaction(scene, obj.id);
      if (!spec) continue;
      const GridScene staged = staged_scene(scene, *spec);
      const auto interactable = expert_interactable_states(staged, graph, *spec, frames);
      if (interactable.empty()) {
        ++part.skipped;
        continue;
      }
      const auto labels = expert_label_short_horizon(graph, interactable, cfg.radius);
      part.labeled += static_cast<int>(labels.size());
      std::vector<ExpertLabel> kept;
      if (cfg.per_level <= 0) {
        kept = labels;
      } else {
        Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(s) * 4096 + static_cast<std::uint64_t>(obj.id)));
        for (int d = 0; d <= cfg.radius; ++d) {
          std::vector<ExpertLabel> level;
          for (const auto& l : labels) {
            if (l.steps == d) level.push_back(l);
          }
          rng.shuffle(level);
          if (static_cast<int>(level.size()) > cfg.per_level) level.resize(static_cast<std::size_t>(cfg.per_level));
          kept.insert(kept.end(), level.begin(), level.end());
        }
        std::sort(kept.begin(), kept.end(), [](const ExpertLabel& a, const ExpertLabel& b) { return a.pose < b.pose; });
      }
      const int target_grid = grid_of_cell(cfg.map, anchor, *scene.root_cell(obj.id));
      const LookaheadField field = lookahead_field(nav, target_grid, cfg.render);
      for (const auto& l : kept) {
        const AgentState& a = graph.pose(l.pose);
        const PoseEstimate pose{(a.cell.x - anchor.x) * cfg.map.cell, (a.cell.z - anchor.z) * cfg.map.cell, a.yaw,
                                a.horizon};
        BCSample row;
        row.x = fine_features(frames[static_cast<std::size_t>(l.pose)], pose, cfg.map, target_grid, obj.cls, nav,
                              cfg.render, &field);
        row.cls = obj.cls;
        row.action = l.action;
        row.steps = l.steps;
        row.scene = s;
        row.object = obj.id;
        part.rows.push_back(std::move(row));
      }
    }
  });
  BCDataset d;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    const bool heldout = cfg.heldout_mod > 0 && static_cast<int>(s) % cfg.heldout_mod == cfg.heldout_mod - 1;
    auto& dst = heldout ? d.heldout : d.train;
    dst.insert(dst.end(), parts[s].rows.begin(), parts[s].rows.end());
    d.labeled_states += parts[s].labeled;
    d.skipped += parts[s].skipped;
  }
  return d;
}

std::string dataset_csv(const BCDataset& d) {
  std::ostringstream out;
  out << "split,scene,object,class,steps,action,features\n";
  auto write = [&](const std::vector<BCSample>& rows, const char* split) {
    for (const auto& r : rows) {
      out << split << ',' << r.scene << ',' << r.object << ',' << class_name(r.cls) << ',' << r.steps << ','
          << fine_action_name(r.action) << ',';
      for (std::size_t k = 0; k < r.x.idx.size(); ++k) {
        if (k) out << ' ';
        out << r.x.idx[k] << ':' << r.x.val[k];
      }
      out << '\n';
    }
  };
  write(d.train, "train");
  write(d.heldout, "heldout");
  return out.str();
}

// ----------------------------------------------------------------------------
// Training

namespace {

Eigen::VectorXd hidden_of(const PolicyParams& p, const Features& x) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p.hidden);
  for (std::size_t k = 0; k < x.idx.size(); ++k) h += x.val[k] * p.W.col(x.idx[k]);
  return h;
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

int argmax_first(const Eigen::VectorXd& z) {
  int best = 0;
  for (int a = 1; a < z.size(); ++a) {
    if (z[a] > z[best]) best = a;
  }
  return best;
}

}  // namespace

BCGradients bc_gradients(const PolicyParams& p, const std::vector<BCSample>& data,
                         const std::vector<std::size_t>& batch) {
  BCGradients g;
  g.dW = Eigen::MatrixXd::Zero(p.hidden, p.dim);
  for (int c = 0; c < kNumObjectClasses; ++c) {
    g.dA.push_back(Eigen::MatrixXd::Zero(kNumFineActions, p.hidden));
    g.db.push_back(Eigen::VectorXd::Zero(kNumFineActions));
  }
  if (batch.empty()) return g;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const BCSample& s = data[i];
    const auto c = static_cast<std::size_t>(to_index(s.cls));
    const Eigen::VectorXd h = hidden_of(p, s.x);
    const Eigen::VectorXd z = p.A[c] * h + p.b[c];
    const double lse = log_sum_exp(z);
    const int y = static_cast<int>(s.action);
    g.loss += (lse - z[y]) * inv;
    Eigen::VectorXd r = (z.array() - lse).exp().matrix();
    r[y] -= 1.0;
    r *= inv;
    g.dA[c].noalias() += r * h.transpose();
    g.db[c] += r;
    const Eigen::VectorXd dh = p.A[c].transpose() * r;
    for (std::size_t k = 0; k < s.x.idx.size(); ++k) g.dW.col(s.x.idx[k]) += s.x.val[k] * dh;
  }
  return g;
}

double bc_loss(const PolicyParams& p, const std::vector<BCSample>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : data) {
    const Eigen::VectorXd z = p.logits(s.x, s.cls);
    total += log_sum_exp(z) - z[static_cast<int>(s.action)];
  }
  return total / static_cast<double>(data.size());
}

double bc_accuracy(const PolicyParams& p, const std::vector<BCSample>& data) {
  if (data.empty()) return 0.0;
  int hits = 0;
  for (const auto& s : data) hits += argmax_first(p.logits(s.x, s.cls)) == static_cast<int>(s.action);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainReport train_bc(const BCDataset& data, const TrainConfig& cfg) {
  if (data.train.empty()) throw DegenerateDataset("training split is empty");
  TrainReport rep;
  std::vector<int> seen(kNumFineActions, 0);
  for (const auto& s : data.train) seen[static_cast<std::size_t>(s.action)] = 1;
  if (std::count(seen.begin(), seen.end(), 1) == 1) rep.warnings.push_back("training labels use a single action");

  PolicyParams p = PolicyParams::init(fine_feature_dim(), cfg.hidden, cfg.seed);
  Eigen::MatrixXd vW = Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols());
  std::vector<Eigen::MatrixXd> vA;
  std::vector<Eigen::VectorXd> vb;
  for (int c = 0; c < kNumObjectClasses; ++c) {
    vA.push_back(Eigen::MatrixXd::Zero(kNumFineActions, cfg.hidden));
    vb.push_back(Eigen::VectorXd::Zero(kNumFineActions));
  }
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch_size = static_cast<std::size_t>(std::max(cfg.batch, 1));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch) + 1));
    rng.shuffle(order);
    const double lr = cfg.lr / (1.0 + cfg.lr_decay * epoch);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(start + batch_size, order.size())));
      const BCGradients g = bc_gradients(p, data.train, batch);
      vW = cfg.momentum * vW + g.dW;
      p.W -= lr * vW;
      for (int c = 0; c < kNumObjectClasses; ++c) {
        const auto k = static_cast<std::size_t>(c);
        vA[k] = cfg.momentum * vA[k] + g.dA[k];
        vb[k] = cfg.momentum * vb[k] + g.db[k];
        p.A[k] -= lr * vA[k];
        p.b[k] -= lr * vb[k];
      }
    }
    rep.epoch_loss.push_back(bc_loss(p, data.train));
  }
  p.trained = true;
  rep.train_accuracy = bc_accuracy(p, data.train);
  rep.heldout_accuracy = bc_accuracy(p, data.heldout);
  rep.params = std::move(p);
  return rep;
}

std::string train_report_json(const TrainReport& r, const BCDataset& d, const TrainConfig& cfg) {
  nlohmann::json j;
  j["version"] = 1;
  j["train_rows"] = d.train.size();
  j["heldout_rows"] = d.heldout.size();
  j["labeled_states"] = d.labeled_states;
  j["skipped_objects"] = d.skipped;
  j["train_accuracy"] = r.train_accuracy;
  j["heldout_accuracy"] = r.heldout_accuracy;
  j["epoch_loss"] = r.epoch_loss;
  j["warnings"] = r.warnings;
  j["config"] = {{"hidden", cfg.hidden}, {"lr", cfg.lr},       {"momentum", cfg.momentum}, {"lr_decay", cfg.lr_decay},
                 {"epochs", cfg.epochs}, {"batch", cfg.batch}, {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

}  // namespace disco
