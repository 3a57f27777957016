#include "disco/scene_repr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disco/random.hpp"

namespace disco {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ReprGradients repr_gradients(const RowMatrix& Sv, const RowMatrix& Q, const RowMatrix& Y, ReprLoss loss) {
  const RowMatrix logits = Sv * Q.transpose();
  const RowMatrix F = logits.unaryExpr([](double x) { return sigmoid(x); });
  RowMatrix G(F.rows(), F.cols());
  ReprGradients out;
  if (loss == ReprLoss::Linear) {
    // L = -(1-y)(1-f) - y f, dL/df = 1 - 2y, df/dz = f(1-f)
    G = ((1.0 - 2.0 * Y.array()) * F.array() * (1.0 - F.array())).matrix();
    out.loss = (-(1.0 - Y.array()) * (1.0 - F.array()) - Y.array() * F.array()).sum();
  } else {
    G = F - Y;
    // softplus form keeps the loss finite when f saturates
    const auto sp = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
    out.loss = (logits.unaryExpr(sp).array() - Y.array() * logits.array()).sum();
  }
  out.dS = G * Q;
  out.dQ = G.transpose() * Sv;
  return out;
}

SceneRepresentation::SceneRepresentation(const ReprConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.M <= 0 || cfg.C <= 0) throw std::invalid_argument("map extent and embedding size must be positive");
  if (!(cfg.alpha > 0.0) || cfg.iters < 1) throw std::invalid_argument("alpha must be > 0 and iters >= 1");
  S_ = RowMatrix::Zero(static_cast<Eigen::Index>(cfg.M) * cfg.M, cfg.C);
  Q_.resize(kNumSemanticClasses, cfg.C);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < Q_.size(); ++i) Q_.data()[i] = rng.normal();
}

void SceneRepresentation::reset(std::uint64_t seed) {
  S_.setZero();
  if (cfg_.persist_queries) return;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < Q_.size(); ++i) Q_.data()[i] = rng.normal();
}

Eigen::VectorXd SceneRepresentation::query(int j) const {
  if (j < 0 || j >= classes()) throw ClassOutOfRange("semantic class out of range");
  return (S_ * Q_.row(j).transpose()).unaryExpr([](double x) { return sigmoid(x); });
}

double SceneRepresentation::query_at(int grid, int j) const {
  if (j < 0 || j >= classes()) throw ClassOutOfRange("semantic class out of range");
  return sigmoid(S_.row(grid).dot(Q_.row(j)));
}

void SceneRepresentation::update(const SoftLabels& labels) {
  last_losses_.clear();
  const std::vector<int> vis = labels.visible();
  if (vis.empty()) return;
  const auto n = static_cast<Eigen::Index>(vis.size());
  RowMatrix Sv(n, cfg_.C);
  RowMatrix Y(n, classes());
  for (Eigen::Index r = 0; r < n; ++r) {
    const int g = vis[static_cast<std::size_t>(r)];
    Sv.row(r) = S_.row(g);
    const auto& y = labels.y.at(g);
    for (int j = 0; j < classes(); ++j) Y(r, j) = y[static_cast<std::size_t>(j)];
  }
  for (int it = 0; it < cfg_.iters; ++it) {
    const ReprGradients g = repr_gradients(Sv, Q_, Y, cfg_.loss);
    last_losses_.push_back(g.loss);
    Sv -= cfg_.alpha * g.dS;
    Q_ -= cfg_.alpha * g.dQ;
  }
  for (Eigen::Index r = 0; r < n; ++r) S_.row(vis[static_cast<std::size_t>(r)]) = Sv.row(r);
}

CellMap::CellMap(int M, int classes)
    : grids_(M * M), classes_(classes), bits_(static_cast<std::size_t>(grids_) * static_cast<std::size_t>(classes), 0) {}

void CellMap::reset(std::uint64_t) { std::fill(bits_.begin(), bits_.end(), 0); }

Eigen::VectorXd CellMap::query(int j) const {
  if (j < 0 || j >= classes_) throw ClassOutOfRange("semantic class out of range");
  Eigen::VectorXd p(grids_);
  for (int g = 0; g < grids_; ++g) p[g] = bits_[static_cast<std::size_t>(g * classes_ + j)];
  return p;
}

double CellMap::query_at(int grid, int j) const {
  if (j < 0 || j >= classes_) throw ClassOutOfRange("semantic class out of range");
  return bits_[static_cast<std::size_t>(grid * classes_ + j)];
}

void CellMap::update(const SoftLabels& labels) {
  for (int g : labels.visible()) {
    const auto& y = labels.y.at(g);
    for (int j = 0; j < classes_; ++j) {
      bits_[static_cast<std::size_t>(g * classes_ + j)] = y[static_cast<std::size_t>(j)] >= 0.5 ? 1 : 0;
    }
  }
}

std::string prob_map_ppm(const Eigen::VectorXd& p, int M, int scale) {
  std::ostringstream out;
  out << "P6\n" << M * scale << " " << M * scale << "\n255\n";
  for (int z = M * scale - 1; z >= 0; --z) {  // +z up in the image
    for (int x = 0; x < M * scale; ++x) {
      const double v = std::clamp(p[(z / scale) * M + x / scale], 0.0, 1.0);
      const auto r = static_cast<unsigned char>(std::lround(255 * v));
      const auto g = static_cast<unsigned char>(std::lround(255 * (1.0 - std::abs(2 * v - 1))));
      const auto b = static_cast<unsigned char>(std::lround(255 * (1.0 - v)));
      out << r << g << b;
    }
  }
  return out.str();
}

std::string prob_map_csv(const Eigen::VectorXd& p, int M) {
  std::ostringstream out;
  out.precision(6);
  for (int z = 0; z < M; ++z) {
    for (int x = 0; x < M; ++x) out << (x ? "," : "") << p[z * M + x];
    out << "\n";
  }
  return out.str();
}

}  // namespace disco
