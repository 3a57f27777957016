#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disco/mapping.hpp"

namespace disco {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ClassOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class ReprLoss { Linear, CrossEntropy };

struct ReprConfig {
  int M = 80;
  int C = 256;
  double alpha = 0.01;
  int iters = 10;
  ReprLoss loss = ReprLoss::Linear;
  bool persist_queries = false;  // keep Q across episodes instead of redrawing it
};

// Numerically stable logistic function.
double sigmoid(double x);

// Loss over visible rows and its gradients. Sv holds the visible grid
// embeddings, Y the matching label rows (|V| x classes).
struct ReprGradients {
  double loss = 0.0;
  RowMatrix dS;  // |V| x C
  RowMatrix dQ;  // classes x C
};
ReprGradients repr_gradients(const RowMatrix& Sv, const RowMatrix& Q, const RowMatrix& Y, ReprLoss loss);

// Common interface of the map backends driven by the controller.
class SceneMap {
 public:
  virtual ~SceneMap() = default;
  virtual int grids() const = 0;
  virtual int classes() const = 0;
  // Probability of class j over all grids.
  virtual Eigen::VectorXd query(int j) const = 0;
  virtual double query_at(int grid, int j) const = 0;
  virtual void update(const SoftLabels& labels) = 0;
  virtual void reset(std::uint64_t seed) = 0;
};

class SceneRepresentation : public SceneMap {
 public:
  explicit SceneRepresentation(const ReprConfig& cfg, std::uint64_t seed = 0);

  int grids() const override { return static_cast<int>(S_.rows()); }
  int classes() const override { return static_cast<int>(Q_.rows()); }
  Eigen::VectorXd query(int j) const override;
  double query_at(int grid, int j) const override;
  void update(const SoftLabels& labels) override;
  // S back to zero; Q redrawn from `seed` unless queries persist.
  void reset(std::uint64_t seed) override;

  const RowMatrix& S() const { return S_; }
  const RowMatrix& Q() const { return Q_; }
  RowMatrix& S() { return S_; }
  RowMatrix& Q() { return Q_; }
  const ReprConfig& config() const { return cfg_; }

  // Loss after each inner iteration of the most recent update (for diagnostics).
  const std::vector<double>& last_losses() const { return last_losses_; }

 private:
  ReprConfig cfg_;
  RowMatrix S_;
  RowMatrix Q_;
  std::vector<double> last_losses_;
};

// Binary occupancy per (grid, class) with last-write-wins updates.
class CellMap : public SceneMap {
 public:
  CellMap(int M, int classes = kNumSemanticClasses);

  int grids() const override { return grids_; }
  int classes() const override { return classes_; }
  Eigen::VectorXd query(int j) const override;
  double query_at(int grid, int j) const override;
  void update(const SoftLabels& labels) override;
  void reset(std::uint64_t seed) override;

 private:
  int grids_;
  int classes_;
  std::vector<std::uint8_t> bits_;
};

// Probability map as a grayscale-to-heat P6 image, one pixel per grid.
std::string prob_map_ppm(const Eigen::VectorXd& p, int M, int scale = 4);
std::string prob_map_csv(const Eigen::VectorXd& p, int M);

}  // namespace disco
