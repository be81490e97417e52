#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace bayestomo {

/// Normalized cell masses on a regular lattice over the Bloch ball. Nodes sit
/// at -1 + 2 i / (resolution - 1) on each axis; a node is a cell of the grid
/// when its centre lies inside the unit ball. Masses are kept as logs so that
/// excluded cells are exact -inf rather than underflowed zeros.
class BlochGrid {
 public:
  static constexpr int kDefaultResolution = 101;

  /// Prior grid from a density relative to the normalized volume element
  /// dV = (3 / 4 pi) dx dy dz. Cells whose centre density is not finite are
  /// averaged over a 4^3 sub-lattice instead.
  static BlochGrid from_density(
      int resolution, const std::function<double(const Eigen::Vector3d&)>& density);
  static BlochGrid uniform(int resolution = kDefaultResolution);

  int resolution() const { return resolution_; }
  double spacing() const { return 2.0 / (resolution_ - 1); }
  double node(int i) const { return -1.0 + spacing() * i; }
  Eigen::Index size() const { return centers_.cols(); }
  const Eigen::Matrix3Xd& centers() const { return centers_; }
  /// Lattice indices (i, j, k) of each cell.
  const Eigen::Matrix3Xi& lattice() const { return lattice_; }
  const Eigen::VectorXd& log_mass() const { return log_mass_; }
  double log_evidence() const { return log_evidence_; }
  Eigen::VectorXd masses() const { return log_mass_.array().exp().matrix(); }

  /// Mass divided by the dV-volume of a cell.
  double density_dv(Eigen::Index cell) const {
    const double h = spacing();
    return std::exp(log_mass_[cell]) / (h * h * h * 3.0 / (4.0 * std::numbers::pi));
  }

  /// Cell whose node is nearest to p, or -1 when that node is outside the ball.
  Eigen::Index locate(const Eigen::Vector3d& p) const;

  /// Mass per node along one axis (0 = x, 1 = y, 2 = z).
  Eigen::VectorXd marginal(int axis) const;

  /// Grid with log masses log_mass() + log_factor, renormalized; the log of
  /// the normalizer is added to log_evidence(). Throws ImpossibleData when
  /// every cell is excluded.
  BlochGrid reweighted(const Eigen::VectorXd& log_factor) const;

 private:
  explicit BlochGrid(int resolution);

  int resolution_ = 0;
  Eigen::Matrix3Xd centers_;
  Eigen::Matrix3Xi lattice_;
  std::vector<Eigen::Index> cube_to_cell_;
  Eigen::VectorXd log_mass_;
  double log_evidence_ = 0.0;
};

/// log(sum(exp(v))) over a fixed left-to-right order; -inf entries are skipped.
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace bayestomo
