#include "bayestomo/bloch_grid.hpp"

#include <limits>

#include "bayestomo/errors.hpp"

namespace bayestomo {

double log_sum_exp(const Eigen::VectorXd& v) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double top = kNegInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) top = std::max(top, v[i]);
  if (top == kNegInf) return kNegInf;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != kNegInf) s += std::exp(v[i] - top);
  }
  return top + std::log(s);
}

BlochGrid::BlochGrid(int resolution) : resolution_(resolution) {
  if (resolution < 3) throw DomainError("Bloch grid resolution must be >= 3");
  const std::size_t m = static_cast<std::size_t>(resolution);
  cube_to_cell_.assign(m * m * m, -1);
  std::vector<Eigen::Vector3d> pts;
  std::vector<Eigen::Vector3i> idx;
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      for (int k = 0; k < resolution; ++k) {
        const Eigen::Vector3d c(node(i), node(j), node(k));
        if (c.squaredNorm() > 1.0 + 1e-12) continue;
        cube_to_cell_[(i * m + j) * m + k] = static_cast<Eigen::Index>(pts.size());
        pts.push_back(c);
        idx.emplace_back(i, j, k);
      }
    }
  }
  centers_.resize(3, static_cast<Eigen::Index>(pts.size()));
  lattice_.resize(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t c = 0; c < pts.size(); ++c) {
    centers_.col(static_cast<Eigen::Index>(c)) = pts[c];
    lattice_.col(static_cast<Eigen::Index>(c)) = idx[c];
  }
  log_mass_ = Eigen::VectorXd::Constant(centers_.cols(),
                                        -std::log(static_cast<double>(pts.size())));
}

BlochGrid BlochGrid::uniform(int resolution) { return BlochGrid(resolution); }

BlochGrid BlochGrid::from_density(
    int resolution, const std::function<double(const Eigen::Vector3d&)>& density) {
  BlochGrid g(resolution);
  const double h = g.spacing();
  Eigen::VectorXd log_mass(g.size());
  for (Eigen::Index c = 0; c < g.size(); ++c) {
    const Eigen::Vector3d centre = g.centers_.col(c);
    double d = density(centre);
    if (!std::isfinite(d)) {
      d = 0.0;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          for (int e = 0; e < 4; ++e) {
            const Eigen::Vector3d off((a - 1.5) / 4.0, (b - 1.5) / 4.0, (e - 1.5) / 4.0);
            d += density(centre + h * off);
          }
        }
      }
      d /= 64.0;
    }
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw DomainError("prior density must be finite and nonnegative");
    }
    log_mass[c] = d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
  }
  const double total = log_sum_exp(log_mass);
  if (total == -std::numeric_limits<double>::infinity()) {
    throw DomainError("prior has no mass on the grid");
  }
  g.log_mass_ = log_mass.array() - total;
  return g;
}

Eigen::Index BlochGrid::locate(const Eigen::Vector3d& p) const {
  const double h = spacing();
  Eigen::Vector3i ijk;
  for (int a = 0; a < 3; ++a) {
    const long i = std::lround((p[a] + 1.0) / h);
    if (i < 0 || i >= resolution_) return -1;
    ijk[a] = static_cast<int>(i);
  }
  const std::size_t m = static_cast<std::size_t>(resolution_);
  return cube_to_cell_[(ijk[0] * m + ijk[1]) * m + ijk[2]];
}

Eigen::VectorXd BlochGrid::marginal(int axis) const {
  if (axis < 0 || axis > 2) throw DomainError("axis index must be 0, 1 or 2");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(resolution_);
  for (Eigen::Index c = 0; c < size(); ++c) {
    out[lattice_(axis, c)] += std::exp(log_mass_[c]);
  }
  return out;
}

BlochGrid BlochGrid::reweighted(const Eigen::VectorXd& log_factor) const {
  if (log_factor.size() != size()) throw DomainError("reweighting size mismatch");
  BlochGrid out = *this;
  Eigen::VectorXd lm = log_mass_ + log_factor;
  const double top = lm.maxCoeff();
  if (top == -std::numeric_limits<double>::infinity() || std::isnan(top)) {
    throw ImpossibleData("data impossible under prior support");
  }
  // shift by the maximum first so large |top| does not cost precision
  lm.array() -= top;
  const double rest = log_sum_exp(lm);
  out.log_mass_ = lm.array() - rest;
  out.log_evidence_ = log_evidence_ + top + rest;
  return out;
}

}  // namespace bayestomo
