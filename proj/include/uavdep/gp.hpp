#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavdep/geometry.hpp"

namespace uavdep {

struct GpParams {
  double mu = 100.0;       // prior mean intensity
  double a0 = 10.0;        // kernel amplitude
  double a1 = 500.0 * 500.0;  // kernel length-scale squared (m^2)
  double jitter = 1e-7;    // diagonal regularizer, default 1e-8 * a0

  void validate() const {
    if (a0 <= 0.0 || a1 <= 0.0)
      throw std::invalid_argument("GpParams: a0 and a1 must be > 0");
    if (jitter < 0.0)
      throw std::invalid_argument("GpParams: jitter must be >= 0");
  }
};

struct SensorNetwork {
  std::vector<GroundPoint> positions;
  std::vector<double> observations;

  void validate() const {
    if (positions.empty())
      throw std::invalid_argument("SensorNetwork: needs at least one sensor");
    if (positions.size() != observations.size())
      throw std::invalid_argument("SensorNetwork: positions/observations size mismatch");
  }
};

/// Gaussian covariance kernel a0 * exp(-||p-q||^2 / a1).
inline double gp_kernel(const GroundPoint& p, const GroundPoint& q,
                        const GpParams& params) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  return params.a0 * std::exp(-(dx * dx + dy * dy) / params.a1);
}

struct GpEstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Factorized GP posterior over a fixed sensor layout. The sensor matrix
/// is decomposed once and reused for every query point.
class GpPosterior {
 public:
  GpPosterior(const SensorNetwork& sensors, const GpParams& params)
      : sensors_(sensors), params_(params) {
    sensors.validate();
    params.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(sensors.positions.size());
    Eigen::MatrixXd k_g(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        k_g(a, b) = gp_kernel(sensors.positions[a], sensors.positions[b], params);
    k_g.diagonal().array() += params.jitter;
    llt_.compute(k_g);
    if (llt_.info() != Eigen::Success) {
      // crude conditioning hint from the diagonal spread
      const double dmax = k_g.diagonal().maxCoeff();
      const double dmin = k_g.diagonal().minCoeff();
      throw GpEstimationError(
          "GP sensor matrix is not positive definite (diag ratio " +
          std::to_string(dmax / std::max(dmin, 1e-300)) +
          "); increase jitter or separate sensors");
    }
    Eigen::VectorXd centered(n);
    for (Eigen::Index a = 0; a < n; ++a)
      centered(a) = sensors.observations[a] - params.mu;
    alpha_ = llt_.solve(centered);
  }

  /// Posterior mean of the intensity at y.
  double mean(const GroundPoint& y) const {
    const Eigen::Index n = alpha_.size();
    double out = params_.mu;
    for (Eigen::Index a = 0; a < n; ++a)
      out += gp_kernel(sensors_.positions[a], y, params_) * alpha_(a);
    return out;
  }

  /// Posterior variance at y; diagnostic only, unused by the optimizer.
  double variance(const GroundPoint& y) const {
    const Eigen::Index n = alpha_.size();
    Eigen::VectorXd k_y(n);
    for (Eigen::Index a = 0; a < n; ++a)
      k_y(a) = gp_kernel(sensors_.positions[a], y, params_);
    return gp_kernel(y, y, params_) - k_y.dot(llt_.solve(k_y));
  }

 private:
  SensorNetwork sensors_;
  GpParams params_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

inline double posterior_mean(const GroundPoint& y, const SensorNetwork& sensors,
                             const GpParams& params) {
  return GpPosterior(sensors, params).mean(y);
}

/// Posterior mean at every grid center, clamped below at zero.
inline IntensityGrid estimate_field(const SensorNetwork& sensors,
                                    const GroundGrid& grid,
                                    const GpParams& params) {
  GpPosterior posterior(sensors, params);
  IntensityGrid out(grid.nx, grid.ny);
  for (int row = 0; row < grid.ny; ++row)
    for (int col = 0; col < grid.nx; ++col)
      out.at(row, col) = std::max(0.0, posterior.mean(grid.center(row, col)));
  return out;
}

}  // namespace uavdep
