#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "uavdep/channel.hpp"
#include "uavdep/geometry.hpp"
#include "uavdep/tessellation.hpp"

namespace uavdep {

inline unsigned long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// eta_m = m * (m!)^(-1/m), the tail-approximation constant of the
/// normalized gamma distribution.
inline double eta_constant(int m) {
  double fact = 1.0;
  for (int i = 2; i <= m; ++i) fact *= i;
  return m * std::pow(fact, -1.0 / m);
}

struct CoverageParams {
  ChannelEnvironment env;
  double eta_los = 0.0;
  double eta_nlos = 0.0;

  CoverageParams() = default;
  explicit CoverageParams(const ChannelEnvironment& e)
      : env(e),
        eta_los(eta_constant(e.m_los)),
        eta_nlos(eta_constant(e.m_nlos)) {
    env.validate();
  }

  double eta(LinkCondition q) const {
    return q == LinkCondition::LoS ? eta_los : eta_nlos;
  }
};

namespace detail {

constexpr std::array<LinkCondition, 2> kConditions = {LinkCondition::LoS,
                                                      LinkCondition::NLoS};

/// Per-link geometry with position derivatives of the 3D distance and the
/// elevation angle with respect to the UAV coordinates. The horizontal
/// angle derivative is set to zero directly overhead (radial symmetry).
struct LinkGeometry {
  double d = 0.0;
  double theta = 0.0;
  double p_los = 0.0;
  double dp_los_dtheta = 0.0;
  std::array<double, 3> dd_du{};
  std::array<double, 3> dtheta_du{};

  LinkGeometry(const UavPosition& uav, const GroundPoint& ue,
               const ChannelEnvironment& env) {
    const double dx = uav.x - ue.x;
    const double dy = uav.y - ue.y;
    const double z = uav.altitude;
    const double r = std::hypot(dx, dy);
    d = std::hypot(r, z);
    if (d == 0.0)
      throw std::invalid_argument("LinkGeometry: UAV coincides with UE");
    theta = (r == 0.0) ? std::numbers::pi / 2.0 : std::asin(z / d);
    dd_du = {dx / d, dy / d, z / d};
    if (r > 0.0) {
      dtheta_du = {-z * dx / (d * d * r), -z * dy / (d * d * r), r / (d * d)};
    } else {
      dtheta_du = {0.0, 0.0, 0.0};
    }
    p_los = los_probability(theta, env);
    dp_los_dtheta =
        env.b0 * (180.0 / std::numbers::pi) * p_los * (1.0 - p_los);
  }

  double condition_prob(LinkCondition q) const {
    return q == LinkCondition::LoS ? p_los : 1.0 - p_los;
  }
  double condition_prob_dtheta(LinkCondition q) const {
    return q == LinkCondition::LoS ? dp_los_dtheta : -dp_los_dtheta;
  }
};

/// One interferer's factor of the interference Laplace transform,
///   g(s) = sum_q P(q; theta) (1 + s l_q / m_q)^(-m_q),
/// with its s-derivative and UAV-position gradient at fixed s.
struct InterfererFactor {
  LinkGeometry geo;
  std::array<double, 2> loss{};       // l_q(d)
  std::array<double, 2> dloss_dd{};   // dl_q/dd

  InterfererFactor(const UavPosition& uav, const GroundPoint& ue,
                   const ChannelEnvironment& env)
      : geo(uav, ue, env) {
    for (std::size_t qi = 0; qi < 2; ++qi) {
      const LinkCondition q = kConditions[qi];
      loss[qi] = path_loss(geo.d, q, env);
      dloss_dd[qi] = -env.alpha(q) * loss[qi] / (env.epsilon0 + geo.d);
    }
  }

  double value(double s, const ChannelEnvironment& env) const {
    double g = 0.0;
    for (std::size_t qi = 0; qi < 2; ++qi) {
      const LinkCondition q = kConditions[qi];
      const int m = env.m(q);
      g += geo.condition_prob(q) * std::pow(1.0 + s * loss[qi] / m, -m);
    }
    return g;
  }

  double dvalue_ds(double s, const ChannelEnvironment& env) const {
    double g = 0.0;
    for (std::size_t qi = 0; qi < 2; ++qi) {
      const LinkCondition q = kConditions[qi];
      const int m = env.m(q);
      g -= geo.condition_prob(q) * loss[qi] *
           std::pow(1.0 + s * loss[qi] / m, -m - 1);
    }
    return g;
  }

  std::array<double, 3> dvalue_du(double s,
                                  const ChannelEnvironment& env) const {
    std::array<double, 3> g{};
    for (std::size_t qi = 0; qi < 2; ++qi) {
      const LinkCondition q = kConditions[qi];
      const int m = env.m(q);
      const double pw = std::pow(1.0 + s * loss[qi] / m, -m);
      const double pw1 = std::pow(1.0 + s * loss[qi] / m, -m - 1);
      const double dp = geo.condition_prob_dtheta(q);
      const double p = geo.condition_prob(q);
      for (int c = 0; c < 3; ++c) {
        g[c] += dp * geo.dtheta_du[c] * pw -
                p * s * pw1 * dloss_dd[qi] * geo.dd_du[c];
      }
    }
    return g;
  }
};

}  // namespace detail

/// Laplace transform of the interference seen by a UE served by
/// `serving`, evaluated at s >= 0. Equals 1 for a single UAV.
inline double interference_laplace(const UavDeployment& deployment,
                                   std::size_t serving, const GroundPoint& ue,
                                   double s, const CoverageParams& params) {
  if (s < 0.0) throw std::invalid_argument("interference_laplace: s < 0");
  double out = 1.0;
  for (std::size_t j = 0; j < deployment.size(); ++j) {
    if (j == serving) continue;
    detail::InterfererFactor f(deployment[j], ue, params.env);
    out *= f.value(s, params.env);
  }
  return out;
}

/// Closed-form coverage approximation before clamping: the LoS/NLoS
/// mixture of alternating binomial sums over the interference Laplace
/// transform.
inline double coverage_probability_raw(const UavDeployment& deployment,
                                       std::size_t serving,
                                       const GroundPoint& ue,
                                       const CoverageParams& params) {
  const ChannelEnvironment& env = params.env;
  detail::LinkGeometry geo(deployment[serving], ue, env);

  std::vector<detail::InterfererFactor> interferers;
  interferers.reserve(deployment.size());
  for (std::size_t j = 0; j < deployment.size(); ++j) {
    if (j == serving) continue;
    interferers.emplace_back(deployment[j], ue, env);
  }

  double total = 0.0;
  for (const LinkCondition q0 : detail::kConditions) {
    const int m0 = env.m(q0);
    const double l0 = path_loss(geo.d, q0, env);
    const double gamma = params.eta(q0) * env.theta_threshold / l0;
    double inner = 0.0;
    for (int k = 1; k <= m0; ++k) {
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      const double s = k * gamma;
      double laplace = 1.0;
      for (const auto& f : interferers) laplace *= f.value(s, env);
      inner += sign * static_cast<double>(binomial(m0, k)) *
               std::exp(-k * env.sigma * gamma) * laplace;
    }
    total += geo.condition_prob(q0) * inner;
  }
  return total;
}

inline double coverage_probability(const UavDeployment& deployment,
                                   std::size_t serving, const GroundPoint& ue,
                                   const CoverageParams& params) {
  return std::clamp(
      coverage_probability_raw(deployment, serving, ue, params), 0.0, 1.0);
}

/// Analytic gradient of the coverage approximation with respect to every
/// UAV position; returns a 3U vector laid out [u0.x u0.y u0.z u1.x ...].
inline std::vector<double> coverage_gradient(const UavDeployment& deployment,
                                             std::size_t serving,
                                             const GroundPoint& ue,
                                             const CoverageParams& params) {
  const ChannelEnvironment& env = params.env;
  const std::size_t u_count = deployment.size();
  std::vector<double> grad(3 * u_count, 0.0);

  detail::LinkGeometry geo(deployment[serving], ue, env);

  std::vector<std::size_t> idx;  // interferer -> UAV index
  std::vector<detail::InterfererFactor> interferers;
  interferers.reserve(u_count);
  for (std::size_t j = 0; j < u_count; ++j) {
    if (j == serving) continue;
    idx.push_back(j);
    interferers.emplace_back(deployment[j], ue, env);
  }

  for (const LinkCondition q0 : detail::kConditions) {
    const int m0 = env.m(q0);
    const double l0 = path_loss(geo.d, q0, env);
    const double dl0_dd = -env.alpha(q0) * l0 / (env.epsilon0 + geo.d);
    const double gamma = params.eta(q0) * env.theta_threshold / l0;
    const double dgamma_dd = -gamma / l0 * dl0_dd;
    const double p0 = geo.condition_prob(q0);
    const double dp0_dtheta = geo.condition_prob_dtheta(q0);

    double inner = 0.0;        // sum over k of the alternating terms
    double dinner_dgamma = 0.0;
    for (int k = 1; k <= m0; ++k) {
      const double w = ((k % 2 == 1) ? 1.0 : -1.0) *
                       static_cast<double>(binomial(m0, k));
      const double s = k * gamma;
      const double e = std::exp(-k * env.sigma * gamma);

      double laplace = 1.0;
      for (const auto& f : interferers) laplace *= f.value(s, env);

      inner += w * e * laplace;

      // chain rule through s = k*gamma inside every Laplace factor
      double dlog_laplace_ds = 0.0;
      for (const auto& f : interferers)
        dlog_laplace_ds += f.dvalue_ds(s, env) / f.value(s, env);
      dinner_dgamma +=
          w * e * laplace * (-k * env.sigma + k * dlog_laplace_ds);

      // interferer blocks: fixed s, moving u_j through its own factor
      for (std::size_t n = 0; n < interferers.size(); ++n) {
        const auto& f = interferers[n];
        const double rest = laplace / f.value(s, env);
        const auto dg = f.dvalue_du(s, env);
        for (int c = 0; c < 3; ++c)
          grad[3 * idx[n] + c] += p0 * w * e * rest * dg[c];
      }
    }

    // serving block: condition mixture and gamma both move with u_i
    for (int c = 0; c < 3; ++c) {
      grad[3 * serving + c] +=
          dp0_dtheta * geo.dtheta_du[c] * inner +
          p0 * dinner_dgamma * dgamma_dd * geo.dd_du[c];
    }
  }
  return grad;
}

/// Cell-local objective gradient: midpoint quadrature of the coverage
/// gradient against the intensity field over the cells owned by `uav`.
/// Zero vector when the UAV owns no cells.
inline std::vector<double> local_gradient_f(const UavDeployment& deployment,
                                            std::size_t uav,
                                            const CellAssignment& assignment,
                                            const IntensityGrid& intensity,
                                            const GroundGrid& grid,
                                            const CoverageParams& params) {
  std::vector<double> out(3 * deployment.size(), 0.0);
  const double area = grid.cell_area();
  for (int row = 0; row < grid.ny; ++row) {
    for (int col = 0; col < grid.nx; ++col) {
      if (assignment.at(row, col) != static_cast<int>(uav)) continue;
      const double lam = intensity.at(row, col);
      if (lam == 0.0) continue;
      const GroundPoint y = grid.center(row, col);
      const std::vector<double> g =
          coverage_gradient(deployment, uav, y, params);
      for (std::size_t c = 0; c < out.size(); ++c)
        out[c] += g[c] * lam * area;
    }
  }
  return out;
}

/// Expected number of covered users: sum over cells of coverage
/// probability times intensity times cell area.
inline double total_coverage(const UavDeployment& deployment,
                             const CellAssignment& assignment,
                             const IntensityGrid& intensity,
                             const GroundGrid& grid,
                             const CoverageParams& params) {
  double total = 0.0;
  const double area = grid.cell_area();
  for (int row = 0; row < grid.ny; ++row) {
    for (int col = 0; col < grid.nx; ++col) {
      const double lam = intensity.at(row, col);
      if (lam == 0.0) continue;
      const GroundPoint y = grid.center(row, col);
      const std::size_t serving = assignment.at(row, col);
      total += coverage_probability(deployment, serving, y, params) * lam * area;
    }
  }
  return total;
}

}  // namespace uavdep
