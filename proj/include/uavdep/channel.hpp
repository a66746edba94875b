#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "uavdep/geometry.hpp"
#include "uavdep/rng.hpp"

namespace uavdep {

enum class LinkCondition { LoS, NLoS };

/// Air-to-ground propagation constants for one environment class.
/// All powers are linear and normalized to unit transmit power.
struct ChannelEnvironment {
  double b0 = 0.16;   // LoS sigmoid steepness
  double b1 = 9.61;   // LoS sigmoid offset (degrees)
  double alpha_los = 2.0;
  double alpha_nlos = 3.0;
  double beta_los = 0.092;
  double beta_nlos = 0.035;
  double epsilon0 = 1.0;        // meters, removes the d=0 singularity
  int m_los = 3;
  int m_nlos = 2;
  double sigma = 1e-7;          // normalized linear noise power
  double theta_threshold = 1.0; // linear SINR threshold

  void validate() const {
    if (b0 <= 0.0 || b1 <= 0.0)
      throw std::invalid_argument("ChannelEnvironment: b0, b1 must be > 0");
    if (alpha_los < 2.0 || alpha_nlos < 2.0)
      throw std::invalid_argument("ChannelEnvironment: path-loss exponents must be >= 2");
    if (beta_los <= 0.0 || beta_nlos <= 0.0)
      throw std::invalid_argument("ChannelEnvironment: reference gains must be > 0");
    if (epsilon0 <= 0.0)
      throw std::invalid_argument("ChannelEnvironment: epsilon0 must be > 0");
    if (m_los < 1 || m_nlos < 1)
      throw std::invalid_argument("ChannelEnvironment: Nakagami shapes must be integers >= 1");
    if (sigma < 0.0)
      throw std::invalid_argument("ChannelEnvironment: sigma must be >= 0");
    if (theta_threshold <= 0.0)
      throw std::invalid_argument("ChannelEnvironment: SINR threshold must be > 0");
  }

  double alpha(LinkCondition q) const {
    return q == LinkCondition::LoS ? alpha_los : alpha_nlos;
  }
  double beta(LinkCondition q) const {
    return q == LinkCondition::LoS ? beta_los : beta_nlos;
  }
  int m(LinkCondition q) const {
    return q == LinkCondition::LoS ? m_los : m_nlos;
  }
};

/// Named environment presets; (b0, b1) pairs per class, shared radio
/// constants otherwise.
inline ChannelEnvironment channel_preset(const std::string& name) {
  ChannelEnvironment env;
  if (name == "suburban") {
    env.b0 = 0.43;
    env.b1 = 4.88;
  } else if (name == "urban") {
    env.b0 = 0.16;
    env.b1 = 9.61;
  } else if (name == "dense-urban") {
    env.b0 = 0.11;
    env.b1 = 12.08;
  } else {
    throw std::invalid_argument("unknown channel preset: " + name);
  }
  return env;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Elevation angle from a ground point up to a UAV, in [0, pi/2].
/// Directly overhead gives pi/2; a UAV at the ground point with zero
/// altitude has no defined angle.
inline double elevation_angle(const UavPosition& uav, const GroundPoint& ue) {
  if (uav.altitude < 0.0)
    throw std::invalid_argument("elevation_angle: negative altitude");
  const double d = distance3d(uav, ue);
  if (d == 0.0)
    throw std::invalid_argument("elevation_angle: UAV coincides with UE");
  const double r = horizontal_distance(uav, ue);
  if (r == 0.0) return std::numbers::pi / 2.0;
  return std::asin(uav.altitude / d);
}

/// Probability of a line-of-sight link at elevation angle theta (radians).
inline double los_probability(double theta, const ChannelEnvironment& env) {
  const double theta_deg = theta * 180.0 / std::numbers::pi;
  return 1.0 / (1.0 + env.b1 * std::exp(-env.b0 * (theta_deg - env.b1)));
}

inline double nlos_probability(double theta, const ChannelEnvironment& env) {
  return 1.0 - los_probability(theta, env);
}

inline double condition_probability(LinkCondition q, double theta,
                                    const ChannelEnvironment& env) {
  return q == LinkCondition::LoS ? los_probability(theta, env)
                                 : nlos_probability(theta, env);
}

/// Linear path-loss gain beta_q (eps0 + d)^(-alpha_q).
inline double path_loss(double d, LinkCondition q,
                        const ChannelEnvironment& env) {
  return env.beta(q) * std::pow(env.epsilon0 + d, -env.alpha(q));
}

/// Mean signal power: LoS/NLoS mixture of the two path-loss values.
inline double mean_signal_power(const UavPosition& uav, const GroundPoint& ue,
                                const ChannelEnvironment& env) {
  const double theta = elevation_angle(uav, ue);
  const double d = distance3d(uav, ue);
  const double p_los = los_probability(theta, env);
  return p_los * path_loss(d, LinkCondition::LoS, env) +
         (1.0 - p_los) * path_loss(d, LinkCondition::NLoS, env);
}

/// Nakagami-m power gain: gamma with shape m_q and unit mean.
inline double sample_fading(LinkCondition q, const ChannelEnvironment& env,
                            Rng& rng) {
  const int m = env.m(q);
  std::gamma_distribution<double> dist(static_cast<double>(m), 1.0 / m);
  return dist(rng);
}

}  // namespace uavdep
