#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "uavdep/geometry.hpp"
#include "uavdep/rng.hpp"
#include "uavdep/tessellation.hpp"

namespace uavdep {

/// One UAV's local push-sum variables. All vectors have length 3U; the
/// i-th 3-block of `pseudo` is the UAV's own flight position.
struct PushSumNodeState {
  std::vector<double> pseudo;  // u^[i] = mass / weight
  std::vector<double> mass;    // w^[i]
  std::vector<double> share;   // xi^[i]
  double weight = 1.0;         // phi^[i], always > 0
};

struct StepSchedule {
  double a0 = 1.0;
  double nu = 0.55;

  void validate() const {
    if (a0 <= 0.0) throw std::invalid_argument("StepSchedule: a0 must be > 0");
    if (nu <= 0.5 || nu >= 1.0)
      throw std::invalid_argument("StepSchedule: nu must lie in (1/2, 1)");
  }
};

inline double step_size(long t, const StepSchedule& schedule) {
  return schedule.a0 * std::pow(static_cast<double>(t) + 1.0, -schedule.nu);
}

struct PerturbationConfig {
  bool enabled = true;
  double scale = 1.0;
  bool anneal = false;  // multiply the draw by the current step size
};

/// Flight box with the push-back gain used outside it.
struct ConstraintBox {
  FlightBox box;
  double push_gain = 1.0;  // J

  bool contains_all(const std::vector<double>& pseudo) const {
    for (std::size_t i = 0; 3 * i < pseudo.size(); ++i) {
      UavPosition p{pseudo[3 * i], pseudo[3 * i + 1], pseudo[3 * i + 2]};
      if (!box.contains(p)) return false;
    }
    return true;
  }

  std::vector<double> project(const std::vector<double>& pseudo) const {
    std::vector<double> out(pseudo.size());
    for (std::size_t i = 0; 3 * i < pseudo.size(); ++i) {
      UavPosition p = box.clamp(
          {pseudo[3 * i], pseudo[3 * i + 1], pseudo[3 * i + 2]});
      out[3 * i] = p.x;
      out[3 * i + 1] = p.y;
      out[3 * i + 2] = p.altitude;
    }
    return out;
  }
};

struct StepOptions {
  bool freeze_altitude = false;  // zero the vertical drive components
};

/// Evaluates f_i at a pseudo deployment known to lie inside the box.
using GradientProvider = std::function<std::vector<double>(
    std::size_t node, const UavDeployment& pseudo)>;

inline UavDeployment deployment_from_vector(const std::vector<double>& v) {
  UavDeployment d;
  d.positions.resize(v.size() / 3);
  for (std::size_t i = 0; i < d.positions.size(); ++i)
    d.positions[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
  return d;
}

/// Common broadcast initialization: everyone starts from the true
/// concatenated positions with unit weight, so consensus holds at t = 0.
inline std::vector<PushSumNodeState> init_states(
    const UavDeployment& deployment) {
  if (deployment.size() < 1)
    throw std::invalid_argument("init_states: empty deployment");
  std::vector<double> flat(3 * deployment.size());
  for (std::size_t i = 0; i < deployment.size(); ++i) {
    flat[3 * i] = deployment[i].x;
    flat[3 * i + 1] = deployment[i].y;
    flat[3 * i + 2] = deployment[i].altitude;
  }
  std::vector<PushSumNodeState> states(deployment.size());
  for (auto& s : states) {
    s.pseudo = flat;
    s.mass = flat;
    s.share = flat;
    s.weight = 1.0;
  }
  return states;
}

/// Constrained gradient extension: the local gradient inside the box,
/// a unit push of magnitude J toward the box projection outside it.
inline std::vector<double> extended_gradient(std::size_t node,
                                             const std::vector<double>& pseudo,
                                             const ConstraintBox& cbox,
                                             const GradientProvider& provider) {
  if (cbox.contains_all(pseudo))
    return provider(node, deployment_from_vector(pseudo));
  const std::vector<double> proj = cbox.project(pseudo);
  double norm = 0.0;
  for (std::size_t c = 0; c < pseudo.size(); ++c) {
    const double d = proj[c] - pseudo[c];
    norm += d * d;
  }
  norm = std::sqrt(norm);
  std::vector<double> out(pseudo.size(), 0.0);
  if (norm == 0.0) return out;  // on the boundary, nothing to push
  for (std::size_t c = 0; c < pseudo.size(); ++c)
    out[c] = cbox.push_gain * (proj[c] - pseudo[c]) / norm;
  return out;
}

struct ConsensusDiagnostics {
  double max_disagreement = 0.0;  // max pairwise inf-norm of pseudo vectors
  double mass_total = 0.0;        // sum of weights
};

inline ConsensusDiagnostics consensus_diagnostics(
    const std::vector<PushSumNodeState>& states) {
  if (states.empty())
    throw std::invalid_argument("consensus_diagnostics: no states");
  ConsensusDiagnostics out;
  for (const auto& s : states) out.mass_total += s.weight;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      for (std::size_t c = 0; c < states[i].pseudo.size(); ++c) {
        out.max_disagreement = std::max(
            out.max_disagreement,
            std::abs(states[i].pseudo[c] - states[j].pseudo[c]));
      }
    }
  }
  return out;
}

/// One synchronous push-sum round. Phase 1 reads the published
/// (share/degree, weight/degree) messages of time t; phase 2 folds them,
/// applies the perturbed gradient drive, and extracts the new actual
/// positions (own blocks, hard-clamped to the box).
inline UavDeployment step(std::vector<PushSumNodeState>& states,
                          const NeighborGraph& graph, long t,
                          const StepSchedule& schedule,
                          const PerturbationConfig& perturb,
                          const ConstraintBox& cbox,
                          const GradientProvider& provider,
                          const StepOptions& opts, Rng& rng) {
  const std::size_t u_count = states.size();
  if (graph.num_nodes != static_cast<int>(u_count))
    throw std::invalid_argument("step: graph/state size mismatch");
  const std::size_t dim = states[0].pseudo.size();
  const double a = step_size(t + 1, schedule);

  std::vector<std::vector<double>> new_mass(u_count,
                                            std::vector<double>(dim, 0.0));
  std::vector<double> new_weight(u_count, 0.0);
  for (std::size_t i = 0; i < u_count; ++i) {
    for (std::size_t j = 0; j < u_count; ++j) {
      if (!graph.connected(static_cast<int>(i), static_cast<int>(j))) continue;
      const double inv_deg = 1.0 / graph.degrees[j];
      for (std::size_t c = 0; c < dim; ++c)
        new_mass[i][c] += states[j].share[c] * inv_deg;
      new_weight[i] += states[j].weight * inv_deg;
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  UavDeployment actual;
  actual.positions.resize(u_count);
  for (std::size_t i = 0; i < u_count; ++i) {
    if (new_weight[i] < 1e-300)
      throw std::runtime_error("push-sum weight underflow at node " +
                               std::to_string(i));
    states[i].mass = std::move(new_mass[i]);
    states[i].weight = new_weight[i];
    for (std::size_t c = 0; c < dim; ++c)
      states[i].pseudo[c] = states[i].mass[c] / states[i].weight;

    std::vector<double> drive =
        extended_gradient(i, states[i].pseudo, cbox, provider);
    if (perturb.enabled) {
      const double kscale = perturb.scale * (perturb.anneal ? a : 1.0);
      for (std::size_t c = 0; c < dim; ++c) drive[c] += kscale * normal(rng);
    }
    if (opts.freeze_altitude)
      for (std::size_t c = 2; c < dim; c += 3) drive[c] = 0.0;

    states[i].share = states[i].mass;
    for (std::size_t c = 0; c < dim; ++c)
      states[i].share[c] += a * drive[c];

    actual.positions[i] = cbox.box.clamp({states[i].pseudo[3 * i],
                                          states[i].pseudo[3 * i + 1],
                                          states[i].pseudo[3 * i + 2]});
  }
  return actual;
}

}  // namespace uavdep
