#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavdep/channel.hpp"
#include "uavdep/coverage.hpp"
#include "uavdep/geometry.hpp"
#include "uavdep/gp.hpp"
#include "uavdep/pushsum.hpp"
#include "uavdep/rng.hpp"
#include "uavdep/tessellation.hpp"

namespace uavdep {

/// Elliptical region of elevated intensity; the center translates by the
/// velocity vector once per sensing period.
struct Hotspot {
  GroundPoint center;
  double semi_x = 0.0;
  double semi_y = 0.0;
  double multiplier = 10.0;  // intensity is multiplier * mu inside
  double vel_x = 0.0;        // meters per sensing period
  double vel_y = 0.0;
};

/// One draw of the true intensity field: multivariate Gaussian with the
/// GP kernel as covariance over grid centers, clamped at zero.
inline IntensityGrid generate_true_intensity(const GroundGrid& grid,
                                             const GpParams& gp,
                                             std::uint64_t seed) {
  gp.validate();
  const int n = grid.num_cells();
  Eigen::MatrixXd cov(n, n);
  for (int a = 0; a < n; ++a) {
    const GroundPoint pa = grid.center(a / grid.nx, a % grid.nx);
    for (int b = 0; b < n; ++b) {
      const GroundPoint pb = grid.center(b / grid.nx, b % grid.nx);
      cov(a, b) = gp_kernel(pa, pb, gp);
    }
  }
  // The Gaussian kernel Gram matrix is numerically rank-deficient;
  // escalate the diagonal until the factorization succeeds.
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = std::max(gp.jitter, 1e-12 * gp.a0);
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 12)
      throw std::runtime_error(
          "generate_true_intensity: covariance factorization failed; "
          "increase the GP jitter");
    jitter *= 10.0;
  }
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int a = 0; a < n; ++a) z(a) = normal(rng);
  const Eigen::VectorXd sample = llt.matrixL() * z;
  IntensityGrid out(grid.nx, grid.ny);
  for (int a = 0; a < n; ++a)
    out.values[a] = std::max(0.0, gp.mu + sample(a));
  return out;
}

/// Overwrites the field with multiplier * mu inside each (k-translated)
/// ellipse; regions outside the grid are clipped.
inline IntensityGrid apply_hotspots(const IntensityGrid& field,
                                    const std::vector<Hotspot>& hotspots,
                                    int period, const GroundGrid& grid,
                                    double mu) {
  IntensityGrid out = field;
  for (const Hotspot& h : hotspots) {
    if (h.semi_x <= 0.0 || h.semi_y <= 0.0)
      throw std::invalid_argument("apply_hotspots: semi-axes must be > 0");
    const double cx = h.center.x + h.vel_x * period;
    const double cy = h.center.y + h.vel_y * period;
    for (int row = 0; row < grid.ny; ++row) {
      for (int col = 0; col < grid.nx; ++col) {
        const GroundPoint p = grid.center(row, col);
        const double ex = (p.x - cx) / h.semi_x;
        const double ey = (p.y - cy) / h.semi_y;
        if (ex * ex + ey * ey <= 1.0)
          out.at(row, col) = h.multiplier * mu;
      }
    }
  }
  return out;
}

/// Empirical P(SINR > threshold): per draw, one link condition and one
/// Nakagami gain per UAV, then the SINR of the serving link.
inline double monte_carlo_coverage(const UavDeployment& deployment,
                                   std::size_t serving, const GroundPoint& ue,
                                   const CoverageParams& params, long samples,
                                   Rng& rng) {
  if (samples < 1)
    throw std::invalid_argument("monte_carlo_coverage: samples must be >= 1");
  const ChannelEnvironment& env = params.env;
  const std::size_t u_count = deployment.size();
  std::vector<double> p_los(u_count), dist(u_count);
  for (std::size_t j = 0; j < u_count; ++j) {
    p_los[j] = los_probability(elevation_angle(deployment[j], ue), env);
    dist[j] = distance3d(deployment[j], ue);
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  long covered = 0;
  for (long s = 0; s < samples; ++s) {
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t j = 0; j < u_count; ++j) {
      const LinkCondition q = uniform(rng) < p_los[j] ? LinkCondition::LoS
                                                      : LinkCondition::NLoS;
      const double power =
          sample_fading(q, env, rng) * path_loss(dist[j], q, env);
      if (j == serving)
        signal = power;
      else
        interference += power;
    }
    if (signal > env.theta_threshold * (interference + env.sigma)) ++covered;
  }
  return static_cast<double>(covered) / samples;
}

/// Total coverage against the true intensity field, with the partition
/// recomputed from the deployment.
inline double true_total_coverage(const UavDeployment& deployment,
                                  const IntensityGrid& true_field,
                                  const GroundGrid& grid,
                                  const CoverageParams& params) {
  const CellAssignment assignment =
      assign_cells(deployment, grid, params.env);
  return total_coverage(deployment, assignment, true_field, grid, params);
}

/// High-cost variant replacing the closed form with per-cell Monte Carlo.
inline double true_total_coverage_mc(const UavDeployment& deployment,
                                     const IntensityGrid& true_field,
                                     const GroundGrid& grid,
                                     const CoverageParams& params,
                                     long samples_per_cell, Rng& rng) {
  const CellAssignment assignment =
      assign_cells(deployment, grid, params.env);
  double total = 0.0;
  const double area = grid.cell_area();
  for (int row = 0; row < grid.ny; ++row) {
    for (int col = 0; col < grid.nx; ++col) {
      const double lam = true_field.at(row, col);
      if (lam == 0.0) continue;
      const GroundPoint y = grid.center(row, col);
      total += monte_carlo_coverage(deployment, assignment.at(row, col), y,
                                    params, samples_per_cell, rng) *
               lam * area;
    }
  }
  return total;
}

enum class InitialLayout { UniformLattice, Centered, Explicit };

struct Scenario {
  std::string environment = "urban";  // preset name, or "custom" with env set
  ChannelEnvironment env = channel_preset("urban");
  double area_length = 5000.0;
  int grid_n = 50;
  GpParams gp;
  int num_uavs = 9;
  InitialLayout layout = InitialLayout::UniformLattice;
  std::vector<UavPosition> explicit_positions;
  double default_altitude = 200.0;
  double h_min = 10.0;
  double h_max = 1500.0;
  std::vector<Hotspot> hotspots;
  bool use_true_intensity = false;
  double sensor_ratio = 1.0;                  // r_GS
  std::vector<GroundPoint> sensor_positions;  // explicit override
  int steps_per_period = 60;  // T
  int num_periods = 1;        // K
  double step_a0 = 0.0;       // <= 0: calibrate from the first-step cap
  double step_nu = 0.55;
  double move_cap = 100.0;    // meters, bound on the first position change
  PerturbationConfig perturbation;
  double push_gain = 0.0;     // J, <= 0: calibrate from initial gradients
  bool freeze_altitude = false;
  std::uint64_t seed = 1;

  void validate() const {
    env.validate();
    gp.validate();
    if (num_uavs < 1) throw std::invalid_argument("Scenario: num_uavs >= 1");
    if (area_length <= 0.0 || grid_n < 1)
      throw std::invalid_argument("Scenario: bad area/grid");
    if (steps_per_period < 0 || num_periods < 1)
      throw std::invalid_argument("Scenario: bad schedule");
    if (sensor_ratio < 0.0 || sensor_ratio > 1.0)
      throw std::invalid_argument("Scenario: sensor_ratio in [0,1]");
    if (h_min < 0.0 || h_max <= h_min)
      throw std::invalid_argument("Scenario: bad altitude bounds");
    if (layout == InitialLayout::Explicit &&
        static_cast<int>(explicit_positions.size()) != num_uavs)
      throw std::invalid_argument("Scenario: explicit layout size mismatch");
  }
};

inline UavDeployment initial_deployment(const Scenario& sc) {
  UavDeployment d;
  switch (sc.layout) {
    case InitialLayout::UniformLattice: {
      const int m = static_cast<int>(std::ceil(std::sqrt(sc.num_uavs)));
      for (int i = 0; i < sc.num_uavs; ++i) {
        const int row = i / m;
        const int col = i % m;
        d.positions.push_back({(col + 0.5) * sc.area_length / m,
                               (row + 0.5) * sc.area_length / m,
                               sc.default_altitude});
      }
      break;
    }
    case InitialLayout::Centered: {
      const double cx = sc.area_length / 2.0;
      const double radius = 50.0;
      for (int i = 0; i < sc.num_uavs; ++i) {
        const double ang = 2.0 * std::numbers::pi * i / sc.num_uavs;
        d.positions.push_back({cx + radius * std::cos(ang),
                               cx + radius * std::sin(ang),
                               sc.default_altitude});
      }
      break;
    }
    case InitialLayout::Explicit:
      d.positions = sc.explicit_positions;
      break;
  }
  return d;
}

/// Draws sensor cells without replacement: a seeded shuffle of all grid
/// cells, keeping round(r_GS * num_cells) of them (at least one).
inline std::vector<GroundPoint> place_sensors(const GroundGrid& grid,
                                              double ratio,
                                              std::uint64_t seed) {
  const int n = grid.num_cells();
  std::vector<int> cells(n);
  std::iota(cells.begin(), cells.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  const int count = std::max(1, static_cast<int>(std::lround(ratio * n)));
  std::vector<GroundPoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(grid.center(cells[i] / grid.nx, cells[i] % grid.nx));
  return out;
}

struct StepRecord {
  long t = 0;
  double estimated_coverage = 0.0;
  double true_coverage = 0.0;
  double disagreement = 0.0;
  double phi_total = 0.0;
  std::vector<UavPosition> positions;
  std::vector<double> phis;
};

struct Snapshot {
  long t = 0;
  UavDeployment deployment;
  CellAssignment cells;
  IntensityGrid intensity_true;
  IntensityGrid intensity_estimated;
};

struct ExperimentResult {
  std::vector<StepRecord> log;
  std::vector<Snapshot> snapshots;
  UavDeployment final_deployment;
  double resolved_a0 = 0.0;
  double resolved_push_gain = 0.0;
};

namespace detail {

inline double vector_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double block_inf_norm(const std::vector<double>& v, std::size_t block) {
  double m = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    m = std::max(m, std::abs(v[3 * block + c]));
  return m;
}

}  // namespace detail

/// Runs the full sensing/optimization schedule: per period, read the
/// sensors against the current true field, estimate the intensity, then
/// advance T push-sum steps. Logs one record per time index 0..K*T.
inline ExperimentResult run_experiment(const Scenario& sc) {
  sc.validate();
  const GroundGrid grid = make_square_grid(sc.area_length, sc.grid_n);
  const CoverageParams params(sc.env);
  const ConstraintBox base_box{
      {0.0, sc.area_length, 0.0, sc.area_length, sc.h_min, sc.h_max}, 1.0};

  const IntensityGrid base_field =
      generate_true_intensity(grid, sc.gp, derive_seed(sc.seed, 1));

  std::vector<GroundPoint> sensor_positions = sc.sensor_positions;
  if (!sc.use_true_intensity && sensor_positions.empty())
    sensor_positions =
        place_sensors(grid, sc.sensor_ratio, derive_seed(sc.seed, 2));

  IntensityGrid true_field;
  IntensityGrid estimated;
  auto enter_period = [&](int period) {
    true_field = apply_hotspots(base_field, sc.hotspots, period, grid, sc.gp.mu);
    if (sc.use_true_intensity) {
      estimated = true_field;
    } else {
      SensorNetwork sensors;
      sensors.positions = sensor_positions;
      for (const GroundPoint& g : sensor_positions) {
        const int col = std::clamp(
            static_cast<int>(g.x / grid.cell_size), 0, grid.nx - 1);
        const int row = std::clamp(
            static_cast<int>(g.y / grid.cell_size), 0, grid.ny - 1);
        sensors.observations.push_back(true_field.at(row, col));
      }
      estimated = estimate_field(sensors, grid, sc.gp);
    }
  };
  enter_period(0);

  UavDeployment actual = initial_deployment(sc);
  for (const UavPosition& p : actual.positions)
    if (!base_box.box.contains(p))
      throw std::invalid_argument("run_experiment: initial position outside the flight box");

  GradientProvider provider = [&](std::size_t node,
                                  const UavDeployment& pseudo) {
    const CellAssignment cells = assign_cells(pseudo, grid, sc.env);
    return local_gradient_f(pseudo, node, cells, estimated, grid, params);
  };

  // calibrate J and a0 from the initial gradients
  CellAssignment cells = assign_cells(actual, grid, sc.env);
  std::vector<double> norms;
  double max_own_block = 0.0;
  for (int i = 0; i < sc.num_uavs; ++i) {
    const std::vector<double> f =
        local_gradient_f(actual, i, cells, estimated, grid, params);
    norms.push_back(detail::vector_norm(f));
    max_own_block = std::max(max_own_block, detail::block_inf_norm(f, i));
  }
  std::sort(norms.begin(), norms.end());
  const double q95 = norms[static_cast<std::size_t>(
      std::min<double>(norms.size() - 1, std::ceil(0.95 * norms.size()) - 1))];
  ConstraintBox cbox = base_box;
  cbox.push_gain = sc.push_gain > 0.0 ? sc.push_gain
                                      : (q95 > 0.0 ? 10.0 * q95 : 1.0);
  StepSchedule schedule;
  schedule.nu = sc.step_nu;
  schedule.a0 = sc.step_a0 > 0.0
                    ? sc.step_a0
                    : (max_own_block > 0.0 ? sc.move_cap / max_own_block : 1.0);
  schedule.validate();

  std::vector<PushSumNodeState> states = init_states(actual);
  StepOptions opts{sc.freeze_altitude};
  Rng perturb_rng = make_rng(sc.seed, 3);

  ExperimentResult result;
  result.resolved_a0 = schedule.a0;
  result.resolved_push_gain = cbox.push_gain;

  auto record = [&](long t) {
    StepRecord rec;
    rec.t = t;
    const double area = grid.cell_area();
    for (int row = 0; row < grid.ny; ++row) {
      for (int col = 0; col < grid.nx; ++col) {
        const GroundPoint y = grid.center(row, col);
        const double c = coverage_probability(
            actual, cells.at(row, col), y, params);
        rec.true_coverage += c * true_field.at(row, col) * area;
        rec.estimated_coverage += c * estimated.at(row, col) * area;
      }
    }
    const ConsensusDiagnostics diag = consensus_diagnostics(states);
    rec.disagreement = diag.max_disagreement;
    rec.phi_total = diag.mass_total;
    rec.positions = actual.positions;
    for (const auto& s : states) rec.phis.push_back(s.weight);
    result.log.push_back(std::move(rec));
  };
  auto snapshot = [&](long t) {
    result.snapshots.push_back({t, actual, cells, true_field, estimated});
  };

  record(0);
  snapshot(0);
  const long total_steps =
      static_cast<long>(sc.num_periods) * sc.steps_per_period;
  for (long s = 0; s < total_steps; ++s) {
    const NeighborGraph graph = neighbor_graph(cells);
    actual = step(states, graph, s, schedule, sc.perturbation, cbox, provider,
                  opts, perturb_rng);
    const long t = s + 1;
    const bool boundary = sc.steps_per_period > 0 && t % sc.steps_per_period == 0;
    if (boundary && t / sc.steps_per_period < sc.num_periods)
      enter_period(static_cast<int>(t / sc.steps_per_period));
    cells = assign_cells(actual, grid, sc.env);
    record(t);
    if (boundary) snapshot(t);
  }
  result.final_deployment = actual;
  return result;
}

}  // namespace uavdep
