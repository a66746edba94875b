#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "uavdep/coverage.hpp"
#include "uavdep/rng.hpp"

using namespace uavdep;

namespace {

UavDeployment random_interior(int u_count, double length, Rng& rng) {
  std::uniform_real_distribution<double> xy(0.2 * length, 0.8 * length);
  std::uniform_real_distribution<double> alt(150.0, 500.0);
  UavDeployment d;
  for (int i = 0; i < u_count; ++i)
    d.positions.push_back({xy(rng), xy(rng), alt(rng)});
  return d;
}

// Monte Carlo E[exp(-s I)] over fading and link-condition draws.
double mc_laplace(const UavDeployment& d, std::size_t serving,
                  const GroundPoint& ue, double s,
                  const ChannelEnvironment& env, long samples, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double acc = 0.0;
  for (long n = 0; n < samples; ++n) {
    double interference = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j == serving) continue;
      const double theta = elevation_angle(d[j], ue);
      const LinkCondition q = uniform(rng) < los_probability(theta, env)
                                  ? LinkCondition::LoS
                                  : LinkCondition::NLoS;
      interference +=
          sample_fading(q, env, rng) * path_loss(distance3d(d[j], ue), q, env);
    }
    acc += std::exp(-s * interference);
  }
  return acc / samples;
}

// Central finite difference of a scalar function of one UAV coordinate.
template <typename F>
double central_diff(F&& f, UavDeployment d, std::size_t uav, int coord,
                    double h) {
  auto shift = [&](double delta) {
    UavDeployment p = d;
    if (coord == 0) p[uav].x += delta;
    if (coord == 1) p[uav].y += delta;
    if (coord == 2) p[uav].altitude += delta;
    return p;
  };
  return (f(shift(h)) - f(shift(-h))) / (2.0 * h);
}

}  // namespace

TEST_CASE("eta constants for the Table m values") {
  CHECK(eta_constant(3) == doctest::Approx(3.0 * std::pow(6.0, -1.0 / 3.0)).epsilon(1e-12));
  CHECK(eta_constant(3) == doctest::Approx(1.65096).epsilon(1e-5));
  CHECK(eta_constant(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(eta_constant(1) == doctest::Approx(1.0));
}

TEST_CASE("interference Laplace transform: limits and monotonicity") {
  const CoverageParams params{channel_preset("urban")};
  Rng rng = make_rng(21);
  const UavDeployment d = random_interior(4, 5000.0, rng);
  const GroundPoint ue{2400.0, 2600.0};

  CHECK(interference_laplace(d, 0, ue, 0.0, params) == doctest::Approx(1.0));

  UavDeployment single;
  single.positions.push_back(d[0]);
  CHECK(interference_laplace(single, 0, ue, 1e6, params) == doctest::Approx(1.0));

  double prev = 1.0;
  for (double s = 0.0; s <= 1e7; s += 2.5e5) {
    const double v = interference_laplace(d, 0, ue, s, params);
    CHECK(v > 0.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("interference Laplace transform matches the Monte Carlo expectation") {
  const CoverageParams params{channel_preset("urban")};
  UavDeployment d;
  d.positions.push_back({0, 0, 200});
  d.positions.push_back({500, 0, 200});
  const GroundPoint ue{0, 0};
  const double s = 1e4;
  Rng rng = make_rng(22);
  const double mc = mc_laplace(d, 0, ue, s, params.env, 1000000, rng);
  CHECK(interference_laplace(d, 0, ue, s, params) ==
        doctest::Approx(mc).epsilon(0.005));

  // a second, harsher point where the transform is far from 1
  const double s2 = 5e7;
  Rng rng2 = make_rng(23);
  const double mc2 = mc_laplace(d, 0, ue, s2, params.env, 1000000, rng2);
  CHECK(interference_laplace(d, 0, ue, s2, params) ==
        doctest::Approx(mc2).epsilon(0.01));
}

TEST_CASE("coverage probability saturates in the easy limits") {
  ChannelEnvironment env = channel_preset("urban");
  env.theta_threshold = 1e-12;
  const CoverageParams params{env};
  Rng rng = make_rng(24);
  const UavDeployment d = random_interior(5, 5000.0, rng);
  CHECK(coverage_probability(d, 2, {2500, 2500}, params) ==
        doctest::Approx(1.0).epsilon(1e-9));

  ChannelEnvironment noiseless = channel_preset("urban");
  noiseless.sigma = 0.0;
  const CoverageParams p2{noiseless};
  UavDeployment single;
  single.positions.push_back({1000, 1000, 300});
  CHECK(coverage_probability(single, 0, {1200, 900}, p2) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("coverage probability is nonincreasing in the SINR threshold") {
  Rng rng = make_rng(25);
  for (int rep = 0; rep < 3; ++rep) {
    const UavDeployment d = random_interior(6, 5000.0, rng);
    std::uniform_real_distribution<double> xy(0.0, 5000.0);
    const GroundPoint ue{xy(rng), xy(rng)};
    double prev = 1.1;
    for (double db = -10.0; db <= 20.0; db += 0.5) {
      ChannelEnvironment env = channel_preset("urban");
      env.theta_threshold = db_to_linear(db);
      const double c = coverage_probability(d, 0, ue, CoverageParams{env});
      CHECK(c <= prev + 1e-12);
      prev = c;
    }
  }
}

TEST_CASE("pre-clamp values stay within the numerical band") {
  const CoverageParams params{channel_preset("urban")};
  Rng rng = make_rng(26);
  std::uniform_real_distribution<double> xy(0.0, 5000.0);
  for (int rep = 0; rep < 200; ++rep) {
    const UavDeployment d = random_interior(9, 5000.0, rng);
    const GroundPoint ue{xy(rng), xy(rng)};
    const double raw = coverage_probability_raw(d, rep % 9, ue, params);
    CHECK(raw >= -1e-6);
    CHECK(raw <= 1.0 + 1e-6);
  }
}

TEST_CASE("analytic gradient: symmetry and vanishing interaction") {
  const CoverageParams params{channel_preset("urban")};
  UavDeployment single;
  single.positions.push_back({2500, 2500, 400});
  const auto g = coverage_gradient(single, 0, {2500, 2500}, params);
  CHECK(std::abs(g[0]) < 1e-8);
  CHECK(std::abs(g[1]) < 1e-8);

  UavDeployment pair;
  pair.positions.push_back({2500, 2500, 300});
  pair.positions.push_back({2500 + 50000.0, 2500, 300});  // 10x area length away
  const auto g2 = coverage_gradient(pair, 0, {2500, 2500}, params);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(g2[3 + c]) < 1e-10);
}

TEST_CASE("analytic gradient agrees with central differences") {
  const CoverageParams params{channel_preset("urban")};
  Rng rng = make_rng(27);
  std::uniform_real_distribution<double> xy(500.0, 4500.0);
  const UavDeployment d = random_interior(9, 5000.0, rng);
  const GroundPoint ue{xy(rng), xy(rng)};
  const std::size_t serving = 3;
  const auto grad = coverage_gradient(d, serving, ue, params);
  auto value = [&](const UavDeployment& p) {
    return coverage_probability_raw(p, serving, ue, params);
  };
  for (std::size_t j = 0; j < d.size(); ++j) {
    for (int c = 0; c < 3; ++c) {
      const double fd = central_diff(value, d, j, c, 0.5);
      const double an = grad[3 * j + c];
      const double tol = std::max(1e-8, 1e-3 * std::abs(fd));
      CHECK(std::abs(an - fd) <= tol);
    }
  }
}

TEST_CASE("local gradient: empty domain and zero intensity give zero") {
  const ChannelEnvironment env = channel_preset("urban");
  const CoverageParams params{env};
  const GroundGrid grid = make_square_grid(2000.0, 10);
  UavDeployment d;
  d.positions.push_back({1000, 1000, 300});
  d.positions.push_back({1000, 1000, 300});  // ties all go to UAV 0
  const CellAssignment cells = assign_cells(d, grid, env);
  const IntensityGrid uniform(grid.nx, grid.ny, 5.0);
  const auto empty = local_gradient_f(d, 1, cells, uniform, grid, params);
  for (double v : empty) CHECK(v == 0.0);

  const IntensityGrid zero(grid.nx, grid.ny, 0.0);
  const auto zg = local_gradient_f(d, 0, cells, zero, grid, params);
  for (double v : zg) CHECK(v == 0.0);
}

TEST_CASE("local gradient of a centered single UAV: symmetric and consistent") {
  const ChannelEnvironment env = channel_preset("urban");
  const CoverageParams params{env};
  const GroundGrid grid = make_square_grid(2000.0, 20);
  UavDeployment d;
  d.positions.push_back({1000, 1000, 250});
  const CellAssignment cells = assign_cells(d, grid, env);
  const IntensityGrid uniform(grid.nx, grid.ny, 3.0);
  const auto f = local_gradient_f(d, 0, cells, uniform, grid, params);
  CHECK(std::abs(f[0]) <= 1e-6 * (std::abs(f[2]) + 1.0));
  CHECK(std::abs(f[1]) <= 1e-6 * (std::abs(f[2]) + 1.0));

  auto objective = [&](const UavDeployment& p) {
    return total_coverage(p, cells, uniform, grid, params);
  };
  const double fd = central_diff(objective, d, 0, 2, 0.5);
  CHECK(f[2] == doctest::Approx(fd).epsilon(1e-2));
}

TEST_CASE("total coverage limits and decomposition-free oracle") {
  const ChannelEnvironment env = channel_preset("urban");
  const CoverageParams params{env};
  const GroundGrid grid = make_square_grid(5000.0, 25);
  Rng rng = make_rng(28);
  const UavDeployment d = random_interior(5, 5000.0, rng);
  const CellAssignment cells = assign_cells(d, grid, env);

  const IntensityGrid zero(grid.nx, grid.ny, 0.0);
  CHECK(total_coverage(d, cells, zero, grid, params) == 0.0);

  ChannelEnvironment easy = env;
  easy.theta_threshold = 1e-12;
  const IntensityGrid uniform(grid.nx, grid.ny, 2.0);
  const double expected_mass = 2.0 * grid.cell_area() * grid.num_cells();
  CHECK(total_coverage(d, cells, uniform, grid, CoverageParams{easy}) ==
        doctest::Approx(expected_mass).epsilon(1e-9));

  // direct double loop without the cell decomposition
  double oracle = 0.0;
  for (int row = 0; row < grid.ny; ++row) {
    for (int col = 0; col < grid.nx; ++col) {
      const GroundPoint y = grid.center(row, col);
      int best = 0;
      double best_power = mean_signal_power(d[0], y, env);
      for (int i = 1; i < 5; ++i) {
        const double p = mean_signal_power(d[i], y, env);
        if (p > best_power) {
          best_power = p;
          best = i;
        }
      }
      oracle += coverage_probability(d, best, y, params) * 2.0 * grid.cell_area();
    }
  }
  CHECK(total_coverage(d, cells, uniform, grid, params) ==
        doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("frozen-cell local gradients match finite differences of the integral") {
  const ChannelEnvironment env = channel_preset("urban");
  const CoverageParams params{env};
  const GroundGrid grid = make_square_grid(5000.0, 20);
  Rng rng = make_rng(29);
  const UavDeployment d = random_interior(4, 5000.0, rng);
  const CellAssignment cells = assign_cells(d, grid, env);
  IntensityGrid lam(grid.nx, grid.ny, 0.0);
  std::uniform_real_distribution<double> level(1.0, 10.0);
  for (double& v : lam.values) v = level(rng);

  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto f = local_gradient_f(d, i, cells, lam, grid, params);
    auto frozen_integral = [&](const UavDeployment& p) {
      double acc = 0.0;
      for (int row = 0; row < grid.ny; ++row)
        for (int col = 0; col < grid.nx; ++col)
          if (cells.at(row, col) == static_cast<int>(i))
            acc += coverage_probability_raw(p, i, grid.center(row, col), params) *
                   lam.at(row, col) * grid.cell_area();
      return acc;
    };
    for (std::size_t j = 0; j < d.size(); ++j) {
      for (int c = 0; c < 3; ++c) {
        const double fd = central_diff(frozen_integral, d, j, c, 0.5);
        const double tol = std::max(1e-8, 1e-3 * std::abs(fd));
        CHECK(std::abs(f[3 * j + c] - fd) <= tol);
      }
    }
  }
}
