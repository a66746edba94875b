#include <doctest.h>

#include <cmath>
#include <random>

#include "uavdep/gp.hpp"
#include "uavdep/rng.hpp"
#include "uavdep/simulator.hpp"

using namespace uavdep;

TEST_CASE("Gaussian kernel values") {
  GpParams params;  // A0 = 10, A1 = 500^2
  CHECK(gp_kernel({123, 456}, {123, 456}, params) == doctest::Approx(10.0));
  CHECK(gp_kernel({0, 0}, {500, 0}, params) == doctest::Approx(10.0 / std::exp(1.0)));
  CHECK(gp_kernel({0, 0}, {1000, 0}, params) ==
        doctest::Approx(10.0 * std::exp(-4.0)).epsilon(1e-12));
  CHECK(gp_kernel({0, 0}, {1000, 0}, params) == doctest::Approx(0.18316).epsilon(1e-4));
  CHECK(gp_kernel({0, 0}, {300, 400}, params) ==
        doctest::Approx(gp_kernel({300, 400}, {0, 0}, params)));
}

TEST_CASE("single sensor interpolates exactly with zero jitter") {
  GpParams params;
  params.jitter = 0.0;
  SensorNetwork sensors;
  sensors.positions = {{1000, 2000}};
  sensors.observations = {137.5};
  CHECK(posterior_mean({1000, 2000}, sensors, params) == doctest::Approx(137.5));
}

TEST_CASE("posterior reverts to the prior far from all sensors") {
  GpParams params;
  SensorNetwork sensors;
  sensors.positions = {{0, 0}, {400, 300}, {100, 900}};
  sensors.observations = {150.0, 60.0, 90.0};
  const double far = 100.0 * std::sqrt(params.a1);
  CHECK(std::abs(posterior_mean({far, far}, sensors, params) - params.mu) <
        1e-6 * params.a0);
}

TEST_CASE("two-sensor posterior matches the closed-form 2x2 solve") {
  GpParams params;
  params.jitter = 0.0;
  SensorNetwork sensors;
  sensors.positions = {{1000, 1000}, {1800, 1400}};
  sensors.observations = {142.0, 73.0};
  const GroundPoint y{1300, 1250};

  const double k11 = gp_kernel(sensors.positions[0], sensors.positions[0], params);
  const double k12 = gp_kernel(sensors.positions[0], sensors.positions[1], params);
  const double k22 = gp_kernel(sensors.positions[1], sensors.positions[1], params);
  const double det = k11 * k22 - k12 * k12;
  const double r1 = sensors.observations[0] - params.mu;
  const double r2 = sensors.observations[1] - params.mu;
  const double a1 = (k22 * r1 - k12 * r2) / det;
  const double a2 = (-k12 * r1 + k11 * r2) / det;
  const double ky1 = gp_kernel(sensors.positions[0], y, params);
  const double ky2 = gp_kernel(sensors.positions[1], y, params);
  const double expected = params.mu + ky1 * a1 + ky2 * a2;

  CHECK(posterior_mean(y, sensors, params) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("well-separated sensors interpolate to relative 1e-6") {
  GpParams params;
  params.a1 = 200.0 * 200.0;
  params.jitter = 0.0;
  Rng rng = make_rng(31);
  std::uniform_real_distribution<double> obs(10.0, 300.0);
  SensorNetwork sensors;
  for (int row = 0; row < 4; ++row)
    for (int col = 0; col < 4; ++col)
      sensors.positions.push_back({col * 1000.0, row * 1000.0});
  for (std::size_t n = 0; n < sensors.positions.size(); ++n)
    sensors.observations.push_back(obs(rng));
  GpPosterior posterior(sensors, params);
  for (std::size_t n = 0; n < sensors.positions.size(); ++n)
    CHECK(posterior.mean(sensors.positions[n]) ==
          doctest::Approx(sensors.observations[n]).epsilon(1e-6));
}

TEST_CASE("flat observations give a flat field") {
  GpParams params;
  SensorNetwork sensors;
  for (int i = 0; i < 10; ++i) {
    sensors.positions.push_back({i * 430.0, (i * 7 % 10) * 500.0});
    sensors.observations.push_back(params.mu);
  }
  const GroundGrid grid = make_square_grid(5000.0, 12);
  const IntensityGrid field = estimate_field(sensors, grid, params);
  for (double v : field.values) CHECK(v == doctest::Approx(params.mu).epsilon(1e-9));
}

TEST_CASE("full-grid sensing reproduces the field") {
  GpParams params;
  params.a1 = 200.0 * 200.0;  // short range keeps the system well conditioned
  params.jitter = 0.0;
  const GroundGrid grid = make_square_grid(5000.0, 10);
  Rng rng = make_rng(32);
  std::uniform_real_distribution<double> level(20.0, 250.0);
  SensorNetwork sensors;
  IntensityGrid truth(grid.nx, grid.ny);
  for (int row = 0; row < grid.ny; ++row) {
    for (int col = 0; col < grid.nx; ++col) {
      truth.at(row, col) = level(rng);
      sensors.positions.push_back(grid.center(row, col));
      sensors.observations.push_back(truth.at(row, col));
    }
  }
  const IntensityGrid field = estimate_field(sensors, grid, params);
  for (int i = 0; i < grid.num_cells(); ++i)
    CHECK(field.values[i] == doctest::Approx(truth.values[i]).epsilon(1e-8));
}

TEST_CASE("sparse sensing beats the flat prior on a GP-sampled field") {
  GpParams params;
  const GroundGrid grid = make_square_grid(5000.0, 25);
  const IntensityGrid truth = generate_true_intensity(grid, params, 77);

  const std::vector<GroundPoint> placed = place_sensors(grid, 0.03, 78);
  SensorNetwork sensors;
  sensors.positions = placed;
  for (const GroundPoint& g : placed) {
    const int col = static_cast<int>(g.x / grid.cell_size);
    const int row = static_cast<int>(g.y / grid.cell_size);
    sensors.observations.push_back(truth.at(row, col));
  }
  const IntensityGrid estimated = estimate_field(sensors, grid, params);

  double err_gp = 0.0, err_flat = 0.0;
  for (int i = 0; i < grid.num_cells(); ++i) {
    err_gp += std::abs(estimated.values[i] - truth.values[i]);
    err_flat += std::abs(params.mu - truth.values[i]);
  }
  CHECK(err_gp < err_flat);
}

TEST_CASE("estimated fields are clamped nonnegative") {
  GpParams params;
  params.mu = 1.0;
  params.a0 = 50.0;
  SensorNetwork sensors;
  sensors.positions = {{1000, 1000}, {1400, 1000}, {1200, 1200}};
  sensors.observations = {0.0, 0.0, 0.0};
  const GroundGrid grid = make_square_grid(3000.0, 15);
  const IntensityGrid field = estimate_field(sensors, grid, params);
  for (double v : field.values) CHECK(v >= 0.0);
}

TEST_CASE("invalid inputs are rejected") {
  GpParams params;
  SensorNetwork sensors;
  CHECK_THROWS_AS(posterior_mean({0, 0}, sensors, params), std::invalid_argument);
  sensors.positions = {{0, 0}};
  sensors.observations = {1.0, 2.0};
  CHECK_THROWS_AS(posterior_mean({0, 0}, sensors, params), std::invalid_argument);
  params.a0 = -1.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
