#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "trailer_lab/sim.hpp"

namespace trailer_lab {

double RoAMap::converged_fraction() const {
  if (converged.empty()) return 0.0;
  const auto count = std::count(converged.begin(), converged.end(), std::uint8_t{1});
  return static_cast<double>(count) / static_cast<double>(converged.size());
}

namespace {

// The reference is the straight line along the initial trailer heading, long
// enough that the goal is never reached within the time budget.
SimScenario roa_scenario(const SimScenario& base, const RoACriterion& criterion) {
  SimScenario s = base;
  const double length = base.speed * criterion.time_budget + 4.0 * base.tracker.Lr + 2.0;
  s.path = make_straight_reverse_path(length);
  s.max_sim_time = criterion.time_budget;
  return s;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = (lo + hi) / 2;
    return v;
  }
  // Odd in i <-> n-1-i about the center, so symmetric ranges give exactly
  // mirrored samples.
  const double center = (lo + hi) / 2;
  const double half = (hi - lo) / 2;
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        center + half * static_cast<double>(2 * i - (n - 1)) / static_cast<double>(n - 1);
  return v;
}

}  // namespace

bool converges_from(const SimScenario& base, const GainSchedule& schedule, double beta3,
                    double beta2, const RoACriterion& criterion) {
  SimScenario s = roa_scenario(base, criterion);
  s.initial_state = {0.0, 0.0, 0.0, beta3, beta2};

  double settled_since = -1.0;
  SimHooks hooks;
  hooks.stop_when = [&](const TraceRow& row) {
    const bool inside = std::abs(row.state.y3) < criterion.lateral_error &&
                        std::abs(row.state.beta3) < criterion.angle_threshold &&
                        std::abs(row.state.beta2) < criterion.angle_threshold;
    if (!inside) {
      settled_since = -1.0;
      return false;
    }
    if (settled_since < 0.0) settled_since = row.t;
    return row.t - settled_since >= criterion.hold_time - 1e-9;
  };
  const SimResult result = simulate(s, schedule, hooks);
  return result.report.status == Completion::stopped;
}

RoAMap region_of_attraction(const SimScenario& base, const RoAGridSpec& spec,
                            const RoACriterion& criterion, int threads) {
  if (spec.beta3_count < 1 || spec.beta2_count < 1)
    throw ValidationError("grid", "needs at least one cell per axis");
  base.validate();
  const GainSchedule schedule =
      build_schedule(base.params, base.weights, base.grid_count, kDefaultDesignSpeed);

  RoAMap map;
  map.spec = spec;
  map.criterion = criterion;
  map.beta3_values = linspace(spec.beta3_min, spec.beta3_max, spec.beta3_count);
  map.beta2_values = linspace(spec.beta2_min, spec.beta2_max, spec.beta2_count);
  const std::size_t cells = map.beta3_values.size() * map.beta2_values.size();
  map.converged.assign(cells, 0);

  auto classify = [&](std::size_t cell) {
    const std::size_t i3 = cell / map.beta2_values.size();
    const std::size_t i2 = cell % map.beta2_values.size();
    map.converged[cell] =
        converges_from(base, schedule, map.beta3_values[i3], map.beta2_values[i2], criterion) ? 1
                                                                                               : 0;
  };

  if (threads <= 1) {
    for (std::size_t cell = 0; cell < cells; ++cell) classify(cell);
    return map;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (int w = 0; w < threads; ++w)
    workers.emplace_back([&] {
      for (std::size_t cell = next++; cell < cells; cell = next++) classify(cell);
    });
  workers.clear();
  return map;
}

}  // namespace trailer_lab
