#include "geowalk/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geowalk/errors.hpp"
#include "geowalk/parallel.hpp"

namespace geowalk {

AnnealSchedule make_schedule(double t0, int n, double epsilon, double fail_prob) {
  if (n < 2) throw InvalidParams("schedule: requires intrinsic dimension n >= 2");
  if (!(t0 > 0.0) || !(epsilon > 0.0) || !(fail_prob > 0.0 && fail_prob < 1.0)) {
    throw InvalidParams("schedule: require t0 > 0, epsilon > 0, fail_prob in (0, 1)");
  }
  const double dim = static_cast<double>(n);
  const double ratio = 1.0 - 1.0 / std::sqrt(dim);
  const double target = epsilon * fail_prob / (dim + 1.0);

  AnnealSchedule schedule;
  schedule.t0 = t0;
  schedule.n = n;
  const double log_excess = std::log(t0 / target);
  // Within rounding of the target counts as already cold.
  if (log_excess <= 1e-12) {
    schedule.phases = 0;
    schedule.temps = {t0};
    schedule.degenerate = t0 < target * (1.0 - 1e-12);
    return schedule;
  }
  schedule.phases = static_cast<int>(std::ceil(std::sqrt(dim) * log_excess));
  schedule.temps.reserve(schedule.phases + 1);
  double t = t0;
  for (int i = 0; i <= schedule.phases; ++i) {
    schedule.temps.push_back(t);
    t *= ratio;
  }
  return schedule;
}

double initial_temperature(const ConvexBody& body, double lipschitz) {
  if (!(lipschitz > 0.0)) throw InvalidParams("initial_temperature: lipschitz must be > 0");
  return lipschitz * body.metadata().diameter;
}

long phase_step_budget(const ManifoldDescriptor& descriptor, const ConvexBody& body, double temperature,
                       const AnnealConfig& config, std::vector<std::string>* warnings) {
  if (!(temperature > 0.0)) throw InvalidParams("phase_step_budget: temperature must be > 0");
  const auto& meta = body.metadata();
  const double n = descriptor.intrinsic_dim;
  const double d = meta.diameter;
  const double r = meta.inner_radius;
  const double l = config.lipschitz;
  const double steps = config.budget_constant * d * d * n * n * n * (1.0 + descriptor.curvature_bound) *
                       l * l / (r * r * temperature * temperature) * std::log(1.0 / config.fail_prob);
  const double cap = static_cast<double>(config.global_budget);
  if (!std::isfinite(steps) || steps > cap) {
    if (warnings) {
      warnings->push_back("phase_step_budget: " + std::to_string(steps) + " steps at T = " +
                          std::to_string(temperature) + " capped at " +
                          std::to_string(config.global_budget));
    }
    return config.global_budget;
  }
  // Ignore rounding noise so exact products are not bumped to the next integer.
  return std::max(1L, static_cast<long>(std::ceil(steps * (1.0 - 1e-12))));
}

AnnealResult anneal(const ConvexBody& body, const Objective& f, const AnnealConfig& config, RngStream& rng,
                    const std::optional<ManifoldPoint>& start) {
  const Manifold& m = body.manifold();
  const auto& desc = m.descriptor();
  if (config.steps_per_phase && *config.steps_per_phase < 1) {
    throw InvalidParams("anneal: steps_per_phase must be >= 1");
  }

  AnnealResult result;
  ManifoldPoint current;
  if (start) {
    current = *start;
  } else if (body.supports_rejection_sampling()) {
    current = body.rejection_sample_uniform(rng);
  } else {
    throw InvalidStart("anneal: no start point supplied and the body has no rejection sampler");
  }
  if (!m.is_valid_point(current, 1e-8) || !body.contains(current)) {
    throw InvalidStart("anneal: start point is not in the body");
  }

  result.schedule = make_schedule(initial_temperature(body, config.lipschitz), desc.intrinsic_dim,
                                  config.epsilon, config.fail_prob);

  WalkParams walk;
  walk.delta = config.delta.value_or(delta_bound(desc, body, 0.5));
  walk.override_delta = config.override_delta;
  if (auto warning = validate_step_size(body, walk)) result.warnings.push_back(*warning);

  const long phase_count = static_cast<long>(result.schedule.temps.size());
  const long per_phase_cap = std::max(1L, config.global_budget / phase_count);
  bool budget_capped = false;

  // Metropolis acceptance only sees differences of f, so shifting by the
  // running minimum keeps the minimum-zero normalization without changing
  // the chain.
  double running_min = f(current);
  if (!std::isfinite(running_min)) throw OracleError("anneal: objective is non-finite at the start");

  for (long phase = 0; phase < phase_count; ++phase) {
    const double temperature = result.schedule.temps[static_cast<std::size_t>(phase)];
    long steps = 0;
    if (config.steps_per_phase) {
      steps = *config.steps_per_phase;
    } else {
      steps = phase_step_budget(desc, body, temperature, config);
      if (steps > per_phase_cap) {
        steps = per_phase_cap;
        budget_capped = true;
      }
    }

    const double shift = running_min;
    GibbsTarget target{[&f, shift](const ManifoldPoint& x) { return f(x) - shift; }, config.lipschitz,
                       temperature};

    PhaseRecord record;
    record.phase = static_cast<int>(phase);
    record.temperature = temperature;
    record.steps = steps;
    record.start = current;

    WalkState state;
    state.point = current;
    state.f_value = f(current) - shift;
    ManifoldPoint best = current;
    double best_value = state.f_value;
    for (long s = 0; s < steps; ++s) {
      state = metropolis_step(state, body, target, walk.delta, rng);
      if (state.f_value < best_value) {
        best_value = state.f_value;
        best = state.point;
      }
    }
    running_min = std::min(running_min, best_value + shift);

    record.rejections = state.cumulative_rejections + state.filter_rejections;
    record.best_f = best_value + shift;
    record.final_f = state.f_value + shift;
    record.end = state.point;
    result.trace.push_back(record);

    current = state.point;
    if (phase == phase_count - 1) {
      result.minimizer = best;
      result.value = best_value + shift;
    }
  }
  if (budget_capped) {
    result.warnings.push_back("anneal: per-phase step budget capped at " + std::to_string(per_phase_cap) +
                              " (global budget " + std::to_string(config.global_budget) + ")");
  }
  return result;
}

std::vector<AnnealResult> anneal_trials(const ConvexBody& body, const Objective& f,
                                        const AnnealConfig& config, std::uint64_t seed, int trials,
                                        int jobs) {
  std::vector<AnnealResult> results(static_cast<std::size_t>(std::max(0, trials)));
  parallel_for(results.size(), jobs, [&](std::size_t i) {
    RngStream rng = RngStream::split(seed, i);
    results[i] = anneal(body, f, config, rng);
  });
  return results;
}

}  // namespace geowalk
