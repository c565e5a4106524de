#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geowalk/convex_body.hpp"
#include "geowalk/walker.hpp"

namespace geowalk {

/// Geometric cooling schedule T_i = t0 (1 - 1/sqrt(n))^i, i = 0..phases.
struct AnnealSchedule {
  double t0 = 0.0;
  int n = 0;
  int phases = 0;
  std::vector<double> temps;
  // t0 was already at or below the target temperature.
  bool degenerate = false;
};

struct AnnealConfig {
  double epsilon = 0.1;
  // Failure probability of a single run (not a step size).
  double fail_prob = 0.1;
  // Steps per phase; unset means derived from phase_step_budget.
  std::optional<long> steps_per_phase;
  double lipschitz = 1.0;
  // Constant multiplying the per-phase step formula.
  double budget_constant = 1.0;
  // Cap on the total number of walk steps across all phases.
  long global_budget = 1'000'000;
  // Walk step size; unset means delta_bound(s = 0.5).
  std::optional<double> delta;
  bool override_delta = false;
};

/// I = ceil(sqrt(n) ln(t0 (n + 1) / (epsilon fail_prob))). Requires n >= 2.
/// When t0 is already at or below the target the result has a single
/// temperature and `degenerate` set.
AnnealSchedule make_schedule(double t0, int n, double epsilon, double fail_prob);

/// Starting temperature L * D.
double initial_temperature(const ConvexBody& body, double lipschitz);

/// C D^2 n^3 (1 + R) L^2 / (r^2 T^2) ln(1 / fail_prob), rounded up and
/// capped at config.global_budget. A capped value appends to `warnings`.
long phase_step_budget(const ManifoldDescriptor& descriptor, const ConvexBody& body, double temperature,
                       const AnnealConfig& config, std::vector<std::string>* warnings = nullptr);

struct PhaseRecord {
  int phase = 0;
  double temperature = 0.0;
  long steps = 0;
  long rejections = 0;
  double best_f = 0.0;
  double final_f = 0.0;
  ManifoldPoint start;
  ManifoldPoint end;
};

struct AnnealResult {
  ManifoldPoint minimizer;
  double value = 0.0;
  AnnealSchedule schedule;
  std::vector<PhaseRecord> trace;
  std::vector<std::string> warnings;
};

/// Simulated annealing: a Metropolis walk at each schedule temperature,
/// each phase starting where the previous one stopped. Returns the best
/// point visited during the final phase.
///
/// The start is drawn with the body's rejection sampler unless supplied.
AnnealResult anneal(const ConvexBody& body, const Objective& f, const AnnealConfig& config, RngStream& rng,
                    const std::optional<ManifoldPoint>& start = std::nullopt);

/// Independent annealing runs on streams split from (seed, trial index).
std::vector<AnnealResult> anneal_trials(const ConvexBody& body, const Objective& f,
                                        const AnnealConfig& config, std::uint64_t seed, int trials,
                                        int jobs);

}  // namespace geowalk
