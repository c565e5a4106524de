#include "geowalk/walker.hpp"

#include <algorithm>
#include <cmath>

#include "geowalk/errors.hpp"
#include "geowalk/parallel.hpp"

namespace geowalk {
namespace {

constexpr double kCurvatureFloor = 1e-12;

struct Proposal {
  ManifoldPoint point;
  double filter_draw = 0.0;
  bool inside = false;
  bool cut_locus = false;
};

Proposal propose(const ManifoldPoint& x, const ConvexBody& body, double delta, RngStream& rng) {
  const Manifold& m = body.manifold();
  TangentVector u = m.sample_tangent_gaussian(x, rng);
  Proposal p;
  p.filter_draw = rng.uniform();
  u.components *= delta;
  p.point = m.exp_map(x, u);
  try {
    p.inside = body.contains(p.point);
  } catch (const CutLocus&) {
    p.inside = false;
    p.cut_locus = true;
  }
  return p;
}

double evaluate(const Objective& f, const ManifoldPoint& x) {
  const double value = f(x);
  if (!std::isfinite(value)) throw OracleError("objective returned a non-finite value");
  return value;
}

WalkState reject(const WalkState& state, const Proposal& p, bool outside) {
  WalkState next = state;
  ++next.step_index;
  next.rejected_last = true;
  if (outside) {
    ++next.cumulative_rejections;
    if (p.cut_locus) ++next.cut_locus_rejections;
  } else {
    ++next.filter_rejections;
  }
  return next;
}

}  // namespace

double delta_bound(int n, double curvature_bound, double inner_radius, double s) {
  const double dim = static_cast<double>(n);
  const double root_n = std::sqrt(dim);
  const double curvature_term =
      std::sqrt(1.0 / (100.0 * root_n * std::max(curvature_bound, kCurvatureFloor)));
  const double radius_term = s * inner_radius / (4.0 * dim * root_n);
  return std::min(curvature_term, radius_term);
}

double delta_bound(const ManifoldDescriptor& descriptor, const ConvexBody& body, double s) {
  return delta_bound(descriptor.intrinsic_dim, descriptor.curvature_bound,
                     body.metadata().inner_radius, s);
}

std::optional<std::string> validate_step_size(const ConvexBody& body, const WalkParams& params) {
  if (!(params.delta >= 0.0) || !std::isfinite(params.delta)) {
    throw InvalidParams("walk: delta must be a finite non-negative number");
  }
  const double bound = delta_bound(body.manifold().descriptor(), body, 0.5);
  if (params.delta <= bound) return std::nullopt;
  const std::string message = "walk: delta = " + std::to_string(params.delta) +
                              " exceeds the step-size bound " + std::to_string(bound);
  if (!params.override_delta) throw InvalidParams(message + " (set override to proceed)");
  return message;
}

WalkState uniform_step(const WalkState& state, const ConvexBody& body, double delta, RngStream& rng) {
  Proposal p = propose(state.point, body, delta, rng);
  if (!p.inside) return reject(state, p, true);
  WalkState next = state;
  ++next.step_index;
  next.point = std::move(p.point);
  next.rejected_last = false;
  next.f_value = std::numeric_limits<double>::quiet_NaN();
  return next;
}

WalkState metropolis_step(const WalkState& state, const ConvexBody& body, const GibbsTarget& target,
                          double delta, RngStream& rng) {
  if (!(target.temperature > 0.0)) throw InvalidParams("metropolis: temperature must be > 0");
  const double fx = std::isnan(state.f_value) ? evaluate(target.f, state.point) : state.f_value;
  Proposal p = propose(state.point, body, delta, rng);
  if (!p.inside) {
    WalkState next = reject(state, p, true);
    next.f_value = fx;
    return next;
  }
  const double fy = evaluate(target.f, p.point);
  const double log_ratio = std::min(0.0, -(fy - fx) / target.temperature);
  if (!(p.filter_draw < std::exp(log_ratio))) {
    WalkState next = reject(state, p, false);
    next.f_value = fx;
    return next;
  }
  WalkState next = state;
  ++next.step_index;
  next.point = std::move(p.point);
  next.rejected_last = false;
  next.f_value = fy;
  return next;
}

long default_burn_in(int n, double delta) {
  if (!(delta > 0.0)) return 0;
  const double steps = 10.0 * n * n / (delta * delta);
  return steps > 1e15 ? static_cast<long>(1e15) : static_cast<long>(std::ceil(steps));
}

ChainResult run_chain(const ManifoldPoint& start, const ConvexBody& body, const WalkParams& params,
                      const std::optional<GibbsTarget>& target, const ChainOptions& options) {
  RngStream rng(params.seed);
  return run_chain(start, body, params, target, options, rng);
}

ChainResult run_chain(const ManifoldPoint& start, const ConvexBody& body, const WalkParams& params,
                      const std::optional<GibbsTarget>& target, const ChainOptions& options,
                      RngStream& rng) {
  const Manifold& m = body.manifold();
  if (!m.is_valid_point(start, 1e-8) || !body.contains(start)) {
    throw InvalidStart("run_chain: start point is not in the body");
  }
  if (params.max_steps < 0) throw InvalidParams("run_chain: max_steps must be >= 0");
  if (options.thin < 0) throw InvalidParams("run_chain: thin must be >= 0");

  ChainResult result;
  if (auto warning = validate_step_size(body, params)) result.warnings.push_back(*warning);

  const long burn_in = options.burn_in.value_or(default_burn_in(m.intrinsic_dim(), params.delta));
  if (burn_in < 0) throw InvalidParams("run_chain: burn_in must be >= 0");
  const long thin = std::max(1L, options.thin);
#ifndef NDEBUG
  const bool check_membership = true;
#else
  const bool check_membership = options.check_membership;
#endif

  WalkState state;
  state.point = start;
  for (long s = 1; s <= params.max_steps; ++s) {
    try {
      state = target ? metropolis_step(state, body, *target, params.delta, rng)
                     : uniform_step(state, body, params.delta, rng);
    } catch (const OracleError& e) {
      throw OracleError("step " + std::to_string(s) + ": " + e.what());
    }
    if (s <= burn_in || (s - burn_in) % thin != 0) continue;
    if (check_membership && !body.contains(state.point)) {
      throw Error("run_chain: emitted point left the body at step " + std::to_string(s));
    }
    ChainSample sample;
    sample.step = s;
    sample.point = state.point;
    sample.rejected = params.record_rejections && state.rejected_last;
    if (target) sample.f_value = state.f_value;
    result.samples.push_back(std::move(sample));
  }
  result.stats.steps = params.max_steps;
  result.stats.rejections = state.cumulative_rejections;
  result.stats.cut_locus = state.cut_locus_rejections;
  result.stats.filter_rejections = state.filter_rejections;
  result.final_state = std::move(state);
  return result;
}

std::vector<ChainResult> run_chains(const ManifoldPoint& start, const ConvexBody& body,
                                    const WalkParams& params,
                                    const std::optional<GibbsTarget>& target,
                                    const ChainOptions& options, int chains, int jobs) {
  std::vector<ChainResult> results(static_cast<std::size_t>(std::max(0, chains)));
  parallel_for(results.size(), jobs, [&](std::size_t i) {
    RngStream rng = RngStream::split(params.seed, i);
    results[i] = run_chain(start, body, params, target, options, rng);
  });
  return results;
}

long count_rejections(const ManifoldPoint& x, const ConvexBody& body, double delta, long trials,
                      RngStream& rng, long stop_above) {
  long rejected = 0;
  for (long t = 0; t < trials; ++t) {
    if (!propose(x, body, delta, rng).inside) {
      ++rejected;
      if (rejected > stop_above) break;
    }
  }
  return rejected;
}

double estimate_local_conductance(const ManifoldPoint& x, const ConvexBody& body, double delta,
                                  long trials, RngStream& rng) {
  if (trials < 1) throw InvalidParams("estimate_local_conductance: trials must be >= 1");
  const long rejected = count_rejections(x, body, delta, trials, rng);
  return static_cast<double>(trials - rejected) / static_cast<double>(trials);
}

}  // namespace geowalk
