#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "geowalk/convex_body.hpp"
#include "geowalk/manifold.hpp"
#include "geowalk/rng.hpp"

namespace geowalk {

using Objective = std::function<double(const ManifoldPoint&)>;

struct WalkParams {
  double delta = 0.0;
  std::uint64_t seed = 0;
  long max_steps = 0;
  bool record_rejections = true;
  // Accept a step size above delta_bound with a warning instead of an error.
  bool override_delta = false;
};

struct WalkState {
  ManifoldPoint point;
  long step_index = 0;
  bool rejected_last = false;
  long cumulative_rejections = 0;
  // Proposals dropped because the membership oracle hit a cut locus.
  long cut_locus_rejections = 0;
  // Metropolis-filter rejections (proposal inside K, filter said no).
  long filter_rejections = 0;
  // Cached objective value at `point`; NaN when unknown.
  double f_value = std::numeric_limits<double>::quiet_NaN();
};

/// Gibbs density proportional to exp(-f / T) on the body.
struct GibbsTarget {
  Objective f;
  double lipschitz = 1.0;
  double temperature = 1.0;
};

/// min( sqrt(1 / (100 sqrt(n) max(R, 1e-12))), s r / (4 n sqrt(n)) ).
double delta_bound(int n, double curvature_bound, double inner_radius, double s = 0.5);
double delta_bound(const ManifoldDescriptor& descriptor, const ConvexBody& body, double s = 0.5);

/// Checks params.delta against delta_bound(s = 0.5). Returns a warning
/// when the bound is exceeded with override_delta set; throws InvalidParams
/// when it is exceeded without the override.
std::optional<std::string> validate_step_size(const ConvexBody& body, const WalkParams& params);

/// One lazy geodesic-walk step: propose exp_x(delta u) for a tangent
/// Gaussian u and move only if the proposal is in the body.
///
/// Every step consumes one tangent Gaussian draw and one uniform, whether
/// or not the uniform is used, so uniform and Metropolis chains sharing a
/// seed stay in lockstep.
WalkState uniform_step(const WalkState& state, const ConvexBody& body, double delta, RngStream& rng);

/// One Metropolis-adjusted step targeting exp(-f / T): proposals outside
/// the body are rejected, inside ones accepted with probability
/// min(1, exp(-(f(y) - f(x)) / T)). Throws OracleError on non-finite f.
WalkState metropolis_step(const WalkState& state, const ConvexBody& body, const GibbsTarget& target,
                          double delta, RngStream& rng);

struct ChainOptions {
  // Defaults to 10 n^2 / delta^2 when unset.
  std::optional<long> burn_in;
  long thin = 1;
  // Verify membership of every emitted point (always on in debug builds).
  bool check_membership = false;
};

struct ChainSample {
  long step = 0;
  ManifoldPoint point;
  bool rejected = false;
  std::optional<double> f_value;
};

struct RejectionStats {
  long steps = 0;
  long rejections = 0;  // proposals outside the body (incl. cut locus)
  long cut_locus = 0;
  long filter_rejections = 0;
  /// Empirical proxy for 1 - local conductance along the chain.
  double rejection_fraction() const {
    return steps == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(steps);
  }
};

struct ChainResult {
  std::vector<ChainSample> samples;
  RejectionStats stats;
  WalkState final_state;
  std::vector<std::string> warnings;
};

long default_burn_in(int n, double delta);

/// Runs params.max_steps steps from `start` with a stream seeded from
/// params.seed. Emits the point after step s when s > burn_in and
/// (s - burn_in) is a multiple of thin. Throws InvalidStart if start is
/// not in the body.
ChainResult run_chain(const ManifoldPoint& start, const ConvexBody& body, const WalkParams& params,
                      const std::optional<GibbsTarget>& target, const ChainOptions& options);

/// Same as run_chain but draws from the supplied stream.
ChainResult run_chain(const ManifoldPoint& start, const ConvexBody& body, const WalkParams& params,
                      const std::optional<GibbsTarget>& target, const ChainOptions& options,
                      RngStream& rng);

/// Independent chains with streams split from (params.seed, chain index).
std::vector<ChainResult> run_chains(const ManifoldPoint& start, const ConvexBody& body,
                                    const WalkParams& params,
                                    const std::optional<GibbsTarget>& target,
                                    const ChainOptions& options, int chains, int jobs);

/// Fraction of `trials` independent proposals from x that land in the
/// body: an unbiased estimate of the local conductance.
double estimate_local_conductance(const ManifoldPoint& x, const ConvexBody& body, double delta,
                                  long trials, RngStream& rng);

/// Counts rejected proposals out of `trials`, stopping early once the
/// count exceeds `stop_above`.
long count_rejections(const ManifoldPoint& x, const ConvexBody& body, double delta, long trials,
                      RngStream& rng, long stop_above = std::numeric_limits<long>::max());

}  // namespace geowalk
