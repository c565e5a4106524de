#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geowalk/convex_body.hpp"
#include "geowalk/quadrature.hpp"
#include "geowalk/walker.hpp"

namespace geowalk {

/// Outcome of checking an inequality lhs <= rhs. Passes iff
/// lhs <= rhs + 3 mc_stderr + abs_tol.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool passed = false;
  double mc_stderr = 0.0;
  double abs_tol = 0.0;
  // Named intermediate quantities (volumes, fractions, parameters).
  std::vector<std::pair<std::string, double>> details;
};

InequalityReport make_report(std::string name, double lhs, double rhs, double mc_stderr,
                             double abs_tol);

/// Single-line JSON rendering of a report.
std::string to_json(const InequalityReport& report);

/// Convex function of one variable. `kinks` lists points where it may fail
/// to be smooth; quadrature panels are split there.
struct ConvexFunction1D {
  std::function<double(double)> value;
  std::vector<double> kinks;

  /// Linear interpolation through (xs[i], ys[i]), extended linearly
  /// beyond the end knots. Throws NotConvex if the slopes decrease.
  static ConvexFunction1D piecewise_linear(std::vector<double> xs, std::vector<double> ys);
};

/// int_a^b (c1 x + c2)^{n-1} dx >= (b - a) / (eps n e) int_b^{b+eps} (c1 x + c2)^{n-1} dx,
/// reported as lhs = right-hand integral term, rhs = left integral. The
/// integrand is scaled to unit peak on [a, b + eps], which leaves the
/// inequality unchanged. For integer n the quadrature is cross-checked
/// against the closed form (detail "closed_form_gap").
/// Throws PreconditionError unless c1 x + c2 > 0 on [a, b + eps] and
/// 0 < eps <= (b - a) / n.
InequalityReport check_affine_needle_lemma(double a, double b, double c1, double c2, int n, double eps,
                                           const QuadratureSpec& spec = {});

/// int_a^b e^{-h} h z^{n-1} dz <= (n + 1) int_a^b e^{-h} z^{n-1} dz with h
/// shifted so its minimum over [a, b] is zero. The weight is scaled by
/// b^{1-n}. Throws NotConvex when a midpoint test fails by more than 1e-9
/// and PreconditionError unless 0 <= a < b, n >= 1.
InequalityReport check_kv_needle_lemma(const ConvexFunction1D& h, double a, double b, int n,
                                       const QuadratureSpec& spec = {});

/// Needle form of the partition-function inequality
///   Z(alpha) Z(beta) <= ((alpha + beta)^2 / (4 alpha beta))^n Z((alpha + beta) / 2)^2,
/// Z(s) = int_lo^hi e^{-s h(x)} x^{n-1} dx, on an interval of (0, inf).
InequalityReport check_partition_function_logconcavity(const ConvexFunction1D& h, double lo, double hi,
                                                       int n, double alpha, double beta,
                                                       const QuadratureSpec& spec = {});

struct InteriorVolumeOptions {
  // Proposals per local-conductance estimate.
  long trials = 10000;
  // A point counts as interior when its conductance estimate is >= 1 - tol.
  double conductance_tol = 1e-3;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Monte Carlo check of Vol(K - K_{-eps}) <= (e n eps / r) Vol(K).
/// Interior membership uses the walk with step delta = eps / sqrt(n),
/// whose proposal length is about eps. lhs is the sampled boundary
/// fraction, rhs the bound. Throws PreconditionError unless eps <= r / n.
InequalityReport check_interior_volume(const ConvexBody& body, double eps, long mc_samples,
                                       const InteriorVolumeOptions& options = {});

/// Classifier returning 1, 2 or 3.
using Partition = std::function<int(const ManifoldPoint&)>;

struct IsoperimetryOptions {
  // Point x* for the mean distance m; defaults to the inner center.
  std::optional<ManifoldPoint> base_point;
  long separation_pairs = 10000;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Monte Carlo check of Vol(K1) Vol(K3) <= m / (eps log 2) Vol(K) Vol(K2)
/// with volumes normalized by Vol(K). Throws SeparationViolated when a
/// sampled (K1, K3) pair is closer than eps.
InequalityReport check_isoperimetry(const ConvexBody& body, const Partition& partition, double eps,
                                    long mc_samples, const IsoperimetryOptions& options = {});

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct OneStepTv {
  // TV distance between the two proposal distributions (density ratio).
  double proposal_tv = 0.0;
  // |l(x) - l(y)|, difference of estimated local conductances.
  double rejection_gap = 0.0;
  double total = 0.0;
  double std_error = 0.0;
};

/// Estimates the one-step overlap of the geodesic walk at x and y.
///
/// The proposal part is E_{z ~ Q_x}[(1 - q_y(z) / q_x(z))_+], using the
/// closed-form pushforward density of the tangent Gaussian under exp
/// (sum over preimages of phi(t) (t / |sin t|)^{n-1} on the sphere, exact
/// Gaussian on R^n). Throws Unsupported on SO(n).
OneStepTv estimate_one_step_tv(const ManifoldPoint& x, const ManifoldPoint& y, const ConvexBody& body,
                               double delta, long mc_proposals, RngStream& rng);

/// L2 warmness ||pi_hot / pi_cold|| = Z(b_c) Z(2 b_h - b_c) / Z(b_h)^2 with
/// each Z estimated from the same uniform samples of the body.
/// Throws ScheduleTooAggressive if 2 b_h - b_c <= 0.
Estimate estimate_l2_warmness(const Objective& f, const ConvexBody& body, double t_hot, double t_cold,
                              long mc_samples, RngStream& rng);

/// Sample mean of f along a chain at temperature T against T (n + 1) + min f,
/// with batch-means standard error.
InequalityReport check_low_temp_expectation(std::span<const double> f_values, double temperature,
                                            int n, double min_f);

struct TvCheckpoint {
  long step = 0;
  double ks = 0.0;
  // Null standard deviation of the two-sample KS statistic.
  double std_error = 0.0;
};

/// Runs `replicas` independent uniform walks from `start` and, at each
/// checkpoint, compares the distribution of summary(point) with
/// `reference` by two-sample KS.
std::vector<TvCheckpoint> tv_decay_curve(const ConvexBody& body, double delta, const ManifoldPoint& start,
                                         const std::function<double(const ManifoldPoint&)>& summary,
                                         std::span<const double> reference,
                                         const std::vector<long>& checkpoints, long replicas,
                                         std::uint64_t seed, int jobs = 1);

}  // namespace geowalk
