#include "geowalk/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "geowalk/errors.hpp"
#include "geowalk/parallel.hpp"
#include "geowalk/stats.hpp"

namespace geowalk {
namespace {

constexpr int kConvexityGrid = 1024;

void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

// Midpoint convexity on a uniform grid, tolerance 1e-9 (relative above 1).
void check_convex(const ConvexFunction1D& h, double a, double b) {
  const double step = (b - a) / kConvexityGrid;
  double prev = h.value(a);
  double cur = h.value(a + step);
  for (int i = 1; i < kConvexityGrid; ++i) {
    const double next = h.value(a + (i + 1) * step);
    if (!std::isfinite(next)) throw NonFiniteInput("convex function is not finite on the interval");
    const double chord = 0.5 * (prev + next);
    if (cur > chord + 1e-9 * std::max(1.0, std::abs(chord))) {
      throw NotConvex("midpoint convexity fails near x = " + std::to_string(a + i * step));
    }
    prev = cur;
    cur = next;
  }
}

// Minimum of a convex function on [a, b]: grid and kinks, then golden
// section inside the bracketing cells.
double convex_minimum(const ConvexFunction1D& h, double a, double b) {
  const double step = (b - a) / kConvexityGrid;
  double best_x = a;
  double best = h.value(a);
  for (int i = 1; i <= kConvexityGrid; ++i) {
    const double x = (i == kConvexityGrid) ? b : a + i * step;
    const double v = h.value(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  for (double k : h.kinks) {
    if (k >= a && k <= b && h.value(k) < best) {
      best = h.value(k);
      best_x = k;
    }
  }
  double lo = std::max(a, best_x - step);
  double hi = std::min(b, best_x + step);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = h.value(x1);
  double f2 = h.value(x2);
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = h.value(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = h.value(x2);
    }
  }
  return std::min({best, f1, f2});
}

std::vector<double> kinks_in(const ConvexFunction1D& h, double a, double b) {
  std::vector<double> out;
  for (double k : h.kinks) {
    if (k > a && k < b) out.push_back(k);
  }
  return out;
}

// Delta-method standard error of g(mean of per-sample vectors).
double delta_method_stderr(const std::vector<std::vector<double>>& columns,
                           const std::vector<double>& gradient) {
  const std::size_t k = columns.size();
  const std::size_t n = columns.front().size();
  if (n < 2) return 0.0;
  std::vector<double> means(k);
  for (std::size_t c = 0; c < k; ++c) means[c] = stats::mean(columns[c]);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double projected = 0.0;
    for (std::size_t c = 0; c < k; ++c) projected += gradient[c] * (columns[c][i] - means[c]);
    var += projected * projected;
  }
  var /= static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Log density (up to a constant) of exp_x(delta u), u ~ N(0, I), at z.
double log_proposal_density(const Manifold& m, const ManifoldPoint& x, const ManifoldPoint& z,
                            double delta) {
  const double two_var = 2.0 * delta * delta;
  if (m.kind() == ManifoldKind::Euclidean) return -(z.coords - x.coords).squaredNorm() / two_var;
  // Sphere: preimages of z along the great circle through x and z.
  const int n = m.intrinsic_dim();
  const double rho = m.distance(x, z);
  const double reach = rho + 2.0 * M_PI + 40.0 * delta;
  double total = -std::numeric_limits<double>::infinity();
  for (int k = 0;; ++k) {
    bool any = false;
    for (double t : {rho + 2.0 * M_PI * k, 2.0 * M_PI * (k + 1) - rho}) {
      if (t > reach && k > 0) continue;
      any = true;
      double log_jacobian = 0.0;
      if (t > 1e-12) {
        const double s = std::abs(std::sin(t));
        if (s < 1e-300) continue;
        log_jacobian = (n - 1) * std::log(t / s);
      }
      total = log_sum_exp(total, -t * t / two_var + log_jacobian);
    }
    if (!any || k > 64) break;
  }
  return total;
}

}  // namespace

InequalityReport make_report(std::string name, double lhs, double rhs, double mc_stderr, double abs_tol) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.mc_stderr = mc_stderr;
  r.abs_tol = abs_tol;
  r.passed = lhs <= rhs + 3.0 * mc_stderr + abs_tol;
  return r;
}

std::string to_json(const InequalityReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["margin"] = report.margin;
  j["passed"] = report.passed;
  j["mc_stderr"] = report.mc_stderr;
  j["abs_tol"] = report.abs_tol;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.details) details[key] = value;
  j["details"] = details;
  return j.dump();
}

ConvexFunction1D ConvexFunction1D::piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InvalidParams("piecewise_linear: need at least two knots of matching size");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InvalidParams("piecewise_linear: knots must increase");
  }
  for (std::size_t i = 2; i < xs.size(); ++i) {
    const double s0 = (ys[i - 1] - ys[i - 2]) / (xs[i - 1] - xs[i - 2]);
    const double s1 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    if (s1 < s0 - 1e-12) throw NotConvex("piecewise_linear: slopes must be nondecreasing");
  }
  ConvexFunction1D h;
  h.kinks = xs;
  h.value = [xs = std::move(xs), ys = std::move(ys)](double x) {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    i = std::clamp<std::size_t>(i, 1, xs.size() - 1);
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
  };
  return h;
}

InequalityReport check_affine_needle_lemma(double a, double b, double c1, double c2, int n, double eps,
                                           const QuadratureSpec& spec) {
  require(n >= 1, "affine needle: n must be >= 1");
  require(a < b, "affine needle: require a < b");
  require(eps > 0.0, "affine needle: eps must be > 0");
  // Relative slack so the boundary case eps = (b - a) / n is accepted.
  require(eps <= (b - a) / n * (1.0 + 1e-12), "affine needle: eps must be <= (b - a) / n");
  const double y_a = c1 * a + c2;
  const double y_end = c1 * (b + eps) + c2;
  require(y_a > 0.0 && y_end > 0.0, "affine needle: c1 x + c2 must be positive on [a, b + eps]");

  const double peak = std::max(y_a, y_end);
  const auto integrand = [=](double x) { return std::pow((c1 * x + c2) / peak, n - 1); };
  const double inner = integrate(integrand, a, b, spec).value;
  const double outer = integrate(integrand, b, b + eps, spec).value;
  const double lhs = (b - a) / (eps * n * M_E) * outer;

  auto report = make_report("numerical", lhs, inner, 0.0, spec.abs_tol);
  const auto antiderivative = [=](double x) {
    if (c1 == 0.0) return std::pow(c2 / peak, n - 1) * x;
    return std::pow((c1 * x + c2) / peak, n) * peak / (n * c1);
  };
  const double closed_inner = antiderivative(b) - antiderivative(a);
  report.details = {{"a", a},     {"b", b},       {"c1", c1},
                    {"c2", c2},   {"n", n},       {"eps", eps},
                    {"closed_form_gap", std::abs(closed_inner - inner)}};
  return report;
}

InequalityReport check_kv_needle_lemma(const ConvexFunction1D& h, double a, double b, int n,
                                       const QuadratureSpec& spec) {
  require(n >= 1, "kv needle: n must be >= 1");
  require(a >= 0.0 && a < b, "kv needle: require 0 <= a < b");
  check_convex(h, a, b);
  const double h_min = convex_minimum(h, a, b);
  const auto breaks = kinks_in(h, a, b);
  const auto weight = [=](double z) { return std::pow(z / b, n - 1); };

  const double lhs = integrate(
                         [&](double z) {
                           const double v = h.value(z) - h_min;
                           return std::exp(-v) * v * weight(z);
                         },
                         a, b, spec, breaks)
                         .value;
  const double mass =
      integrate([&](double z) { return std::exp(-(h.value(z) - h_min)) * weight(z); }, a, b, spec, breaks)
          .value;
  auto report = make_report("rn_kv", lhs, (n + 1) * mass, 0.0, spec.abs_tol);
  report.details = {{"a", a}, {"b", b}, {"n", n}, {"h_min", h_min}, {"mass", mass}};
  return report;
}

InequalityReport check_partition_function_logconcavity(const ConvexFunction1D& h, double lo, double hi,
                                                       int n, double alpha, double beta,
                                                       const QuadratureSpec& spec) {
  require(n >= 1, "z log-concavity: n must be >= 1");
  require(lo > 0.0 && lo < hi, "z log-concavity: interval must lie in (0, inf)");
  require(alpha > 0.0 && beta > 0.0, "z log-concavity: alpha, beta must be > 0");
  check_convex(h, lo, hi);
  const double h_min = convex_minimum(h, lo, hi);
  const auto breaks = kinks_in(h, lo, hi);
  const auto z = [&](double s) {
    return integrate(
               [&](double x) { return std::exp(-s * (h.value(x) - h_min)) * std::pow(x / hi, n - 1); },
               lo, hi, spec, breaks)
        .value;
  };
  const double mid = 0.5 * (alpha + beta);
  const double z_alpha = z(alpha);
  const double z_beta = (beta == alpha) ? z_alpha : z(beta);
  const double z_mid = (mid == alpha) ? z_alpha : z(mid);
  const double factor = std::pow((alpha + beta) * (alpha + beta) / (4.0 * alpha * beta), n);
  auto report = make_report("z_logconcavity", z_alpha * z_beta, factor * z_mid * z_mid, 0.0, spec.abs_tol);
  report.details = {{"lo", lo}, {"hi", hi}, {"n", n}, {"alpha", alpha}, {"beta", beta}, {"factor", factor}};
  return report;
}

InequalityReport check_interior_volume(const ConvexBody& body, double eps, long mc_samples,
                                       const InteriorVolumeOptions& options) {
  const auto& meta = body.metadata();
  const int n = body.manifold().intrinsic_dim();
  require(eps > 0.0, "rev_iso: eps must be > 0");
  require(eps <= meta.inner_radius / n * (1.0 + 1e-12), "rev_iso: eps must be <= r / n");
  require(mc_samples >= 1 && options.trials >= 1, "rev_iso: need samples and trials");
  if (!body.supports_rejection_sampling()) {
    throw Unsupported("rev_iso: the body has no rejection sampler");
  }
  const double delta = eps / std::sqrt(static_cast<double>(n));
  const long threshold =
      static_cast<long>(std::floor(options.conductance_tol * static_cast<double>(options.trials) + 1e-9));

  std::vector<unsigned char> outside(static_cast<std::size_t>(mc_samples));
  parallel_for(outside.size(), options.jobs, [&](std::size_t i) {
    RngStream rng = RngStream::split(options.seed, i);
    const ManifoldPoint x = body.rejection_sample_uniform(rng);
    const long rejected = count_rejections(x, body, delta, options.trials, rng, threshold);
    outside[i] = rejected > threshold ? 1 : 0;
  });
  const double count = static_cast<double>(std::count(outside.begin(), outside.end(), 1));
  const double fraction = count / static_cast<double>(mc_samples);
  const double std_error = std::sqrt(fraction * (1.0 - fraction) / static_cast<double>(mc_samples));
  const double bound = M_E * n * eps / meta.inner_radius;
  auto report = make_report("rev_iso", fraction, bound, std_error, 0.0);
  report.details = {{"eps", eps},
                    {"delta", delta},
                    {"n", n},
                    {"r", meta.inner_radius},
                    {"samples", static_cast<double>(mc_samples)},
                    {"trials", static_cast<double>(options.trials)},
                    {"conductance_tol", options.conductance_tol}};
  return report;
}

InequalityReport check_isoperimetry(const ConvexBody& body, const Partition& partition, double eps,
                                    long mc_samples, const IsoperimetryOptions& options) {
  require(eps > 0.0, "isoperimetry: eps must be > 0");
  require(mc_samples >= 2, "isoperimetry: need at least two samples");
  if (!body.supports_rejection_sampling()) {
    throw Unsupported("isoperimetry: the body has no rejection sampler");
  }
  const Manifold& m = body.manifold();
  const ManifoldPoint base = options.base_point.value_or(body.metadata().inner_center);

  const auto count = static_cast<std::size_t>(mc_samples);
  std::vector<ManifoldPoint> points(count);
  std::vector<int> labels(count);
  std::vector<double> distances(count);
  parallel_for(count, options.jobs, [&](std::size_t i) {
    RngStream rng = RngStream::split(options.seed, i);
    points[i] = body.rejection_sample_uniform(rng);
    labels[i] = partition(points[i]);
    if (labels[i] < 1 || labels[i] > 3) throw InvalidParams("isoperimetry: partition must return 1, 2 or 3");
    distances[i] = m.distance(base, points[i]);
  });

  std::vector<std::size_t> first;
  std::vector<std::size_t> third;
  for (std::size_t i = 0; i < count; ++i) {
    if (labels[i] == 1) first.push_back(i);
    if (labels[i] == 3) third.push_back(i);
  }
  if (!first.empty() && !third.empty()) {
    const std::size_t pairs =
        std::min<std::size_t>(static_cast<std::size_t>(options.separation_pairs),
                              std::max(first.size(), third.size()));
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto& x = points[first[k % first.size()]];
      const auto& y = points[third[(k * 7919) % third.size()]];
      const double d = m.distance(x, y);
      if (d < eps) {
        throw SeparationViolated("isoperimetry: sampled K1/K3 pair at distance " + std::to_string(d) +
                                 " < eps = " + std::to_string(eps));
      }
    }
  }

  std::vector<std::vector<double>> columns(4, std::vector<double>(count, 0.0));
  for (std::size_t i = 0; i < count; ++i) {
    columns[static_cast<std::size_t>(labels[i] - 1)][i] = 1.0;
    columns[3][i] = distances[i];
  }
  const double p1 = stats::mean(columns[0]);
  const double p2 = stats::mean(columns[1]);
  const double p3 = stats::mean(columns[2]);
  const double mean_distance = stats::mean(columns[3]);
  const double scale = 1.0 / (eps * std::log(2.0));

  const double lhs = p1 * p3;
  const double rhs = scale * mean_distance * p2;
  // Gradient of margin = rhs - lhs in (p1, p2, p3, m).
  const double std_error =
      delta_method_stderr(columns, {-p3, scale * mean_distance, -p1, scale * p2});
  auto report = make_report("isoperimetry", lhs, rhs, std_error, 0.0);
  report.details = {{"vol_k1", p1}, {"vol_k2", p2}, {"vol_k3", p3}, {"m", mean_distance}, {"eps", eps}};
  return report;
}

OneStepTv estimate_one_step_tv(const ManifoldPoint& x, const ManifoldPoint& y, const ConvexBody& body,
                               double delta, long mc_proposals, RngStream& rng) {
  const Manifold& m = body.manifold();
  if (m.kind() == ManifoldKind::SpecialOrthogonal) {
    throw Unsupported("one_step: no closed-form proposal density on so(n)");
  }
  if (mc_proposals < 2) throw InvalidParams("one_step: need at least two proposals");
  if (!(delta > 0.0)) throw InvalidParams("one_step: delta must be > 0");

  // Both kernels see the same random stream.
  RngStream rng_x = rng;
  RngStream rng_y = rng;
  const auto count = static_cast<std::size_t>(mc_proposals);
  std::vector<double> excess(count);
  std::vector<double> accepted_x(count);
  std::vector<double> accepted_y(count);
  for (std::size_t i = 0; i < count; ++i) {
    TangentVector u = m.sample_tangent_gaussian(x, rng_x);
    u.components *= delta;
    const ManifoldPoint z = m.exp_map(x, u);
    const double log_ratio = log_proposal_density(m, y, z, delta) - log_proposal_density(m, x, z, delta);
    excess[i] = std::max(0.0, 1.0 - std::exp(std::min(0.0, log_ratio)));
    accepted_x[i] = body.contains(z) ? 1.0 : 0.0;

    TangentVector v = m.sample_tangent_gaussian(y, rng_y);
    v.components *= delta;
    accepted_y[i] = body.contains(m.exp_map(y, v)) ? 1.0 : 0.0;
  }
  rng = rng_x;

  OneStepTv out;
  out.proposal_tv = stats::mean(excess);
  const double lx = stats::mean(accepted_x);
  const double ly = stats::mean(accepted_y);
  out.rejection_gap = std::abs(lx - ly);
  out.total = out.proposal_tv + out.rejection_gap;
  const double se_tv = stats::standard_error(excess);
  const double se_gap = std::sqrt(stats::variance(accepted_x) / count + stats::variance(accepted_y) / count);
  out.std_error = std::sqrt(se_tv * se_tv + se_gap * se_gap);
  return out;
}

Estimate estimate_l2_warmness(const Objective& f, const ConvexBody& body, double t_hot, double t_cold,
                              long mc_samples, RngStream& rng) {
  if (!(t_cold > 0.0) || !(t_hot >= t_cold)) {
    throw InvalidParams("l2_warmness: require t_hot >= t_cold > 0");
  }
  if (mc_samples < 2) throw InvalidParams("l2_warmness: need at least two samples");
  const double beta_hot = 1.0 / t_hot;
  const double beta_cold = 1.0 / t_cold;
  const double beta_mirror = 2.0 * beta_hot - beta_cold;
  if (!(beta_mirror > 0.0)) {
    throw ScheduleTooAggressive("l2_warmness: 2 beta_hot - beta_cold must be > 0");
  }

  const auto count = static_cast<std::size_t>(mc_samples);
  std::vector<double> values(count);
  for (auto& v : values) {
    v = f(body.rejection_sample_uniform(rng));
    if (!std::isfinite(v)) throw OracleError("l2_warmness: objective is not finite");
  }
  // Shifting f by its sample minimum cancels in the ratio.
  const double f_min = *std::min_element(values.begin(), values.end());
  std::vector<std::vector<double>> columns(3, std::vector<double>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const double g = values[i] - f_min;
    columns[0][i] = std::exp(-beta_cold * g);
    columns[1][i] = std::exp(-beta_mirror * g);
    columns[2][i] = std::exp(-beta_hot * g);
  }
  const double z_cold = stats::mean(columns[0]);
  const double z_mirror = stats::mean(columns[1]);
  const double z_hot = stats::mean(columns[2]);
  const double ratio = (z_cold * z_mirror) / (z_hot * z_hot);
  const double rel_se = delta_method_stderr(columns, {1.0 / z_cold, 1.0 / z_mirror, -2.0 / z_hot});
  return {ratio, ratio * rel_se};
}

InequalityReport check_low_temp_expectation(std::span<const double> f_values, double temperature, int n,
                                            double min_f) {
  if (f_values.empty()) throw InvalidParams("low_temperature_expectation: no samples");
  require(temperature > 0.0, "low_temperature_expectation: temperature must be > 0");
  const double mean = stats::mean(f_values);
  const double std_error = stats::batch_means_stderr(f_values);
  auto report = make_report("low_temperature_expectation", mean, temperature * (n + 1) + min_f, std_error, 0.0);
  report.details = {{"temperature", temperature},
                    {"n", n},
                    {"min_f", min_f},
                    {"samples", static_cast<double>(f_values.size())}};
  return report;
}

std::vector<TvCheckpoint> tv_decay_curve(const ConvexBody& body, double delta, const ManifoldPoint& start,
                                         const std::function<double(const ManifoldPoint&)>& summary,
                                         std::span<const double> reference,
                                         const std::vector<long>& checkpoints, long replicas,
                                         std::uint64_t seed, int jobs) {
  if (checkpoints.empty() || replicas < 1 || reference.empty()) {
    throw InvalidParams("tv_decay_curve: need checkpoints, replicas and reference samples");
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0 || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw InvalidParams("tv_decay_curve: checkpoints must be non-negative and increasing");
    }
  }
  if (!body.contains(start)) throw InvalidStart("tv_decay_curve: start is not in the body");

  const auto reps = static_cast<std::size_t>(replicas);
  std::vector<std::vector<double>> values(checkpoints.size(), std::vector<double>(reps));
  parallel_for(reps, jobs, [&](std::size_t r) {
    RngStream rng = RngStream::split(seed, r);
    WalkState state;
    state.point = start;
    long step = 0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      for (; step < checkpoints[c]; ++step) state = uniform_step(state, body, delta, rng);
      values[c][r] = summary(state.point);
    }
  });

  const double nr = static_cast<double>(reps);
  const double nref = static_cast<double>(reference.size());
  const double sd = stats::ks_null_stddev(nr * nref / (nr + nref));
  std::vector<TvCheckpoint> curve;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    curve.push_back({checkpoints[c], stats::ks_two_sample(values[c], reference), sd});
  }
  return curve;
}

}  // namespace geowalk
