#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geowalk/annealer.hpp"
#include "geowalk/config.hpp"
#include "geowalk/diagnostics.hpp"
#include "geowalk/instances.hpp"
#include "geowalk/stats.hpp"

namespace geowalk {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string format_real(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

Json coords_json(const ManifoldPoint& p) {
  Json array = Json::array();
  for (Eigen::Index i = 0; i < p.coords.size(); ++i) array.push_back(p.coords[i]);
  return array;
}

RunMode parse_mode(const std::string& text, int line) {
  if (text == "sample") return RunMode::Sample;
  if (text == "anneal") return RunMode::Anneal;
  if (text == "diagnose") return RunMode::Diagnose;
  throw ConfigError("field 'run.mode': expected sample, anneal or diagnose, got '" + text + "'", line);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  return out;
}

// Unit tangent vector at x, deterministic.
TangentVector unit_tangent(const Manifold& m, const ManifoldPoint& x) {
  for (int i = 0; i < m.ambient_dim(); ++i) {
    TangentVector t = m.project_tangent(x, Eigen::VectorXd::Unit(m.ambient_dim(), i));
    const double norm = m.norm(t);
    if (norm > 1e-3) {
      t.components /= norm;
      return t;
    }
  }
  throw Error("no tangent direction found");
}

struct Context {
  const ConfigFile& file;
  std::string hash;
  Manifold manifold;
  ConvexBody body;
  std::uint64_t seed;
  int jobs;
  fs::path out_dir;
  const CliOverrides& overrides;
  std::ostream& out;
  std::ostream& err;
};

double resolve_delta(const ConfigFile& file, const std::string& section, double fallback) {
  const std::string text = file.get_string(section, "delta", "auto");
  if (text == "auto") return fallback;
  return file.get_real(section, "delta");
}

int run_sample(Context& ctx) {
  const auto& file = ctx.file;
  WalkParams params;
  params.delta = resolve_delta(file, "walk", delta_bound(ctx.manifold.descriptor(), ctx.body, 0.5));
  params.seed = ctx.seed;
  params.max_steps = file.get_int("walk", "max_steps", 1000);
  params.record_rejections = file.get_bool("walk", "record_rejections", true);
  params.override_delta = ctx.overrides.override_delta || file.get_bool("walk", "override_delta", false);

  ChainOptions options;
  const std::string burn = file.get_string("walk", "burn_in", "auto");
  if (burn != "auto") options.burn_in = file.get_int("walk", "burn_in");
  options.thin = file.get_int("walk", "thin", 1);
  const long chains = file.get_int("walk", "chains", 1);
  if (chains < 1) throw ConfigError("field 'walk.chains' must be >= 1");

  const std::string start_spec = file.get_string("walk", "start", "center");
  ManifoldPoint start = ctx.body.metadata().inner_center;
  if (start_spec == "uniform") {
    RngStream rng = RngStream::split(ctx.seed, 0xffffffffULL);
    start = ctx.body.rejection_sample_uniform(rng);
  } else if (start_spec != "center") {
    start = parse_point(ctx.manifold, start_spec);
  }

  std::optional<GibbsTarget> target;
  if (file.has("gibbs", "target")) {
    const auto builtin = parse_target(ctx.body, file.get_string("gibbs", "target"));
    target = GibbsTarget{builtin.f, builtin.lipschitz, file.get_real("gibbs", "temperature")};
    if (!(target->temperature > 0.0)) throw ConfigError("field 'gibbs.temperature' must be > 0");
  }

  const long effective_burn = options.burn_in.value_or(default_burn_in(ctx.manifold.intrinsic_dim(), params.delta));
  if (params.max_steps > 0 && effective_burn >= params.max_steps) {
    ctx.err << "warning: burn-in (" << effective_burn << " steps) covers the whole run; no samples are emitted\n";
  }
  const auto results = run_chains(start, ctx.body, params, target, options, static_cast<int>(chains), ctx.jobs);

  auto samples = open_output(ctx.out_dir / "samples.jsonl");
  auto summary = open_output(ctx.out_dir / "summary.csv");
  summary << "config_hash,chain,steps,rejections,rejection_fraction,cut_locus,filter_rejections\n";
  long emitted = 0;
  long total_steps = 0;
  long total_rejections = 0;
  for (std::size_t c = 0; c < results.size(); ++c) {
    const auto& r = results[c];
    for (const auto& s : r.samples) {
      Json j;
      j["config_hash"] = ctx.hash;
      j["chain"] = c;
      j["step"] = s.step;
      j["coords"] = coords_json(s.point);
      j["rejected"] = s.rejected;
      if (s.f_value) j["f_value"] = *s.f_value;
      samples << j.dump() << '\n';
      ++emitted;
    }
    summary << ctx.hash << ',' << c << ',' << r.stats.steps << ',' << r.stats.rejections << ','
            << format_real(r.stats.rejection_fraction()) << ',' << r.stats.cut_locus << ','
            << r.stats.filter_rejections << '\n';
    total_steps += r.stats.steps;
    total_rejections += r.stats.rejections;
  }
  if (!results.empty()) {
    for (const auto& w : results.front().warnings) ctx.err << "warning: " << w << '\n';
  }
  const double fraction = total_steps == 0 ? 0.0 : static_cast<double>(total_rejections) / total_steps;
  ctx.out << "sample: chains=" << chains << " samples=" << emitted << " delta=" << format_real(params.delta)
          << " rejection_fraction=" << format_real(fraction) << " config_hash=" << ctx.hash << '\n';
  return 0;
}

int run_anneal(Context& ctx) {
  const auto& file = ctx.file;
  const auto builtin = parse_target(ctx.body, file.get_string("gibbs", "target"));

  AnnealConfig config;
  config.epsilon = ctx.overrides.epsilon.value_or(file.get_real("anneal", "epsilon", 0.1));
  config.fail_prob = ctx.overrides.fail_prob.value_or(file.get_real("anneal", "fail_prob", 0.1));
  const std::string steps = file.get_string("anneal", "steps_per_phase", "auto");
  if (steps != "auto") config.steps_per_phase = file.get_int("anneal", "steps_per_phase");
  config.lipschitz = file.get_real("anneal", "lipschitz", builtin.lipschitz);
  config.budget_constant = ctx.overrides.budget_constant.value_or(file.get_real("anneal", "budget_constant", 1.0));
  config.global_budget = file.get_int("anneal", "global_budget", 1'000'000);
  const std::string delta = file.get_string("anneal", "delta", "auto");
  if (delta != "auto") config.delta = file.get_real("anneal", "delta");
  config.override_delta = ctx.overrides.override_delta || file.get_bool("anneal", "override_delta", false);
  const int trials = ctx.overrides.trials.value_or(static_cast<int>(file.get_int("anneal", "trials", 1)));
  if (trials < 1) throw ConfigError("field 'anneal.trials' must be >= 1");
  if (config.global_budget < 1) throw ConfigError("field 'anneal.global_budget' must be >= 1");

  const auto results = anneal_trials(ctx.body, builtin.f, config, ctx.seed, trials, ctx.jobs);

  auto trace = open_output(ctx.out_dir / "trace.csv");
  auto result_file = open_output(ctx.out_dir / "result.jsonl");
  trace << "config_hash,trial,phase,T,steps,rejections,best_f,final_f\n";
  std::size_t best = 0;
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    for (const auto& p : r.trace) {
      trace << ctx.hash << ',' << t << ',' << p.phase << ',' << format_real(p.temperature) << ',' << p.steps << ','
            << p.rejections << ',' << format_real(p.best_f) << ',' << format_real(p.final_f) << '\n';
    }
    Json j;
    j["config_hash"] = ctx.hash;
    j["trial"] = t;
    j["value"] = r.value;
    j["phases"] = r.schedule.phases;
    j["minimizer"] = coords_json(r.minimizer);
    result_file << j.dump() << '\n';
    if (r.value < results[best].value) best = t;
  }
  for (const auto& w : results.front().warnings) ctx.err << "warning: " << w << '\n';
  ctx.out << "anneal: trials=" << trials << " phases=" << results.front().schedule.phases
          << " best_value=" << format_real(results[best].value) << " best_trial=" << best
          << " config_hash=" << ctx.hash << '\n';
  return 0;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

Partition slab_partition(const ConvexBody& body, double eps) {
  const Manifold& m = body.manifold();
  const ManifoldPoint center = body.metadata().inner_center;
  if (m.kind() == ManifoldKind::Sphere) {
    // Level sets <x, w> = sin(t) sit at angle t from the great sphere w^perp.
    const Eigen::VectorXd w = unit_tangent(m, center).components;
    const double lo = std::sin(-0.5 * eps);
    const double hi = std::sin(0.5 * eps);
    return [w, lo, hi](const ManifoldPoint& x) {
      const double s = w.dot(x.coords);
      return s < lo ? 1 : (s >= hi ? 3 : 2);
    };
  }
  const double c = center.coords[0];
  return [c, eps](const ManifoldPoint& x) {
    const double s = x.coords[0] - c;
    return s < -0.5 * eps ? 1 : (s >= 0.5 * eps ? 3 : 2);
  };
}

int run_diagnose(Context& ctx) {
  const auto& file = ctx.file;
  const std::string check_list = file.get_string("diagnose", "checks", "all");
  std::vector<std::string> checks = split_list(check_list);
  const std::vector<std::string> all = {"numerical",     "rn_kv",    "z_logconcavity",
                                        "rev_iso",       "isoperimetry", "one_step",
                                        "adjacent_dist", "low_temperature_expectation", "tv_decay"};
  if (check_list == "all") checks = all;
  for (const auto& c : checks) {
    if (std::find(all.begin(), all.end(), c) == all.end()) {
      throw ConfigError("field 'diagnose.checks': unknown check '" + c + "'");
    }
  }
  const long instances = file.get_int("diagnose", "instances", 100);
  const long mc_samples = file.get_int("diagnose", "mc_samples", 10000);
  const long trials = file.get_int("diagnose", "trials", 10000);
  const long chain_steps = file.get_int("diagnose", "chain_steps", 200000);
  const long replicas = file.get_int("diagnose", "replicas", 10000);
  const double temperature = file.get_real("diagnose", "temperature", 0.05);
  const double epsilon = file.get_real("diagnose", "epsilon", 0.1);
  const double fail_prob = file.get_real("diagnose", "fail_prob", 0.1);

  const Manifold& m = ctx.manifold;
  const ConvexBody& body = ctx.body;
  const auto& meta = body.metadata();
  const int n = m.intrinsic_dim();
  const double walk_delta =
      resolve_delta(file, "diagnose", std::min(0.5, meta.inner_radius / (2.0 * std::sqrt(static_cast<double>(n)))));
  const bool sampled = body.supports_rejection_sampling() && m.kind() != ManifoldKind::SpecialOrthogonal;

  std::vector<InequalityReport> reports;
  auto stream_for = [&](std::uint64_t salt) { return RngStream::split(ctx.seed, salt); };
  const Objective distance_to_center = [m, c = meta.inner_center](const ManifoldPoint& x) {
    return m.distance(c, x);
  };

  for (const auto& check : checks) {
    const bool needs_body = check != "numerical" && check != "rn_kv" && check != "z_logconcavity";
    if (needs_body && !sampled) {
      ctx.err << "note: skipping " << check << " (needs rejection sampling on a sphere or euclidean body)\n";
      continue;
    }
    if (check == "numerical") {
      RngStream rng = stream_for(1);
      for (long i = 0; i < instances; ++i) {
        const auto in = random_affine_needle_instance(rng);
        reports.push_back(check_affine_needle_lemma(in.a, in.b, in.c1, in.c2, in.n, in.eps));
      }
    } else if (check == "rn_kv") {
      RngStream rng = stream_for(2);
      for (long i = 0; i < instances; ++i) {
        const auto in = random_kv_needle_instance(rng);
        reports.push_back(check_kv_needle_lemma(in.h, in.a, in.b, in.n));
      }
    } else if (check == "z_logconcavity") {
      RngStream rng = stream_for(3);
      for (long i = 0; i < instances; ++i) {
        const auto in = random_partition_instance(rng);
        reports.push_back(check_partition_function_logconcavity(in.h, in.lo, in.hi, in.n, in.alpha, in.beta));
      }
    } else if (check == "rev_iso") {
      InteriorVolumeOptions options;
      options.trials = trials;
      options.seed = splitmix64(ctx.seed ^ 4);
      options.jobs = ctx.jobs;
      reports.push_back(check_interior_volume(body, meta.inner_radius / (2.0 * n), mc_samples, options));
    } else if (check == "isoperimetry") {
      const double eps = meta.inner_radius / 4.0;
      IsoperimetryOptions options;
      options.seed = splitmix64(ctx.seed ^ 5);
      options.jobs = ctx.jobs;
      reports.push_back(check_isoperimetry(body, slab_partition(body, eps), eps, mc_samples, options));
    } else if (check == "one_step") {
      RngStream rng = stream_for(6);
      const double gap = walk_delta / 10.0;
      const ManifoldPoint& x = meta.inner_center;
      const TangentVector w = unit_tangent(m, x);
      const ManifoldPoint y = m.geodesic_point(x, w, gap);
      const auto tv = estimate_one_step_tv(x, y, body, walk_delta, mc_samples, rng);
      auto report = make_report("one_step", tv.proposal_tv,
                                gap / (walk_delta * std::sqrt(2.0 * M_PI)) + 1.0 / 25.0, tv.std_error, 0.0);
      report.details = {{"distance", gap},
                        {"delta", walk_delta},
                        {"rejection_gap", tv.rejection_gap},
                        {"total", tv.total}};
      reports.push_back(report);
    } else if (check == "adjacent_dist") {
      if (n < 2) {
        ctx.err << "note: skipping adjacent_dist (schedule needs n >= 2)\n";
        continue;
      }
      const auto schedule = make_schedule(initial_temperature(body, 1.0), n, epsilon, fail_prob);
      if (schedule.temps.size() < 2) {
        ctx.err << "note: skipping adjacent_dist (single-temperature schedule)\n";
        continue;
      }
      RngStream rng = stream_for(7);
      Estimate w;
      try {
        w = estimate_l2_warmness(distance_to_center, body, schedule.temps[0], schedule.temps[1], mc_samples, rng);
      } catch (const ScheduleTooAggressive& e) {
        ctx.err << "note: skipping adjacent_dist (" << e.what() << "; cooling ratio needs n > 4)\n";
        continue;
      }
      auto report = make_report("adjacent_dist", w.value, 5.0, w.std_error, 0.0);
      report.details = {{"t_hot", schedule.temps[0]}, {"t_cold", schedule.temps[1]}};
      reports.push_back(report);
    } else if (check == "low_temperature_expectation") {
      WalkParams params;
      params.delta = std::min(walk_delta, temperature);
      params.seed = splitmix64(ctx.seed ^ 8);
      params.max_steps = chain_steps;
      params.override_delta = true;
      ChainOptions options;
      options.burn_in = chain_steps / 10;
      const GibbsTarget target{distance_to_center, 1.0, temperature};
      const auto chain = run_chain(meta.inner_center, body, params, target, options);
      std::vector<double> values;
      values.reserve(chain.samples.size());
      for (const auto& s : chain.samples) values.push_back(*s.f_value);
      reports.push_back(check_low_temp_expectation(values, temperature, n, 0.0));
    } else if (check == "tv_decay") {
      RngStream ref_rng = stream_for(9);
      std::vector<double> reference(static_cast<std::size_t>(replicas));
      const auto summary = [m, c = meta.inner_center](const ManifoldPoint& x) { return m.distance(c, x); };
      for (auto& v : reference) v = summary(body.rejection_sample_uniform(ref_rng));
      const double scale = std::pow(meta.inner_radius / walk_delta, 2.0);
      std::vector<long> checkpoints{0};
      for (double factor : {0.25, 1.0, 4.0, 16.0}) {
        checkpoints.push_back(std::max(checkpoints.back() + 1, static_cast<long>(std::ceil(factor * scale))));
      }
      const auto curve = tv_decay_curve(body, walk_delta, meta.inner_center, summary, reference, checkpoints,
                                        replicas, splitmix64(ctx.seed ^ 10), ctx.jobs);
      double worst_increase = -1.0;
      for (std::size_t k = 1; k < curve.size(); ++k) {
        worst_increase = std::max(worst_increase, curve[k].ks - curve[k - 1].ks);
      }
      auto final_report = make_report("tv_decay", curve.back().ks, 0.03, 0.0, 0.0);
      for (const auto& c : curve) final_report.details.emplace_back("ks_at_" + std::to_string(c.step), c.ks);
      reports.push_back(final_report);
      reports.push_back(make_report("tv_decay_monotone", worst_increase, 0.0, curve.back().std_error, 0.0));
    }
  }

  auto report_file = open_output(ctx.out_dir / "reports.jsonl");
  long failed = 0;
  for (const auto& r : reports) {
    Json j = Json::parse(to_json(r));
    j["config_hash"] = ctx.hash;
    report_file << j.dump() << '\n';
    if (!r.passed) {
      ++failed;
      ctx.err << "FAILED " << r.name << ": lhs=" << format_real(r.lhs) << " rhs=" << format_real(r.rhs) << '\n';
    }
  }
  ctx.out << "diagnose: reports=" << reports.size() << " failed=" << failed << " config_hash=" << ctx.hash << '\n';
  return failed == 0 ? 0 : 1;
}

int execute(const ConfigFile& file, const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  RunMode mode = RunMode::Sample;
  if (overrides.mode) {
    mode = *overrides.mode;
  } else {
    const auto* entry = file.find("run", "mode");
    if (!entry) throw ConfigError("missing required field 'run.mode'");
    mode = parse_mode(entry->value, entry->line);
  }
  const bool diagnose = mode == RunMode::Diagnose;

  const auto manifold_entry = file.find("run", "manifold");
  const auto body_entry = file.find("run", "body");
  if (!diagnose && (!manifold_entry || !body_entry)) {
    throw ConfigError("fields 'run.manifold' and 'run.body' are required");
  }
  const std::string manifold_spec = manifold_entry ? manifold_entry->value : "sphere:2";
  const std::string body_spec = body_entry ? body_entry->value : "cap:north:1.0471975511965976";

  auto with_line = [](const InvalidParams& e, const ConfigFile::Entry* entry, const std::string& field) {
    return ConfigError("field '" + field + "': " + e.what(), entry ? entry->line : 0);
  };
  std::optional<Manifold> manifold;
  try {
    manifold = Manifold::parse(manifold_spec);
  } catch (const InvalidParams& e) {
    throw with_line(e, manifold_entry, "run.manifold");
  }
  std::optional<ConvexBody> body;
  try {
    body = ConvexBody::parse(*manifold, body_spec);
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'run.body': ") + e.what(), body_entry ? body_entry->line : 0);
  }

  const std::uint64_t seed =
      overrides.seed.value_or(static_cast<std::uint64_t>(file.get_int("run", "seed", 0)));
  const int jobs = overrides.jobs.value_or(static_cast<int>(file.get_int("run", "jobs", 1)));
  const fs::path out_dir = overrides.output_dir.value_or(file.get_string("run", "output", "."));
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir.string() + "'");

  // Provenance: config text plus every override that changes results.
  std::ostringstream provenance;
  provenance << file.text() << "\n#seed=" << seed << "\n#mode=" << static_cast<int>(mode)
             << "\n#override_delta=" << overrides.override_delta
             << "\n#budget_constant=" << (overrides.budget_constant ? format_real(*overrides.budget_constant) : "-")
             << "\n#trials=" << (overrides.trials ? std::to_string(*overrides.trials) : "-")
             << "\n#epsilon=" << (overrides.epsilon ? format_real(*overrides.epsilon) : "-")
             << "\n#fail_prob=" << (overrides.fail_prob ? format_real(*overrides.fail_prob) : "-");

  Context ctx{file, fnv1a_hex(provenance.str()), *manifold, *body, seed, std::max(1, jobs), out_dir, overrides,
              out, err};
  int code = 0;
  switch (mode) {
    case RunMode::Sample:
      code = run_sample(ctx);
      break;
    case RunMode::Anneal:
      code = run_anneal(ctx);
      break;
    case RunMode::Diagnose:
      code = run_diagnose(ctx);
      break;
  }
  for (const auto& key : file.unused_keys()) err << "warning: unused config key '" << key << "'\n";
  return code;
}

int guarded(const std::function<ConfigFile()>& load, const CliOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  try {
    const ConfigFile file = load();
    return execute(file, overrides, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidParams& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int run(const std::string& config_path, const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded([&] { return ConfigFile::load(config_path); }, overrides, out, err);
}

int run_text(std::string_view config_text, const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded([&] { return ConfigFile::parse(config_text); }, overrides, out, err);
}

}  // namespace geowalk
