#pragma once

// Command-line front end.
//
// Subcommands:
//   simulate    Monte Carlo ensemble (direct or variance-reduced estimator)
//   analytic    closed-form expected statistics (optionally via the ODE
//               integrator, optionally with stationary rows appended)
//   compare     ensemble vs closed form with z-scores; exit 3 when any
//               |z| exceeds the threshold
//   phase-scan  closed-form scale curves t = s N^gamma with predicted and
//               fitted growth exponents
//   limits      exact and large-N stationary values
//   selftest    built-in consistency checks (exit 3 on failure)
//
// Exit codes: 0 success; 1 validation/configuration error; 2 runtime or
// I/O error; 3 comparison threshold exceeded or selftest failure.
//
// Config files are JSON with a mandatory "version": 1. Unknown keys are
// rejected everywhere (catching typos early beats silently ignoring them).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clocksync/analytics.hpp"
#include "clocksync/common.hpp"
#include "clocksync/conditional.hpp"
#include "clocksync/io.hpp"
#include "clocksync/model.hpp"
#include "clocksync/phase.hpp"
#include "clocksync/rng.hpp"
#include "clocksync/simulator.hpp"
#include "clocksync/stats.hpp"

namespace clocksync::cli {

// ---------------------------------------------------------------------------
// Configuration file.
// ---------------------------------------------------------------------------
struct RunConfig {
  ModelParams params{};
  InitialCondition init{};
  std::vector<double> obs_times;
  std::int64_t replicas = 1;
  rng::InterEventLaw law = rng::InterEventLaw::exponential();
  PhaseQuery phase{};
  std::vector<std::int64_t> phase_Ns;

  bool has_model = false;
  bool has_initial = false;
  bool has_obs = false;
  bool has_replicas = false;
  bool has_phase = false;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj,
                       std::initializer_list<const char*> allowed,
                       const char* ctx) {
  require(obj.is_object(), errc::config,
          std::string("config: ") + ctx + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    require(known, errc::config, "config: unknown key '" + it.key() +
                                     "' in " + ctx);
  }
}

inline const json& get_field(const json& obj, const char* key,
                             const char* ctx) {
  const auto it = obj.find(key);
  require(it != obj.end(), errc::config,
          std::string("config: missing key '") + key + "' in " + ctx);
  return *it;
}

inline double get_number(const json& obj, const char* key, const char* ctx) {
  const json& f = get_field(obj, key, ctx);
  require(f.is_number(), errc::config,
          std::string("config: '") + key + "' in " + ctx + " must be a number");
  return f.get<double>();
}

inline std::int64_t get_integer(const json& obj, const char* key,
                                const char* ctx) {
  const json& f = get_field(obj, key, ctx);
  require(f.is_number_integer(), errc::config,
          std::string("config: '") + key + "' in " + ctx +
              " must be an integer");
  return f.get<std::int64_t>();
}

inline std::string get_string(const json& obj, const char* key,
                              const char* ctx) {
  const json& f = get_field(obj, key, ctx);
  require(f.is_string(), errc::config,
          std::string("config: '") + key + "' in " + ctx + " must be a string");
  return f.get<std::string>();
}

inline ModelParams parse_model(const json& j) {
  check_keys(j, {"N", "r", "v", "sigma", "alpha", "beta"}, "model");
  ModelParams p;
  p.N = get_integer(j, "N", "model");
  p.r = get_number(j, "r", "model");
  p.v = get_number(j, "v", "model");
  p.sigma = get_number(j, "sigma", "model");
  p.alpha = get_number(j, "alpha", "model");
  p.beta = get_number(j, "beta", "model");
  p.validate();
  return p;
}

inline InitialCondition parse_initial(const json& j) {
  InitialCondition init;
  const std::string type = get_string(j, "type", "initial");
  if (type == "zeros") {
    check_keys(j, {"type"}, "initial");
    init.kind = InitialCondition::Kind::zeros;
  } else if (type == "gaussian") {
    check_keys(j, {"type", "mean", "sd"}, "initial");
    init.kind = InitialCondition::Kind::gaussian;
    init.mean = get_number(j, "mean", "initial");
    init.sd = get_number(j, "sd", "initial");
  } else if (type == "explicit") {
    check_keys(j, {"type", "x"}, "initial");
    init.kind = InitialCondition::Kind::explicit_values;
    const json& arr = get_field(j, "x", "initial");
    require(arr.is_array() && !arr.empty(), errc::config,
            "config: initial.x must be a non-empty array");
    for (const auto& v : arr) {
      require(v.is_number(), errc::config,
              "config: initial.x entries must be numbers");
      init.x.push_back(v.get<double>());
    }
  } else {
    fail(errc::config, "config: initial.type must be zeros, gaussian, or "
                       "explicit");
  }
  return init;
}

inline rng::InterEventLaw parse_law(const json& j) {
  const std::string type = get_string(j, "type", "law");
  if (type == "exponential") {
    check_keys(j, {"type"}, "law");
    return rng::InterEventLaw::exponential();
  }
  if (type == "deterministic") {
    check_keys(j, {"type", "gap"}, "law");
    return rng::InterEventLaw::deterministic(get_number(j, "gap", "law"));
  }
  if (type == "uniform") {
    check_keys(j, {"type", "low", "high"}, "law");
    return rng::InterEventLaw::uniform(get_number(j, "low", "law"),
                                       get_number(j, "high", "law"));
  }
  if (type == "gamma") {
    check_keys(j, {"type", "shape", "scale"}, "law");
    return rng::InterEventLaw::gamma(get_number(j, "shape", "law"),
                                     get_number(j, "scale", "law"));
  }
  fail(errc::config,
       "config: law.type must be exponential, deterministic, uniform, or "
       "gamma");
}

inline RunConfig parse_config_json(const json& j) {
  check_keys(j,
             {"version", "model", "initial", "observation_times", "replicas",
              "law", "phase"},
             "the top level");
  const std::int64_t version = get_integer(j, "version", "the top level");
  require(version == 1, errc::config, "config: version must be 1");

  RunConfig cfg;
  if (j.contains("model")) {
    cfg.params = parse_model(j.at("model"));
    cfg.has_model = true;
  }
  if (j.contains("initial")) {
    cfg.init = parse_initial(j.at("initial"));
    cfg.has_initial = true;
  }
  if (j.contains("observation_times")) {
    const json& arr = j.at("observation_times");
    require(arr.is_array() && !arr.empty(), errc::config,
            "config: observation_times must be a non-empty array");
    for (const auto& v : arr) {
      require(v.is_number(), errc::config,
              "config: observation_times entries must be numbers");
      cfg.obs_times.push_back(v.get<double>());
    }
    cfg.has_obs = true;
  }
  if (j.contains("replicas")) {
    cfg.replicas = get_integer(j, "replicas", "the top level");
    require(cfg.replicas >= 1, errc::config,
            "config: replicas must be >= 1");
    cfg.has_replicas = true;
  }
  if (j.contains("law")) cfg.law = parse_law(j.at("law"));
  if (j.contains("phase")) {
    const json& ph = j.at("phase");
    check_keys(ph, {"gamma", "s", "N_values"}, "phase");
    cfg.phase.gamma = get_number(ph, "gamma", "phase");
    cfg.phase.s = get_number(ph, "s", "phase");
    cfg.phase.validate();
    const json& arr = get_field(ph, "N_values", "phase");
    require(arr.is_array() && !arr.empty(), errc::config,
            "config: phase.N_values must be a non-empty array");
    for (const auto& v : arr) {
      require(v.is_number_integer(), errc::config,
              "config: phase.N_values entries must be integers");
      cfg.phase_Ns.push_back(v.get<std::int64_t>());
    }
    cfg.has_phase = true;
  }
  return cfg;
}

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), errc::config, "config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::config, std::string("config: JSON parse error: ") + e.what());
  }
  return detail::parse_config_json(j);
}

// ---------------------------------------------------------------------------
// Flags shared by the subcommands.
// ---------------------------------------------------------------------------
struct CliOptions {
  std::string config_path;
  std::string out_path;  // empty = stdout
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  std::string estimator = "direct";
  bool use_ode = false;
  bool append_limits = false;
  double z_threshold = 4.0;
  double perturb_k = 0.0;
};

namespace detail {

inline void require_sections(const RunConfig& cfg, bool model, bool initial,
                             bool obs, bool replicas) {
  if (model)
    require(cfg.has_model, errc::config, "config: 'model' section required");
  if (initial)
    require(cfg.has_initial, errc::config,
            "config: 'initial' section required");
  if (obs)
    require(cfg.has_obs, errc::config,
            "config: 'observation_times' required");
  if (replicas)
    require(cfg.has_replicas, errc::config, "config: 'replicas' required");
}

inline EnsembleStats run_estimator(const RunConfig& cfg,
                                   const CliOptions& opt) {
  require(opt.estimator == "direct" || opt.estimator == "rao-blackwell",
          errc::config,
          "estimator must be 'direct' or 'rao-blackwell'");
  if (opt.estimator == "direct") {
    SimConfig sim;
    sim.params = cfg.params;
    sim.init = cfg.init;
    sim.obs_times = cfg.obs_times;
    sim.replicas = cfg.replicas;
    sim.master_seed = opt.seed;
    sim.threads = opt.threads;
    sim.law = cfg.law;
    return run_ensemble(sim);
  }
  require(cfg.law.kind == rng::InterEventLaw::Kind::exponential, errc::config,
          "the rao-blackwell estimator requires the exponential flow");
  const MomentVector m0 = initial_moments(cfg.params, cfg.init);
  return rao_blackwell_ensemble(cfg.params, m0, cfg.obs_times, cfg.replicas,
                                opt.seed, opt.threads);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommand implementations. Each returns the process exit code.
// ---------------------------------------------------------------------------

inline int cmd_simulate(const RunConfig& cfg, const CliOptions& opt) {
  detail::require_sections(cfg, true, true, true, true);
  const EnsembleStats st = detail::run_estimator(cfg, opt);
  io::write_output(opt.out_path, io::ensemble_csv(st));
  return 0;
}

inline int cmd_analytic(const RunConfig& cfg, const CliOptions& opt) {
  detail::require_sections(cfg, true, true, true, false);
  const MomentVector m0 = initial_moments(cfg.params, cfg.init);
  std::vector<MomentVector> ms;
  if (opt.use_ode) {
    ms = ode_moments(cfg.params, m0, cfg.obs_times);
  } else {
    ms.reserve(cfg.obs_times.size());
    for (double t : cfg.obs_times)
      ms.push_back(moments_closed_form(cfg.params, m0, t));
  }
  if (opt.append_limits) {
    const StationaryLimits lim = stationary_limits(cfg.params);
    io::write_output(opt.out_path, io::moments_csv(cfg.obs_times, ms, &lim));
  } else {
    io::write_output(opt.out_path, io::moments_csv(cfg.obs_times, ms));
  }
  return 0;
}

inline int cmd_compare(const RunConfig& cfg, const CliOptions& opt) {
  detail::require_sections(cfg, true, true, true, true);
  require(cfg.replicas >= 2, errc::config,
          "compare: needs replicas >= 2 for standard errors");
  require(cfg.law.kind == rng::InterEventLaw::Kind::exponential, errc::config,
          "compare: closed forms describe the exponential flow only");
  require(finite(opt.z_threshold) && opt.z_threshold > 0.0, errc::config,
          "compare: z-threshold must be positive");
  const EnsembleStats st = detail::run_estimator(cfg, opt);
  const MomentVector m0 = initial_moments(cfg.params, cfg.init);
  std::vector<MomentVector> closed;
  closed.reserve(cfg.obs_times.size());
  for (double t : cfg.obs_times)
    closed.push_back(moments_closed_form(cfg.params, m0, t));
  io::write_output(opt.out_path, io::compare_csv(st, closed));

  double worst = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const double zs[3] = {(st.R_mean[i] - closed[i].R) / st.R_se[i],
                          (st.D_mean[i] - closed[i].D) / st.D_se[i],
                          (st.d_mean[i] - closed[i].d) / st.d_se[i]};
    for (double z : zs)
      if (std::isfinite(z)) worst = std::max(worst, std::abs(z));
  }
  return worst > opt.z_threshold ? 3 : 0;
}

inline int cmd_phase_scan(const RunConfig& cfg, const CliOptions& opt) {
  detail::require_sections(cfg, true, false, false, false);
  require(cfg.has_phase, errc::config, "config: 'phase' section required");
  const PhaseResult cls = classify(cfg.params, cfg.phase);
  const auto points = scale_curve(cfg.params, cfg.phase, cfg.phase_Ns);
  std::vector<double> dvals;
  dvals.reserve(points.size());
  for (const auto& pt : points) dvals.push_back(pt.closed.D);
  const auto fit = exponent_fit(cfg.phase_Ns, dvals);
  io::write_output(opt.out_path,
                   io::phase_scan_csv(cfg.phase.gamma, points, cls.D.exponent,
                                      fit.slope, cls.D.label));
  return 0;
}

inline int cmd_limits(const RunConfig& cfg, const CliOptions& opt) {
  detail::require_sections(cfg, true, false, false, false);
  const StationaryLimits lim = stationary_limits(cfg.params);
  io::write_output(opt.out_path, io::limits_csv(lim));
  return 0;
}

// ---------------------------------------------------------------------------
// Built-in consistency checks. Each check is deterministic; the report is
// byte-stable for a given build. --perturb-k injects a relative error into
// the pair-averaged jump map inside the recursion check, proving the
// report can go red.
// ---------------------------------------------------------------------------
inline int cmd_selftest(const CliOptions& opt) {
  std::string report = "clocksync selftest\n";
  int passed = 0, total = 0;
  auto record = [&](const char* name, bool ok, const std::string& detail) {
    ++total;
    if (ok) {
      ++passed;
      report += std::string("ok - ") + name + "\n";
    } else {
      report += std::string("FAIL - ") + name + " (" + detail + ")\n";
    }
  };

  // Shared parameter sets.
  ModelParams pa{3, 0.1, 0.3, 0.8, 1.3, 0.7};
  ModelParams pb{4, 0.0, 0.25, 0.6, 1.2, 0.8};
  const MomentVector ia{1.0, 2.0, 0.5};
  const MomentVector ib{0.7, 1.1, -0.4};

  // 1. One-event averaging identity: exhaustive enumeration over the pair
  // distribution against the 2x2 map and the offset contraction.
  {
    double worst = 0.0;
    rng::Stream gen(12345, 0);
    for (std::int64_t N : {2, 3, 5}) {
      for (auto [al, be] : {std::pair{1.0, 2.0}, std::pair{2.5, 0.4},
                            std::pair{0.0, 1.5}, std::pair{3.0, 0.0}}) {
        ModelParams p{N, 0.0, 0.0, 1.0, al, be};
        ClockConfig cfg = ClockConfig::zeros(N);
        for (auto& x : cfg.x) x = 2.0 * gen.uniform01() - 1.0;
        const MomentVector before = moments_of_config(cfg);
        const MomentVector after = expected_post_jump_moments(cfg, p);
        const DerivedScalars s = derived_scalars(p);
        const Vec2 mapped = s.K * Vec2{before.R, before.D};
        worst = std::max(worst, std::abs(after.R - mapped.x));
        worst = std::max(worst, std::abs(after.D - mapped.y));
        worst = std::max(worst, std::abs(after.d - s.k_N * before.d));
      }
    }
    record("post_jump_enumeration", worst <= 1e-12,
           "max_abs_diff=" + io::format_double(worst));
  }

  // 2. Closed form vs numerical integration of the moment system.
  {
    double worst = 0.0;
    const std::vector<double> ts{0.5, 2.0, 10.0};
    const auto ode = ode_moments(pa, ia, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const MomentVector cf = moments_closed_form(pa, ia, ts[i]);
      worst = std::max(worst, std::abs(cf.R - ode[i].R) /
                                  std::max(1.0, std::abs(cf.R)));
      worst = std::max(worst, std::abs(cf.D - ode[i].D) /
                                  std::max(1.0, std::abs(cf.D)));
      worst = std::max(worst, std::abs(cf.d - ode[i].d) /
                                  std::max(1.0, std::abs(cf.d)));
    }
    record("closed_vs_ode", worst <= 1e-8,
           "max_rel_diff=" + io::format_double(worst));
  }

  // 3. Averaging the count-conditioned statistics over the Poisson count
  // must reproduce the closed form.
  {
    const double t = 3.0;
    const DerivedScalars s = derived_scalars(pb);
    const double mean = s.delta_N * t;
    const auto lo = static_cast<std::int64_t>(
        std::max(0.0, std::floor(mean - 10.0 * std::sqrt(mean) - 10.0)));
    const auto hi = static_cast<std::int64_t>(
        std::ceil(mean + 10.0 * std::sqrt(mean) + 10.0));
    neumaier_sum R, D, d;
    for (std::int64_t n = lo; n <= hi; ++n) {
      const double lp = -mean + static_cast<double>(n) * std::log(mean) -
                        std::lgamma(static_cast<double>(n) + 1.0);
      const double pn = std::exp(lp);
      const MomentVector m = conditional_given_count(pb, ib, n, t);
      R.add(pn * m.R);
      D.add(pn * m.D);
      d.add(pn * m.d);
    }
    const MomentVector cf = moments_closed_form(pb, ib, t);
    double worst = std::abs(R.value() - cf.R) / std::max(1.0, std::abs(cf.R));
    worst = std::max(worst, std::abs(D.value() - cf.D) /
                                std::max(1.0, std::abs(cf.D)));
    worst = std::max(worst, std::abs(d.value() - cf.d) /
                                std::max(1.0, std::abs(cf.d)));
    record("count_average_identity", worst <= 1e-8,
           "max_rel_diff=" + io::format_double(worst));
  }

  // 4. The closed form must settle onto the exact stationary values.
  {
    const StationaryLimits lim = stationary_limits(pb);
    const MomentVector far = moments_closed_form(pb, ib, 150.0);
    double worst = std::abs(far.R - lim.exact.R) / std::abs(lim.exact.R);
    worst = std::max(worst,
                     std::abs(far.D - lim.exact.D) / std::abs(lim.exact.D));
    worst = std::max(worst,
                     std::abs(far.d - lim.exact.d) / std::abs(lim.exact.d));
    record("stationary_convergence", worst <= 1e-9,
           "max_rel_diff=" + io::format_double(worst));
  }

  // 5. Event-conditioned recursion against an inline reference walk.
  // --perturb-k scales the coupling entry of the jump map here.
  {
    EpochSequence seq;
    seq.t_end = 2.5;
    seq.taus = {0.3, 0.8, 1.1, 1.9};
    const MomentVector lib = conditional_moments(pa, ia, seq);

    const DerivedScalars s = derived_scalars(pa);
    Mat2 K = s.K;
    K.m21 *= 1.0 + opt.perturb_k;
    const double sig2 = pa.sigma * pa.sigma;
    const double b = pa.v - pa.r;
    MomentVector m = ia;
    double prev = 0.0;
    auto free_walk = [&](double dt) {
      m.R += sig2 * dt + 2.0 * b * m.d * dt + b * b * dt * dt;
      m.D += 2.0 * sig2 * dt;
      m.d += b * dt;
    };
    for (double tau : seq.taus) {
      free_walk(tau - prev);
      const Vec2 mapped = K * Vec2{m.R, m.D};
      m.R = mapped.x;
      m.D = mapped.y;
      m.d = s.k_N * m.d;
      prev = tau;
    }
    free_walk(seq.t_end - prev);
    double worst = std::abs(lib.R - m.R) / std::max(1.0, std::abs(lib.R));
    worst = std::max(worst,
                     std::abs(lib.D - m.D) / std::max(1.0, std::abs(lib.D)));
    worst = std::max(worst,
                     std::abs(lib.d - m.d) / std::max(1.0, std::abs(lib.d)));
    record("jump_coupling_recursion", worst <= 1e-12,
           "max_rel_diff=" + io::format_double(worst));
  }

  // 6. The variance-reduced estimator agrees with the closed form.
  {
    const std::vector<double> obs{2.0};
    const EnsembleStats st =
        rao_blackwell_ensemble(pa, ia, obs, 400, 20260819u, 1);
    const MomentVector cf = moments_closed_form(pa, ia, 2.0);
    const double zR = std::abs(st.R_mean[0] - cf.R) / st.R_se[0];
    const double zD = std::abs(st.D_mean[0] - cf.D) / st.D_se[0];
    const double zd = std::abs(st.d_mean[0] - cf.d) / st.d_se[0];
    const double worst = std::max({zR, zD, zd});
    record("estimator_consistency", worst <= 6.0,
           "max_z=" + io::format_double(worst));
  }

  report += std::to_string(passed) + "/" + std::to_string(total) +
            " checks passed\n";
  io::write_output(opt.out_path, report);
  return passed == total ? 0 : 3;
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch.
// ---------------------------------------------------------------------------
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Stochastic clock-network laboratory: Monte Carlo simulation "
               "and exact moment analytics"};
  app.require_subcommand(1);

  CliOptions opt;

  auto add_config = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path,
                    "JSON configuration file (version 1)")
        ->required();
  };
  auto add_out = [&opt](CLI::App* sub) {
    sub->add_option("--out", opt.out_path,
                    "output file (atomic write); stdout when absent");
  };
  auto add_run_flags = [&opt](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "master seed (default 0)");
    sub->add_option("--threads", opt.threads,
                    "worker threads; 0 = hardware concurrency")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--estimator", opt.estimator,
                    "direct | rao-blackwell (default direct)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo ensemble");
  add_config(sim);
  add_out(sim);
  add_run_flags(sim);

  CLI::App* ana =
      app.add_subcommand("analytic", "evaluate the expected statistics");
  add_config(ana);
  add_out(ana);
  ana->add_flag("--ode", opt.use_ode,
                "integrate the moment system instead of using the closed "
                "form");
  ana->add_flag("--limits", opt.append_limits,
                "append stationary_exact and stationary_asymptotic rows");

  CLI::App* cmp = app.add_subcommand(
      "compare", "simulate and compare against the closed form");
  add_config(cmp);
  add_out(cmp);
  add_run_flags(cmp);
  cmp->add_option("--z-threshold", opt.z_threshold,
                  "largest tolerated |z| (default 4)");

  CLI::App* phs = app.add_subcommand(
      "phase-scan", "closed-form growth along t = s*N^gamma");
  add_config(phs);
  add_out(phs);

  CLI::App* lim =
      app.add_subcommand("limits", "exact and large-N stationary values");
  add_config(lim);
  add_out(lim);

  CLI::App* self =
      app.add_subcommand("selftest", "run built-in consistency checks");
  add_out(self);
  self->add_option("--perturb-k", opt.perturb_k,
                   "fault injection: scale the jump-map coupling by (1+eps)")
      ->group("");  // hidden testing hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (self->parsed()) return cmd_selftest(opt);
    const RunConfig cfg = load_config(opt.config_path);
    if (sim->parsed()) return cmd_simulate(cfg, opt);
    if (ana->parsed()) return cmd_analytic(cfg, opt);
    if (cmp->parsed()) return cmd_compare(cfg, opt);
    if (phs->parsed()) return cmd_phase_scan(cfg, opt);
    if (lim->parsed()) return cmd_limits(cfg, opt);
    fail(errc::invalid_input, "no subcommand given");
  } catch (const error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == errc::io ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace clocksync::cli
