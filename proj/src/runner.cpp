#include "heatsheet/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heatsheet/capacity.hpp"
#include "heatsheet/errors.hpp"
#include "heatsheet/parallel.hpp"
#include "heatsheet/verify.hpp"
#include "heatsheet/version.hpp"

namespace heatsheet {

namespace {

using nlohmann::json;

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json histogram_to_json(const Histogram& h) {
  return json{{"edges", h.edges}, {"counts", h.counts}};
}

json window_to_json(const SpaceTimeWindow& w) {
  return json{{"t0", w.t0}, {"t1", w.t1}, {"x0", w.x0}, {"x1", w.x1}};
}

ExperimentOutput run_simulate(const RunConfig& rc) {
  const ExperimentConfig& e = rc.experiment;
  const int n = static_cast<int>(e.n_trials);
  struct Row {
    double max_sup = 0.0;
    double final_sup = 0.0;
    std::string dump;
  };
  std::vector<Row> rows(n);
  const Truncation trunc = e.truncation();
  parallel_for(n, e.workers, [&](int trial) {
    StreamSet streams(e.master_seed, static_cast<std::uint32_t>(trial));
    GridPath path = integrate(e.u0.make(e.d, e.u0_nodes()), e.potential, e.horizon, e.dt, trunc,
                              e.n_x, streams);
    Row& r = rows[trial];
    for (int f = 0; f < path.n_times(); ++f) {
      r.max_sup = std::max(r.max_sup, path.frame_sup_norm(f));
    }
    r.final_sup = path.frame_sup_norm(path.n_times() - 1);
    if (rc.output.dump_paths) {
      std::ostringstream os(std::ios::binary);
      write_grid_path(path, os);
      r.dump = os.str();
    }
  });

  ExperimentOutput out;
  double mean_final = 0.0, overall_max = 0.0;
  std::ostringstream csv;
  csv << "trial,max_sup_norm,final_sup_norm\n";
  for (int i = 0; i < n; ++i) {
    mean_final += rows[i].final_sup;
    overall_max = std::max(overall_max, rows[i].max_sup);
    csv << i << ',' << format_double(rows[i].max_sup) << ','
        << format_double(rows[i].final_sup) << '\n';
    if (rc.output.dump_paths) {
      out.binary_files.emplace_back("paths/trial_" + std::to_string(i) + ".bin",
                                    std::move(rows[i].dump));
    }
  }
  mean_final /= n;
  out.payload = json{{"n_trials", n},
                     {"mean_final_sup_norm", mean_final},
                     {"max_sup_norm", overall_max},
                     {"horizon", e.horizon}};
  if (rc.output.write_csv) out.csv_files.emplace_back("trials.csv", csv.str());
  return out;
}

ExperimentOutput run_hit(const RunConfig& rc) {
  if (!rc.has_target) throw ConfigError("config field 'target' is required for hit");
  const ExperimentConfig& e = rc.experiment;
  ExperimentOutput out;
  std::ostringstream csv;
  csv << "trial,hit,first_hit_time,excursions_used,min_distance\n";

  if (rc.hit.mode == "window") {
    const HittingExperiment exp = hitting_probability(e, rc.target, e.window);
    const HittingEstimate& est = exp.estimate;
    for (const TrialRecord& r : exp.trials) {
      csv << r.trial << ',' << (r.hit ? 1 : 0) << ',' << format_double(r.first_hit_time) << ','
          << r.excursions_used << ',' << format_double(r.min_distance) << '\n';
    }
    out.payload = json{{"mode", "window"},
                       {"n_trials", est.n_trials},
                       {"n_hits", est.n_hits},
                       {"p_hat", est.p_hat},
                       {"wilson", {{"lo", est.wilson.lo}, {"hi", est.wilson.hi}}},
                       {"window", window_to_json(est.window)},
                       {"capacity", {{"beta", est.capacity_beta},
                                     {"value", number_or_null(est.capacity_value)}}},
                       {"holder_epsilon", est.holder_epsilon},
                       {"min_distance_histogram", histogram_to_json(est.min_distance_histogram)}};
  } else {
    e.validate_excursions();
    e.validate_target(rc.target);
    const int n = static_cast<int>(e.n_trials);
    std::vector<HitUntilSuccessResult> results(n);
    parallel_for(n, e.workers, [&](int trial) {
      StreamSet streams(e.master_seed, static_cast<std::uint32_t>(trial));
      results[trial] = hit_until_success(e, rc.target, e.max_excursions, streams);
    });

    std::int64_t hits = 0, censored = 0;
    double mean_excursions = 0.0;
    std::vector<std::int64_t> no_hit_through(e.max_excursions + 1, 0);
    for (int i = 0; i < n; ++i) {
      const HitUntilSuccessResult& r = results[i];
      if (r.hit) ++hits;
      if (r.censored) ++censored;
      mean_excursions += r.excursions_used;
      int first_hit = e.max_excursions + 1;
      for (std::size_t k = 0; k < r.per_excursion_hit.size(); ++k) {
        if (r.per_excursion_hit[k]) {
          first_hit = static_cast<int>(k) + 1;
          break;
        }
      }
      for (int m = 0; m <= e.max_excursions; ++m) {
        if (first_hit > m) ++no_hit_through[m];
      }
      csv << i << ',' << (r.hit ? 1 : 0) << ',' << format_double(r.first_hit_time) << ','
          << r.excursions_used << ',' << format_double(std::numeric_limits<double>::quiet_NaN())
          << '\n';
    }
    mean_excursions /= n;
    std::vector<double> survival(e.max_excursions + 1);
    for (int m = 0; m <= e.max_excursions; ++m) {
      survival[m] = static_cast<double>(no_hit_through[m]) / n;
    }
    const WilsonInterval wilson = wilson_interval(hits, n);
    out.payload = json{{"mode", "restart"},
                       {"n_trials", n},
                       {"n_hits", hits},
                       {"hit_fraction", static_cast<double>(hits) / n},
                       {"wilson", {{"lo", wilson.lo}, {"hi", wilson.hi}}},
                       {"censored", censored},
                       {"max_excursions", e.max_excursions},
                       {"mean_excursions_used", mean_excursions},
                       {"no_hit_survival", survival},
                       {"capacity", {{"beta", rc.capacity.beta},
                                     {"value", number_or_null(cap(rc.target, rc.capacity.beta,
                                                                  rc.capacity.m).value)}}},
                       {"holder_epsilon", e.holder_epsilon}};
  }
  if (rc.output.write_csv) out.csv_files.emplace_back("trials.csv", csv.str());
  return out;
}

ExperimentOutput run_capacity(const RunConfig& rc) {
  if (!rc.has_target) throw ConfigError("config field 'target' is required for capacity");
  const CapacityEstimate est = cap(rc.target, rc.capacity.beta, rc.capacity.m);
  ExperimentOutput out;
  out.payload = json{{"beta", est.beta},
                     {"value", number_or_null(est.value)},
                     {"energy", number_or_null(est.energy)},
                     {"m", est.m},
                     {"iterations", est.iterations},
                     {"gap", est.gap},
                     {"covering_radius", est.covering_radius},
                     {"target", target_to_json(rc.target)}};
  return out;
}

ExperimentOutput run_invariant(const RunConfig& rc) {
  const ExperimentConfig& e = rc.experiment;
  const Truncation trunc = e.truncation();
  StreamSet streams(e.master_seed, 0);
  const GibbsSampleBatch batch = gibbs_sample(e.potential, rc.invariant.mode,
                                              rc.invariant.n_samples, e.n_x, trunc, streams);
  const BallMassEstimate ball = ball_mass_from_batch(batch, rc.invariant.ball_radius);

  ExperimentOutput out;
  out.payload = json{{"mode", bridge_mode_name(rc.invariant.mode)},
                     {"n_samples", static_cast<std::int64_t>(batch.samples.size())},
                     {"proposals", batch.proposals},
                     {"acceptance_rate", batch.acceptance_rate},
                     {"ball", {{"radius", rc.invariant.ball_radius},
                               {"mass", ball.mass},
                               {"se", ball.se},
                               {"complement", ball.complement}}}};
  if (e.potential.is_zero() && rc.invariant.mode == BridgeMode::Standard) {
    out.payload["reference_base_ball_mass"] =
        std::pow(bridge_sup_cdf(rc.invariant.ball_radius), e.d);
  }
  if (rc.invariant.run_ergodic) {
    const ErgodicReport rep =
        ergodic_check(e.potential, e.u0.make(e.d, e.u0_nodes()), rc.invariant.t1, rc.invariant.t2,
                      rc.invariant.ergodic_n, e.dt, e.n_x, trunc, StreamSet(e.master_seed, 1));
    out.payload["ergodic"] = json{{"n", rep.n},
                                  {"ks_t1_t2", rep.ks_t1_t2},
                                  {"ks_t2_gibbs", rep.ks_t2_gibbs},
                                  {"critical_t1_t2", rep.critical_t1_t2},
                                  {"critical_t2_gibbs", rep.critical_t2_gibbs},
                                  {"pass_t1_t2", rep.pass_t1_t2},
                                  {"pass_t2_gibbs", rep.pass_t2_gibbs}};
  }
  if (rc.output.write_csv) {
    std::ostringstream csv;
    csv << "sup_norm,int_U,accepted\n";
    for (const ProposalRecord& r : batch.records) {
      csv << format_double(r.sup_norm) << ',' << format_double(r.int_u) << ','
          << (r.accepted ? 1 : 0) << '\n';
    }
    out.csv_files.emplace_back("samples.csv", csv.str());
  }
  return out;
}

ExperimentOutput run_recurrence(const RunConfig& rc) {
  const ExperimentConfig& e = rc.experiment;
  e.validate_excursions();
  const int n = static_cast<int>(e.n_trials);
  std::vector<ExcursionRecord> records(n);
  parallel_for(n, e.workers, [&](int trial) {
    StreamSet streams(e.master_seed, static_cast<std::uint32_t>(trial));
    records[trial] = excursions(e, streams);
  });

  std::ostringstream csv;
  csv << "trial,completed,censored,t1,s1\n";
  std::int64_t censored = 0;
  double mean_completed = 0.0;
  std::int64_t with_t1 = 0;
  double mean_t1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const ExcursionRecord& r = records[i];
    if (r.censored) ++censored;
    mean_completed += r.completed;
    const double t1 = r.t_crossings.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : r.t_crossings.front();
    const double s1 = r.s_crossings.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : r.s_crossings.front();
    if (!r.t_crossings.empty()) {
      ++with_t1;
      mean_t1 += t1;
    }
    csv << i << ',' << r.completed << ',' << (r.censored ? 1 : 0) << ',' << format_double(t1)
        << ',' << format_double(s1) << '\n';
  }
  mean_completed /= n;

  ExperimentOutput out;
  out.payload = json{{"n_trials", n},
                     {"inner_n", e.inner_n},
                     {"outer_k", e.outer_k},
                     {"horizon", e.horizon},
                     {"censored_fraction", static_cast<double>(censored) / n},
                     {"mean_completed_excursions", mean_completed},
                     {"t1_observed_fraction", static_cast<double>(with_t1) / n},
                     {"mean_t1", with_t1 > 0 ? json(mean_t1 / with_t1) : json(nullptr)}};
  if (rc.output.write_csv) out.csv_files.emplace_back("trials.csv", csv.str());
  return out;
}

ExperimentOutput run_verify(const RunConfig&) {
  const std::vector<VerifyCheck> checks = run_verify_suite();
  ExperimentOutput out;
  out.payload["checks"] = json::array();
  bool all = true;
  for (const VerifyCheck& c : checks) {
    all = all && c.pass;
    out.payload["checks"].push_back(json{{"name", c.name},
                                         {"residual", c.residual},
                                         {"tolerance", c.tolerance},
                                         {"pass", c.pass}});
  }
  out.payload["all_pass"] = all;
  return out;
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentOutput dispatch_experiment(const RunConfig& rc) {
  if (rc.subcommand == "simulate") return run_simulate(rc);
  if (rc.subcommand == "hit") return run_hit(rc);
  if (rc.subcommand == "capacity") return run_capacity(rc);
  if (rc.subcommand == "invariant") return run_invariant(rc);
  if (rc.subcommand == "recurrence") return run_recurrence(rc);
  if (rc.subcommand == "verify") return run_verify(rc);
  throw ConfigError("unknown subcommand '" + rc.subcommand + "'");
}

RunOutcome run(const RunConfig& rc) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOutput out = dispatch_experiment(rc);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunOutcome outcome;
  json envelope;
  envelope["schema_version"] = kOutputSchemaVersion;
  envelope["artifact"] = json{{"name", kArtifactName}, {"version", kArtifactVersion}};
  envelope["subcommand"] = rc.subcommand;
  envelope["seed"] = rc.experiment.master_seed;
  envelope["config"] = config_echo(rc);
  envelope["wall_clock_seconds"] = wall;
  envelope["payload"] = out.payload;

  const fs::path dir(rc.output.dir);
  fs::create_directories(dir);
  json csv_names = json::array();
  for (const auto& [name, contents] : out.csv_files) {
    const fs::path p = dir / name;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << contents;
    csv_names.push_back(name);
    outcome.files_written.push_back(p.string());
  }
  for (const auto& [name, contents] : out.binary_files) {
    const fs::path p = dir / name;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    csv_names.push_back(name);
    outcome.files_written.push_back(p.string());
  }
  envelope["csv_files"] = csv_names;

  const fs::path env_path = dir / "envelope.json";
  {
    std::ofstream f(env_path, std::ios::binary);
    f << envelope.dump(2) << '\n';
  }
  outcome.files_written.push_back(env_path.string());
  outcome.envelope = std::move(envelope);
  outcome.envelope_path = env_path.string();
  if (rc.subcommand == "verify") {
    outcome.ok = outcome.envelope["payload"]["all_pass"].get<bool>();
  }
  return outcome;
}

} // namespace heatsheet
