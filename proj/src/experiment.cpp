#include "pdeil/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pdeil/parallel.hpp"
#include "pdeil/stats.hpp"

namespace pdeil {

void ExperimentSpec::validate() const {
  if (alphas.empty() || demo_episode_counts.empty() || seeds.empty()) {
    throw std::invalid_argument("experiment: empty sweep axis");
  }
  for (double a : alphas) {
    if (a < 0.0 || a > 1.0) {
      throw std::invalid_argument("experiment: alpha outside [0, 1]");
    }
  }
  for (int d : demo_episode_counts) {
    if (d < 1) throw std::invalid_argument("experiment: demo episodes >= 1");
  }
  if (out_dir.empty()) {
    throw std::invalid_argument("experiment: output directory required");
  }
}

std::string run_tag(double alpha, int demo_episodes, std::uint64_t seed) {
  std::ostringstream ss;
  ss << "alpha" << fmt_double(alpha) << "_demos" << demo_episodes << "_seed"
     << seed;
  return ss.str();
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunSummary summarize(const std::vector<MetricsRow>& rows, double alpha,
                     int demo_episodes, std::uint64_t seed, bool failed,
                     double threshold) {
  RunSummary sum;
  sum.config_tag = run_tag(alpha, demo_episodes, seed);
  sum.config_hash = fnv1a(sum.config_tag);
  sum.alpha = alpha;
  sum.demo_episodes = demo_episodes;
  sum.seed = seed;
  sum.failed = failed;
  sum.best_return = -std::numeric_limits<double>::infinity();
  for (const MetricsRow& row : rows) {
    sum.final_return = row.eval_return_mean;
    sum.best_return = std::max(sum.best_return, row.eval_return_mean);
    if (sum.epochs_to_threshold < 0 && row.eval_return_mean >= threshold) {
      sum.epochs_to_threshold = row.epoch;
    }
  }
  if (rows.empty()) sum.best_return = 0.0;
  return sum;
}

}  // namespace

std::vector<RunSummary> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.out_dir);

  // demo sets are shared across alphas and seeds for a given episode count
  std::map<int, DemoSet> demo_sets;
  for (int episodes : spec.demo_episode_counts) {
    if (!spec.demo_path.empty()) {
      DemoSet demos = read_demos(spec.demo_path);
      if (demos.env != spec.base.env) {
        throw std::invalid_argument("experiment: demo file env mismatch");
      }
      demo_sets.emplace(episodes, std::move(demos));
    } else {
      demo_sets.emplace(episodes,
                        collect_demos(spec.base.env, episodes,
                                      derive_seed(spec.base.seed, episodes)));
    }
  }

  struct RunPlan {
    double alpha;
    int demo_episodes;
    std::uint64_t seed;
  };
  std::vector<RunPlan> plans;
  for (double alpha : spec.alphas) {
    for (int episodes : spec.demo_episode_counts) {
      for (std::uint64_t seed : spec.seeds) {
        plans.push_back({alpha, episodes, seed});
      }
    }
  }

  std::vector<RunSummary> summaries(plans.size());
  std::vector<std::vector<MetricsRow>> per_run(plans.size());

  // isolated tasks: each run touches only its own slot and directory
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(plans.size()); ++i) {
    const RunPlan& plan = plans[static_cast<std::size_t>(i)];
    PdeilConfig cfg = spec.base;
    cfg.alpha = plan.alpha;
    cfg.demo_episodes = plan.demo_episodes;
    cfg.seed = plan.seed;

    const std::string tag = run_tag(plan.alpha, plan.demo_episodes, plan.seed);
    const auto run_dir = spec.out_dir / tag;
    std::filesystem::create_directories(run_dir);

    MetricsWriter writer(run_dir / "metrics.csv");
    const MetricsSink sink = [&writer](const MetricsRow& row) {
      writer.write_row(row);
    };
    const CheckpointSink checkpoints = [&run_dir](int epoch,
                                                  const PolicyParams& p) {
      write_policy(run_dir / ("checkpoint_" + std::to_string(epoch) + ".json"),
                   p);
    };

    const RunResult result =
        run_pdeil(cfg, demo_sets.at(plan.demo_episodes), sink, checkpoints);
    per_run[static_cast<std::size_t>(i)] = result.metrics;
    summaries[static_cast<std::size_t>(i)] =
        summarize(result.metrics, plan.alpha, plan.demo_episodes, plan.seed,
                  result.failed, spec.return_threshold);
  }

  write_summaries(spec.out_dir / "summary.csv", summaries);
  const auto aggregate = aggregate_metrics(per_run, summaries);
  write_aggregate(spec.out_dir / "aggregate.csv", aggregate);
  return summaries;
}

void write_summaries(const std::filesystem::path& path,
                     std::span<const RunSummary> summaries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "config_tag,config_hash,alpha,demo_episodes,seed,final_return,"
         "best_return,epochs_to_threshold,failed\n";
  for (const RunSummary& s : summaries) {
    out << s.config_tag << ',' << s.config_hash << ',' << fmt_double(s.alpha)
        << ',' << s.demo_episodes << ',' << s.seed << ','
        << fmt_double(s.final_return) << ',' << fmt_double(s.best_return)
        << ',' << s.epochs_to_threshold << ',' << (s.failed ? 1 : 0) << "\n";
  }
}

std::vector<AggregateRow> aggregate_metrics(
    std::span<const std::vector<MetricsRow>> per_run,
    std::span<const RunSummary> summaries) {
  if (per_run.size() != summaries.size()) {
    throw std::invalid_argument("aggregate: run count mismatch");
  }
  // group runs by (alpha, demo_episodes); epochs aggregated across seeds
  std::map<std::pair<double, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    groups[{summaries[i].alpha, summaries[i].demo_episodes}].push_back(i);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    std::size_t max_epochs = 0;
    for (std::size_t i : members) {
      max_epochs = std::max(max_epochs, per_run[i].size());
    }
    for (std::size_t e = 0; e < max_epochs; ++e) {
      AggregateRow row;
      row.alpha = key.first;
      row.demo_episodes = key.second;
      std::ostringstream tag;
      tag << "alpha" << fmt_double(key.first) << "_demos" << key.second;
      row.config_tag = tag.str();
      std::vector<double> returns;
      double corr_sum = 0.0;
      for (std::size_t i : members) {
        if (e >= per_run[i].size()) continue;  // run aborted earlier
        const MetricsRow& m = per_run[i][e];
        row.epoch = m.epoch;
        returns.push_back(m.eval_return_mean);
        if (m.reward_correlation.has_value()) {
          corr_sum += *m.reward_correlation;
          ++row.correlation_count;
        }
      }
      if (returns.empty()) continue;
      row.n_seeds = static_cast<int>(returns.size());
      row.mean_return = mean(returns);
      row.std_return = stddev(returns);
      if (row.correlation_count > 0) {
        row.mean_correlation = corr_sum / row.correlation_count;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_aggregate(const std::filesystem::path& path,
                     std::span<const AggregateRow> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "config_tag,alpha,demo_episodes,epoch,mean_return,std_return,"
         "mean_correlation,correlation_count,n_seeds\n";
  for (const AggregateRow& r : rows) {
    out << r.config_tag << ',' << fmt_double(r.alpha) << ',' << r.demo_episodes
        << ',' << r.epoch << ',' << fmt_double(r.mean_return) << ','
        << fmt_double(r.std_return) << ',';
    if (r.correlation_count > 0) out << fmt_double(r.mean_correlation);
    out << ',' << r.correlation_count << ',' << r.n_seeds << "\n";
  }
}

RunSummary run_bc_baseline(const DemoSet& demos, std::uint64_t seed,
                           const BcBaselineConfig& cfg,
                           const std::filesystem::path& out_dir) {
  if (demos.states.empty()) {
    throw std::invalid_argument("bc baseline: empty demo set");
  }
  MlpArch arch;
  arch.input = state_dim(demos.env);
  PolicyHead head;
  if (discrete_actions(demos.env)) {
    arch.output = num_actions(demos.env);
    head = PolicyHead{HeadKind::Categorical, arch.output, 1.0};
  } else {
    arch.output = 1;
    head = PolicyHead{HeadKind::Gaussian, 1, action_limit(demos.env)};
  }
  BcConfig train_cfg;
  train_cfg.epochs = cfg.epochs;
  train_cfg.learning_rate = cfg.learning_rate;
  train_cfg.minibatch = cfg.minibatch;
  train_cfg.seed = seed;
  const PolicyParams policy =
      bc_train(demos.states, demos.actions, arch, head, train_cfg);

  Rng eval_rng(derive_seed(seed, 0xe7a1));
  const PolicyFn mode_policy = [&policy](const State& s, Rng&) {
    return policy_mode(policy, s);
  };
  const auto returns =
      episode_returns(demos.env, mode_policy, cfg.eval_episodes, eval_rng);

  RunSummary sum;
  sum.config_tag = "bc_demos" + std::to_string(demos.episodes) + "_seed" +
                   std::to_string(seed);
  sum.config_hash = fnv1a(sum.config_tag);
  sum.alpha = 0.0;
  sum.demo_episodes = demos.episodes;
  sum.seed = seed;
  sum.final_return = mean(returns);
  sum.best_return = sum.final_return;
  sum.failed = false;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    MetricsWriter writer(out_dir / "bc_metrics.csv");
    MetricsRow row;
    row.epoch = 0;
    row.env_steps_total = 0;  // training touches the environment zero times
    row.eval_return_mean = sum.final_return;
    row.alpha = 0.0;
    writer.write_row(row);
    write_policy(out_dir / "bc_policy.json", policy);
  }
  return sum;
}

ExpertTrainResult train_expert(EnvKind env, const LearnerConfig& cfg,
                               int epochs, std::uint64_t seed) {
  ExpertTrainResult out;
  out.policy = make_policy_for(env, derive_seed(seed, 1));
  ValueParams value = make_value_for(env, derive_seed(seed, 2));
  Adam policy_opt(out.policy.w.size(), cfg.learning_rate);
  Adam value_opt(value.w.size(), cfg.learning_rate);
  Rng train_rng(derive_seed(seed, 3));
  Rng update_rng(derive_seed(seed, 4));

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const PolicyFn sampler = [&](const State& s, Rng& r) {
      return policy_act(out.policy, s, r);
    };
    const Trajectory traj =
        rollout(env, sampler, cfg.rollout_steps, train_rng, true);
    std::vector<double> rewards;
    rewards.reserve(traj.transitions.size());
    for (const Transition& t : traj.transitions) rewards.push_back(t.r_true);
    const GaeResult gae =
        compute_gae(traj, rewards, value, cfg.gamma, cfg.gae_lambda);
    Batch batch;
    for (const Transition& t : traj.transitions) {
      batch.states.push_back(t.s);
      batch.actions.push_back(t.a);
      batch.old_logprobs.push_back(policy_logprob(out.policy, t.s, t.a));
    }
    batch.advantages = gae.advantages;
    batch.returns = gae.returns;
    learner_update(out.policy, value, policy_opt, value_opt, batch, cfg,
                   update_rng);

    Rng eval_rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(epoch)));
    const PolicyFn mode_policy = [&](const State& s, Rng&) {
      return policy_mode(out.policy, s);
    };
    out.eval_returns_per_epoch.push_back(
        mean(episode_returns(env, mode_policy, 5, eval_rng)));
  }
  return out;
}

}  // namespace pdeil
