#include "pdeil/pdeil.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdeil/stats.hpp"

namespace pdeil {

namespace {

// rng sub-stream tags
constexpr std::uint64_t kStreamPolicyInit = 1;
constexpr std::uint64_t kStreamValueInit = 2;
constexpr std::uint64_t kStreamTraining = 3;
constexpr std::uint64_t kStreamUpdates = 4;
constexpr std::uint64_t kStreamEval = 5;

StateDensity fit_state_density(std::span<const Vec> samples, double ridge,
                               bool use_kde) {
  if (use_kde) return fit_kde(samples);
  return fit_gaussian(samples, ridge);
}

StateDensity fit_with_retry(std::span<const Vec> samples, double ridge,
                            bool use_kde) {
  try {
    return fit_state_density(samples, ridge, use_kde);
  } catch (const std::runtime_error&) {
    // degenerate visitation: raise the ridge once and retry
    const double boosted = std::max(ridge, 1e-6) * 1e3;
    return fit_state_density(samples, boosted, use_kde);
  }
}

}  // namespace

void PdeilConfig::validate() const {
  if (n_epochs < 1 || try_steps < 1 || learn_steps < 0) {
    throw std::invalid_argument("pdeil config: N, T >= 1 and L >= 0");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("pdeil config: alpha must lie in [0, 1]");
  }
  if (demo_episodes < 1) {
    throw std::invalid_argument("pdeil config: demo_episodes >= 1");
  }
  if (eval_episodes < 1) {
    throw std::invalid_argument("pdeil config: eval_episodes >= 1");
  }
  if (ridge < 0.0) throw std::invalid_argument("pdeil config: ridge >= 0");
  learner.validate();
}

DemoSet collect_demos(EnvKind env, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("collect_demos: episodes >= 1");
  DemoSet demos;
  demos.env = env;
  demos.seed = seed;
  demos.episodes = episodes;

  Rng rng(seed);
  const int horizon = episode_horizon(env);
  std::vector<double> returns;
  for (int e = 0; e < episodes; ++e) {
    State s = env_reset(env, rng);
    double total = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Action a = scripted_expert_action(env, s);
      demos.states.push_back(s);
      demos.actions.push_back(a);
      StepResult step = env_step(env, s, a);
      total += step.r_true;
      if (step.done) break;
      s = std::move(step.s_next);
    }
    returns.push_back(total);
  }
  demos.expert_return_mean = mean(returns);
  demos.expert_return_min = *std::min_element(returns.begin(), returns.end());
  demos.expert_return_max = *std::max_element(returns.begin(), returns.end());
  return demos;
}

ExpertModels watch(const DemoSet& demos, const PdeilConfig& cfg) {
  if (demos.states.empty() || demos.states.size() != demos.actions.size()) {
    throw std::invalid_argument("watch: empty or mismatched demo set");
  }
  std::vector<Vec> states;
  states.reserve(demos.states.size());
  for (const State& s : demos.states) states.push_back(to_vec(s));

  ExpertModels models{fit_state_density(states, cfg.ridge, cfg.use_kde), {}, {}};
  if (discrete_actions(demos.env)) {
    std::vector<int> labels;
    labels.reserve(demos.actions.size());
    for (const Action& a : demos.actions) {
      labels.push_back(static_cast<int>(std::llround(a.value)));
    }
    models.conditional = fit_conditional(states, labels, cfg.ridge);
  } else {
    std::vector<Vec> joints;
    joints.reserve(demos.states.size());
    for (std::size_t i = 0; i < demos.states.size(); ++i) {
      joints.push_back(joint_vec(demos.states[i], demos.actions[i]));
    }
    models.joint = fit_state_density(joints, cfg.ridge, cfg.use_kde);
  }
  return models;
}

TryResult try_phase(EnvKind env, const PolicyParams& policy, int T,
                    StateBuffer& buffer, const PdeilConfig& cfg, Rng& rng) {
  if (T < 2) throw std::invalid_argument("try_phase: T >= 2");
  const PolicyFn sampler = [&policy](const State& s, Rng& r) {
    return policy_act(policy, s, r);
  };
  TryResult out;
  out.trajectory = rollout(env, sampler, T, rng, true);
  for (const Transition& t : out.trajectory.transitions) {
    buffer.states.push_back(t.s);
  }
  std::vector<Vec> states;
  states.reserve(buffer.states.size());
  for (const State& s : buffer.states) states.push_back(to_vec(s));
  out.agent_state_model = fit_with_retry(states, cfg.ridge, cfg.use_kde);
  if (cfg.buffer_mode == BufferMode::PerEpochFresh) buffer.states.clear();
  return out;
}

RewardModel build_reward_model(const ExpertModels& expert,
                               StateDensity agent_state, double alpha) {
  if (expert.conditional.has_value()) {
    return make_reward_model(*expert.conditional, expert.state,
                             std::move(agent_state), alpha);
  }
  if (!expert.joint.has_value()) {
    throw std::invalid_argument("reward model: expert models incomplete");
  }
  return make_reward_model(*expert.joint, expert.state, std::move(agent_state),
                           alpha);
}

std::optional<double> reward_correlation_probe(const RewardModel& m,
                                               const Trajectory& traj) {
  if (traj.transitions.size() < 2) return std::nullopt;
  const BatchRewards recovered = reward_eval_batch(m, traj.transitions);
  std::vector<double> truth;
  truth.reserve(traj.transitions.size());
  for (const Transition& t : traj.transitions) truth.push_back(t.r_true);
  return pearson(recovered.rewards, truth);
}

RunResult run_pdeil(const PdeilConfig& cfg, const DemoSet& demos,
                    const MetricsSink& on_row,
                    const CheckpointSink& on_checkpoint) {
  cfg.validate();
  if (demos.env != cfg.env) {
    throw std::invalid_argument("run_pdeil: demo set from a different environment");
  }

  const Rng root(cfg.seed);
  Rng training_rng = root.child(kStreamTraining);
  Rng update_rng = root.child(kStreamUpdates);

  RunResult result;
  result.policy = make_policy_for(cfg.env, derive_seed(cfg.seed, kStreamPolicyInit));
  ValueParams value =
      make_value_for(cfg.env, derive_seed(cfg.seed, kStreamValueInit));
  Adam policy_opt(result.policy.w.size(), cfg.learner.learning_rate);
  Adam value_opt(value.w.size(), cfg.learner.learning_rate);

  const ExpertModels expert = watch(demos, cfg);
  result.env_steps_total = static_cast<long long>(demos.states.size());

  StateBuffer buffer;
  for (int epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
    TryResult tried =
        try_phase(cfg.env, result.policy, cfg.try_steps, buffer, cfg, training_rng);
    result.env_steps_total += cfg.try_steps;

    const RewardModel reward =
        build_reward_model(expert, std::move(tried.agent_state_model), cfg.alpha);

    long long clamp_events = 0;
    for (int l = 0; l < cfg.learn_steps; ++l) {
      const PolicyFn sampler = [&](const State& s, Rng& r) {
        return policy_act(result.policy, s, r);
      };
      const Trajectory traj = rollout(cfg.env, sampler,
                                      cfg.learner.rollout_steps, training_rng,
                                      /*record_true_reward=*/false);
      result.env_steps_total += cfg.learner.rollout_steps;

      const BatchRewards recovered = reward_eval_batch(reward, traj.transitions);
      clamp_events += recovered.clamp_events;
      const GaeResult gae = compute_gae(traj, recovered.rewards, value,
                                        cfg.learner.gamma, cfg.learner.gae_lambda);
      Batch batch;
      batch.states.reserve(traj.transitions.size());
      batch.actions.reserve(traj.transitions.size());
      batch.old_logprobs.reserve(traj.transitions.size());
      for (const Transition& t : traj.transitions) {
        batch.states.push_back(t.s);
        batch.actions.push_back(t.a);
        batch.old_logprobs.push_back(policy_logprob(result.policy, t.s, t.a));
      }
      batch.advantages = gae.advantages;
      batch.returns = gae.returns;

      const UpdateDiagnostics diag = learner_update(
          result.policy, value, policy_opt, value_opt, batch, cfg.learner,
          update_rng);
      if (diag.nan_abort) {
        result.failed = true;
        break;
      }
    }

    // evaluation uses its own stream so the training path is untouched
    Rng eval_rng = root.child(derive_seed(kStreamEval, static_cast<std::uint64_t>(epoch)));
    const PolicyFn mode_policy = [&](const State& s, Rng&) {
      return policy_mode(result.policy, s);
    };
    const auto eval_returns =
        episode_returns(cfg.env, mode_policy, cfg.eval_episodes, eval_rng);

    MetricsRow row;
    row.epoch = epoch;
    row.env_steps_total = result.env_steps_total;
    row.eval_return_mean = mean(eval_returns);
    if (cfg.probe_correlation) {
      row.reward_correlation = reward_correlation_probe(reward, tried.trajectory);
    }
    row.misleading_clamp_events = clamp_events;
    row.alpha = cfg.alpha;
    result.metrics.push_back(row);
    if (on_row) on_row(row);
    if (on_checkpoint && cfg.checkpoint_every > 0 &&
        epoch % cfg.checkpoint_every == 0) {
      on_checkpoint(epoch, result.policy);
    }
    if (result.failed) break;
  }
  return result;
}

}  // namespace pdeil
