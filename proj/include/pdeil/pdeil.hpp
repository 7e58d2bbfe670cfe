#pragma once

#include <functional>
#include <optional>

#include "pdeil/learn.hpp"
#include "pdeil/reward.hpp"

namespace pdeil {

enum class BufferMode { PerEpochFresh, Cumulative };

struct PdeilConfig {
  EnvKind env = EnvKind::CartPole;
  int n_epochs = 50;     // N: watch-try-learn epochs
  int try_steps = 1000;  // T: interaction steps per trying phase
  int learn_steps = 10;  // L: learner updates per epoch
  double alpha = 0.5;
  int demo_episodes = 5;
  std::uint64_t seed = 0;
  LearnerConfig learner;
  double ridge = 1e-6;
  bool use_kde = false;
  BufferMode buffer_mode = BufferMode::PerEpochFresh;
  int eval_episodes = 5;
  int checkpoint_every = 0;      // 0 disables checkpoints
  bool probe_correlation = true;  // evaluation-only diagnostic

  void validate() const;
};

// Expert state-action pairs plus the scripted expert's measured quality.
struct DemoSet {
  EnvKind env = EnvKind::CartPole;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::vector<State> states;
  std::vector<Action> actions;
  double expert_return_mean = 0.0;
  double expert_return_min = 0.0;
  double expert_return_max = 0.0;
};

DemoSet collect_demos(EnvKind env, int episodes, std::uint64_t seed);

struct StateBuffer {
  std::vector<State> states;
};

struct ExpertModels {
  StateDensity state;                                 // rho_e over states
  std::optional<StateDensity> joint;                  // rho_e over (s, a)
  std::optional<ConditionalActionModel> conditional;  // p(a | s), discrete
};

// Watching: fit the expert densities once from the demonstrations.
ExpertModels watch(const DemoSet& demos, const PdeilConfig& cfg);

struct TryResult {
  StateDensity agent_state_model;
  Trajectory trajectory;  // exactly T steps; true rewards kept for metrics
};

// Trying: interact for T steps, refit the agent state density from the
// buffer. Under PerEpochFresh the buffer is cleared after fitting.
TryResult try_phase(EnvKind env, const PolicyParams& policy, int T,
                    StateBuffer& buffer, const PdeilConfig& cfg, Rng& rng);

RewardModel build_reward_model(const ExpertModels& expert,
                               StateDensity agent_state, double alpha);

// Pearson correlation between recovered and ground-truth rewards over a
// trajectory; missing when either series is constant.
std::optional<double> reward_correlation_probe(const RewardModel& m,
                                               const Trajectory& traj);

struct MetricsRow {
  int epoch = 0;
  long long env_steps_total = 0;
  double eval_return_mean = 0.0;
  std::optional<double> reward_correlation;
  long long misleading_clamp_events = 0;
  double alpha = 0.0;
};

struct RunResult {
  PolicyParams policy;
  std::vector<MetricsRow> metrics;
  bool failed = false;  // learner aborted on non-finite gradients
  long long env_steps_total = 0;
};

using MetricsSink = std::function<void(const MetricsRow&)>;
using CheckpointSink = std::function<void(int, const PolicyParams&)>;

// The full loop: watch once, then N epochs of try -> rebuild reward ->
// L learner updates on fresh rollouts scored by the frozen epoch reward.
// Ground-truth rewards feed evaluation and the correlation probe only.
RunResult run_pdeil(const PdeilConfig& cfg, const DemoSet& demos,
                    const MetricsSink& on_row = {},
                    const CheckpointSink& on_checkpoint = {});

}  // namespace pdeil
