#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdeil/rng.hpp"

namespace pdeil {

enum class EnvKind { CartPole, Pendulum };

std::string env_name(EnvKind kind);
EnvKind env_from_name(const std::string& name);

struct State {
  std::vector<double> values;
};

// Discrete envs use integral values (CartPole: 0 or 1); Pendulum uses torque.
struct Action {
  double value = 0.0;
};

struct Transition {
  State s;
  Action a;
  double r_true = 0.0;  // evaluation only; never fed to the learner
  State s_next;
  bool done = false;
};

struct Trajectory {
  std::vector<Transition> transitions;
  std::uint64_t seed = 0;
};

int state_dim(EnvKind kind);
bool discrete_actions(EnvKind kind);
int num_actions(EnvKind kind);      // discrete envs only
double action_limit(EnvKind kind);  // continuous envs only (|u| bound)
int episode_horizon(EnvKind kind);  // step cap per episode (500 / 200)

State env_reset(EnvKind kind, Rng& rng);

struct StepResult {
  State s_next;
  double r_true = 0.0;
  bool done = false;  // physics termination only; the horizon is enforced by rollout
};

StepResult env_step(EnvKind kind, const State& s, Action a);

Action scripted_expert_action(EnvKind kind, const State& s);

using PolicyFn = std::function<Action(const State&, Rng&)>;

// Fixed step-count interaction segment. Episodes restart internally on
// termination or at the horizon; every episode end is marked done = true.
Trajectory rollout(EnvKind kind, const PolicyFn& policy, int max_steps,
                   Rng& rng, bool record_true_reward = true);

// Complete episodes, one ground-truth return per episode.
std::vector<double> episode_returns(EnvKind kind, const PolicyFn& policy,
                                    int episodes, Rng& rng);

inline PolicyFn expert_policy(EnvKind kind) {
  return [kind](const State& s, Rng&) { return scripted_expert_action(kind, s); };
}

}  // namespace pdeil
