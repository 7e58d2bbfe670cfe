#pragma once

#include <functional>
#include <optional>
#include <span>

#include "pdeil/density.hpp"
#include "pdeil/envs.hpp"
#include "pdeil/state_vec.hpp"

namespace pdeil {

// Density-ratio reward
//   r(s, a) = rho_e(s, a) / (alpha * rho_e(s) + beta * rho_pi(s)),
// beta = 1 - alpha. Continuous actions score the joint (s, a) density;
// discrete actions factor the numerator as rho_e(s) * p(a | s).
struct RewardModel {
  std::optional<StateDensity> expert_joint;
  std::optional<ConditionalActionModel> expert_conditional;
  StateDensity expert_state;
  StateDensity agent_state;
  double alpha = 0.5;
  double beta = 0.5;

  bool discrete() const { return expert_conditional.has_value(); }
};

RewardModel make_reward_model(StateDensity expert_joint,
                              StateDensity expert_state,
                              StateDensity agent_state, double alpha);
RewardModel make_reward_model(ConditionalActionModel expert_conditional,
                              StateDensity expert_state,
                              StateDensity agent_state, double alpha);

// Ratio evaluated in log space; the exponent is clamped to [-700, 700] and
// clamping is reported so divergence stays observable.
double reward_eval(const RewardModel& m, const State& s, Action a,
                   bool* clamped = nullptr);

struct BatchRewards {
  std::vector<double> rewards;
  long long clamp_events = 0;
};

BatchRewards reward_eval_batch(const RewardModel& m,
                               std::span<const Transition> transitions);
BatchRewards reward_eval_batch_serial(const RewardModel& m,
                                      std::span<const Transition> transitions);

// Recursive adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double lo,
                        double hi, double tol = 1e-8);

// <pi, pi> stochasticity measure: sum of squared probabilities for discrete
// distributions, integral of the squared density for continuous ones.
// Maximal exactly for deterministic (one-hot / narrow) policies.
double policy_self_inner_product(std::span<const double> probs);
double policy_self_inner_product(const std::function<double(double)>& density,
                                 double lo, double hi);

}  // namespace pdeil
