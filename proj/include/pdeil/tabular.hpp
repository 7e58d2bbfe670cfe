#pragma once

#include <cstdint>
#include <vector>

#include "pdeil/density.hpp"
#include "pdeil/rng.hpp"

namespace pdeil {

// Finite MDP: transition tensor P[s][a][s'], discount, initial distribution.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // s * (n_actions * n_states) + a * n_states + s'
  double gamma = 0.99;
  Vec initial;

  double p(int s, int a, int next) const {
    return transition[static_cast<std::size_t>(
        (s * n_actions + a) * n_states + next)];
  }
  void validate() const;
};

struct TabularPolicy {
  Mat probs;  // n_states x n_actions, rows sum to 1

  bool deterministic() const;
  static TabularPolicy from_actions(const std::vector<int>& actions,
                                    int n_actions);
};

// Exact discounted state occupancy: solves (I - gamma * P_pi^T) rho = D.
// Entries sum to 1 / (1 - gamma).
Vec occupancy(const TabularMDP& mdp, const TabularPolicy& pi);

// Density-ratio reward built from exact occupancies:
//   r[s][a] = rho_e(s) * pi_e(a|s) / (alpha * rho_e(s) + (1-alpha) * rho_a(s)).
// States unreachable under both policies get reward 0 and are reported.
Mat exact_pdeil_reward(const TabularMDP& mdp, const TabularPolicy& expert,
                       const TabularPolicy& agent, double alpha,
                       std::vector<int>* dead_states = nullptr);

struct ValueIterationResult {
  TabularPolicy policy;  // greedy, lowest action index wins ties
  Vec values;
  int iterations = 0;
};

ValueIterationResult value_iteration(const TabularMDP& mdp, const Mat& reward,
                                     double tol = 1e-10);

// Exact policy evaluation under a fixed reward matrix; J = D . V.
Vec policy_values(const TabularMDP& mdp, const Mat& reward,
                  const TabularPolicy& pi);
double policy_objective(const TabularMDP& mdp, const Mat& reward,
                        const TabularPolicy& pi);

// Performance objective where the evaluated policy's own occupancy feeds the
// ratio denominator; for a deterministic expert this is maximized by the
// expert itself.
double density_ratio_objective(const TabularMDP& mdp, const TabularPolicy& pi,
                               const TabularPolicy& expert);

struct BruteForceResult {
  TabularPolicy policy;
  double objective = 0.0;
};

// Exhaustive search over deterministic policies (n_actions^n_states cases).
BruteForceResult brute_force_best_policy(const TabularMDP& mdp,
                                         const Mat& reward,
                                         std::int64_t max_cases = 1024);

// Exhaustive search maximizing the density-ratio objective itself.
BruteForceResult brute_force_best_ratio_policy(const TabularMDP& mdp,
                                               const TabularPolicy& expert,
                                               std::int64_t max_cases = 1024);

struct OptimalityReport {
  bool converged = false;           // a self-consistent optimum was found
  int rounds = 0;
  bool match = false;               // optimal action = expert action on all
  std::vector<int> mismatched_states;  // expert-reachable states that differ
  double j_expert = 0.0;               // density-ratio objective of the expert
  double j_optimal = 0.0;              // same objective for the found policy
  int reachable_states = 0;
};

// Solves for the optimal policy of the density-ratio objective and reports
// whether it reproduces the deterministic expert wherever the expert's
// occupancy is positive. The ratio reward depends on the policy it scores,
// so a single fixed-reward solve is not enough: starting from the supplied
// agent, the verifier alternates building the exact reward and running value
// iteration, averaging iterates to settle oscillations, until the candidate
// is optimal for the reward built from its own occupancy. A candidate that
// deviates from the expert on a reachable state is beaten by the expert in
// its own reward (Cauchy-Schwarz on the occupancies), so only the true
// optimum passes that check.
OptimalityReport verify_expert_optimality(const TabularMDP& mdp,
                                          const TabularPolicy& expert,
                                          const TabularPolicy& agent,
                                          double alpha, int max_rounds = 500);

// Random instances: Dirichlet(1) transition rows and initial distribution.
TabularMDP random_mdp(Rng& rng, int n_states, int n_actions, double gamma_lo,
                      double gamma_hi);
TabularPolicy random_deterministic_policy(Rng& rng, int n_states,
                                          int n_actions);
TabularPolicy random_stochastic_policy(Rng& rng, int n_states, int n_actions);

struct VerificationTrial {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  bool match = false;  // solver converged and reproduced the expert
  bool brute_force_checked = false;
  bool brute_force_agrees = true;
  double j_expert = 0.0;
  double j_optimal = 0.0;
};

// Randomized verification sweep; trials are independent and run in parallel.
std::vector<VerificationTrial> run_verification_trials(
    int n_trials, int max_states, int max_actions, double alpha,
    std::uint64_t seed);

}  // namespace pdeil
