#include "pdeil/tabular.hpp"

#include <cmath>
#include <stdexcept>

#include "pdeil/parallel.hpp"

namespace pdeil {

namespace {
constexpr double kReachEps = 1e-12;
}

void TabularMDP::validate() const {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("tabular mdp: empty state or action space");
  }
  if (gamma <= 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("tabular mdp: gamma must lie in (0, 1)");
  }
  if (transition.size() !=
      static_cast<std::size_t>(n_states) * n_actions * n_states) {
    throw std::invalid_argument("tabular mdp: transition tensor size");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double row = 0.0;
      for (int next = 0; next < n_states; ++next) row += p(s, a, next);
      if (std::abs(row - 1.0) > 1e-12) {
        throw std::invalid_argument("tabular mdp: transition row not normalized");
      }
    }
  }
  if (std::abs(initial.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("tabular mdp: initial distribution not normalized");
  }
}

bool TabularPolicy::deterministic() const {
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    for (Eigen::Index a = 0; a < probs.cols(); ++a) {
      const double v = probs(s, a);
      if (v != 0.0 && v != 1.0) return false;
    }
  }
  return true;
}

TabularPolicy TabularPolicy::from_actions(const std::vector<int>& actions,
                                          int n_actions) {
  TabularPolicy pi;
  pi.probs = Mat::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    pi.probs(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  }
  return pi;
}

static Mat policy_transition(const TabularMDP& mdp, const TabularPolicy& pi) {
  Mat P = Mat::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = pi.probs(s, a);
      if (w == 0.0) continue;
      for (int next = 0; next < mdp.n_states; ++next) {
        P(s, next) += w * mdp.p(s, a, next);
      }
    }
  }
  return P;
}

Vec occupancy(const TabularMDP& mdp, const TabularPolicy& pi) {
  const Mat P = policy_transition(mdp, pi);
  const Mat system =
      Mat::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * P.transpose();
  const Vec rho = system.partialPivLu().solve(mdp.initial);
  return rho.cwiseMax(0.0);  // clip solver noise at the reachability boundary
}

Mat exact_pdeil_reward(const TabularMDP& mdp, const TabularPolicy& expert,
                       const TabularPolicy& agent, double alpha,
                       std::vector<int>* dead_states) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("exact reward: alpha must lie in [0, 1]");
  }
  const Vec rho_e = occupancy(mdp, expert);
  const Vec rho_a = occupancy(mdp, agent);
  Mat r = Mat::Zero(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    const double denom = alpha * rho_e[s] + (1.0 - alpha) * rho_a[s];
    if (denom <= kReachEps) {
      if (dead_states != nullptr) dead_states->push_back(s);
      continue;  // unreachable under the mixture: reward 0 by convention
    }
    for (int a = 0; a < mdp.n_actions; ++a) {
      r(s, a) = rho_e[s] * expert.probs(s, a) / denom;
    }
  }
  return r;
}

ValueIterationResult value_iteration(const TabularMDP& mdp, const Mat& reward,
                                     double tol) {
  Vec v = Vec::Zero(mdp.n_states);
  Vec v_next = Vec::Zero(mdp.n_states);
  int iterations = 0;
  while (true) {
    ++iterations;
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.n_actions; ++a) {
        double q = reward(s, a);
        for (int next = 0; next < mdp.n_states; ++next) {
          q += mdp.gamma * mdp.p(s, a, next) * v[next];
        }
        if (q > best) best = q;
      }
      v_next[s] = best;
    }
    const double delta = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (delta < tol) break;
    if (iterations > 2000000) {
      throw std::runtime_error("value iteration failed to converge");
    }
  }

  ValueIterationResult out;
  out.values = v;
  out.iterations = iterations;
  std::vector<int> greedy(static_cast<std::size_t>(mdp.n_states), 0);
  for (int s = 0; s < mdp.n_states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      double q = reward(s, a);
      for (int next = 0; next < mdp.n_states; ++next) {
        q += mdp.gamma * mdp.p(s, a, next) * v[next];
      }
      if (q > best) {  // strict: ties keep the lowest action index
        best = q;
        best_a = a;
      }
    }
    greedy[static_cast<std::size_t>(s)] = best_a;
  }
  out.policy = TabularPolicy::from_actions(greedy, mdp.n_actions);
  return out;
}

Vec policy_values(const TabularMDP& mdp, const Mat& reward,
                  const TabularPolicy& pi) {
  const Mat P = policy_transition(mdp, pi);
  Vec r_pi = Vec::Zero(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      r_pi[s] += pi.probs(s, a) * reward(s, a);
    }
  }
  const Mat system = Mat::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * P;
  return system.partialPivLu().solve(r_pi);
}

double policy_objective(const TabularMDP& mdp, const Mat& reward,
                        const TabularPolicy& pi) {
  return mdp.initial.dot(policy_values(mdp, reward, pi));
}

double density_ratio_objective(const TabularMDP& mdp, const TabularPolicy& pi,
                               const TabularPolicy& expert) {
  const Vec rho_pi = occupancy(mdp, pi);
  const Vec rho_e = occupancy(mdp, expert);
  double j = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    if (rho_pi[s] <= kReachEps) continue;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double r = rho_e[s] * expert.probs(s, a) / rho_pi[s];
      j += rho_pi[s] * pi.probs(s, a) * r;
    }
  }
  return j;
}

BruteForceResult brute_force_best_policy(const TabularMDP& mdp,
                                         const Mat& reward,
                                         std::int64_t max_cases) {
  std::int64_t cases = 1;
  for (int s = 0; s < mdp.n_states; ++s) {
    cases *= mdp.n_actions;
    if (cases > max_cases) {
      throw std::invalid_argument("brute force: policy space too large");
    }
  }
  BruteForceResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::vector<int> actions(static_cast<std::size_t>(mdp.n_states), 0);
  for (std::int64_t code = 0; code < cases; ++code) {
    std::int64_t rest = code;
    for (int s = 0; s < mdp.n_states; ++s) {
      actions[static_cast<std::size_t>(s)] =
          static_cast<int>(rest % mdp.n_actions);
      rest /= mdp.n_actions;
    }
    const TabularPolicy pi = TabularPolicy::from_actions(actions, mdp.n_actions);
    const double j = policy_objective(mdp, reward, pi);
    if (j > best.objective) {
      best.objective = j;
      best.policy = pi;
    }
  }
  return best;
}

BruteForceResult brute_force_best_ratio_policy(const TabularMDP& mdp,
                                               const TabularPolicy& expert,
                                               std::int64_t max_cases) {
  std::int64_t cases = 1;
  for (int s = 0; s < mdp.n_states; ++s) {
    cases *= mdp.n_actions;
    if (cases > max_cases) {
      throw std::invalid_argument("brute force: policy space too large");
    }
  }
  BruteForceResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::vector<int> actions(static_cast<std::size_t>(mdp.n_states), 0);
  for (std::int64_t code = 0; code < cases; ++code) {
    std::int64_t rest = code;
    for (int s = 0; s < mdp.n_states; ++s) {
      actions[static_cast<std::size_t>(s)] =
          static_cast<int>(rest % mdp.n_actions);
      rest /= mdp.n_actions;
    }
    const TabularPolicy pi = TabularPolicy::from_actions(actions, mdp.n_actions);
    const double j = density_ratio_objective(mdp, pi, expert);
    if (j > best.objective) {
      best.objective = j;
      best.policy = pi;
    }
  }
  return best;
}

OptimalityReport verify_expert_optimality(const TabularMDP& mdp,
                                          const TabularPolicy& expert,
                                          const TabularPolicy& agent,
                                          double alpha, int max_rounds) {
  OptimalityReport report;
  TabularPolicy mixture = agent;
  Mat history_sum = agent.probs;
  int history_n = 1;
  TabularPolicy found;
  for (int round = 0; round < max_rounds; ++round) {
    const Mat reward = exact_pdeil_reward(mdp, expert, mixture, alpha);
    const ValueIterationResult vi = value_iteration(mdp, reward);
    const Mat self_reward = exact_pdeil_reward(mdp, expert, vi.policy, alpha);
    const ValueIterationResult vi_self = value_iteration(mdp, self_reward);
    if (vi_self.policy.probs == vi.policy.probs) {
      report.converged = true;
      report.rounds = round + 1;
      found = vi.policy;
      break;
    }
    history_sum += vi.policy.probs;
    ++history_n;
    mixture.probs = history_sum / static_cast<double>(history_n);
  }

  report.j_expert = density_ratio_objective(mdp, expert, expert);
  if (!report.converged) return report;

  report.j_optimal = density_ratio_objective(mdp, found, expert);
  report.match = true;
  const Vec rho_e = occupancy(mdp, expert);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (rho_e[s] <= kReachEps) continue;
    ++report.reachable_states;
    int expert_action = 0;
    expert.probs.row(s).maxCoeff(&expert_action);
    int found_action = 0;
    found.probs.row(s).maxCoeff(&found_action);
    if (expert_action != found_action) {
      report.match = false;
      report.mismatched_states.push_back(s);
    }
  }
  return report;
}

TabularMDP random_mdp(Rng& rng, int n_states, int n_actions, double gamma_lo,
                      double gamma_hi) {
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = rng.uniform(gamma_lo, gamma_hi);
  mdp.transition.resize(
      static_cast<std::size_t>(n_states) * n_actions * n_states);

  // Dirichlet(1) rows via normalized exponentials
  const auto fill_simplex = [&rng](double* row, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      row[i] = -std::log(1.0 - rng.uniform());
      sum += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= sum;
  };
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      fill_simplex(&mdp.transition[static_cast<std::size_t>(
                       (s * n_actions + a) * n_states)],
                   n_states);
    }
  }
  mdp.initial.resize(n_states);
  fill_simplex(mdp.initial.data(), n_states);
  // exact normalization so validate() passes at 1e-12
  mdp.initial /= mdp.initial.sum();
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double* row = &mdp.transition[static_cast<std::size_t>(
          (s * n_actions + a) * n_states)];
      double sum = 0.0;
      for (int i = 0; i < n_states; ++i) sum += row[i];
      for (int i = 0; i < n_states; ++i) row[i] /= sum;
    }
  }
  return mdp;
}

TabularPolicy random_deterministic_policy(Rng& rng, int n_states,
                                          int n_actions) {
  std::vector<int> actions(static_cast<std::size_t>(n_states));
  for (int& a : actions) a = static_cast<int>(rng.uniform_int(n_actions));
  return TabularPolicy::from_actions(actions, n_actions);
}

TabularPolicy random_stochastic_policy(Rng& rng, int n_states, int n_actions) {
  TabularPolicy pi;
  pi.probs.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      pi.probs(s, a) = -std::log(1.0 - rng.uniform());
      sum += pi.probs(s, a);
    }
    for (int a = 0; a < n_actions; ++a) pi.probs(s, a) /= sum;
  }
  return pi;
}

std::vector<VerificationTrial> run_verification_trials(int n_trials,
                                                       int max_states,
                                                       int max_actions,
                                                       double alpha,
                                                       std::uint64_t seed) {
  std::vector<VerificationTrial> trials(static_cast<std::size_t>(n_trials));
  parallel_for(n_trials, [&](std::int64_t i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const int n_states = 2 + static_cast<int>(rng.uniform_int(max_states - 1));
    const int n_actions =
        2 + static_cast<int>(rng.uniform_int(max_actions - 1));
    const TabularMDP mdp = random_mdp(rng, n_states, n_actions, 0.5, 0.99);
    const TabularPolicy expert =
        random_deterministic_policy(rng, n_states, n_actions);
    const TabularPolicy agent =
        random_stochastic_policy(rng, n_states, n_actions);

    VerificationTrial& t = trials[static_cast<std::size_t>(i)];
    t.n_states = n_states;
    t.n_actions = n_actions;
    t.gamma = mdp.gamma;
    const OptimalityReport report =
        verify_expert_optimality(mdp, expert, agent, alpha);
    t.match = report.converged && report.match;
    t.j_expert = report.j_expert;
    t.j_optimal = report.j_optimal;

    std::int64_t cases = 1;
    for (int s = 0; s < n_states && cases <= 1024; ++s) cases *= n_actions;
    if (cases <= 1024) {
      // independent oracle: exhaustive argmax of the ratio objective must
      // also land on the expert wherever the expert is reachable
      t.brute_force_checked = true;
      const BruteForceResult brute = brute_force_best_ratio_policy(mdp, expert);
      const Vec rho_e = occupancy(mdp, expert);
      t.brute_force_agrees = true;
      for (int s = 0; s < n_states; ++s) {
        if (rho_e[s] <= 1e-12) continue;
        int ea = 0, ba = 0;
        expert.probs.row(s).maxCoeff(&ea);
        brute.policy.probs.row(s).maxCoeff(&ba);
        if (ea != ba) t.brute_force_agrees = false;
      }
    }
  });
  return trials;
}

}  // namespace pdeil
