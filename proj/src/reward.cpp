#include "pdeil/reward.hpp"

#include <cmath>
#include <stdexcept>

#include "pdeil/parallel.hpp"

namespace pdeil {

namespace {
constexpr double kExpClamp = 700.0;
}

static void check_alpha(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("reward model: alpha must lie in [0, 1]");
  }
}

RewardModel make_reward_model(StateDensity expert_joint,
                              StateDensity expert_state,
                              StateDensity agent_state, double alpha) {
  check_alpha(alpha);
  RewardModel m;
  m.expert_joint = std::move(expert_joint);
  m.expert_state = std::move(expert_state);
  m.agent_state = std::move(agent_state);
  m.alpha = alpha;
  m.beta = 1.0 - alpha;
  return m;
}

RewardModel make_reward_model(ConditionalActionModel expert_conditional,
                              StateDensity expert_state,
                              StateDensity agent_state, double alpha) {
  check_alpha(alpha);
  RewardModel m;
  m.expert_conditional = std::move(expert_conditional);
  m.expert_state = std::move(expert_state);
  m.agent_state = std::move(agent_state);
  m.alpha = alpha;
  m.beta = 1.0 - alpha;
  return m;
}

double reward_eval(const RewardModel& m, const State& s, Action a,
                   bool* clamped) {
  const Vec sv = to_vec(s);
  const double expert_state_lp = log_pdf(m.expert_state, sv);

  double num_log;
  if (m.discrete()) {
    const int label = static_cast<int>(std::llround(a.value));
    num_log = expert_state_lp + m.expert_conditional->log_posterior(sv, label);
  } else {
    num_log = log_pdf(*m.expert_joint, joint_vec(s, a));
  }

  double den_log;
  if (m.alpha == 0.0) {
    den_log = log_pdf(m.agent_state, sv);
  } else if (m.beta == 0.0) {
    den_log = std::log(m.alpha) + expert_state_lp;
  } else {
    den_log = log_sum_exp(std::log(m.alpha) + expert_state_lp,
                          std::log(m.beta) + log_pdf(m.agent_state, sv));
  }

  double exponent = num_log - den_log;
  bool hit = false;
  if (exponent > kExpClamp) {
    exponent = kExpClamp;
    hit = true;
  } else if (exponent < -kExpClamp) {
    exponent = -kExpClamp;
    hit = true;
  }
  if (clamped != nullptr) *clamped = hit;
  return std::exp(exponent);
}

static BatchRewards eval_batch_impl(const RewardModel& m,
                                    std::span<const Transition> transitions,
                                    bool parallel) {
  BatchRewards out;
  out.rewards.resize(transitions.size());
  std::vector<unsigned char> flags(transitions.size(), 0);
  const auto body = [&](std::int64_t i) {
    bool clamped = false;
    out.rewards[static_cast<std::size_t>(i)] = reward_eval(
        m, transitions[static_cast<std::size_t>(i)].s,
        transitions[static_cast<std::size_t>(i)].a, &clamped);
    flags[static_cast<std::size_t>(i)] = clamped ? 1 : 0;
  };
  if (parallel) {
    parallel_for(static_cast<std::int64_t>(transitions.size()), body);
  } else {
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(transitions.size());
         ++i) {
      body(i);
    }
  }
  for (unsigned char f : flags) out.clamp_events += f;
  return out;
}

BatchRewards reward_eval_batch(const RewardModel& m,
                               std::span<const Transition> transitions) {
  return eval_batch_impl(m, transitions, true);
}

BatchRewards reward_eval_batch_serial(const RewardModel& m,
                                      std::span<const Transition> transitions) {
  return eval_batch_impl(m, transitions, false);
}

namespace {

double simpson_panel(const std::function<double(double)>& f, double lo,
                     double mid, double hi, double flo, double fmid,
                     double fhi) {
  return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

double adaptive_step(const std::function<double(double)>& f, double lo,
                     double hi, double flo, double fmid, double fhi,
                     double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double flmid = f(lmid);
  const double frmid = f(rmid);
  const double left = simpson_panel(f, lo, lmid, mid, flo, flmid, fmid);
  const double right = simpson_panel(f, mid, rmid, hi, fmid, frmid, fhi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_step(f, lo, mid, flo, flmid, fmid, left, tol / 2.0,
                       depth - 1) +
         adaptive_step(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0,
                       depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo,
                        double hi, double tol) {
  if (!(hi > lo)) throw std::invalid_argument("adaptive_simpson: empty interval");
  const double mid = 0.5 * (lo + hi);
  const double flo = f(lo);
  const double fmid = f(mid);
  const double fhi = f(hi);
  const double whole = simpson_panel(f, lo, mid, hi, flo, fmid, fhi);
  return adaptive_step(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

double policy_self_inner_product(std::span<const double> probs) {
  double sum = 0.0;
  double sq = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("inner product: negative probability");
    sum += p;
    sq += p * p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("inner product: distribution not normalized");
  }
  return sq;
}

double policy_self_inner_product(const std::function<double(double)>& density,
                                 double lo, double hi) {
  const double mass = adaptive_simpson(density, lo, hi, 1e-8);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::invalid_argument("inner product: density not normalized");
  }
  return adaptive_simpson([&](double a) { return density(a) * density(a); },
                          lo, hi, 1e-8);
}

}  // namespace pdeil
