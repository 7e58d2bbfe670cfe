#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pdeil/reward.hpp"
#include "pdeil/rng.hpp"

using namespace pdeil;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

GaussianModel unit_gaussian_2d(double cx, double cy) {
  return make_gaussian(vec2(cx, cy), Mat::Identity(2, 2));
}

// Symmetric two-class conditional: posterior is exactly 1/2 everywhere.
ConditionalActionModel symmetric_conditional() {
  std::vector<Vec> states;
  std::vector<int> actions;
  const std::vector<Vec> base = {vec2(0, 0), vec2(1, 0), vec2(0, 1),
                                 vec2(1, 1)};
  for (int label = 0; label < 2; ++label) {
    for (const Vec& s : base) {
      states.push_back(s);
      actions.push_back(label);
    }
  }
  return fit_conditional(states, actions, 1e-9);
}

// Two clusters far enough apart that the posterior saturates to 1.
ConditionalActionModel separated_conditional(double gap) {
  Rng rng(77);
  std::vector<Vec> states;
  std::vector<int> actions;
  for (int i = 0; i < 100; ++i) {
    states.push_back(vec2(rng.normal(), rng.normal()));
    actions.push_back(0);
    states.push_back(vec2(rng.normal(gap, 1.0), rng.normal(gap, 1.0)));
    actions.push_back(1);
  }
  return fit_conditional(states, actions, 1e-6);
}

State state2(double a, double b) { return State{{a, b}}; }

}  // namespace

TEST_CASE("equal state densities collapse the ratio to the conditional") {
  // rho_e(s) = rho_pi(s) = x, so r = x * p(a|s) / (a*x + b*x) = p(a|s);
  // with the symmetric conditional that is exactly 1/2 for any alpha.
  const GaussianModel shared = unit_gaussian_2d(0.0, 0.0);
  for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
    const RewardModel m =
        make_reward_model(symmetric_conditional(), shared, shared, alpha);
    CHECK(reward_eval(m, state2(0.3, -0.2), Action{0.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("vanishing agent density drives the balanced reward to its bound") {
  const RewardModel m = make_reward_model(
      separated_conditional(20.0), unit_gaussian_2d(0.0, 0.0),
      unit_gaussian_2d(500.0, 500.0), 0.5);
  // agent density at the expert cluster center is effectively zero and the
  // posterior saturates, so the reward reaches 2 exactly
  const double r = reward_eval(m, state2(0.0, 0.0), Action{0.0});
  CHECK(r == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r <= 2.0 + 1e-9);
}

TEST_CASE("alpha zero reduces to the plain density ratio") {
  const GaussianModel joint =
      make_gaussian(Vec::Zero(3), Mat::Identity(3, 3));
  const GaussianModel expert_state = unit_gaussian_2d(0.0, 0.0);
  const GaussianModel agent_state = unit_gaussian_2d(1.0, -1.0);
  const RewardModel m =
      make_reward_model(joint, expert_state, agent_state, 0.0);
  const State s = state2(0.4, 0.1);
  const Action a{-0.7};
  const double expected =
      std::exp(joint.log_pdf(joint_vec(s, a)) - agent_state.log_pdf(to_vec(s)));
  CHECK(reward_eval(m, s, a) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("balanced discrete rewards never exceed two") {
  Rng rng(123);
  const ConditionalActionModel cond = separated_conditional(4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const GaussianModel expert_state =
        unit_gaussian_2d(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const GaussianModel agent_state =
        unit_gaussian_2d(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const RewardModel m =
        make_reward_model(cond, expert_state, agent_state, 0.5);
    for (int i = 0; i < 20; ++i) {
      const State s = state2(rng.uniform(-10, 10), rng.uniform(-10, 10));
      const Action a{static_cast<double>(rng.uniform_int(2))};
      REQUIRE(reward_eval(m, s, a) <= 2.0 + 1e-9);
    }
  }
}

TEST_CASE("unbalanced ratio diverges where the balanced one stays bounded") {
  // the failure mode: alpha = 0 blows up on states the agent model has
  // never covered, while alpha = 0.5 stays below its bound
  const ConditionalActionModel cond = separated_conditional(20.0);
  const GaussianModel expert_state = unit_gaussian_2d(0.0, 0.0);
  const GaussianModel agent_state = unit_gaussian_2d(0.0, 0.0);

  std::vector<double> raw;
  std::vector<double> balanced;
  for (double offset : {0.0, 5.0, 10.0, 20.0, 30.0}) {
    const State s = state2(-offset, 0.0);
    const RewardModel m0 =
        make_reward_model(cond, expert_state,
                          unit_gaussian_2d(offset, 0.0), 0.0);
    const RewardModel m5 =
        make_reward_model(cond, expert_state,
                          unit_gaussian_2d(offset, 0.0), 0.5);
    raw.push_back(reward_eval(m0, s, Action{0.0}));
    balanced.push_back(reward_eval(m5, s, Action{0.0}));
  }
  for (std::size_t i = 1; i < raw.size(); ++i) CHECK(raw[i] > raw[i - 1]);
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  CHECK(raw.back() > 100.0 * sorted[sorted.size() / 2]);
  for (double b : balanced) CHECK(b <= 2.0 + 1e-9);
}

TEST_CASE("reward is strictly decreasing in the agent density when beta > 0") {
  const GaussianModel joint = make_gaussian(Vec::Zero(3), Mat::Identity(3, 3));
  const GaussianModel expert_state = unit_gaussian_2d(0.0, 0.0);
  const State s = state2(0.0, 0.0);
  const Action a{0.0};
  // moving the agent model away lowers rho_pi(s) monotonically
  std::vector<double> rewards;
  for (double offset : {0.0, 1.0, 2.0, 4.0}) {
    const RewardModel m = make_reward_model(
        joint, expert_state, unit_gaussian_2d(offset, 0.0), 0.5);
    rewards.push_back(reward_eval(m, s, a));
  }
  for (std::size_t i = 1; i < rewards.size(); ++i) {
    CHECK(rewards[i] > rewards[i - 1]);
  }
  // with alpha = 1 the agent density is ignored entirely
  std::vector<double> fixed;
  for (double offset : {0.0, 1.0, 2.0, 4.0}) {
    const RewardModel m = make_reward_model(
        joint, expert_state, unit_gaussian_2d(offset, 0.0), 1.0);
    fixed.push_back(reward_eval(m, s, a));
  }
  for (std::size_t i = 1; i < fixed.size(); ++i) {
    CHECK(fixed[i] == doctest::Approx(fixed[0]).epsilon(1e-12));
  }
}

TEST_CASE("extreme ratios clamp and report the event") {
  Vec tiny_mean(2);
  tiny_mean << 1000.0, 1000.0;
  const GaussianModel far_agent =
      make_gaussian(tiny_mean, 1e-4 * Mat::Identity(2, 2));
  const GaussianModel joint = make_gaussian(Vec::Zero(3), Mat::Identity(3, 3));
  const RewardModel m = make_reward_model(
      joint, unit_gaussian_2d(0.0, 0.0), far_agent, 0.0);
  bool clamped = false;
  const double r = reward_eval(m, state2(0.0, 0.0), Action{0.0}, &clamped);
  CHECK(clamped);
  CHECK(r == doctest::Approx(std::exp(700.0)));
  CHECK(std::isfinite(r));
}

TEST_CASE("batch evaluation matches the elementwise loop exactly") {
  Rng rng(31);
  const GaussianModel joint = make_gaussian(Vec::Zero(3), Mat::Identity(3, 3));
  const RewardModel m = make_reward_model(
      joint, unit_gaussian_2d(0.0, 0.0), unit_gaussian_2d(1.0, 1.0), 0.5);

  std::vector<Transition> transitions;
  for (int i = 0; i < 100; ++i) {
    Transition t;
    t.s = state2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    t.a = Action{rng.uniform(-2, 2)};
    transitions.push_back(t);
  }
  const BatchRewards batch = reward_eval_batch(m, transitions);
  const BatchRewards serial = reward_eval_batch_serial(m, transitions);
  REQUIRE(batch.rewards == serial.rewards);
  CHECK(batch.clamp_events == serial.clamp_events);
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    REQUIRE(batch.rewards[i] ==
            reward_eval(m, transitions[i].s, transitions[i].a));
  }

  CHECK(reward_eval_batch(m, {}).rewards.empty());
  const BatchRewards single =
      reward_eval_batch(m, std::span<const Transition>(transitions.data(), 1));
  CHECK(single.rewards.size() == 1);
  CHECK(single.rewards[0] ==
        reward_eval(m, transitions[0].s, transitions[0].a));
}

TEST_CASE("discrete self inner product matches the reference table") {
  const std::vector<double> onehot = {0.0, 0.0, 1.0};
  CHECK(policy_self_inner_product(onehot) == doctest::Approx(1.0));
  const std::vector<double> uniform3 = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(policy_self_inner_product(uniform3) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("discrete inner product is below one, equal only when one-hot") {
  Rng rng(17);
  for (int n = 2; n <= 10; ++n) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> p(static_cast<std::size_t>(n));
      double sum = 0.0;
      for (double& v : p) {
        v = -std::log(1.0 - rng.uniform());
        sum += v;
      }
      double maxp = 0.0;
      for (double& v : p) {
        v /= sum;
        maxp = std::max(maxp, v);
      }
      const double ip = policy_self_inner_product(p);
      REQUIRE(ip <= 1.0 + 1e-12);
      if (maxp < 1.0 - 1e-9) REQUIRE(ip < 1.0);
    }
  }
}

TEST_CASE("sharpening a distribution never lowers the inner product") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(5);
    double sum = 0.0;
    for (double& v : p) {
      v = -std::log(1.0 - rng.uniform());
      sum += v;
    }
    for (double& v : p) v /= sum;
    double prev = policy_self_inner_product(p);
    std::vector<double> q = p;
    for (int k = 0; k < 4; ++k) {
      double qsum = 0.0;
      for (double& v : q) {
        v = v * v;  // exponent 2 each round
        qsum += v;
      }
      for (double& v : q) v /= qsum;
      const double cur = policy_self_inner_product(q);
      REQUIRE(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("continuous inner products reproduce the analytic values") {
  // uniform widths 2, 1, 0.5 -> 0.5, 1, 2
  const auto uniform = [](double width) {
    return [width](double a) {
      return std::abs(a) <= width / 2.0 ? 1.0 / width : 0.0;
    };
  };
  CHECK(policy_self_inner_product(uniform(2.0), -1.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-6));
  CHECK(policy_self_inner_product(uniform(1.0), -0.5, 0.5) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(policy_self_inner_product(uniform(0.5), -0.25, 0.25) ==
        doctest::Approx(2.0).epsilon(1e-6));

  // symmetric triangles: base 2 height 1 -> 2/3, base 1 height 2 -> 4/3
  const auto triangle = [](double base) {
    const double height = 2.0 / base;
    return [base, height](double a) {
      const double t = 1.0 - std::abs(a) / (base / 2.0);
      return t > 0.0 ? height * t : 0.0;
    };
  };
  CHECK(policy_self_inner_product(triangle(2.0), -1.0, 1.0) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(policy_self_inner_product(triangle(1.0), -0.5, 0.5) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("inner product rejects unnormalized inputs") {
  const std::vector<double> bad = {0.5, 0.4};
  CHECK_THROWS_AS(policy_self_inner_product(bad), std::invalid_argument);
  CHECK_THROWS_AS(
      policy_self_inner_product([](double) { return 1.0; }, -1.0, 1.0),
      std::invalid_argument);
}

TEST_CASE("adaptive quadrature integrates smooth functions tightly") {
  const double val = adaptive_simpson([](double x) { return std::sin(x); },
                                      0.0, std::numbers::pi);
  CHECK(val == doctest::Approx(2.0).epsilon(1e-10));
}
