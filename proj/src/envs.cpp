#include "pdeil/envs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdeil {

namespace {

constexpr double kPi = std::numbers::pi;

// CartPole constants (classic benchmark values).
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kPoleHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kPoleHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaThreshold = 12.0 * 2.0 * kPi / 360.0;
constexpr double kXThreshold = 2.4;

// Pendulum constants.
constexpr double kPendG = 10.0;
constexpr double kPendM = 1.0;
constexpr double kPendL = 1.0;
constexpr double kPendDt = 0.05;
constexpr double kMaxSpeed = 8.0;
constexpr double kMaxTorque = 2.0;

double wrap_angle(double x) {
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x < 0) x += 2.0 * kPi;
  return x - kPi;
}

double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace

std::string env_name(EnvKind kind) {
  return kind == EnvKind::CartPole ? "cartpole" : "pendulum";
}

EnvKind env_from_name(const std::string& name) {
  if (name == "cartpole") return EnvKind::CartPole;
  if (name == "pendulum") return EnvKind::Pendulum;
  throw std::invalid_argument("unknown environment: " + name);
}

int state_dim(EnvKind kind) { return kind == EnvKind::CartPole ? 4 : 3; }

bool discrete_actions(EnvKind kind) { return kind == EnvKind::CartPole; }

int num_actions(EnvKind kind) {
  if (!discrete_actions(kind)) {
    throw std::logic_error("num_actions: continuous action space");
  }
  return 2;
}

double action_limit(EnvKind kind) {
  if (discrete_actions(kind)) {
    throw std::logic_error("action_limit: discrete action space");
  }
  return kMaxTorque;
}

int episode_horizon(EnvKind kind) {
  return kind == EnvKind::CartPole ? 500 : 200;
}

State env_reset(EnvKind kind, Rng& rng) {
  if (kind == EnvKind::CartPole) {
    State s;
    s.values.resize(4);
    for (double& v : s.values) v = rng.uniform(-0.05, 0.05);
    return s;
  }
  const double theta = rng.uniform(-kPi, kPi);
  const double theta_dot = rng.uniform(-1.0, 1.0);
  return State{{std::cos(theta), std::sin(theta), theta_dot}};
}

static StepResult step_cartpole(const State& s, Action a) {
  if (a.value != 0.0 && a.value != 1.0) {
    throw std::invalid_argument("cartpole action must be 0 or 1");
  }
  const double x = s.values[0];
  const double x_dot = s.values[1];
  const double theta = s.values[2];
  const double theta_dot = s.values[3];

  const double force = a.value == 1.0 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  // Euler step with the pre-step derivatives.
  StepResult out;
  out.s_next.values = {x + kTau * x_dot, x_dot + kTau * x_acc,
                       theta + kTau * theta_dot, theta_dot + kTau * theta_acc};
  out.r_true = 1.0;
  const double nx = out.s_next.values[0];
  const double nt = out.s_next.values[2];
  out.done = nx < -kXThreshold || nx > kXThreshold || nt < -kThetaThreshold ||
             nt > kThetaThreshold;
  return out;
}

static StepResult step_pendulum(const State& s, Action a) {
  const double u = a.value;
  if (u < -kMaxTorque || u > kMaxTorque) {
    throw std::invalid_argument("pendulum torque outside [-2, 2]");
  }
  const double theta = std::atan2(s.values[1], s.values[0]);
  const double theta_dot = s.values[2];

  // Cost uses the pre-step state and the applied torque.
  const double wrapped = wrap_angle(theta);
  const double cost =
      wrapped * wrapped + 0.1 * theta_dot * theta_dot + 0.001 * u * u;

  const double theta_dot_next =
      clamp(theta_dot + (3.0 * kPendG / (2.0 * kPendL) * std::sin(theta) +
                         3.0 / (kPendM * kPendL * kPendL) * u) *
                            kPendDt,
            -kMaxSpeed, kMaxSpeed);
  const double theta_next = theta + theta_dot_next * kPendDt;

  StepResult out;
  out.s_next.values = {std::cos(theta_next), std::sin(theta_next),
                       theta_dot_next};
  out.r_true = -cost;
  out.done = false;
  return out;
}

StepResult env_step(EnvKind kind, const State& s, Action a) {
  if (static_cast<int>(s.values.size()) != state_dim(kind)) {
    throw std::invalid_argument("env_step: state dimension mismatch");
  }
  return kind == EnvKind::CartPole ? step_cartpole(s, a) : step_pendulum(s, a);
}

static Action cartpole_expert(const State& s) {
  const double x = s.values[0];
  const double x_dot = s.values[1];
  const double theta = s.values[2];
  const double theta_dot = s.values[3];
  const double score = theta + 0.5 * theta_dot + 0.05 * x + 0.1 * x_dot;
  return Action{score > 0.0 ? 1.0 : 0.0};
}

// Energy-based swing-up with PD stabilization near upright. The rod's
// kinetic term uses inertia m*l^2/3; desired energy is the upright rest
// energy m*g*l/2.
static Action pendulum_expert(const State& s) {
  const double theta = std::atan2(s.values[1], s.values[0]);
  const double theta_dot = s.values[2];
  const double cos_t = s.values[0];

  if (cos_t > 0.85 && std::abs(theta_dot) < 4.0) {
    const double u = -12.0 * wrap_angle(theta) - 2.2 * theta_dot;
    return Action{clamp(u, -kMaxTorque, kMaxTorque)};
  }

  const double energy = theta_dot * theta_dot / 6.0 + 5.0 * cos_t;
  const double target = 5.0;
  double direction = theta_dot > 0.0 ? 1.0 : -1.0;
  if (std::abs(theta_dot) < 1e-3) direction = wrap_angle(theta) >= 0.0 ? -1.0 : 1.0;
  const double u = 4.0 * (target - energy) * direction;
  return Action{clamp(u, -kMaxTorque, kMaxTorque)};
}

Action scripted_expert_action(EnvKind kind, const State& s) {
  return kind == EnvKind::CartPole ? cartpole_expert(s) : pendulum_expert(s);
}

Trajectory rollout(EnvKind kind, const PolicyFn& policy, int max_steps,
                   Rng& rng, bool record_true_reward) {
  if (max_steps < 1) throw std::invalid_argument("rollout: max_steps >= 1");
  Trajectory traj;
  traj.seed = rng.seed();
  traj.transitions.reserve(static_cast<std::size_t>(max_steps));

  const int horizon = episode_horizon(kind);
  State s = env_reset(kind, rng);
  int episode_len = 0;
  for (int t = 0; t < max_steps; ++t) {
    const Action a = policy(s, rng);
    StepResult step = env_step(kind, s, a);
    ++episode_len;
    const bool done = step.done || episode_len >= horizon;
    traj.transitions.push_back(Transition{
        s, a, record_true_reward ? step.r_true : 0.0, step.s_next, done});
    if (done) {
      s = env_reset(kind, rng);
      episode_len = 0;
    } else {
      s = std::move(step.s_next);
    }
  }
  return traj;
}

std::vector<double> episode_returns(EnvKind kind, const PolicyFn& policy,
                                    int episodes, Rng& rng) {
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  const int horizon = episode_horizon(kind);
  for (int e = 0; e < episodes; ++e) {
    State s = env_reset(kind, rng);
    double total = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Action a = policy(s, rng);
      StepResult step = env_step(kind, s, a);
      total += step.r_true;
      if (step.done) break;
      s = std::move(step.s_next);
    }
    returns.push_back(total);
  }
  return returns;
}

}  // namespace pdeil
