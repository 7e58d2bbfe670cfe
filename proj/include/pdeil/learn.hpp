#pragma once

#include <span>
#include <vector>

#include "pdeil/density.hpp"
#include "pdeil/envs.hpp"
#include "pdeil/rng.hpp"
#include "pdeil/state_vec.hpp"

namespace pdeil {

// Fully-connected net: tanh hidden layers, linear output.
struct MlpArch {
  int input = 0;
  std::vector<int> hidden = {64, 64};
  int output = 0;
};

int mlp_weight_count(const MlpArch& arch);

struct MlpCache {
  std::vector<Vec> act;  // act[0] = input, act[L] = linear output
};

Vec mlp_forward(const MlpArch& arch, std::span<const double> w, const Vec& x,
                MlpCache* cache = nullptr);

// Accumulates dL/dw into grad given dL/d(output); needs the forward cache.
void mlp_backward(const MlpArch& arch, std::span<const double> w,
                  const MlpCache& cache, const Vec& dout,
                  std::span<double> grad);

enum class HeadKind { Categorical, Gaussian };

struct PolicyHead {
  HeadKind kind = HeadKind::Categorical;
  int dim = 2;                // action count or action dimension
  double action_scale = 1.0;  // tanh squash bound for the Gaussian head
};

// Gaussian-head log-std entries live at the tail of the weight vector and
// are clamped to [-5, 2] on read.
struct PolicyParams {
  std::vector<double> w;
  MlpArch arch;
  PolicyHead head;
};

struct ValueParams {
  std::vector<double> w;
  MlpArch arch;
};

int policy_weight_count(const MlpArch& arch, const PolicyHead& head);

PolicyParams policy_init(const MlpArch& arch, const PolicyHead& head,
                         std::uint64_t seed);
ValueParams value_init(const MlpArch& arch, std::uint64_t seed);

PolicyParams make_policy_for(EnvKind kind, std::uint64_t seed);
ValueParams make_value_for(EnvKind kind, std::uint64_t seed);

double policy_logprob(const PolicyParams& p, const State& s, Action a);
Action policy_act(const PolicyParams& p, const State& s, Rng& rng,
                  double* logprob = nullptr);
Action policy_mode(const PolicyParams& p, const State& s);
std::vector<double> policy_probs(const PolicyParams& p, const State& s);
double policy_entropy(const PolicyParams& p, const State& s);

double value_predict(const ValueParams& v, const State& s);

struct LearnerConfig {
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  int minibatch = 64;
  int update_epochs = 4;
  int rollout_steps = 1000;  // fresh steps collected per learning step

  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;  // raw; normalization happens per batch
  std::vector<double> returns;
};

// GAE(lambda) over a possibly multi-episode segment; done flags cut the
// bootstrap. rewards replaces the trajectory's recorded reward channel.
GaeResult compute_gae(const Trajectory& traj, std::span<const double> rewards,
                      const ValueParams& v, double gamma, double lambda);

struct Batch {
  std::vector<State> states;
  std::vector<Action> actions;
  std::vector<double> old_logprobs;
  std::vector<double> advantages;
  std::vector<double> returns;
};

struct SurrogateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double mean_entropy = 0.0;
};

// Clipped-surrogate policy loss (entropy bonus included); optional analytic
// gradient and per-batch statistics.
double surrogate_loss(const PolicyParams& p, std::span<const State> states,
                      std::span<const Action> actions,
                      std::span<const double> old_logprobs,
                      std::span<const double> advantages,
                      const LearnerConfig& cfg,
                      std::span<double> grad = {},
                      SurrogateStats* stats = nullptr);

double value_loss(const ValueParams& v, std::span<const State> states,
                  std::span<const double> returns,
                  std::span<double> grad = {});

double bc_loss(const PolicyParams& p, std::span<const State> states,
               std::span<const Action> actions, std::span<double> grad = {});

struct Adam {
  std::vector<double> m;
  std::vector<double> v;
  long long t = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit Adam(std::size_t n, double lr_) : m(n, 0.0), v(n, 0.0), lr(lr_) {}
  void step(std::span<double> w, std::span<const double> g);
};

struct UpdateDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  bool nan_abort = false;
};

// One learning step: update_epochs passes of shuffled minibatches over the
// batch, Adam on policy and value separately. Advantages are normalized
// across the batch first. A non-finite gradient aborts with both parameter
// sets restored.
UpdateDiagnostics learner_update(PolicyParams& policy, ValueParams& value,
                                 Adam& policy_opt, Adam& value_opt,
                                 const Batch& batch, const LearnerConfig& cfg,
                                 Rng& rng);

struct BcConfig {
  int epochs = 200;
  double learning_rate = 1e-3;
  int minibatch = 0;  // 0 = full batch
  std::uint64_t seed = 0;
};

PolicyParams bc_train(std::span<const State> states,
                      std::span<const Action> actions, const MlpArch& arch,
                      const PolicyHead& head, const BcConfig& cfg);

}  // namespace pdeil
