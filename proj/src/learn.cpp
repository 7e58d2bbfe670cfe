#include "pdeil/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pdeil {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kTanhSafety = 1.0 - 1e-6;  // keeps atanh finite

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<int> layer_dims(const MlpArch& arch) {
  std::vector<int> dims;
  dims.push_back(arch.input);
  for (int h : arch.hidden) dims.push_back(h);
  dims.push_back(arch.output);
  return dims;
}

}  // namespace

int mlp_weight_count(const MlpArch& arch) {
  const auto dims = layer_dims(arch);
  int total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    total += (dims[l] + 1) * dims[l + 1];
  }
  return total;
}

Vec mlp_forward(const MlpArch& arch, std::span<const double> w, const Vec& x,
                MlpCache* cache) {
  const auto dims = layer_dims(arch);
  if (x.size() != dims[0]) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  if (static_cast<int>(w.size()) < mlp_weight_count(arch)) {
    throw std::invalid_argument("mlp_forward: weight vector too short");
  }
  if (cache != nullptr) {
    cache->act.assign(dims.size(), Vec());
    cache->act[0] = x;
  }
  Vec a = x;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const Eigen::Map<const RowMat> W(w.data() + offset, out, in);
    const Eigen::Map<const Vec> b(w.data() + offset + in * out, out);
    offset += static_cast<std::size_t>((in + 1) * out);
    Vec z = W * a + b;
    if (l + 2 < dims.size()) z = z.array().tanh();
    if (cache != nullptr) cache->act[l + 1] = z;
    a = std::move(z);
  }
  return a;
}

void mlp_backward(const MlpArch& arch, std::span<const double> w,
                  const MlpCache& cache, const Vec& dout,
                  std::span<double> grad) {
  const auto dims = layer_dims(arch);
  const std::size_t layers = dims.size() - 1;

  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += static_cast<std::size_t>((dims[l] + 1) * dims[l + 1]);
  }

  Vec delta = dout;  // dL/dz at the current layer (output layer is linear)
  for (std::size_t l = layers; l-- > 0;) {
    const int in = dims[l];
    const int out = dims[l + 1];
    if (l + 1 < layers) {
      // cache holds tanh(z); dtanh = 1 - tanh^2
      delta = delta.array() * (1.0 - cache.act[l + 1].array().square());
    }
    Eigen::Map<RowMat> dW(grad.data() + offsets[l], out, in);
    Eigen::Map<Vec> db(grad.data() + offsets[l] + in * out, out);
    dW.noalias() += delta * cache.act[l].transpose();
    db += delta;
    if (l > 0) {
      const Eigen::Map<const RowMat> W(w.data() + offsets[l], out, in);
      delta = W.transpose() * delta;
    }
  }
}

int policy_weight_count(const MlpArch& arch, const PolicyHead& head) {
  return mlp_weight_count(arch) +
         (head.kind == HeadKind::Gaussian ? head.dim : 0);
}

namespace {

void scaled_uniform_init(const MlpArch& arch, std::span<double> w, Rng& rng,
                         double final_layer_scale) {
  const auto dims = layer_dims(arch);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const double scale = (l + 2 == dims.size()) ? final_layer_scale : 1.0;
    for (int i = 0; i < (in + 1) * out; ++i) {
      w[offset + static_cast<std::size_t>(i)] =
          scale * rng.uniform(-bound, bound);
    }
    offset += static_cast<std::size_t>((in + 1) * out);
  }
}

double clamped_logstd(const PolicyParams& p, int j) {
  const double raw = p.w[static_cast<std::size_t>(mlp_weight_count(p.arch) + j)];
  return std::clamp(raw, kLogStdMin, kLogStdMax);
}

bool logstd_interior(const PolicyParams& p, int j) {
  const double raw = p.w[static_cast<std::size_t>(mlp_weight_count(p.arch) + j)];
  return raw > kLogStdMin && raw < kLogStdMax;
}

double pre_squash(const PolicyParams& p, double a) {
  const double ratio =
      std::clamp(a / p.head.action_scale, -kTanhSafety, kTanhSafety);
  return std::atanh(ratio);
}

std::vector<double> softmax_from_logits(const Vec& logits) {
  const double m = logits.maxCoeff();
  double sum = 0.0;
  std::vector<double> probs(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    probs[static_cast<std::size_t>(i)] = std::exp(logits[i] - m);
    sum += probs[static_cast<std::size_t>(i)];
  }
  for (double& v : probs) v /= sum;
  return probs;
}

int check_label(const PolicyParams& p, Action a) {
  const int label = static_cast<int>(std::llround(a.value));
  if (label < 0 || label >= p.head.dim) {
    throw std::invalid_argument("policy: action label out of range");
  }
  return label;
}

}  // namespace

PolicyParams policy_init(const MlpArch& arch, const PolicyHead& head,
                         std::uint64_t seed) {
  if (arch.output != head.dim) {
    throw std::invalid_argument("policy_init: head dim must match arch output");
  }
  PolicyParams p;
  p.arch = arch;
  p.head = head;
  p.w.assign(static_cast<std::size_t>(policy_weight_count(arch, head)), 0.0);
  Rng rng(seed);
  scaled_uniform_init(arch, p.w, rng, 0.01);
  // Gaussian log-std starts at 0 (unit pre-squash noise)
  return p;
}

ValueParams value_init(const MlpArch& arch, std::uint64_t seed) {
  if (arch.output != 1) {
    throw std::invalid_argument("value_init: scalar output required");
  }
  ValueParams v;
  v.arch = arch;
  v.w.assign(static_cast<std::size_t>(mlp_weight_count(arch)), 0.0);
  Rng rng(seed);
  scaled_uniform_init(arch, v.w, rng, 1.0);
  return v;
}

PolicyParams make_policy_for(EnvKind kind, std::uint64_t seed) {
  MlpArch arch;
  arch.input = state_dim(kind);
  if (discrete_actions(kind)) {
    arch.output = num_actions(kind);
    return policy_init(arch, {HeadKind::Categorical, num_actions(kind), 1.0},
                       seed);
  }
  arch.output = 1;
  return policy_init(arch, {HeadKind::Gaussian, 1, action_limit(kind)}, seed);
}

ValueParams make_value_for(EnvKind kind, std::uint64_t seed) {
  MlpArch arch;
  arch.input = state_dim(kind);
  arch.output = 1;
  return value_init(arch, seed);
}

double policy_logprob(const PolicyParams& p, const State& s, Action a) {
  const Vec x = to_vec(s);
  const Vec out = mlp_forward(p.arch, p.w, x);
  if (p.head.kind == HeadKind::Categorical) {
    const int label = check_label(p, a);
    const double m = out.maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < out.size(); ++i) sum += std::exp(out[i] - m);
    return out[label] - (m + std::log(sum));
  }
  if (p.head.dim != 1) {
    throw std::logic_error("scalar Action supports 1-D Gaussian heads only");
  }
  const double z = pre_squash(p, a.value);
  const double logstd = clamped_logstd(p, 0);
  const double sigma = std::exp(logstd);
  const double u = (z - out[0]) / sigma;
  const double tanh_z = std::tanh(z);
  // change of variables: a = scale * tanh(z)
  return -0.5 * u * u - logstd - 0.5 * kLog2Pi -
         std::log(p.head.action_scale) - std::log1p(-tanh_z * tanh_z);
}

Action policy_act(const PolicyParams& p, const State& s, Rng& rng,
                  double* logprob) {
  if (p.head.kind == HeadKind::Categorical) {
    const Vec out = mlp_forward(p.arch, p.w, to_vec(s));
    const auto probs = softmax_from_logits(out);
    double u = rng.uniform();
    int pick = p.head.dim - 1;
    for (int i = 0; i < p.head.dim; ++i) {
      u -= probs[static_cast<std::size_t>(i)];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    const Action a{static_cast<double>(pick)};
    if (logprob != nullptr) *logprob = policy_logprob(p, s, a);
    return a;
  }
  if (p.head.dim != 1) {
    throw std::logic_error("scalar Action supports 1-D Gaussian heads only");
  }
  const Vec out = mlp_forward(p.arch, p.w, to_vec(s));
  const double sigma = std::exp(clamped_logstd(p, 0));
  const double z = out[0] + sigma * rng.normal();
  const Action a{p.head.action_scale * std::tanh(z)};
  if (logprob != nullptr) *logprob = policy_logprob(p, s, a);
  return a;
}

Action policy_mode(const PolicyParams& p, const State& s) {
  const Vec out = mlp_forward(p.arch, p.w, to_vec(s));
  if (p.head.kind == HeadKind::Categorical) {
    int best = 0;
    out.maxCoeff(&best);
    return Action{static_cast<double>(best)};
  }
  return Action{p.head.action_scale * std::tanh(out[0])};
}

std::vector<double> policy_probs(const PolicyParams& p, const State& s) {
  if (p.head.kind != HeadKind::Categorical) {
    throw std::logic_error("policy_probs: categorical head required");
  }
  return softmax_from_logits(mlp_forward(p.arch, p.w, to_vec(s)));
}

double policy_entropy(const PolicyParams& p, const State& s) {
  if (p.head.kind == HeadKind::Categorical) {
    const auto probs = policy_probs(p, s);
    double h = 0.0;
    for (double q : probs) {
      if (q > 0.0) h -= q * std::log(q);
    }
    return h;
  }
  // pre-squash Gaussian entropy (the squash correction has no closed form)
  double h = 0.0;
  for (int j = 0; j < p.head.dim; ++j) {
    h += clamped_logstd(p, j) + 0.5 * (kLog2Pi + 1.0);
  }
  return h;
}

double value_predict(const ValueParams& v, const State& s) {
  return mlp_forward(v.arch, v.w, to_vec(s))[0];
}

void LearnerConfig::validate() const {
  if (clip_epsilon <= 0.0) throw std::invalid_argument("clip_epsilon > 0");
  if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma in (0,1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) {
    throw std::invalid_argument("gae_lambda in [0,1]");
  }
  if (minibatch < 1 || update_epochs < 1 || rollout_steps < 1) {
    throw std::invalid_argument("minibatch, update_epochs, rollout_steps >= 1");
  }
}

GaeResult compute_gae(const Trajectory& traj, std::span<const double> rewards,
                      const ValueParams& v, double gamma, double lambda) {
  const std::size_t n = traj.transitions.size();
  if (n == 0) throw std::invalid_argument("compute_gae: empty trajectory");
  if (rewards.size() != n) {
    throw std::invalid_argument("compute_gae: reward count mismatch");
  }
  std::vector<double> values(n);
  for (std::size_t t = 0; t < n; ++t) {
    values[t] = value_predict(v, traj.transitions[t].s);
  }
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double gae = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const bool done = traj.transitions[t].done;
    double next_value = 0.0;
    if (!done) {
      next_value = (t + 1 < n) ? values[t + 1]
                               : value_predict(v, traj.transitions[t].s_next);
    }
    const double delta = rewards[t] + gamma * next_value *
                             (done ? 0.0 : 1.0) - values[t];
    gae = delta + gamma * lambda * (done ? 0.0 : 1.0) * gae;
    out.advantages[t] = gae;
    out.returns[t] = gae + values[t];
  }
  return out;
}

namespace {

// Accumulates coef * d(logprob or entropy)/d(params). Shared by the
// surrogate and BC losses.
struct PolicyGradWork {
  MlpCache cache;
  Vec dout;
};

double logprob_with_grad(const PolicyParams& p, const State& s, Action a,
                         double coef, std::span<double> grad,
                         PolicyGradWork& work) {
  const Vec x = to_vec(s);
  const Vec out = mlp_forward(p.arch, p.w, x, grad.empty() ? nullptr : &work.cache);
  if (p.head.kind == HeadKind::Categorical) {
    const int label = check_label(p, a);
    const auto probs = softmax_from_logits(out);
    const double logprob = std::log(probs[static_cast<std::size_t>(label)]);
    if (!grad.empty()) {
      work.dout.resize(out.size());
      for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double indicator = (static_cast<int>(i) == label) ? 1.0 : 0.0;
        work.dout[i] =
            coef * (indicator - probs[static_cast<std::size_t>(i)]);
      }
      mlp_backward(p.arch, p.w, work.cache, work.dout, grad);
    }
    return logprob;
  }

  const double z = pre_squash(p, a.value);
  const double logstd = clamped_logstd(p, 0);
  const double sigma = std::exp(logstd);
  const double u = (z - out[0]) / sigma;
  const double tanh_z = std::tanh(z);
  const double logprob = -0.5 * u * u - logstd - 0.5 * kLog2Pi -
                         std::log(p.head.action_scale) -
                         std::log1p(-tanh_z * tanh_z);
  if (!grad.empty()) {
    work.dout.resize(1);
    work.dout[0] = coef * u / sigma;  // d logprob / d mean
    mlp_backward(p.arch, p.w, work.cache, work.dout, grad);
    if (logstd_interior(p, 0)) {
      grad[static_cast<std::size_t>(mlp_weight_count(p.arch))] +=
          coef * (u * u - 1.0);
    }
  }
  return logprob;
}

}  // namespace

double surrogate_loss(const PolicyParams& p, std::span<const State> states,
                      std::span<const Action> actions,
                      std::span<const double> old_logprobs,
                      std::span<const double> advantages,
                      const LearnerConfig& cfg, std::span<double> grad,
                      SurrogateStats* stats) {
  const std::size_t n = states.size();
  if (actions.size() != n || old_logprobs.size() != n ||
      advantages.size() != n || n == 0) {
    throw std::invalid_argument("surrogate_loss: batch size mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool want_grad = !grad.empty();
  MlpCache cache;
  Vec dout;
  double loss = 0.0;
  double ratio_sum = 0.0;
  double clipped = 0.0;
  double entropy_sum = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const Vec out = mlp_forward(p.arch, p.w, to_vec(states[i]),
                                want_grad ? &cache : nullptr);
    double logprob;
    double entropy;
    // head-specific pieces reused below when assembling the gradient
    std::vector<double> probs;
    int label = 0;
    double z = 0.0, sigma = 1.0, u = 0.0;
    if (p.head.kind == HeadKind::Categorical) {
      label = check_label(p, actions[i]);
      probs = softmax_from_logits(out);
      logprob = std::log(probs[static_cast<std::size_t>(label)]);
      entropy = 0.0;
      for (double q : probs) {
        if (q > 0.0) entropy -= q * std::log(q);
      }
    } else {
      z = pre_squash(p, actions[i].value);
      const double logstd = clamped_logstd(p, 0);
      sigma = std::exp(logstd);
      u = (z - out[0]) / sigma;
      const double tanh_z = std::tanh(z);
      logprob = -0.5 * u * u - logstd - 0.5 * kLog2Pi -
                std::log(p.head.action_scale) - std::log1p(-tanh_z * tanh_z);
      entropy = logstd + 0.5 * (kLog2Pi + 1.0);
    }

    const double ratio = std::exp(logprob - old_logprobs[i]);
    const double clipped_ratio =
        std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    const double adv = advantages[i];
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped_ratio * adv;
    loss += -std::min(unclipped_term, clipped_term) * inv_n;
    loss += -cfg.entropy_coef * entropy * inv_n;
    ratio_sum += ratio;
    if (std::abs(ratio - 1.0) > cfg.clip_epsilon) clipped += 1.0;
    entropy_sum += entropy;

    if (want_grad) {
      // gradient flows through the unclipped branch only when it is active
      const double lp_coef =
          (unclipped_term <= clipped_term) ? -adv * ratio * inv_n : 0.0;
      const double ent_coef = -cfg.entropy_coef * inv_n;
      if (p.head.kind == HeadKind::Categorical) {
        dout.resize(out.size());
        for (Eigen::Index k = 0; k < out.size(); ++k) {
          const double q = probs[static_cast<std::size_t>(k)];
          const double indicator = (static_cast<int>(k) == label) ? 1.0 : 0.0;
          double d = lp_coef * (indicator - q);
          if (q > 0.0) d += ent_coef * (-q * (std::log(q) + entropy));
          dout[k] = d;
        }
        mlp_backward(p.arch, p.w, cache, dout, grad);
      } else {
        dout.resize(1);
        dout[0] = lp_coef * u / sigma;
        mlp_backward(p.arch, p.w, cache, dout, grad);
        if (logstd_interior(p, 0)) {
          grad[static_cast<std::size_t>(mlp_weight_count(p.arch))] +=
              lp_coef * (u * u - 1.0) + ent_coef;
        }
      }
    }
  }
  if (stats != nullptr) {
    stats->mean_ratio = ratio_sum * inv_n;
    stats->clip_fraction = clipped * inv_n;
    stats->mean_entropy = entropy_sum * inv_n;
  }
  return loss;
}

double value_loss(const ValueParams& v, std::span<const State> states,
                  std::span<const double> returns, std::span<double> grad) {
  const std::size_t n = states.size();
  if (returns.size() != n || n == 0) {
    throw std::invalid_argument("value_loss: batch size mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  MlpCache cache;
  Vec dout(1);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec out = mlp_forward(v.arch, v.w, to_vec(states[i]),
                                grad.empty() ? nullptr : &cache);
    const double err = out[0] - returns[i];
    loss += 0.5 * err * err * inv_n;
    if (!grad.empty()) {
      dout[0] = err * inv_n;
      mlp_backward(v.arch, v.w, cache, dout, grad);
    }
  }
  return loss;
}

double bc_loss(const PolicyParams& p, std::span<const State> states,
               std::span<const Action> actions, std::span<double> grad) {
  const std::size_t n = states.size();
  if (actions.size() != n || n == 0) {
    throw std::invalid_argument("bc_loss: batch size mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  PolicyGradWork work;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loss += -inv_n *
            logprob_with_grad(p, states[i], actions[i], -inv_n, grad, work);
  }
  return loss;
}

void Adam::step(std::span<double> w, std::span<const double> g) {
  if (w.size() != m.size() || g.size() != m.size()) {
    throw std::invalid_argument("adam: size mismatch");
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

UpdateDiagnostics learner_update(PolicyParams& policy, ValueParams& value,
                                 Adam& policy_opt, Adam& value_opt,
                                 const Batch& batch, const LearnerConfig& cfg,
                                 Rng& rng) {
  cfg.validate();
  const std::size_t n = batch.states.size();
  if (n == 0 || batch.actions.size() != n || batch.old_logprobs.size() != n ||
      batch.advantages.size() != n || batch.returns.size() != n) {
    throw std::invalid_argument("learner_update: malformed batch");
  }

  // per-batch advantage normalization decouples the step size from the
  // recovered reward's scale
  std::vector<double> adv = batch.advantages;
  if (n >= 2) {
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd > 1e-8) {
      for (double& a : adv) a = (a - mean) / sd;
    }
  }

  const std::vector<double> policy_snapshot = policy.w;
  const std::vector<double> value_snapshot = value.w;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateDiagnostics diag;
  long long minibatches = 0;
  std::vector<double> pgrad(policy.w.size());
  std::vector<double> vgrad(value.w.size());
  std::vector<State> mb_states;
  std::vector<Action> mb_actions;
  std::vector<double> mb_old, mb_adv, mb_ret;

  for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(cfg.minibatch));
      mb_states.clear();
      mb_actions.clear();
      mb_old.clear();
      mb_adv.clear();
      mb_ret.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        mb_states.push_back(batch.states[idx]);
        mb_actions.push_back(batch.actions[idx]);
        mb_old.push_back(batch.old_logprobs[idx]);
        mb_adv.push_back(adv[idx]);
        mb_ret.push_back(batch.returns[idx]);
      }

      std::fill(pgrad.begin(), pgrad.end(), 0.0);
      std::fill(vgrad.begin(), vgrad.end(), 0.0);
      SurrogateStats stats;
      const double ploss = surrogate_loss(policy, mb_states, mb_actions,
                                          mb_old, mb_adv, cfg, pgrad, &stats);
      const double vloss = value_loss(value, mb_states, mb_ret, vgrad);

      bool finite = std::isfinite(ploss) && std::isfinite(vloss);
      for (double g : pgrad) {
        if (!std::isfinite(g)) {
          finite = false;
          break;
        }
      }
      if (finite) {
        for (double g : vgrad) {
          if (!std::isfinite(g)) {
            finite = false;
            break;
          }
        }
      }
      if (!finite) {
        policy.w = policy_snapshot;
        value.w = value_snapshot;
        diag.nan_abort = true;
        return diag;
      }

      policy_opt.step(policy.w, pgrad);
      value_opt.step(value.w, vgrad);

      ++minibatches;
      diag.mean_ratio += stats.mean_ratio;
      diag.clip_fraction += stats.clip_fraction;
      diag.entropy += stats.mean_entropy;
      diag.policy_loss += ploss;
      diag.value_loss += vloss;
    }
  }
  if (minibatches > 0) {
    const double inv = 1.0 / static_cast<double>(minibatches);
    diag.mean_ratio *= inv;
    diag.clip_fraction *= inv;
    diag.entropy *= inv;
    diag.policy_loss *= inv;
    diag.value_loss *= inv;
  }
  return diag;
}

PolicyParams bc_train(std::span<const State> states,
                      std::span<const Action> actions, const MlpArch& arch,
                      const PolicyHead& head, const BcConfig& cfg) {
  if (states.empty() || states.size() != actions.size()) {
    throw std::invalid_argument("bc_train: empty or mismatched demos");
  }
  PolicyParams p = policy_init(arch, head, cfg.seed);
  Adam opt(p.w.size(), cfg.learning_rate);
  Rng rng(derive_seed(cfg.seed, 0xbc));
  const std::size_t n = states.size();
  const std::size_t mb =
      cfg.minibatch <= 0 ? n : std::min<std::size_t>(n, cfg.minibatch);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(p.w.size());
  std::vector<State> mb_states;
  std::vector<Action> mb_actions;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t stop = std::min(n, start + mb);
      mb_states.clear();
      mb_actions.clear();
      for (std::size_t i = start; i < stop; ++i) {
        mb_states.push_back(states[order[i]]);
        mb_actions.push_back(actions[order[i]]);
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      bc_loss(p, mb_states, mb_actions, grad);
      opt.step(p.w, grad);
    }
  }
  return p;
}

}  // namespace pdeil
