#include "pdeil/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "pdeil/parallel.hpp"

namespace pdeil {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)
}

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double GaussianModel::log_pdf(const Vec& x) const {
  if (x.size() != mean.size()) {
    throw std::invalid_argument("gaussian log_pdf: dimension mismatch");
  }
  const Vec diff = x - mean;
  const Vec y = cholesky_factor.triangularView<Eigen::Lower>().solve(diff);
  return log_norm_const - 0.5 * y.squaredNorm();
}

GaussianModel make_gaussian(Vec mean, Mat covariance, double ridge) {
  GaussianModel m;
  m.mean = std::move(mean);
  m.covariance = std::move(covariance);
  m.ridge = ridge;
  if (ridge > 0.0) {
    m.covariance += ridge * Mat::Identity(m.covariance.rows(), m.covariance.cols());
  }
  Eigen::LLT<Mat> llt(m.covariance);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "gaussian fit: covariance not positive definite (raise ridge)");
  }
  m.cholesky_factor = llt.matrixL();
  const int d = m.dim();
  double log_det_half = 0.0;
  for (int i = 0; i < d; ++i) log_det_half += std::log(m.cholesky_factor(i, i));
  m.log_norm_const = -0.5 * d * kLog2Pi - log_det_half;
  return m;
}

GaussianModel fit_gaussian(std::span<const Vec> samples, double ridge) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_gaussian: need at least 2 samples");
  }
  if (ridge < 0.0) throw std::invalid_argument("fit_gaussian: ridge < 0");
  const auto d = samples[0].size();
  for (const Vec& s : samples) {
    if (s.size() != d) {
      throw std::invalid_argument("fit_gaussian: dimension mismatch");
    }
  }
  const double n = static_cast<double>(samples.size());
  Vec mean = Vec::Zero(d);
  for (const Vec& s : samples) mean += s;
  mean /= n;

  Mat cov = Mat::Zero(d, d);
  for (const Vec& s : samples) {
    const Vec diff = s - mean;
    cov.noalias() += diff * diff.transpose();
  }
  cov /= n;  // MLE normalization
  return make_gaussian(std::move(mean), std::move(cov), ridge);
}

double KdeModel::log_pdf(const Vec& x) const {
  if (x.size() != bandwidth.size()) {
    throw std::invalid_argument("kde log_pdf: dimension mismatch");
  }
  const auto n = samples.rows();
  const auto d = samples.cols();
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double q = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double z = (x[j] - samples(i, j)) / bandwidth[j];
      q += z * z;
    }
    terms[static_cast<std::size_t>(i)] = -0.5 * q;
  }
  return log_norm_const + log_sum_exp(terms);
}

KdeModel fit_kde(std::span<const Vec> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_kde: need at least 2 samples");
  }
  const auto d = samples[0].size();
  const auto n = static_cast<Eigen::Index>(samples.size());
  KdeModel m;
  m.samples.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (samples[static_cast<std::size_t>(i)].size() != d) {
      throw std::invalid_argument("fit_kde: dimension mismatch");
    }
    m.samples.row(i) = samples[static_cast<std::size_t>(i)].transpose();
  }
  const Vec mean = m.samples.colwise().mean();
  Vec sigma = Vec::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (m.samples.col(j).array() - mean[j]).square().sum() / static_cast<double>(n);
    sigma[j] = std::sqrt(var);
  }
  const double scott =
      std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
  m.bandwidth = (sigma * scott).cwiseMax(1e-6);

  double log_h = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) log_h += std::log(m.bandwidth[j]);
  m.log_norm_const = -std::log(static_cast<double>(n)) -
                     0.5 * static_cast<double>(d) * kLog2Pi - log_h;
  return m;
}

double log_pdf(const StateDensity& model, const Vec& x) {
  return std::visit([&x](const auto& m) { return m.log_pdf(x); }, model);
}

void log_pdf_batch_serial(const StateDensity& model, std::span<const Vec> xs,
                          std::span<double> out) {
  if (xs.size() != out.size()) {
    throw std::invalid_argument("log_pdf_batch: size mismatch");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = log_pdf(model, xs[i]);
}

void log_pdf_batch(const StateDensity& model, std::span<const Vec> xs,
                   std::span<double> out) {
  if (xs.size() != out.size()) {
    throw std::invalid_argument("log_pdf_batch: size mismatch");
  }
  parallel_for(static_cast<std::int64_t>(xs.size()),
               [&](std::int64_t i) { out[i] = log_pdf(model, xs[i]); });
}

double ConditionalActionModel::log_posterior(const Vec& s, int label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw std::invalid_argument("conditional model: unknown action label");
  }
  const auto idx = static_cast<std::size_t>(it - labels.begin());
  std::vector<double> joint(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    joint[k] = log_priors[k] + class_models[k].log_pdf(s);
  }
  return joint[idx] - log_sum_exp(joint);
}

std::vector<double> ConditionalActionModel::posterior(const Vec& s) const {
  std::vector<double> joint(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    joint[k] = log_priors[k] + class_models[k].log_pdf(s);
  }
  const double lse = log_sum_exp(joint);
  std::vector<double> post(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    post[k] = std::exp(joint[k] - lse);
  }
  return post;
}

ConditionalActionModel fit_conditional(std::span<const Vec> states,
                                       std::span<const int> actions,
                                       double ridge) {
  if (states.size() != actions.size() || states.empty()) {
    throw std::invalid_argument("fit_conditional: mismatched or empty input");
  }
  std::set<int> label_set(actions.begin(), actions.end());
  ConditionalActionModel m;
  for (int label : label_set) {
    std::vector<Vec> members;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (actions[i] == label) members.push_back(states[i]);
    }
    if (members.size() < 2) {
      throw std::invalid_argument(
          "fit_conditional: action label with fewer than 2 occurrences");
    }
    m.labels.push_back(label);
    m.class_models.push_back(fit_gaussian(members, ridge));
    m.log_priors.push_back(std::log(static_cast<double>(members.size()) /
                                    static_cast<double>(states.size())));
  }
  return m;
}

double conditional_prob(const ConditionalActionModel& m, const Vec& s,
                        int action) {
  return std::exp(m.log_posterior(s, action));
}

double FrequencyTable::prob(long long outcome) const {
  const auto it = counts.find(outcome);
  const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
  const double denom = static_cast<double>(total) +
                       smoothing * static_cast<double>(support_size);
  return (c + smoothing) / denom;
}

FrequencyTable fit_frequency(std::span<const long long> samples,
                             double smoothing,
                             std::span<const long long> support) {
  if (samples.empty()) {
    throw std::invalid_argument("fit_frequency: need at least 1 sample");
  }
  FrequencyTable t;
  t.smoothing = smoothing;
  t.total = static_cast<long long>(samples.size());
  for (long long s : samples) ++t.counts[s];
  if (support.empty()) {
    t.support_size = static_cast<long long>(t.counts.size());
  } else {
    for (long long s : support) t.counts.try_emplace(s, 0);
    t.support_size = static_cast<long long>(t.counts.size());
  }
  return t;
}

}  // namespace pdeil
