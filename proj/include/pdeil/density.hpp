#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <variant>
#include <vector>

namespace pdeil {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

double log_sum_exp(std::span<const double> xs);
inline double log_sum_exp(double a, double b) {
  const double xs[2] = {a, b};
  return log_sum_exp(xs);
}

// Full-covariance multivariate normal with a cached Cholesky factor.
struct GaussianModel {
  Vec mean;
  Mat covariance;      // MLE estimate plus ridge * I
  Mat cholesky_factor; // lower triangular
  double log_norm_const = 0.0;
  double ridge = 0.0;

  int dim() const { return static_cast<int>(mean.size()); }
  double log_pdf(const Vec& x) const;
};

GaussianModel fit_gaussian(std::span<const Vec> samples, double ridge);
GaussianModel make_gaussian(Vec mean, Mat covariance, double ridge = 0.0);

// Gaussian-kernel density estimate with per-dimension Scott bandwidths
// n^(-1/(d+4)) * sigma_j.
struct KdeModel {
  Mat samples;  // n x d
  Vec bandwidth;
  double log_norm_const = 0.0;  // per-kernel constant incl. log(1/n)

  int dim() const { return static_cast<int>(bandwidth.size()); }
  double log_pdf(const Vec& x) const;
};

KdeModel fit_kde(std::span<const Vec> samples);

using StateDensity = std::variant<GaussianModel, KdeModel>;

double log_pdf(const StateDensity& model, const Vec& x);

// Batch evaluation: OpenMP map over elements, plus the serial reference the
// parallel kernel is tested against.
void log_pdf_batch(const StateDensity& model, std::span<const Vec> xs,
                   std::span<double> out);
void log_pdf_batch_serial(const StateDensity& model, std::span<const Vec> xs,
                          std::span<double> out);

// Class-conditional Gaussian classifier: one Gaussian per action label plus
// empirical priors; posteriors evaluated in log space via Bayes rule.
struct ConditionalActionModel {
  std::vector<int> labels;
  std::vector<GaussianModel> class_models;
  std::vector<double> log_priors;

  int n_classes() const { return static_cast<int>(labels.size()); }
  double log_posterior(const Vec& s, int label) const;
  std::vector<double> posterior(const Vec& s) const;
};

ConditionalActionModel fit_conditional(std::span<const Vec> states,
                                       std::span<const int> actions,
                                       double ridge);

double conditional_prob(const ConditionalActionModel& m, const Vec& s,
                        int action);

// Additive-smoothing frequency table over discrete outcomes.
struct FrequencyTable {
  std::map<long long, long long> counts;
  double smoothing = 0.0;
  long long total = 0;
  long long support_size = 0;

  double prob(long long outcome) const;
};

FrequencyTable fit_frequency(std::span<const long long> samples,
                             double smoothing,
                             std::span<const long long> support = {});

}  // namespace pdeil
