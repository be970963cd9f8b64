#include "sompns/bounds.hpp"

#include "sompns/recovery.hpp"

#include <cmath>
#include <limits>

namespace sompns {

namespace {

void require_same_k(const WeightVector& weights, const NoiseSpec& noise) {
  if (weights.size() != noise.size())
    throw InvalidInputError("weights and noise dimensions disagree");
}

/// 1 - exp(log_prefactor - kappa * e^2), assembled in log space so huge
/// prefactors cannot overflow on the way in.
double one_minus_exp(double log_prefactor, double kappa_value, double e) {
  return 1.0 - std::exp(log_prefactor - kappa_value * e * e);
}

}  // namespace

double kappa(const WeightVector& weights, const NoiseSpec& noise) {
  require_same_k(weights, noise);
  const double sq = (weights.q.array() * noise.sigma.array()).square().sum();
  if (sq == 0.0)
    throw InvalidInputError("kappa: every q_k sigma_k vanishes");
  return 1.0 / (2.0 * sq);
}

double bias_b(const WeightVector& weights, const NoiseSpec& noise) {
  require_same_k(weights, noise);
  const double l1 = (weights.q.array() * noise.sigma.array()).abs().sum();
  return std::sqrt(2.0 / kPi) * l1;
}

double min_weighted_row_sum(const Matrix& x, const Support& support,
                            const WeightVector& weights) {
  support.require_within(x.rows());
  if (support.empty())
    throw InvalidInputError("min_weighted_row_sum: empty support");
  if (weights.size() != x.cols())
    throw InvalidInputError("min_weighted_row_sum: weight count mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (Index j : support.indices()) {
    const double row = (x.row(j).transpose().array().abs() *
                        weights.q.array()).sum();
    best = std::min(best, row);
  }
  return best;
}

BoundValue signal_metric_lower_bound(const Matrix& x, const Support& support,
                                     const WeightVector& weights,
                                     ConditioningMode /*mode*/,
                                     double conditioning) {
  if (conditioning < 0.0)
    throw InvalidInputError("signal_metric_lower_bound: negative conditioning");
  const double min_sum = min_weighted_row_sum(x, support, weights);
  if (conditioning >= 1.0) return {0.0, true};
  return {(1.0 - conditioning) * min_sum, false};
}

BoundValue epsilon_threshold(const EpsilonInputs& inputs, const Matrix& x,
                             const Support& support,
                             const WeightVector& weights) {
  const double min_sum = min_weighted_row_sum(x, support, weights);
  double value = 0.0;
  if (inputs.mode == ConditioningMode::ric) {
    value = 0.5 * (1.0 - inputs.erc_norm) * (1.0 - inputs.delta_s) * min_sum;
  } else {
    const double factor =
        1.0 - inputs.mu * (2.0 * static_cast<double>(support.size()) - 1.0);
    value = 0.5 * factor * min_sum;
  }
  return {value, value <= 0.0};
}

BigInt combinatorial_c(int support_size, int s) {
  if (support_size < 1)
    throw InvalidInputError("combinatorial_c: support size must be >= 1");
  if (s < 0 || s > support_size - 1)
    throw InvalidInputError("combinatorial_c: s must lie in [0, |S| - 1]");
  BigInt sum = 0;
  BigInt binom = 1;  // C(|S|, 0)
  for (int i = 0; i <= s; ++i) {
    sum += binom;
    binom = binom * (support_size - i) / (i + 1);
  }
  return sum;
}

double log_big(const BigInt& v) {
  if (v <= 0) throw InvalidInputError("log_big: argument must be positive");
  const unsigned bits = boost::multiprecision::msb(v);
  if (bits < 900) return std::log(v.convert_to<double>());
  const BigInt shifted = v >> (bits - 900);
  return std::log(shifted.convert_to<double>()) +
         static_cast<double>(bits - 900) * std::log(2.0);
}

BoundReport theorem5_bound(double epsilon, const WeightVector& weights,
                           const NoiseSpec& noise, Index n, int support_size,
                           int s) {
  if (n < 1) throw InvalidInputError("theorem5_bound: n must be >= 1");
  BoundReport report;
  report.kappa = kappa(weights, noise);
  report.b = bias_b(weights, noise);
  report.epsilon = epsilon;
  report.epsilon_bar = epsilon - report.b;
  report.c_s = combinatorial_c(support_size, s);
  report.valid = report.epsilon_bar > 0.0;
  if (report.valid) {
    const double log_prefactor =
        std::log(static_cast<double>(n)) + log_big(report.c_s);
    report.prob_lower_bound =
        one_minus_exp(log_prefactor, report.kappa, report.epsilon_bar);
    report.prob_clamped =
        std::min(1.0, std::max(0.0, report.prob_lower_bound));
  } else {
    report.prob_lower_bound = std::numeric_limits<double>::quiet_NaN();
    report.prob_clamped = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

double conjectured_bound(const ConjecturedBoundParams& params, double epsilon,
                         const WeightVector& weights, const NoiseSpec& noise,
                         int s) {
  if (params.n_bar <= 0.0 || params.alpha <= 0.0)
    throw InvalidInputError("conjectured_bound: n_bar and alpha must be "
                            "positive");
  if (s < 1) throw InvalidInputError("conjectured_bound: s must be >= 1");
  const double e =
      params.drop_bias ? epsilon : epsilon - bias_b(weights, noise);
  const double log_prefactor = std::log(params.n_bar) +
                               std::log(params.alpha) +
                               std::log(static_cast<double>(s));
  return one_minus_exp(log_prefactor, kappa(weights, noise), e);
}

double b2_bound(double mu_x, const WeightVector& weights,
                const NoiseSpec& noise, Index n, int support_size,
                double epsilon_prime) {
  require_same_k(weights, noise);
  if (mu_x <= 0.0) throw InvalidInputError("b2_bound: mu_x must be positive");
  if (n < 1) throw InvalidInputError("b2_bound: n must be >= 1");
  const double k = static_cast<double>(weights.size());
  const double mean_q = weights.q.mean();
  const double mean_q2s2 =
      (weights.q.array() * noise.sigma.array()).square().mean();
  if (mean_q2s2 == 0.0)
    throw InvalidInputError("b2_bound: every q_k sigma_k vanishes");
  const double exponent = k * mean_q * mean_q * mu_x * mu_x * epsilon_prime *
                          epsilon_prime / (2.0 * mean_q2s2);
  const double log_prefactor = std::log(static_cast<double>(n)) +
                               log_big(combinatorial_c(support_size,
                                                       support_size - 1));
  return 1.0 - std::exp(log_prefactor - exponent);
}

WeightVector optimal_weights(const NoiseSpec& noise) {
  Vector q(noise.size());
  for (Index i = 0; i < noise.size(); ++i)
    q(i) = 1.0 / (noise.sigma(i) * noise.sigma(i));
  return WeightVector(std::move(q));
}

bool noisy_erc_check(const Dictionary& dict, const Support& support,
                     const Matrix& x, const Matrix& e,
                     const WeightVector& weights, const Support& t_support) {
  support.require_within(dict.cols());
  for (Index j : t_support.indices())
    if (!support.contains(j))
      throw InvalidInputError("noisy_erc_check: t_support must be a subset of "
                              "the signal support");
  if (x.rows() != dict.cols() || e.rows() != dict.rows())
    throw InvalidInputError("noisy_erc_check: dimension mismatch");
  if (x.cols() != e.cols() || weights.size() != x.cols())
    throw InvalidInputError("noisy_erc_check: measurement vector count "
                            "mismatch");

  const double erc = erc_constant(dict, support);
  const Matrix signal = dict.entries() * x;
  Matrix z, e_proj;
  if (t_support.empty()) {
    z = signal;
    e_proj = e;
  } else {
    z = project_residual(dict, t_support, signal);
    e_proj = project_residual(dict, t_support, e);
  }
  const Matrix q = weights.q.asDiagonal();
  const double lhs =
      (1.0 - erc) * matrix_inf_norm(dict.sub(support).transpose() * z * q);
  const double rhs = 2.0 * matrix_inf_norm(dict.entries().transpose() * e_proj * q);
  return lhs > rhs;
}

}  // namespace sompns
