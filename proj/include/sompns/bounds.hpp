#pragma once

#include "sompns/dictionary.hpp"
#include "sompns/types.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace sompns {

using BigInt = boost::multiprecision::cpp_int;

/// Concentration rate kappa(q, sigma) = 1 / (2 ||q^(sigma)||_2^2) with
/// q^(sigma)_k = sigma_k q_k. Throws when every q_k sigma_k vanishes.
double kappa(const WeightVector& weights, const NoiseSpec& noise);

/// Bias b(q, sigma) = sqrt(2/pi) ||q^(sigma)||_1, the mean of the weighted
/// half-normal sum.
double bias_b(const WeightVector& weights, const NoiseSpec& noise);

/// min_{j in S} sum_k |X_{j,k}| q_k — the weakest weighted atom of the signal.
double min_weighted_row_sum(const Matrix& x, const Support& support,
                            const WeightVector& weights);

enum class ConditioningMode { ric, coherence };

/// (1 - conditioning) * min_{j in S} sum_k |X_{j,k}| q_k. The conditioning
/// constant is the RIC delta in ric mode or (|S|-t-1)*mu (t defaulting to 0)
/// in coherence mode; it is supplied by the caller. Flagged vacuous when the
/// conditioning reaches 1.
BoundValue signal_metric_lower_bound(const Matrix& x, const Support& support,
                                     const WeightVector& weights,
                                     ConditioningMode mode,
                                     double conditioning);

/// Inputs for the recovery-margin threshold epsilon(q). In ric mode both the
/// ERC norm and delta_|S| must be supplied; in coherence mode only mu.
struct EpsilonInputs {
  ConditioningMode mode = ConditioningMode::ric;
  double erc_norm = 0.0;  // ||Phi_S^+ Phi_Sbar||_1        (ric mode)
  double delta_s = 0.0;   // RIC of order |S| or surrogate  (ric mode)
  double mu = 0.0;        // coherence                      (coherence mode)
};

/// epsilon(q) = 0.5 (1 - erc_norm)(1 - delta) * min-sum in ric mode, or
/// 0.5 (1 - mu (2|S| - 1)) * min-sum in coherence mode. Zero or negative
/// values are flagged vacuous.
BoundValue epsilon_threshold(const EpsilonInputs& inputs, const Matrix& x,
                             const Support& support,
                             const WeightVector& weights);

/// C_s = sum_{i=0}^{s} C(|S|, i), exact. Requires 0 <= s <= |S| - 1.
BigInt combinatorial_c(int support_size, int s);

/// log of a positive big integer, usable far beyond double range.
double log_big(const BigInt& v);

/// Everything Theorem-5-shaped reports: the concentration constants, the
/// margin, the combinatorial factor and the probability lower bound. The raw
/// bound may be negative (vacuous); a clamped-to-[0,1] view is also provided.
struct BoundReport {
  double kappa = 0.0;
  double b = 0.0;
  double epsilon = 0.0;
  double epsilon_bar = 0.0;
  BigInt c_s = 1;
  double prob_lower_bound = 0.0;  // NaN when not valid
  double prob_clamped = 0.0;      // NaN when not valid
  bool valid = false;             // epsilon_bar > 0
};

/// 1 - n C_s exp(-kappa epsilon_bar^2), with epsilon_bar = epsilon - b.
/// The exponent is assembled in log space so n * C_s cannot overflow.
BoundReport theorem5_bound(double epsilon, const WeightVector& weights,
                           const NoiseSpec& noise, Index n, int support_size,
                           int s);

/// Free parameters of the conjectured refinement: effective atom count n_bar,
/// linear iteration coefficient alpha, and whether the bias is dropped from
/// the exponent. Only the product n_bar * alpha * s is identified by fits.
struct ConjecturedBoundParams {
  double n_bar = 0.0;
  double alpha = 0.0;
  bool drop_bias = false;
};

/// 1 - n_bar alpha s exp(-kappa e^2) where e is epsilon - b, or epsilon
/// itself when drop_bias is set.
double conjectured_bound(const ConjecturedBoundParams& params, double epsilon,
                         const WeightVector& weights, const NoiseSpec& noise,
                         int s);

/// Sign-pattern bound: 1 - n C_{|S|-1} exp(-K <q>^2 mu_X^2 eps'^2 /
/// (2 <q_k^2 sigma_k^2>)). Invariant under positive rescaling of q.
double b2_bound(double mu_x, const WeightVector& weights,
                const NoiseSpec& noise, Index n, int support_size,
                double epsilon_prime);

/// q_k = 1 / sigma_k^2, the weighting that maximizes the sign-pattern bound.
WeightVector optimal_weights(const NoiseSpec& noise);

/// Concrete-instance diagnostic for the noisy correct-decision criterion:
/// computes Z = (I - P) Phi X and E' = (I - P) E for the projector onto the
/// atoms in t_support and checks
///   (1 - ||Phi_S^+ Phi_Sbar||_1) ||Phi_S^T Z Q||_inf > 2 ||Phi^T E' Q||_inf.
bool noisy_erc_check(const Dictionary& dict, const Support& support,
                     const Matrix& x, const Matrix& e,
                     const WeightVector& weights, const Support& t_support);

}  // namespace sompns
