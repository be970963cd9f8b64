#pragma once

// Monte Carlo validations of the concentration results. Inequalities hold in
// distribution; the finite-sample checks allow slack measured in standard
// errors of the empirical estimate. Shared by the unit and acceptance suites.

#include "sompns/bounds.hpp"
#include "sompns/recovery.hpp"
#include "sompns/rng.hpp"
#include "sompns/signal_model.hpp"
#include "sompns/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace stat_checks {

using namespace sompns;

struct TailCheck {
  double epsilon = 0.0;
  double empirical = 0.0;
  double bound = 0.0;   // analytic tail bound (clamped to 1)
  double slack = 0.0;   // allowed statistical slack
  bool pass = false;
};

inline double binomial_se(double p_hat, long long n) {
  return std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) /
                   static_cast<double>(n));
}

/// Single-atom concentration: frequency of
/// { sum_k |<phi, e_k>| q_k >= b + eps } against exp(-kappa eps^2),
/// at eps = factor * ||q^(sigma)||_2 for each requested factor.
inline std::vector<TailCheck> single_atom_tail(const WeightVector& weights,
                                               const NoiseSpec& noise,
                                               const std::vector<double>& factors,
                                               long long draws, Index m,
                                               std::uint64_t seed,
                                               double sigmas = 3.0) {
  const double kap = kappa(weights, noise);
  const double bias = bias_b(weights, noise);
  const double scale =
      (weights.q.array() * noise.sigma.array()).matrix().norm();

  Rng atom_rng(derive_seed(seed, 0));
  Vector phi(m);
  for (Index i = 0; i < m; ++i) phi(i) = atom_rng.normal();
  phi /= phi.norm();

  std::vector<double> sums(static_cast<std::size_t>(draws));
  for (long long d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d) + 1));
    double sum = 0.0;
    for (Index k = 0; k < weights.size(); ++k) {
      double dot = 0.0;
      for (Index i = 0; i < m; ++i)
        dot += phi(i) * noise.sigma(k) * rng.normal();
      sum += std::abs(dot) * weights.q(k);
    }
    sums[static_cast<std::size_t>(d)] = sum;
  }

  std::vector<TailCheck> checks;
  for (double f : factors) {
    TailCheck c;
    c.epsilon = f * scale;
    long long count = 0;
    for (double s : sums)
      if (s >= bias + c.epsilon) ++count;
    c.empirical = static_cast<double>(count) / static_cast<double>(draws);
    c.bound = std::min(1.0, std::exp(-kap * c.epsilon * c.epsilon));
    c.slack = sigmas * binomial_se(c.empirical, draws);
    c.pass = c.empirical <= c.bound + c.slack;
    checks.push_back(c);
  }
  return checks;
}

/// Union-bound version over the n atoms of a dictionary.
inline std::vector<TailCheck> max_atom_tail(const Dictionary& dict,
                                            const WeightVector& weights,
                                            const NoiseSpec& noise,
                                            const std::vector<double>& factors,
                                            long long draws,
                                            std::uint64_t seed,
                                            double sigmas = 3.0) {
  const double kap = kappa(weights, noise);
  const double bias = bias_b(weights, noise);
  const double scale =
      (weights.q.array() * noise.sigma.array()).matrix().norm();
  const double n = static_cast<double>(dict.cols());

  std::vector<double> sums(static_cast<std::size_t>(draws));
  for (long long d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
    const Matrix e = noise_matrix(dict.rows(), noise.sigma, rng);
    const Matrix corr = dict.entries().transpose() * e;
    sums[static_cast<std::size_t>(d)] =
        (corr.cwiseAbs() * weights.q).maxCoeff();
  }

  std::vector<TailCheck> checks;
  for (double f : factors) {
    TailCheck c;
    c.epsilon = f * scale;
    long long count = 0;
    for (double s : sums)
      if (s >= bias + c.epsilon) ++count;
    c.empirical = static_cast<double>(count) / static_cast<double>(draws);
    c.bound = std::min(1.0, n * std::exp(-kap * c.epsilon * c.epsilon));
    c.slack = sigmas * binomial_se(c.empirical, draws);
    c.pass = c.empirical <= c.bound + c.slack;
    checks.push_back(c);
  }
  return checks;
}

/// Projected-noise contraction: the variance of <phi_j, (I - P) e_k> stays at
/// or below sigma_k^2 for a fixed random projector P.
inline bool projected_noise_variance(Index m, Index projector_rank,
                                     double sigma_k, long long draws,
                                     std::uint64_t seed, double sigmas = 5.0) {
  Rng setup(derive_seed(seed, 0));
  Matrix basis(m, projector_rank);
  for (Index j = 0; j < projector_rank; ++j) {
    for (Index i = 0; i < m; ++i) basis(i, j) = setup.normal();
    for (Index p = 0; p < j; ++p)
      basis.col(j) -= basis.col(p).dot(basis.col(j)) * basis.col(p);
    basis.col(j) /= basis.col(j).norm();
  }
  Vector phi(m);
  for (Index i = 0; i < m; ++i) phi(i) = setup.normal();
  phi /= phi.norm();
  const Vector phi_proj = phi - basis * (basis.transpose() * phi);

  double sum = 0.0, sum_sq = 0.0;
  for (long long d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d) + 1));
    double dot = 0.0;
    for (Index i = 0; i < m; ++i) dot += phi_proj(i) * sigma_k * rng.normal();
    sum += dot;
    sum_sq += dot * dot;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // relative standard error of a sample variance is ~ sqrt(2 / n)
  const double se_rel = std::sqrt(2.0 / n);
  return var <= sigma_k * sigma_k * (1.0 + sigmas * se_rel);
}

/// Half-normal dominance: enlarging one summand's deviation can only shift
/// the CDF of X + |Y| down. Checked on an empirical grid.
inline bool half_normal_dominance(Index k_minus_one, double sigma_y1,
                                  double sigma_y2, long long draws,
                                  std::uint64_t seed, double sigmas = 3.0) {
  std::vector<double> with_y1(static_cast<std::size_t>(draws));
  std::vector<double> with_y2(static_cast<std::size_t>(draws));
  for (long long d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
    double x = 0.0;
    for (Index i = 0; i < k_minus_one; ++i) x += std::abs(rng.normal());
    // shared X, independent Y draws
    with_y1[static_cast<std::size_t>(d)] = x + std::abs(sigma_y1 * rng.normal());
    with_y2[static_cast<std::size_t>(d)] = x + std::abs(sigma_y2 * rng.normal());
  }
  std::sort(with_y1.begin(), with_y1.end());
  std::sort(with_y2.begin(), with_y2.end());

  auto cdf = [&](const std::vector<double>& sorted, double t) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) -
                               sorted.begin()) /
           static_cast<double>(draws);
  };

  const double lo = with_y2.front();
  const double hi = with_y1.back();
  for (int g = 0; g <= 40; ++g) {
    const double t = lo + (hi - lo) * g / 40.0;
    const double f1 = cdf(with_y1, t);
    const double f2 = cdf(with_y2, t);
    const double slack =
        sigmas * (binomial_se(f1, draws) + binomial_se(f2, draws));
    if (f1 > f2 + slack) return false;
  }
  return true;
}

}  // namespace stat_checks
