#include "sompns/dictionary.hpp"

#include "sompns/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sompns {

namespace {

constexpr double kRankRelTol = 1e-8;

/// Full column rank iff the smallest revealed diagonal magnitude exceeds
/// 1e-8 of the largest.
void require_full_rank(const Eigen::ColPivHouseholderQR<Matrix>& qr,
                       const Support& support) {
  const Index r = std::min(qr.matrixQR().rows(), qr.matrixQR().cols());
  double max_diag = 0.0, min_diag = 0.0;
  for (Index i = 0; i < r; ++i) {
    const double d = std::abs(qr.matrixQR()(i, i));
    max_diag = (i == 0) ? d : std::max(max_diag, d);
    min_diag = (i == 0) ? d : std::min(min_diag, d);
  }
  if (qr.matrixQR().cols() > qr.matrixQR().rows() ||
      min_diag <= kRankRelTol * max_diag)
    throw RankDeficiencyError("rank-deficient atom subset " +
                              support.to_string_1based());
}

std::uint64_t binomial_capped(Index n, Index s, std::uint64_t cap) {
  // C(n, s), saturating at cap to avoid overflow during the budget check.
  if (s < 0 || s > n) return 0;
  s = std::min(s, n - s);
  long double c = 1.0L;
  for (Index i = 1; i <= s; ++i) {
    c = c * static_cast<long double>(n - s + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(cap) * 2.0L)
      return cap + 1;
  }
  return static_cast<std::uint64_t>(c + 0.5L);
}

}  // namespace

Dictionary generate_gaussian_dictionary(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1)
    throw InvalidInputError("gaussian dictionary: m and n must be positive");
  Rng rng(seed);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j) {
    double norm = 0.0;
    do {
      for (Index i = 0; i < m; ++i) a(i, j) = rng.normal();
      norm = a.col(j).norm();
    } while (norm == 0.0);  // probability zero; resample rather than fail
    a.col(j) /= norm;
  }
  return Dictionary(std::move(a));
}

Dictionary generate_rademacher_dictionary(Index m, Index n,
                                          std::uint64_t seed) {
  if (m < 1 || n < 1)
    throw InvalidInputError("rademacher dictionary: m and n must be positive");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = rng.sign() * scale;
  return Dictionary(std::move(a));
}

// Scalar accumulation in a fixed order, so the duality
// inf_norm(A) == one_norm(A^T) holds exactly, not merely to rounding.
double matrix_inf_norm(const Matrix& a) {
  double best = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < a.cols(); ++j) sum += std::abs(a(i, j));
    best = std::max(best, sum);
  }
  return best;
}

double matrix_one_norm(const Matrix& a) {
  double best = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    double sum = 0.0;
    for (Index i = 0; i < a.rows(); ++i) sum += std::abs(a(i, j));
    best = std::max(best, sum);
  }
  return best;
}

double coherence(const Dictionary& dict) {
  const Index n = dict.cols();
  if (n < 2)
    throw InvalidInputError("coherence: needs at least two atoms");
  const Matrix& phi = dict.entries();
  double best = 0.0;
  for (Index j = 1; j < n; ++j) {
    // |Phi_{0..j-1}^T phi_j|, one pass over the strict lower triangle
    const Vector g = (phi.leftCols(j).transpose() * phi.col(j)).cwiseAbs();
    best = std::max(best, g.maxCoeff());
  }
  return best;
}

double babel(const Dictionary& dict, int p) {
  const Index n = dict.cols();
  if (n < 2)
    throw InvalidInputError("babel: needs at least two atoms");
  if (p < 1 || p > n - 1)
    throw InvalidInputError("babel: p must lie in [1, n-1], got " +
                            std::to_string(p));
  const Matrix gram = dict.entries().transpose() * dict.entries();
  double best = 0.0;
  std::vector<double> offdiag(static_cast<std::size_t>(n) - 1);
  for (Index j = 0; j < n; ++j) {
    std::size_t c = 0;
    for (Index i = 0; i < n; ++i)
      if (i != j) offdiag[c++] = std::abs(gram(i, j));
    // sum of the p largest |<phi_i, phi_j>| over i != j
    std::nth_element(offdiag.begin(), offdiag.begin() + (p - 1), offdiag.end(),
                     std::greater<double>());
    double sum = 0.0;
    for (int t = 0; t < p; ++t) sum += offdiag[static_cast<std::size_t>(t)];
    best = std::max(best, sum);
  }
  return best;
}

double erc_constant(const Dictionary& dict, const Support& support) {
  support.require_within(dict.cols());
  if (support.empty())
    throw InvalidInputError("erc_constant: empty support");
  const Matrix phi_s = dict.sub(support);
  Eigen::ColPivHouseholderQR<Matrix> qr(phi_s);
  require_full_rank(qr, support);
  const Support complement = support.complement(dict.cols());
  if (complement.empty()) return 0.0;
  const Matrix g = qr.solve(dict.sub(complement));  // Phi_S^+ Phi_Sbar
  return matrix_one_norm(g);
}

double exact_ric(const Dictionary& dict, int s, std::uint64_t budget) {
  const Index m = dict.rows();
  const Index n = dict.cols();
  if (s < 1 || s > std::min(m, n))
    throw InvalidInputError("exact_ric: order must lie in [1, min(m, n)]");
  const std::uint64_t count = binomial_capped(n, s, budget);
  if (count > budget)
    throw BudgetError("exact_ric: C(" + std::to_string(n) + ", " +
                      std::to_string(s) + ") exceeds the enumeration budget " +
                      std::to_string(budget) +
                      "; use the coherence bound instead");
  if (s == 1) return 0.0;  // unit-norm atoms give 1x1 Grams equal to 1

  std::vector<Index> idx(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) idx[static_cast<std::size_t>(i)] = i;
  const Matrix gram = dict.entries().transpose() * dict.entries();

  double lambda_max = 1.0, lambda_min = 1.0;
  Matrix sub(s, s);
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  for (;;) {
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b)
        sub(a, b) = gram(idx[static_cast<std::size_t>(a)],
                         idx[static_cast<std::size_t>(b)]);
    eig.compute(sub, Eigen::EigenvaluesOnly);
    lambda_max = std::max(lambda_max, eig.eigenvalues().maxCoeff());
    lambda_min = std::min(lambda_min, eig.eigenvalues().minCoeff());

    // next size-s combination in lexicographic order
    int pos = s - 1;
    while (pos >= 0 &&
           idx[static_cast<std::size_t>(pos)] == n - s + pos)
      --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int t = pos + 1; t < s; ++t)
      idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
  return std::max(lambda_max - 1.0, 1.0 - lambda_min);
}

BoundValue ric_coherence_bound(const Dictionary& dict, int s, bool use_babel) {
  if (s < 1) throw InvalidInputError("ric_coherence_bound: order must be >= 1");
  if (s == 1) return {0.0, false};
  const double value = use_babel
                           ? babel(dict, s - 1)
                           : static_cast<double>(s - 1) * coherence(dict);
  return {value, value >= 1.0};
}

Index spark_lower_bound(const Dictionary& dict) {
  const Index m = dict.rows();
  if (dict.cols() < 2) return m + 1;
  const double mu = coherence(dict);
  if (mu == 0.0) return m + 1;
  // largest s with (s-1)*mu < 1, strict
  Index s = static_cast<Index>(std::floor(1.0 / mu)) + 1;
  while (s > 1 && static_cast<double>(s - 1) * mu >= 1.0) --s;
  return std::min(s, m + 1);
}

SelectionRatio greedy_selection_ratio(const Dictionary& dict,
                                      const Support& support,
                                      const Matrix& residual,
                                      const WeightVector& weights) {
  support.require_within(dict.cols());
  if (support.empty() || support.size() >= dict.cols())
    throw InvalidInputError(
        "greedy_selection_ratio: support must be a nonempty proper subset");
  if (residual.rows() != dict.rows())
    throw InvalidInputError("greedy_selection_ratio: residual row count "
                            "mismatch");
  if (weights.size() != residual.cols())
    throw InvalidInputError("greedy_selection_ratio: weight count mismatch");

  const Support complement = support.complement(dict.cols());
  const Matrix q = weights.q.asDiagonal();
  const double num = matrix_inf_norm(dict.sub(complement).transpose() * residual * q);
  const double den = matrix_inf_norm(dict.sub(support).transpose() * residual * q);
  if (den == 0.0)
    return {std::numeric_limits<double>::infinity(), true};
  return {num / den, false};
}

DictMetricsReport compute_dict_metrics(const Dictionary& dict,
                                       const std::vector<int>& babel_ps,
                                       const std::optional<Support>& support,
                                       std::optional<int> ric_s,
                                       bool use_babel) {
  DictMetricsReport report;
  report.coherence = coherence(dict);
  for (int p : babel_ps) report.babel[p] = babel(dict, p);
  if (support) report.erc_norm = erc_constant(dict, *support);
  if (ric_s) report.ric_bound = ric_coherence_bound(dict, *ric_s, use_babel);
  return report;
}

}  // namespace sompns
