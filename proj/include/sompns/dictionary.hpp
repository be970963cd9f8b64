#pragma once

#include "sompns/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace sompns {

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Independent standard normal entries, each column rescaled to unit norm.
/// Deterministic given the seed.
Dictionary generate_gaussian_dictionary(Index m, Index n, std::uint64_t seed);

/// Entries +-1/sqrt(m) with equal probability; columns have unit norm by
/// construction. Deterministic given the seed.
Dictionary generate_rademacher_dictionary(Index m, Index n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Mixed norms (max row / max column absolute sums, computed directly)
// ---------------------------------------------------------------------------

double matrix_inf_norm(const Matrix& a);  // max row absolute sum
double matrix_one_norm(const Matrix& a);  // max column absolute sum

// ---------------------------------------------------------------------------
// Conditioning metrics
// ---------------------------------------------------------------------------

/// Coherence: max_{i != j} |<phi_i, phi_j>|. Requires n >= 2.
double coherence(const Dictionary& dict);

/// Babel function mu_1(p): worst cumulative coherence of p atoms against one
/// outside atom. Exact via per-atom top-p partial sums. Requires 1 <= p <= n-1.
double babel(const Dictionary& dict, int p);

/// ||Phi_S^+ Phi_Sbar||_1, the max column absolute sum of the pseudoinverse
/// product, computed through a column-pivoted QR factorization.
/// Throws RankDeficiencyError when Phi_S is rank deficient (smallest revealed
/// diagonal below 1e-8 of the largest).
double erc_constant(const Dictionary& dict, const Support& support);

/// Exact restricted isometry constant of order s by support enumeration.
/// Throws BudgetError when C(n, s) exceeds the budget.
double exact_ric(const Dictionary& dict, int s, std::uint64_t budget = 200000);

/// A value together with a vacuity flag. Vacuity is a reported state, never
/// an error: callers comparing bounds against empirical rates need it.
struct BoundValue {
  double value = 0.0;
  bool vacuous = false;
};

/// Coherence upper bound on the RIC: mu_1(s-1) when use_babel, else (s-1)*mu.
/// Flagged vacuous when the bound reaches 1.
BoundValue ric_coherence_bound(const Dictionary& dict, int s,
                               bool use_babel = false);

/// Largest s with (s-1)*mu < 1, capped at m+1; a certified lower bound on the
/// spark. Orthonormal columns (mu = 0) give m+1, meaning "no dependent
/// subset".
Index spark_lower_bound(const Dictionary& dict);

struct SelectionRatio {
  double value = 0.0;
  bool degenerate = false;  // in-support correlation vanished
};

/// Greedy selection ratio ||Phi_Sbar^T R Q||_inf / ||Phi_S^T R Q||_inf.
/// A value < 1 means the next weighted selection lands inside the support.
SelectionRatio greedy_selection_ratio(const Dictionary& dict,
                                      const Support& support,
                                      const Matrix& residual,
                                      const WeightVector& weights);

// ---------------------------------------------------------------------------
// Aggregate report (CLI surface)
// ---------------------------------------------------------------------------

struct DictMetricsReport {
  double coherence = 0.0;
  std::map<int, double> babel;  // p -> mu_1(p)
  std::optional<double> erc_norm;
  std::optional<BoundValue> ric_bound;
};

DictMetricsReport compute_dict_metrics(const Dictionary& dict,
                                       const std::vector<int>& babel_ps,
                                       const std::optional<Support>& support,
                                       std::optional<int> ric_s,
                                       bool use_babel);

}  // namespace sompns
