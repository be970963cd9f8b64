#pragma once

#include "sompns/types.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sompns {

/// Per-run record: selection order, winning metric per iteration, residual
/// Frobenius norm after each iteration, and the final least-squares
/// coefficients (rows follow the selection order).
template <class Scalar>
struct RecoveryTrace {
  std::vector<Index> selected;
  std::vector<Scalar> metric_values;
  std::vector<Scalar> residual_norms;
  MatrixT<Scalar> coefficients;

  Support selected_set() const {
    return Support(std::vector<Index>(selected.begin(), selected.end()));
  }
};

namespace detail {

template <class Scalar>
Scalar rank_tolerance() {
  return std::max(Scalar(1e-8), Scalar(64) * std::numeric_limits<Scalar>::epsilon());
}

/// argmax_j sum_k |C(j,k)| q_k with smallest-index tie-breaking; already
/// selected atoms are skipped when a mask is supplied. Their metric is ~0 by
/// orthogonality, but floating noise must never reselect them.
template <class Scalar>
std::pair<Index, Scalar> weighted_argmax(const MatrixT<Scalar>& correlations,
                                         const VectorT<Scalar>& weights,
                                         const std::vector<char>* skip) {
  const VectorT<Scalar> metric = correlations.cwiseAbs() * weights;
  Index best = -1;
  Scalar best_value = Scalar(0);
  for (Index j = 0; j < metric.size(); ++j) {
    if (skip && (*skip)[static_cast<std::size_t>(j)]) continue;
    if (best < 0 || metric(j) > best_value) {
      best = j;
      best_value = metric(j);
    }
  }
  return {best, best_value};
}

}  // namespace detail

/// Weighted simultaneous matching pursuit, first form: at each iteration the
/// atom maximizing sum_k |<r_k, phi_j>| q_k joins the support, then every
/// measurement vector is re-projected onto the orthogonal complement of the
/// selected atoms. Runs exactly `iterations` iterations.
///
/// The projector is maintained as an incremental orthonormal basis (modified
/// Gram-Schmidt with reorthogonalization); the contract is the orthogonality
/// invariant max_{j selected} sum_k |<r_k, phi_j>| <= 1e-5 * ||Y||_F.
template <class Scalar>
RecoveryTrace<Scalar> somp_ns(const MatrixT<Scalar>& phi,
                              const MatrixT<Scalar>& y,
                              const VectorT<Scalar>& weights,
                              Index iterations) {
  const Index m = phi.rows();
  const Index n = phi.cols();
  const Index k = y.cols();

  if (y.rows() != m)
    throw InvalidInputError("somp_ns: signal has " + std::to_string(y.rows()) +
                            " rows, dictionary has " + std::to_string(m));
  if (weights.size() != k)
    throw InvalidInputError("somp_ns: weight count does not match measurement "
                            "vector count");
  if (!y.allFinite()) throw InvalidInputError("somp_ns: non-finite signal");
  if (!weights.allFinite() || (weights.array() < Scalar(0)).any() ||
      (weights.array() == Scalar(0)).all())
    throw InvalidInputError("somp_ns: weights must be nonnegative, not all "
                            "zero");
  if (iterations < 1 || iterations > std::min(m, n))
    throw InvalidInputError("somp_ns: iteration count must lie in [1, min(m, "
                            "n)]");

  RecoveryTrace<Scalar> trace;
  trace.selected.reserve(static_cast<std::size_t>(iterations));
  trace.metric_values.reserve(static_cast<std::size_t>(iterations));
  trace.residual_norms.reserve(static_cast<std::size_t>(iterations));

  MatrixT<Scalar> residual = y;
  MatrixT<Scalar> basis(m, iterations);        // orthonormal columns
  MatrixT<Scalar> rfac(iterations, iterations);  // upper triangular factor
  rfac.setZero();
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  Scalar max_diag = Scalar(0);
  const Scalar tol = detail::rank_tolerance<Scalar>();

  for (Index t = 0; t < iterations; ++t) {
    const MatrixT<Scalar> correlations = phi.transpose() * residual;
    auto [j, metric] = detail::weighted_argmax<Scalar>(correlations, weights, &used);

    // Orthogonalize the new atom against the current basis (two passes).
    VectorT<Scalar> v = phi.col(j);
    VectorT<Scalar> h = VectorT<Scalar>::Zero(t);
    for (int pass = 0; pass < 2; ++pass) {
      if (t > 0) {
        const VectorT<Scalar> proj = basis.leftCols(t).transpose() * v;
        v -= basis.leftCols(t) * proj;
        h += proj;
      }
    }
    const Scalar diag = v.norm();
    max_diag = std::max(max_diag, diag);
    if (diag <= tol * std::max(max_diag, Scalar(1))) {
      // the partial trace covers the completed iterations only
      throw RankDeficiencyError(
          "somp_ns: atom " + std::to_string(j + 1) +
              " is linearly dependent on the atoms selected so far",
          trace.selected);
    }
    used[static_cast<std::size_t>(j)] = 1;
    trace.selected.push_back(j);
    trace.metric_values.push_back(metric);
    basis.col(t) = v / diag;
    if (t > 0) rfac.block(0, t, t, 1) = h;
    rfac(t, t) = diag;

    // Residual already lies in the complement of the previous basis, so only
    // the newly added direction has to be removed.
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> w =
        basis.col(t).transpose() * residual;
    residual.noalias() -= basis.col(t) * w;
    trace.residual_norms.push_back(residual.norm());
  }

  // Final least-squares coefficients on the selected atoms.
  const MatrixT<Scalar> rhs = basis.leftCols(iterations).transpose() * y;
  trace.coefficients = rfac.topLeftCorner(iterations, iterations)
                           .template triangularView<Eigen::Upper>()
                           .solve(rhs);
  return trace;
}

/// Unweighted variant: all weights equal to one (identical code path, so the
/// traces agree bit for bit).
template <class Scalar>
RecoveryTrace<Scalar> somp(const MatrixT<Scalar>& phi, const MatrixT<Scalar>& y,
                           Index iterations) {
  return somp_ns<Scalar>(phi, y, VectorT<Scalar>::Ones(y.cols()), iterations);
}

/// Second form: scale the measurement columns by the weights up front, then
/// run the unweighted algorithm. Selects the same atoms as the first form;
/// its residuals carry the column scaling.
template <class Scalar>
RecoveryTrace<Scalar> somp_ns_prescaled(const MatrixT<Scalar>& phi,
                                        const MatrixT<Scalar>& y,
                                        const VectorT<Scalar>& weights,
                                        Index iterations) {
  if (weights.size() != y.cols())
    throw InvalidInputError("somp_ns_prescaled: weight count does not match "
                            "measurement vector count");
  const MatrixT<Scalar> scaled = y * weights.asDiagonal();
  return somp<Scalar>(phi, scaled, iterations);
}

/// One selection step on an explicit residual: the winning atom index and its
/// metric value. Total ties resolve to the smallest index.
template <class Scalar>
std::pair<Index, Scalar> select_atom(const MatrixT<Scalar>& phi,
                                     const MatrixT<Scalar>& residual,
                                     const VectorT<Scalar>& weights) {
  if (residual.rows() != phi.rows())
    throw InvalidInputError("select_atom: residual row count mismatch");
  if (weights.size() != residual.cols())
    throw InvalidInputError("select_atom: weight count mismatch");
  if (!residual.allFinite())
    throw InvalidInputError("select_atom: non-finite residual");
  const MatrixT<Scalar> correlations = phi.transpose() * residual;
  return detail::weighted_argmax<Scalar>(correlations, weights, nullptr);
}

// Dictionary-facing conveniences (double precision).

RecoveryTrace<double> somp_ns(const Dictionary& dict, const Matrix& y,
                              const WeightVector& weights, Index iterations);
RecoveryTrace<double> somp(const Dictionary& dict, const Matrix& y,
                           Index iterations);
RecoveryTrace<double> somp_ns_prescaled(const Dictionary& dict, const Matrix& y,
                                        const WeightVector& weights,
                                        Index iterations);
std::pair<Index, double> select_atom(const Dictionary& dict,
                                     const Matrix& residual,
                                     const WeightVector& weights);

/// Y - Phi_S Phi_S^+ Y through a Householder QR factorization. The result is
/// orthogonal to every selected atom within 1e-5 relative tolerance.
Matrix project_residual(const Dictionary& dict, const Support& support,
                        const Matrix& y);

}  // namespace sompns
