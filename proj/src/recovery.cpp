#include "sompns/recovery.hpp"

#include <Eigen/QR>

namespace sompns {

RecoveryTrace<double> somp_ns(const Dictionary& dict, const Matrix& y,
                              const WeightVector& weights, Index iterations) {
  return somp_ns<double>(dict.entries(), y, weights.q, iterations);
}

RecoveryTrace<double> somp(const Dictionary& dict, const Matrix& y,
                           Index iterations) {
  return somp<double>(dict.entries(), y, iterations);
}

RecoveryTrace<double> somp_ns_prescaled(const Dictionary& dict, const Matrix& y,
                                        const WeightVector& weights,
                                        Index iterations) {
  return somp_ns_prescaled<double>(dict.entries(), y, weights.q, iterations);
}

std::pair<Index, double> select_atom(const Dictionary& dict,
                                     const Matrix& residual,
                                     const WeightVector& weights) {
  return select_atom<double>(dict.entries(), residual, weights.q);
}

Matrix project_residual(const Dictionary& dict, const Support& support,
                        const Matrix& y) {
  support.require_within(dict.cols());
  if (support.empty())
    throw InvalidInputError("project_residual: empty support");
  if (y.rows() != dict.rows())
    throw InvalidInputError("project_residual: signal row count mismatch");

  const Matrix phi_s = dict.sub(support);
  Eigen::ColPivHouseholderQR<Matrix> pivoted(phi_s);
  {
    const Index r = std::min(phi_s.rows(), phi_s.cols());
    double max_diag = 0.0, min_diag = 0.0;
    for (Index i = 0; i < r; ++i) {
      const double d = std::abs(pivoted.matrixQR()(i, i));
      max_diag = (i == 0) ? d : std::max(max_diag, d);
      min_diag = (i == 0) ? d : std::min(min_diag, d);
    }
    if (phi_s.cols() > phi_s.rows() || min_diag <= 1e-8 * max_diag)
      throw RankDeficiencyError("project_residual: rank-deficient atom subset " +
                                support.to_string_1based());
  }
  Eigen::HouseholderQR<Matrix> qr(phi_s);
  Matrix thin_q = Matrix::Identity(dict.rows(), support.size());
  thin_q = qr.householderQ() * thin_q;
  return y - thin_q * (thin_q.transpose() * y);
}

}  // namespace sompns
