#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sompns {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

template <class Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Errors. Exit-code mapping at the CLI boundary: domain errors -> 1,
// usage/config errors -> 2.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInputError : Error {
  using Error::Error;
};

/// A requested or accumulated atom subset is numerically rank deficient.
/// Carries the partial selection (in selection order) when raised mid-run.
struct RankDeficiencyError : Error {
  explicit RankDeficiencyError(const std::string& msg,
                               std::vector<Index> partial = {})
      : Error(msg), selected_so_far(std::move(partial)) {}
  std::vector<Index> selected_so_far;
};

/// Exhaustive enumeration would exceed the configured budget.
struct BudgetError : Error {
  using Error::Error;
};

/// Regression requested on insufficient data.
struct FitError : Error {
  using Error::Error;
};

/// Malformed configuration or data file.
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Support: an ascending set of atom indices. Indices are 0-based in the
// library; every external surface (CLI flags, files, error text) is 1-based.
// ---------------------------------------------------------------------------

class Support {
 public:
  Support() = default;

  explicit Support(std::vector<Index> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 0)
        throw InvalidInputError("support: negative atom index");
      if (i > 0 && indices_[i] == indices_[i - 1])
        throw InvalidInputError("support: duplicate atom index " +
                                std::to_string(indices_[i] + 1));
    }
  }

  static Support first_k(Index k) {
    std::vector<Index> idx(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    return Support(std::move(idx));
  }

  const std::vector<Index>& indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }

  bool contains(Index j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
  }

  void require_within(Index n) const {
    if (!indices_.empty() && indices_.back() >= n)
      throw InvalidInputError("support: atom index " +
                              std::to_string(indices_.back() + 1) +
                              " exceeds atom count " + std::to_string(n));
  }

  Support complement(Index n) const {
    require_within(n);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n) - indices_.size());
    for (Index j = 0; j < n; ++j)
      if (!contains(j)) out.push_back(j);
    return Support(std::move(out));
  }

  /// 1-based rendering for messages and CLI output.
  std::string to_string_1based() const {
    std::string s = "{";
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(indices_[i] + 1);
    }
    s += "}";
    return s;
  }

  friend bool operator==(const Support& a, const Support& b) {
    return a.indices_ == b.indices_;
  }

 private:
  std::vector<Index> indices_;
};

// ---------------------------------------------------------------------------
// Per-measurement-vector weights q >= 0, not all zero. For K = 2 the polar
// angle view theta_q = arctan(q2/q1) is exposed in degrees.
// ---------------------------------------------------------------------------

struct WeightVector {
  Vector q;

  explicit WeightVector(Vector weights) : q(std::move(weights)) {
    if (q.size() < 1) throw InvalidInputError("weights: empty vector");
    if (!q.allFinite()) throw InvalidInputError("weights: non-finite entry");
    if ((q.array() < 0.0).any())
      throw InvalidInputError("weights: negative entry");
    if ((q.array() == 0.0).all())
      throw InvalidInputError("weights: all entries zero");
  }

  static WeightVector ones(Index k) { return WeightVector(Vector::Ones(k)); }

  static WeightVector from_angle_deg(double theta_q_deg) {
    const double t = deg_to_rad(theta_q_deg);
    Vector q(2);
    q << std::cos(t), std::sin(t);
    return WeightVector(q);
  }

  Index size() const { return q.size(); }

  double theta_q_deg() const {
    if (q.size() != 2)
      throw InvalidInputError("theta_q is defined only for K = 2");
    return rad_to_deg(std::atan2(q(1), q(0)));
  }
};

// ---------------------------------------------------------------------------
// Noise standard deviations, one per measurement vector, all > 0.
// ---------------------------------------------------------------------------

struct NoiseSpec {
  Vector sigma;

  explicit NoiseSpec(Vector s) : sigma(std::move(s)) {
    if (sigma.size() < 1) throw InvalidInputError("noise: empty sigma vector");
    if (!sigma.allFinite())
      throw InvalidInputError("noise: non-finite sigma entry");
    if ((sigma.array() <= 0.0).any())
      throw InvalidInputError("noise: sigma entries must be positive");
  }

  static NoiseSpec from_angle_deg(double theta_sigma_deg) {
    const double t = deg_to_rad(theta_sigma_deg);
    Vector s(2);
    s << std::cos(t), std::sin(t);
    return NoiseSpec(s);
  }

  Index size() const { return sigma.size(); }

  double theta_sigma_deg() const {
    if (sigma.size() != 2)
      throw InvalidInputError("theta_sigma is defined only for K = 2");
    return rad_to_deg(std::atan2(sigma(1), sigma(0)));
  }
};

// ---------------------------------------------------------------------------
// Dictionary: m x n matrix of unit-norm atoms. Immutable after construction,
// safe to share across concurrent trial workers.
// ---------------------------------------------------------------------------

class Dictionary {
 public:
  static constexpr double kColumnNormTol = 1e-6;

  explicit Dictionary(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
      throw InvalidInputError("dictionary: dimensions must be at least 1x1");
    if (!entries_.allFinite())
      throw InvalidInputError("dictionary: non-finite entry");
    for (Index j = 0; j < entries_.cols(); ++j) {
      const double norm = entries_.col(j).norm();
      if (std::abs(norm - 1.0) > kColumnNormTol)
        throw InvalidInputError("dictionary: column " + std::to_string(j + 1) +
                                " has norm " + std::to_string(norm) +
                                ", expected 1 within 1e-6");
    }
  }

  const Matrix& entries() const { return entries_; }
  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }

  /// Column submatrix Phi_S, columns in the support's ascending order.
  Matrix sub(const Support& s) const {
    s.require_within(cols());
    Matrix out(rows(), s.size());
    Index c = 0;
    for (Index j : s.indices()) out.col(c++) = entries_.col(j);
    return out;
  }

 private:
  Matrix entries_;
};

}  // namespace sompns
