#pragma once

#include "sompns/bounds.hpp"
#include "sompns/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sompns {

// ---------------------------------------------------------------------------
// Campaign configuration. Exactly these keys are accepted in config files
// (flat TOML-style `key = value` lines or a JSON object); unknown keys are
// rejected.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string dict_source;  // "gaussian:m:n:seed", "rademacher:m:n:seed" or a file path
  int sign_pattern = 1;     // 1: shared signs, 2: independent signs
  int support_size = 0;
  double mu_x = 0.0;
  int k = 0;  // number of measurement vectors
  std::vector<double> theta_q_grid;      // degrees, in (0, 90)
  std::vector<double> theta_sigma_grid;  // degrees, in (0, 90)
  long long trials = 0;
  std::uint64_t seed = 0;
  int precision = 32;  // 32 or 64
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Normalized key=value rendering; hashed into every output file.
std::string canonical_config_string(const ExperimentConfig& config);

/// Resolve a dict_source: generator spec or dictionary file path.
Dictionary load_dict_source(const std::string& source);

// ---------------------------------------------------------------------------
// Campaign results
// ---------------------------------------------------------------------------

struct CellResult {
  double theta_q_deg = 0.0;
  double theta_sigma_deg = 0.0;
  long long trials = 0;
  long long successes = 0;
  double failure_rate() const {
    return 1.0 - static_cast<double>(successes) / static_cast<double>(trials);
  }
};

struct ExperimentSummary {
  std::vector<CellResult> cells;  // theta_sigma outer, theta_q inner, ascending
  std::uint64_t seed = 0;
  std::string dict_sha;
  std::string config_sha;
};

struct KSweepPoint {
  int k = 0;
  long long trials = 0;
  long long failures = 0;
  double failure_rate() const {
    return static_cast<double>(failures) / static_cast<double>(trials);
  }
};

struct KSweepResult {
  std::vector<KSweepPoint> points;
  std::uint64_t seed = 0;
  std::string dict_sha;
  std::string config_sha;
};

// ---------------------------------------------------------------------------
// Operations. Every trial draws a fresh uniform support, fresh signs and
// fresh noise from a seed mixed out of (master seed, cell index, trial
// index), so results do not depend on worker count or scheduling. A trial
// succeeds only when the selected set equals the true support exactly.
// ---------------------------------------------------------------------------

/// Deterministic trial block shared by the sweeps: returns the success count.
long long run_cell(const Dictionary& dict, const ExperimentConfig& config,
                   const Vector& sigma, const Vector& weights,
                   std::uint64_t cell_seed, long long trials, int threads);

/// Full (theta_q, theta_sigma) grid campaign. Requires K = 2.
ExperimentSummary run_angle_sweep(const ExperimentConfig& config,
                                  int threads = 0);

/// Equal-weight sweep over measurement-vector counts with
/// sigma = (sqrt(2)/2) * ones(K).
KSweepResult run_k_sweep(const ExperimentConfig& config,
                         const std::vector<int>& k_list, int threads = 0);

/// Mean over fresh cases of 20 log10(||Y||_F / ||Y - Phi X||_F), in dB.
/// sigma is taken from the first angle of theta_sigma_grid.
double estimate_snr_in(const ExperimentConfig& config, long long cases);

/// Least-squares fit of log(failure rate) against K over the points with at
/// least `min_failures` failures. Needs three such points.
struct ConjectureFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rate = 0.0;       // -slope, the per-K exponential decay
  double prefactor = 0.0;  // exp(intercept) = n_bar * alpha * s
  int points_used = 0;

  /// Arbitrary split of the fitted prefactor; only the product is identified.
  ConjecturedBoundParams to_params(int s) const {
    return {prefactor / static_cast<double>(s), 1.0, true};
  }
};

ConjectureFit fit_conjecture_params(const std::vector<KSweepPoint>& points,
                                    long long min_failures = 1);

/// Bisection on mu_x until the (45 deg, 45 deg) cell hits the target success
/// probability. A stand-in for the normalization recipe; the evaluation seed
/// is fixed so the calibration is deterministic.
double calibrate_mu_x(const ExperimentConfig& config, double target_success,
                      long long trials_per_eval, double tol, int threads = 0);

// ---------------------------------------------------------------------------
// Output rendering. Files start with
//   # seed=<seed> dict_sha=<checksum> config_sha=<checksum>
// followed by a header line and one row per cell, in deterministic order.
// ---------------------------------------------------------------------------

std::string angle_sweep_csv(const ExperimentSummary& summary);
std::string k_sweep_csv(const KSweepResult& result);

}  // namespace sompns
