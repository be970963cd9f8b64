#include "sompns/experiments.hpp"

#include "sompns/matrix_io.hpp"
#include "sompns/recovery.hpp"
#include "sompns/rng.hpp"
#include "sompns/signal_model.hpp"
#include "sompns/wilson.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

namespace sompns {

namespace {

// Substream salts for the per-trial seed chain.
constexpr std::uint64_t kSupportStream = 1;
constexpr std::uint64_t kSignalStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
// Reserved cell ids outside the grid range.
constexpr std::uint64_t kCalibrationCell = 0x00C0FFEEULL;
constexpr std::uint64_t kSnrCell = 0x005EED00ULL;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& key) {
  std::string body = trim(text);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']')
    throw ConfigError("config: '" + key + "' must be a [..] list");
  body = body.substr(1, body.size() - 2);
  std::vector<double> out;
  std::stringstream ss(body);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty())
      throw ConfigError("config: empty element in '" + key + "'");
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("config: bad number '" + cell + "' in '" + key + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: '" + key + "' must be nonempty");
  return out;
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

long long parse_integer(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(trim(text), &pos);
    if (pos != trim(text).size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' must be an integer, got '" +
                      trim(text) + "'");
  }
}

double parse_double(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(trim(text), &pos);
    if (pos != trim(text).size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' must be a number, got '" +
                      trim(text) + "'");
  }
}

void apply_key(ExperimentConfig& config, const std::string& key,
               const std::string& value, std::vector<std::string>& seen) {
  if (std::find(seen.begin(), seen.end(), key) != seen.end())
    throw ConfigError("config: duplicate key '" + key + "'");
  seen.push_back(key);
  if (key == "dict_source") {
    config.dict_source = strip_quotes(trim(value));
  } else if (key == "sign_pattern") {
    config.sign_pattern = static_cast<int>(parse_integer(value, key));
  } else if (key == "support_size") {
    config.support_size = static_cast<int>(parse_integer(value, key));
  } else if (key == "mu_x") {
    config.mu_x = parse_double(value, key);
  } else if (key == "K") {
    config.k = static_cast<int>(parse_integer(value, key));
  } else if (key == "theta_q_grid") {
    config.theta_q_grid = parse_number_list(value, key);
  } else if (key == "theta_sigma_grid") {
    config.theta_sigma_grid = parse_number_list(value, key);
  } else if (key == "trials") {
    config.trials = parse_integer(value, key);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_integer(value, key));
  } else if (key == "precision") {
    config.precision = static_cast<int>(parse_integer(value, key));
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void validate_config(const ExperimentConfig& config,
                     const std::vector<std::string>& seen) {
  static const char* required[] = {"dict_source", "sign_pattern",
                                   "support_size", "mu_x", "K",
                                   "theta_q_grid", "theta_sigma_grid",
                                   "trials", "seed", "precision"};
  for (const char* key : required)
    if (std::find(seen.begin(), seen.end(), key) == seen.end())
      throw ConfigError(std::string("config: missing key '") + key + "'");

  if (config.sign_pattern != 1 && config.sign_pattern != 2)
    throw ConfigError("config: sign_pattern must be 1 or 2");
  if (config.support_size < 1)
    throw ConfigError("config: support_size must be >= 1");
  if (config.mu_x <= 0.0) throw ConfigError("config: mu_x must be positive");
  if (config.k < 1) throw ConfigError("config: K must be >= 1");
  if (config.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (config.precision != 32 && config.precision != 64)
    throw ConfigError("config: precision must be 32 or 64");
  for (double a : config.theta_q_grid)
    if (!(a > 0.0 && a < 90.0))
      throw ConfigError("config: theta_q_grid angles must lie in (0, 90)");
  for (double a : config.theta_sigma_grid)
    if (!(a > 0.0 && a < 90.0))
      throw ConfigError("config: theta_sigma_grid angles must lie in (0, 90)");
  if (config.dict_source.empty())
    throw ConfigError("config: dict_source must not be empty");
}

ExperimentConfig parse_json_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
  ExperimentConfig config;
  std::vector<std::string> seen;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    std::string rendered;
    if (it->is_string())
      rendered = it->get<std::string>();
    else
      rendered = it->dump();
    apply_key(config, key, rendered, seen);
  }
  validate_config(config, seen);
  return config;
}

ExperimentConfig parse_toml_config(const std::string& text) {
  ExperimentConfig config;
  std::vector<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    // strip comments outside quotes/brackets
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' || line[i] == '\'') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not 'key = value'");
    apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
              seen);
  }
  validate_config(config, seen);
  return config;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// -----------------------------------------------------------------------
// Trial execution
// -----------------------------------------------------------------------

/// One Monte Carlo case: fresh support, signs and noise from the trial seed.
/// Success means the selected set equals the true support exactly; a
/// rank-deficiency abort counts as failure.
template <class Scalar>
bool run_trial(const MatrixT<Scalar>& phi, int support_size, double mu_x,
               int sign_pattern, int k, const Vector& sigma,
               const VectorT<Scalar>& weights, std::uint64_t trial_seed) {
  const Index m = phi.rows();
  const Index n = phi.cols();

  Rng support_rng(derive_seed(trial_seed, kSupportStream));
  const Support support = sample_support(n, support_size, support_rng);

  Rng signal_rng(derive_seed(trial_seed, kSignalStream));
  const Matrix x_rows =
      sparse_signal_rows(support_size, mu_x, sign_pattern, k, signal_rng);

  Rng noise_rng(derive_seed(trial_seed, kNoiseStream));
  Matrix y = noise_matrix(m, sigma, noise_rng);
  Index r = 0;
  for (Index j : support.indices()) {
    // sparse product: only the support columns contribute
    y.noalias() += phi.col(j).template cast<double>() * x_rows.row(r++);
  }

  try {
    const RecoveryTrace<Scalar> trace = somp_ns<Scalar>(
        phi, y.cast<Scalar>(), weights, support_size);
    return trace.selected_set() == support;
  } catch (const RankDeficiencyError&) {
    return false;
  }
}

template <class Scalar>
long long run_cell_typed(const MatrixT<Scalar>& phi,
                         const ExperimentConfig& config, const Vector& sigma,
                         const VectorT<Scalar>& weights,
                         std::uint64_t cell_seed, long long trials,
                         int threads) {
  if (threads < 1)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(
      std::min<long long>(threads, std::max<long long>(1, trials)));

  auto worker = [&](long long lo, long long hi, long long& successes) {
    long long count = 0;
    for (long long t = lo; t < hi; ++t) {
      if (run_trial<Scalar>(phi, config.support_size, config.mu_x,
                            config.sign_pattern, config.k, sigma, weights,
                            derive_seed(cell_seed,
                                        static_cast<std::uint64_t>(t))))
        ++count;
    }
    successes = count;
  };

  if (threads == 1) {
    long long successes = 0;
    worker(0, trials, successes);
    return successes;
  }

  std::vector<long long> partial(static_cast<std::size_t>(threads), 0);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const long long chunk = (trials + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const long long lo = static_cast<long long>(w) * chunk;
    const long long hi = std::min(trials, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(worker, lo, hi, std::ref(partial[static_cast<std::size_t>(w)]));
  }
  for (auto& th : pool) th.join();
  long long total = 0;
  for (long long c : partial) total += c;  // integer merge, order-free
  return total;
}

std::vector<double> sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void require_runnable(const Dictionary& dict, const ExperimentConfig& config) {
  if (config.support_size > std::min(dict.rows(), dict.cols()))
    throw ConfigError("config: support_size exceeds min(m, n) of the "
                      "dictionary");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return parse_json_config(text);
    break;
  }
  return parse_toml_config(text);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

std::string canonical_config_string(const ExperimentConfig& config) {
  std::string out;
  out += "K=" + std::to_string(config.k) + "\n";
  out += "dict_source=" + config.dict_source + "\n";
  out += "mu_x=" + format_full(config.mu_x) + "\n";
  out += "precision=" + std::to_string(config.precision) + "\n";
  out += "seed=" + std::to_string(config.seed) + "\n";
  out += "sign_pattern=" + std::to_string(config.sign_pattern) + "\n";
  out += "support_size=" + std::to_string(config.support_size) + "\n";
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += format_full(v[i]);
    }
    return s;
  };
  out += "theta_q_grid=" + join(config.theta_q_grid) + "\n";
  out += "theta_sigma_grid=" + join(config.theta_sigma_grid) + "\n";
  out += "trials=" + std::to_string(config.trials) + "\n";
  return out;
}

Dictionary load_dict_source(const std::string& source) {
  const auto parse_gen = [&](const std::string& prefix)
      -> std::optional<std::array<long long, 3>> {
    if (source.rfind(prefix + ":", 0) != 0) return std::nullopt;
    std::array<long long, 3> vals{};
    std::string rest = source.substr(prefix.size() + 1);
    std::stringstream ss(rest);
    std::string cell;
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(ss, cell, ':'))
        throw ConfigError("dict_source: expected '" + prefix +
                          ":m:n:seed', got '" + source + "'");
      try {
        vals[static_cast<std::size_t>(i)] = std::stoll(cell);
      } catch (const std::exception&) {
        throw ConfigError("dict_source: bad number '" + cell + "'");
      }
    }
    if (std::getline(ss, cell, ':'))
      throw ConfigError("dict_source: too many fields in '" + source + "'");
    return vals;
  };

  if (auto g = parse_gen("gaussian"))
    return generate_gaussian_dictionary((*g)[0], (*g)[1],
                                        static_cast<std::uint64_t>((*g)[2]));
  if (auto g = parse_gen("rademacher"))
    return generate_rademacher_dictionary((*g)[0], (*g)[1],
                                          static_cast<std::uint64_t>((*g)[2]));
  return load_dictionary(source);
}

long long run_cell(const Dictionary& dict, const ExperimentConfig& config,
                   const Vector& sigma, const Vector& weights,
                   std::uint64_t cell_seed, long long trials, int threads) {
  require_runnable(dict, config);
  if (sigma.size() != config.k || weights.size() != config.k)
    throw InvalidInputError("run_cell: sigma/weights must have K entries");
  if (config.precision == 32) {
    const Eigen::MatrixXf phi = dict.entries().cast<float>();
    return run_cell_typed<float>(phi, config, sigma, weights.cast<float>(),
                                 cell_seed, trials, threads);
  }
  return run_cell_typed<double>(dict.entries(), config, sigma, weights,
                                cell_seed, trials, threads);
}

ExperimentSummary run_angle_sweep(const ExperimentConfig& config,
                                  int threads) {
  if (config.k != 2)
    throw ConfigError("angle sweep: the polar parameterization requires K = 2");
  const Dictionary dict = load_dict_source(config.dict_source);
  require_runnable(dict, config);

  ExperimentSummary summary;
  summary.seed = config.seed;
  summary.dict_sha = sha256_hex(matrix_csv_string(dict.entries()));
  summary.config_sha = sha256_hex(canonical_config_string(config));

  const std::vector<double> q_grid = sorted_copy(config.theta_q_grid);
  const std::vector<double> s_grid = sorted_copy(config.theta_sigma_grid);

  for (std::size_t si = 0; si < s_grid.size(); ++si) {
    const double theta_sigma = s_grid[si];
    const Vector sigma = NoiseSpec::from_angle_deg(theta_sigma).sigma;
    for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
      const double theta_q = q_grid[qi];
      const Vector weights = WeightVector::from_angle_deg(theta_q).q;
      const std::uint64_t cell_id =
          static_cast<std::uint64_t>(si * q_grid.size() + qi);
      const long long successes =
          run_cell(dict, config, sigma, weights, derive_seed(config.seed, cell_id),
                   config.trials, threads);
      summary.cells.push_back(
          {theta_q, theta_sigma, config.trials, successes});
    }
  }
  return summary;
}

KSweepResult run_k_sweep(const ExperimentConfig& config,
                         const std::vector<int>& k_list, int threads) {
  if (k_list.empty()) throw ConfigError("k sweep: empty K list");
  for (int k : k_list)
    if (k < 1) throw ConfigError("k sweep: every K must be >= 1");
  const Dictionary dict = load_dict_source(config.dict_source);
  require_runnable(dict, config);

  KSweepResult result;
  result.seed = config.seed;
  result.dict_sha = sha256_hex(matrix_csv_string(dict.entries()));
  result.config_sha = sha256_hex(canonical_config_string(config));

  const double sigma_value = std::sqrt(2.0) / 2.0;
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    const int k = k_list[i];
    ExperimentConfig cell_config = config;
    cell_config.k = k;
    const Vector sigma = Vector::Constant(k, sigma_value);
    const Vector weights = Vector::Ones(k);
    const long long successes = run_cell(
        dict, cell_config, sigma, weights,
        derive_seed(config.seed, static_cast<std::uint64_t>(i)), config.trials,
        threads);
    result.points.push_back({k, config.trials, config.trials - successes});
  }
  return result;
}

double estimate_snr_in(const ExperimentConfig& config, long long cases) {
  if (cases < 1) throw InvalidInputError("snr estimate: cases must be >= 1");
  if (config.theta_sigma_grid.empty())
    throw ConfigError("snr estimate: theta_sigma_grid must be nonempty");
  const Dictionary dict = load_dict_source(config.dict_source);
  require_runnable(dict, config);
  const Vector sigma =
      NoiseSpec::from_angle_deg(config.theta_sigma_grid.front()).sigma;
  if (config.k != 2)
    throw ConfigError("snr estimate: the polar noise parameterization "
                      "requires K = 2");

  const Matrix& phi = dict.entries();
  const std::uint64_t base = derive_seed(config.seed, kSnrCell);
  double sum_db = 0.0;
  for (long long c = 0; c < cases; ++c) {
    const std::uint64_t trial_seed =
        derive_seed(base, static_cast<std::uint64_t>(c));
    Rng support_rng(derive_seed(trial_seed, kSupportStream));
    const Support support =
        sample_support(phi.cols(), config.support_size, support_rng);
    Rng signal_rng(derive_seed(trial_seed, kSignalStream));
    const Matrix x_rows = sparse_signal_rows(
        config.support_size, config.mu_x, config.sign_pattern, config.k,
        signal_rng);
    Rng noise_rng(derive_seed(trial_seed, kNoiseStream));

    Matrix signal = Matrix::Zero(phi.rows(), config.k);
    Index r = 0;
    for (Index j : support.indices())
      signal.noalias() += phi.col(j) * x_rows.row(r++);
    const Matrix y = signal + noise_matrix(phi.rows(), sigma, noise_rng);
    sum_db += 20.0 * std::log10(y.norm() / (y - signal).norm());
  }
  return sum_db / static_cast<double>(cases);
}

ConjectureFit fit_conjecture_params(const std::vector<KSweepPoint>& points,
                                    long long min_failures) {
  std::vector<double> xs, ys;
  for (const KSweepPoint& p : points) {
    if (p.failures >= std::max<long long>(1, min_failures)) {
      xs.push_back(static_cast<double>(p.k));
      ys.push_back(std::log(p.failure_rate()));
    }
  }
  if (xs.size() < 3)
    throw FitError("conjecture fit: needs at least 3 K values with nonzero "
                   "failure counts, got " + std::to_string(xs.size()));

  const double n = static_cast<double>(xs.size());
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw FitError("conjecture fit: degenerate K values");

  ConjectureFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points_used = static_cast<int>(n);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
  fit.rate = -fit.slope;
  fit.prefactor = std::exp(fit.intercept);
  return fit;
}

double calibrate_mu_x(const ExperimentConfig& config, double target_success,
                      long long trials_per_eval, double tol, int threads) {
  if (!(target_success > 0.0 && target_success < 1.0))
    throw InvalidInputError("calibrate: target must lie in (0, 1)");
  if (trials_per_eval < 1)
    throw InvalidInputError("calibrate: trials_per_eval must be >= 1");
  if (!(tol > 0.0)) throw InvalidInputError("calibrate: tol must be positive");
  const Dictionary dict = load_dict_source(config.dict_source);
  require_runnable(dict, config);
  if (config.k != 2)
    throw ConfigError("calibrate: the (45, 45) target cell requires K = 2");

  const Vector sigma = NoiseSpec::from_angle_deg(45.0).sigma;
  const Vector weights = WeightVector::from_angle_deg(45.0).q;
  const std::uint64_t cell_seed = derive_seed(config.seed, kCalibrationCell);

  // Same trial seeds at every evaluation, so the success curve seen by the
  // bisection is a fixed (near-monotone) function of mu_x.
  auto success_at = [&](double mu) {
    ExperimentConfig probe = config;
    probe.mu_x = mu;
    const long long s = run_cell(dict, probe, sigma, weights, cell_seed,
                                 trials_per_eval, threads);
    return static_cast<double>(s) / static_cast<double>(trials_per_eval);
  };

  double lo = 0.0, hi = 1.0;
  double rate = success_at(hi);
  int doublings = 0;
  while (rate < target_success && doublings < 40) {
    lo = hi;
    hi *= 2.0;
    rate = success_at(hi);
    ++doublings;
  }
  if (rate < target_success)
    throw FitError("calibrate: target success rate unreachable");

  for (int i = 0; i < 60 && (hi - lo) > 1e-4 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = success_at(mid);
    if (std::abs(r - target_success) <= tol) return mid;
    if (r < target_success)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::string angle_sweep_csv(const ExperimentSummary& summary) {
  std::string out = "# seed=" + std::to_string(summary.seed) +
                    " dict_sha=" + summary.dict_sha +
                    " config_sha=" + summary.config_sha + "\n";
  out +=
      "theta_q_deg,theta_sigma_deg,trials,successes,failure_rate,wilson_lo,"
      "wilson_hi\n";
  for (const CellResult& c : summary.cells) {
    const WilsonInterval w =
        wilson_interval(c.trials - c.successes, c.trials);
    out += format_full(c.theta_q_deg) + "," + format_full(c.theta_sigma_deg) +
           "," + std::to_string(c.trials) + "," + std::to_string(c.successes) +
           "," + format_full(c.failure_rate()) + "," + format_full(w.lo) +
           "," + format_full(w.hi) + "\n";
  }
  return out;
}

std::string k_sweep_csv(const KSweepResult& result) {
  std::string out = "# seed=" + std::to_string(result.seed) +
                    " dict_sha=" + result.dict_sha +
                    " config_sha=" + result.config_sha + "\n";
  out += "K,trials,failures,failure_rate,wilson_lo,wilson_hi\n";
  for (const KSweepPoint& p : result.points) {
    const WilsonInterval w = wilson_interval(p.failures, p.trials);
    out += std::to_string(p.k) + "," + std::to_string(p.trials) + "," +
           std::to_string(p.failures) + "," + format_full(p.failure_rate()) +
           "," + format_full(w.lo) + "," + format_full(w.hi) + "\n";
  }
  return out;
}

}  // namespace sompns
