#include "sompns/bounds.hpp"
#include "sompns/dictionary.hpp"
#include "sompns/experiments.hpp"
#include "sompns/matrix_io.hpp"
#include "sompns/recovery.hpp"
#include "sompns/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace sompns;

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError(what + ": bad number '" + cell + "'");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& what) {
  std::vector<int> out;
  for (double v : parse_double_list(text, what)) {
    if (v != static_cast<int>(v))
      throw ConfigError(what + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

/// CLI supports are 1-based; the library is 0-based.
Support parse_support(const std::string& text) {
  std::vector<Index> idx;
  for (int v : parse_int_list(text, "support")) {
    if (v < 1) throw ConfigError("support: indices are 1-based");
    idx.push_back(static_cast<Index>(v - 1));
  }
  return Support(std::move(idx));
}

/// Data goes to --out when given, otherwise to stdout.
void emit(const std::optional<std::string>& out_path, const std::string& data) {
  if (out_path)
    write_file(*out_path, data);
  else
    std::cout << data;
}

int cmd_gen_dict(const std::string& kind, Index m, Index n, std::uint64_t seed,
                 const std::optional<std::string>& out) {
  Dictionary dict = [&] {
    if (kind == "gaussian") return generate_gaussian_dictionary(m, n, seed);
    if (kind == "rademacher") return generate_rademacher_dictionary(m, n, seed);
    throw ConfigError("gen-dict: unknown kind '" + kind + "'");
  }();
  emit(out, matrix_csv_string(dict.entries()));
  return 0;
}

int cmd_dict_metrics(const std::string& dict_path,
                     const std::optional<std::string>& support_text,
                     const std::optional<std::string>& babel_text,
                     std::optional<int> ric_s, bool use_babel,
                     const std::optional<std::string>& out) {
  const Dictionary dict = load_dictionary(dict_path);
  std::optional<Support> support;
  if (support_text) support = parse_support(*support_text);
  std::vector<int> babel_ps;
  if (babel_text) babel_ps = parse_int_list(*babel_text, "babel-p");

  const DictMetricsReport report =
      compute_dict_metrics(dict, babel_ps, support, ric_s, use_babel);

  std::string data = "metric,value\n";
  data += "coherence," + format_value(report.coherence) + "\n";
  for (const auto& [p, value] : report.babel)
    data += "babel_" + std::to_string(p) + "," + format_value(value) + "\n";
  if (report.erc_norm)
    data += "erc_norm," + format_value(*report.erc_norm) + "\n";
  if (report.ric_bound) {
    data += "ric_coherence_bound," + format_value(report.ric_bound->value) + "\n";
    data += "ric_bound_vacuous," +
            std::string(report.ric_bound->vacuous ? "1" : "0") + "\n";
  }
  emit(out, data);
  return 0;
}

template <class Scalar>
std::string trace_csv(const RecoveryTrace<Scalar>& trace) {
  std::string data = "t,selected_index,metric_value,residual_fro\n";
  for (std::size_t t = 0; t < trace.selected.size(); ++t) {
    data += std::to_string(t + 1) + "," +
            std::to_string(trace.selected[t] + 1) + "," +
            format_value(static_cast<double>(trace.metric_values[t])) + "," +
            format_value(static_cast<double>(trace.residual_norms[t])) + "\n";
  }
  return data;
}

int cmd_recover(const std::string& dict_path, const std::string& y_path,
                const std::string& weights_text, Index iters, int precision,
                const std::optional<std::string>& out) {
  const Dictionary dict = load_dictionary(dict_path);
  const Matrix y = load_matrix_csv(y_path);
  Vector q_values;
  {
    const std::vector<double> v = parse_double_list(weights_text, "weights");
    q_values = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }
  const WeightVector weights{q_values};

  std::string data;
  if (precision == 32) {
    const auto trace =
        somp_ns<float>(dict.entries().cast<float>().eval(), y.cast<float>().eval(),
                       weights.q.cast<float>().eval(), iters);
    data = trace_csv(trace);
  } else {
    data = trace_csv(somp_ns(dict, y, weights, iters));
  }
  emit(out, data);
  return 0;
}

struct BoundCli {
  std::string mode = "theorem5";
  std::string cond = "ric";
  std::string dict_path;
  std::string support_text;
  std::string weights_text;
  std::string sigma_text;
  std::optional<std::string> x_path;
  std::optional<double> mu_x;
  std::optional<int> s;
  bool exact_ric_flag = false;
  bool use_babel = true;
  std::uint64_t ric_budget = 200000;
  double n_bar = 0.0;
  double alpha = 0.0;
  bool drop_bias = false;
  std::optional<std::string> out;
};

int cmd_bound(const BoundCli& opt) {
  const Dictionary dict = load_dictionary(opt.dict_path);
  const Support support = parse_support(opt.support_text);
  support.require_within(dict.cols());
  const int support_size = static_cast<int>(support.size());

  Vector q_values, sigma_values;
  {
    const auto qv = parse_double_list(opt.weights_text, "weights");
    const auto sv = parse_double_list(opt.sigma_text, "sigma");
    q_values = Eigen::Map<const Vector>(qv.data(), static_cast<Index>(qv.size()));
    sigma_values = Eigen::Map<const Vector>(sv.data(), static_cast<Index>(sv.size()));
  }
  const WeightVector weights{q_values};
  const NoiseSpec noise{sigma_values};

  // Weakest weighted atom: from an explicit X or from the sign-pattern model
  // where every in-support magnitude is mu_x.
  double min_sum = 0.0;
  if (opt.x_path) {
    const Matrix x = load_matrix_csv(*opt.x_path);
    min_sum = min_weighted_row_sum(x, support, weights);
  } else if (opt.mu_x) {
    min_sum = *opt.mu_x * weights.q.sum();
  } else {
    throw ConfigError("bound: provide --x or --mu-x");
  }

  // Conditioning constants.
  const double erc = erc_constant(dict, support);
  double delta = 0.0;
  if (opt.cond == "ric") {
    if (opt.exact_ric_flag) {
      delta = exact_ric(dict, support_size, opt.ric_budget);
    } else {
      const BoundValue bound =
          ric_coherence_bound(dict, support_size, opt.use_babel);
      delta = bound.value;  // >= 1 simply drives epsilon vacuous
    }
  } else if (opt.cond != "coherence") {
    throw ConfigError("bound: --cond must be ric or coherence");
  }

  double epsilon = 0.0;
  if (opt.cond == "ric")
    epsilon = 0.5 * (1.0 - erc) * (1.0 - delta) * min_sum;
  else
    epsilon = 0.5 *
              (1.0 - coherence(dict) * (2.0 * support_size - 1.0)) * min_sum;

  const int s = opt.s ? *opt.s : support_size - 1;

  std::string row;
  const std::string header =
      "mode,cond,kappa,b,epsilon,epsilon_bar,c_s,prob_lower_bound,"
      "prob_clamped,valid\n";
  if (opt.mode == "theorem5") {
    const BoundReport report =
        theorem5_bound(epsilon, weights, noise, dict.cols(), support_size, s);
    row = opt.mode + "," + opt.cond + "," + format_value(report.kappa) + "," +
          format_value(report.b) + "," + format_value(report.epsilon) + "," +
          format_value(report.epsilon_bar) + "," + report.c_s.str() + "," +
          (report.valid ? format_value(report.prob_lower_bound) : "") + "," +
          (report.valid ? format_value(report.prob_clamped) : "") + "," +
          (report.valid ? "1" : "0") + "\n";
  } else if (opt.mode == "b1") {
    if (opt.n_bar <= 0.0 || opt.alpha <= 0.0)
      throw ConfigError("bound: b1 needs --n-bar and --alpha");
    const ConjecturedBoundParams params{opt.n_bar, opt.alpha, opt.drop_bias};
    const double value = conjectured_bound(params, epsilon, weights, noise,
                                           std::max(1, s));
    const double e =
        opt.drop_bias ? epsilon : epsilon - bias_b(weights, noise);
    row = opt.mode + "," + opt.cond + "," +
          format_value(kappa(weights, noise)) + "," +
          format_value(bias_b(weights, noise)) + "," + format_value(epsilon) +
          "," + format_value(e) + ",," + format_value(value) + "," +
          format_value(std::min(1.0, std::max(0.0, value))) + ",1\n";
  } else if (opt.mode == "b2") {
    if (!opt.mu_x) throw ConfigError("bound: b2 needs --mu-x");
    const double epsilon_prime = 0.5 * (1.0 - erc) * (1.0 - delta);
    const double value = b2_bound(*opt.mu_x, weights, noise, dict.cols(),
                                  support_size, epsilon_prime);
    row = opt.mode + "," + opt.cond + "," +
          format_value(kappa(weights, noise)) + "," +
          format_value(bias_b(weights, noise)) + "," +
          format_value(epsilon_prime) + ",," +
          combinatorial_c(support_size, support_size - 1).str() + "," +
          format_value(value) + "," +
          format_value(std::min(1.0, std::max(0.0, value))) + ",1\n";
  } else {
    throw ConfigError("bound: --mode must be theorem5, b1 or b2");
  }
  emit(opt.out, header + row);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted simultaneous orthogonal matching pursuit toolkit"};
  app.set_version_flag("--version", std::string("sompns ") + kVersion +
                                        " (format " + kFormatVersion + ")");
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker count for experiment campaigns (default: hardware)");

  // gen-dict
  std::string gd_kind = "gaussian";
  Index gd_m = 0, gd_n = 0;
  std::uint64_t gd_seed = 0;
  std::string gd_out, dm_out, rc_out, bd_out, ex_out;
  auto* gen = app.add_subcommand("gen-dict", "generate a dictionary file");
  gen->add_option("--kind", gd_kind, "gaussian|rademacher");
  gen->add_option("--m", gd_m, "row count")->required();
  gen->add_option("--n", gd_n, "atom count")->required();
  gen->add_option("--seed", gd_seed, "generator seed")->required();
  gen->add_option("--out", gd_out, "output path (default: stdout)");

  // dict-metrics
  std::string dm_dict, dm_support, dm_babel;
  int dm_ric_s = 0;
  bool dm_use_babel = false;
  auto* metrics = app.add_subcommand("dict-metrics",
                                     "conditioning metrics of a dictionary");
  metrics->add_option("--dict", dm_dict, "dictionary file")->required();
  metrics->add_option("--support", dm_support,
                      "1-based atom indices for the ERC norm");
  metrics->add_option("--babel-p", dm_babel, "comma list of Babel orders");
  metrics->add_option("--ric-s", dm_ric_s, "order for the RIC coherence bound");
  metrics->add_flag("--use-babel", dm_use_babel,
                    "use mu_1(s-1) instead of (s-1)mu for the RIC bound");
  metrics->add_option("--out", dm_out, "output path (default: stdout)");

  // recover
  std::string rc_dict, rc_y, rc_weights;
  Index rc_iters = 0;
  int rc_precision = 64;
  auto* recover = app.add_subcommand("recover", "run weighted recovery");
  recover->add_option("--dict", rc_dict, "dictionary file")->required();
  recover->add_option("--y", rc_y, "measurement matrix file")->required();
  recover->add_option("--weights", rc_weights, "comma list q_1,...,q_K")
      ->required();
  recover->add_option("--iters", rc_iters, "iteration count")->required();
  recover->add_option("--precision", rc_precision, "32 or 64 (default 64)");
  recover->add_option("--out", rc_out, "trace output path (default: stdout)");

  // bound
  BoundCli bd;
  std::string bd_x, bd_out_s;
  double bd_mu_x = 0.0;
  int bd_s = -1;
  auto* bound = app.add_subcommand("bound", "evaluate probability bounds");
  bound->add_option("--mode", bd.mode, "theorem5|b1|b2");
  bound->add_option("--cond", bd.cond, "ric|coherence");
  bound->add_option("--dict", bd.dict_path, "dictionary file")->required();
  bound->add_option("--support", bd.support_text, "1-based support")->required();
  bound->add_option("--weights", bd.weights_text, "comma list")->required();
  bound->add_option("--sigma", bd.sigma_text, "comma list")->required();
  auto* bd_x_opt = bound->add_option("--x", bd_x, "signal matrix file");
  auto* bd_mu_opt =
      bound->add_option("--mu-x", bd_mu_x, "sign-pattern magnitude");
  auto* bd_s_opt = bound->add_option(
      "--s", bd_s, "last guaranteed iteration (default |S|-1)");
  bound->add_flag("--exact-ric", bd.exact_ric_flag,
                  "enumerate the exact RIC instead of the coherence bound");
  bound->add_option("--ric-budget", bd.ric_budget, "enumeration budget");
  bound->add_option("--n-bar", bd.n_bar, "b1 effective atom count");
  bound->add_option("--alpha", bd.alpha, "b1 iteration coefficient");
  bound->add_flag("--drop-bias", bd.drop_bias, "b1: drop the bias term");
  bound->add_option("--out", bd_out_s, "output path (default: stdout)");

  // snr-estimate
  std::string snr_config;
  long long snr_cases = 10000;
  auto* snr = app.add_subcommand("snr-estimate",
                                 "average input SNR of a configuration");
  snr->add_option("--config", snr_config, "experiment config file")->required();
  snr->add_option("--cases", snr_cases, "Monte Carlo cases (default 10^4)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo campaigns");
  experiment->require_subcommand(1);
  std::string ex_config, ex_klist;
  double ex_target = 0.2, ex_tol = 0.02;
  long long ex_cal_trials = 2000;
  auto* angles = experiment->add_subcommand(
      "angles", "(theta_q, theta_sigma) grid campaign");
  angles->add_option("--config", ex_config, "config file")->required();
  angles->add_option("--out", ex_out, "results path (default: stdout)");
  auto* ksweep = experiment->add_subcommand(
      "ksweep", "failure rate against measurement vector count");
  ksweep->add_option("--config", ex_config, "config file")->required();
  ksweep->add_option("--k-list", ex_klist, "comma list of K values")->required();
  ksweep->add_option("--out", ex_out, "results path (default: stdout)");
  auto* calibrate = experiment->add_subcommand(
      "calibrate", "bisect mu_x to a target success rate at (45, 45)");
  calibrate->add_option("--config", ex_config, "config file")->required();
  calibrate->add_option("--target", ex_target, "target success probability");
  calibrate->add_option("--trials", ex_cal_trials, "trials per evaluation");
  calibrate->add_option("--tol", ex_tol, "acceptable success-rate deviation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    auto opt_str = [](const std::string& s) -> std::optional<std::string> {
      if (s.empty()) return std::nullopt;
      return s;
    };

    if (gen->parsed())
      return cmd_gen_dict(gd_kind, gd_m, gd_n, gd_seed, opt_str(gd_out));

    if (metrics->parsed()) {
      std::optional<int> ric_s;
      if (dm_ric_s > 0) ric_s = dm_ric_s;
      return cmd_dict_metrics(dm_dict, opt_str(dm_support), opt_str(dm_babel),
                              ric_s, dm_use_babel, opt_str(dm_out));
    }

    if (recover->parsed()) {
      if (rc_precision != 32 && rc_precision != 64)
        throw ConfigError("recover: --precision must be 32 or 64");
      return cmd_recover(rc_dict, rc_y, rc_weights, rc_iters, rc_precision,
                         opt_str(rc_out));
    }

    if (bound->parsed()) {
      if (*bd_x_opt) bd.x_path = bd_x;
      if (*bd_mu_opt) bd.mu_x = bd_mu_x;
      if (*bd_s_opt) bd.s = bd_s;
      bd.out = opt_str(bd_out_s);
      return cmd_bound(bd);
    }

    if (snr->parsed()) {
      const ExperimentConfig config = load_experiment_config(snr_config);
      const double db = estimate_snr_in(config, snr_cases);
      std::cout << "snr_in_db," << format_value(db) << "\n";
      return 0;
    }

    if (experiment->parsed()) {
      const ExperimentConfig config = load_experiment_config(ex_config);
      if (angles->parsed()) {
        const ExperimentSummary summary = run_angle_sweep(config, threads);
        emit(opt_str(ex_out), angle_sweep_csv(summary));
        return 0;
      }
      if (ksweep->parsed()) {
        const std::vector<int> k_list = parse_int_list(ex_klist, "k-list");
        const KSweepResult result = run_k_sweep(config, k_list, threads);
        emit(opt_str(ex_out), k_sweep_csv(result));
        return 0;
      }
      if (calibrate->parsed()) {
        const double mu =
            calibrate_mu_x(config, ex_target, ex_cal_trials, ex_tol, threads);
        std::cout << "mu_x," << format_value(mu) << "\n";
        return 0;
      }
    }

    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
