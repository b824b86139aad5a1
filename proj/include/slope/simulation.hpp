#pragma once

#include "slope/estimators.hpp"
#include "slope/rng.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace slope {

enum class AmplitudeRule {
  ConstantSqrtLog,  // c * sqrt(2 log p)
  ConstantBhTop,    // c * lambda^BH_1(q)
  BlockPrior,       // amplitude tau, one nonzero per block
};

enum class Placement { FirstK, UniformRandom, BlockUniform };

struct SignalSpec {
  Eigen::Index p = 1;
  Eigen::Index k = 0;
  AmplitudeRule amplitude_rule = AmplitudeRule::ConstantSqrtLog;
  double multiplier = 10.0;  // c, or tau for the block prior
  Placement placement = Placement::FirstK;
  double q = 0.1;  // only read by ConstantBhTop
};

enum class DesignKind { Gaussian, Identity };

enum class Method { Slope, Lasso, FdrHard, SeqFdr, Sure };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct ExperimentConfig {
  Eigen::Index n = 1;
  Eigen::Index p = 1;
  double sigma = 1.0;
  DesignKind design = DesignKind::Gaussian;
  double q = 0.1;
  WeightKind weight_kind = WeightKind::Bh;
  double epsilon = 0.0;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::vector<Method> methods = {Method::Slope};
  SignalSpec signal;
  double lasso_lambda = 0.0;  // 0 -> sigma * lambda^BH_1(q)
  SolverOptions solver;

  void validate() const;
};

struct TrialMetrics {
  double mse = 0.0;
  double pred_err = 0.0;
  Eigen::Index false_discoveries = 0;  // V
  Eigen::Index discoveries = 0;        // R
  double fdp = 0.0;
  double tpp = 0.0;
  double mse_ratio = 0.0;
  bool support_in_resolvent = true;
  bool v_bound_ok = true;
  bool converged = true;
  int iterations = 0;
  double duality_gap = 0.0;
};

struct MethodSummary {
  double mean_mse = 0.0, se_mse = 0.0;
  double mean_pred_err = 0.0;
  double mean_fdp = 0.0, se_fdp = 0.0;
  double mean_v = 0.0, se_v = 0.0;
  double mean_r = 0.0;
  double mean_tpp = 0.0;
  double mean_mse_ratio = 0.0, se_mse_ratio = 0.0;
  std::map<std::string, double> mse_quantiles;  // "q05".."q95"
  double frac_support_in_resolvent = 0.0;
  double frac_v_bound_ok = 0.0;
  double frac_converged = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  // trials[m][r]: metrics of method m on replicate r.
  std::vector<std::vector<TrialMetrics>> trials;
  std::map<std::string, MethodSummary> summary;
};

/// n x p design with i.i.d. N(0, 1/n) entries; deterministic given seed.
Design gen_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

/// Exactly k nonzeros placed and scaled per the spec; deterministic.
Vector gen_signal(const SignalSpec& spec, double sigma, std::uint64_t seed);

/// S union the K - |S| off-S indices with the largest |X_i' z|.
std::vector<Eigen::Index> resolvent_set(const Design& X, const Vector& z,
                                        const std::vector<Eigen::Index>& S,
                                        Eigen::Index K);

/// Declared-support metrics; entries count as discoveries when
/// |beta_hat_i| > 1e-10 * sigma * lambda_1.
TrialMetrics compute_metrics(const Vector& beta, const Vector& beta_hat,
                             const Design& X, double sigma, double q,
                             Eigen::Index k, double lambda1);

/// Resolvent-size rule K = max(ceil(2k/(1-q)), k + min(floor(sqrt(kn/log p)),
/// floor(sqrt(p)))) capped at p - 1.
Eigen::Index resolvent_size(Eigen::Index k, Eigen::Index n, Eigen::Index p,
                            double q);

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

/// One row per replicate x method; byte-stable across thread counts.
void write_trials_csv(std::ostream& os, const ExperimentResult& result);
void write_summary_json(std::ostream& os, const ExperimentResult& result);
/// Gnuplot-ready FDP and V histograms for the named method.
void write_histograms(std::ostream& fdp_os, std::ostream& v_os,
                      const ExperimentResult& result, Method method);

ExperimentConfig parse_experiment_config(const std::string& json_text);

}  // namespace slope
