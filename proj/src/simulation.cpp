#include "slope/simulation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

namespace slope {

namespace {

constexpr double kSupportFloor = 1e-10;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool declared_nonzero(double value, double sigma, double lambda1) {
  return std::abs(value) > kSupportFloor * sigma * lambda1;
}

std::vector<Eigen::Index> declared_support(const Vector& b, double sigma,
                                           double lambda1) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (declared_nonzero(b[i], sigma, lambda1)) s.push_back(i);
  }
  return s;
}

TrialMetrics metrics_impl(const Vector& beta, const Vector& beta_hat,
                          const Design* X, double sigma, double q,
                          Eigen::Index k, double lambda1) {
  TrialMetrics m;
  const Vector diff = beta_hat - beta;
  m.mse = diff.squaredNorm();
  m.pred_err = X != nullptr ? (X->matrix * diff).squaredNorm() : m.mse;

  Eigen::Index v = 0, r = 0, true_disc = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (!declared_nonzero(beta_hat[i], sigma, lambda1)) continue;
    ++r;
    if (beta[i] == 0.0) {
      ++v;
    } else {
      ++true_disc;
    }
  }
  m.false_discoveries = v;
  m.discoveries = r;
  m.fdp = double(v) / double(std::max<Eigen::Index>(r, 1));
  m.tpp = double(true_disc) / double(std::max<Eigen::Index>(k, 1));
  const Eigen::Index p = beta.size();
  if (k > 0 && k < p) {
    m.mse_ratio =
        m.mse / (2.0 * sigma * sigma * double(k) * std::log(double(p) / double(k)));
  }
  m.v_bound_ok = double(v) <= q / (1.0 - q) * double(k);
  return m;
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / double(x.size());
}

double se_of(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / double(x.size() - 1) / double(x.size()));
}

double quantile_of(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * double(x.size() - 1);
  const std::size_t lo = std::size_t(pos);
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  const double w = pos - double(lo);
  return (1.0 - w) * x[lo] + w * x[hi];
}

struct TrialInputs {
  Design X;  // empty matrix under the identity design
  Vector beta;
  Vector z;
  Vector y;
  std::vector<Eigen::Index> signal_support;
};

TrialInputs make_trial(const ExperimentConfig& cfg, int rep) {
  TrialInputs t;
  const auto r = std::uint64_t(rep);
  if (cfg.design == DesignKind::Gaussian) {
    t.X = gen_design(cfg.n, cfg.p, derive_seed(cfg.seed, r, 1));
  }
  t.beta = gen_signal(cfg.signal, cfg.sigma, derive_seed(cfg.seed, r, 2));
  Rng noise(derive_seed(cfg.seed, r, 3));
  t.z = Vector(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) t.z[i] = cfg.sigma * noise.normal();
  if (cfg.design == DesignKind::Gaussian) {
    t.y = t.X.matrix * t.beta + t.z;
  } else {
    t.y = t.beta + t.z;
  }
  for (Eigen::Index i = 0; i < cfg.p; ++i) {
    if (t.beta[i] != 0.0) t.signal_support.push_back(i);
  }
  return t;
}

WeightVector experiment_weights(const ExperimentConfig& cfg) {
  WeightSchedule sched;
  sched.kind = cfg.weight_kind;
  if (cfg.epsilon > 0.0 && cfg.weight_kind == WeightKind::Bh) {
    sched.kind = WeightKind::InflatedBh;
  }
  sched.q = cfg.q;
  sched.epsilon = cfg.epsilon;
  sched.p = cfg.p;
  sched.sigma = cfg.sigma;
  return sched.materialize();
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Slope: return "slope";
    case Method::Lasso: return "lasso";
    case Method::FdrHard: return "fdr-hard";
    case Method::SeqFdr: return "seq-fdr";
    case Method::Sure: return "sure";
  }
  throw std::logic_error("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "slope") return Method::Slope;
  if (name == "lasso") return Method::Lasso;
  if (name == "fdr-hard") return Method::FdrHard;
  if (name == "seq-fdr") return Method::SeqFdr;
  if (name == "sure") return Method::Sure;
  throw std::runtime_error("unknown method: " + name);
}

void ExperimentConfig::validate() const {
  if (n < 1 || p < 1) throw std::runtime_error("config: n and p must be >= 1");
  if (!(sigma > 0.0)) throw std::runtime_error("config: sigma must be > 0");
  if (!(q > 0.0) || !(q < 1.0)) throw std::runtime_error("config: q must lie in (0, 1)");
  if (epsilon < 0.0) throw std::runtime_error("config: epsilon must be >= 0");
  if (replicates < 1) throw std::runtime_error("config: replicates must be >= 1");
  if (methods.empty()) throw std::runtime_error("config: no methods");
  if (signal.p != p) throw std::runtime_error("config: signal.p != p");
  if (signal.k < 0 || signal.k > p) throw std::runtime_error("config: k out of range");
  if (design == DesignKind::Identity && n != p) {
    throw std::runtime_error("config: identity design requires n == p");
  }
  for (Method m : methods) {
    const bool sequence_model =
        m == Method::FdrHard || m == Method::SeqFdr || m == Method::Sure;
    if (sequence_model && design != DesignKind::Identity) {
      throw std::runtime_error("config: method " + method_name(m) +
                               " requires the identity design");
    }
  }
  if (signal.amplitude_rule == AmplitudeRule::BlockPrior &&
      signal.placement != Placement::BlockUniform) {
    throw std::runtime_error("config: block prior requires block placement");
  }
}

Design gen_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_design: n, p must be >= 1");
  Rng rng(seed);
  Design d{Matrix(n, p)};
  const double scale = 1.0 / std::sqrt(double(n));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      d.matrix(i, j) = scale * rng.normal();
    }
  }
  return d;
}

Vector gen_signal(const SignalSpec& spec, double sigma, std::uint64_t seed) {
  if (spec.k > spec.p) throw std::invalid_argument("gen_signal: k > p");
  Vector beta = Vector::Zero(spec.p);
  if (spec.k == 0) return beta;

  double amplitude = 0.0;
  switch (spec.amplitude_rule) {
    case AmplitudeRule::ConstantSqrtLog:
      amplitude = spec.multiplier * sigma * std::sqrt(2.0 * std::log(double(spec.p)));
      break;
    case AmplitudeRule::ConstantBhTop:
      amplitude = spec.multiplier * sigma *
                  normal_quantile(1.0 - spec.q / (2.0 * double(spec.p)));
      break;
    case AmplitudeRule::BlockPrior:
      amplitude = spec.multiplier * sigma;
      break;
  }

  Rng rng(seed);
  switch (spec.placement) {
    case Placement::FirstK:
      for (Eigen::Index i = 0; i < spec.k; ++i) beta[i] = amplitude;
      break;
    case Placement::UniformRandom: {
      // Partial Fisher-Yates over 0..p-1.
      std::vector<Eigen::Index> idx(std::size_t(spec.p));
      for (Eigen::Index i = 0; i < spec.p; ++i) idx[std::size_t(i)] = i;
      for (Eigen::Index i = 0; i < spec.k; ++i) {
        const auto j = i + Eigen::Index(rng.below(std::uint64_t(spec.p - i)));
        std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
        beta[idx[std::size_t(i)]] = amplitude;
      }
      break;
    }
    case Placement::BlockUniform: {
      const Eigen::Index block = spec.p / spec.k;
      if (block < 1) throw std::invalid_argument("gen_signal: empty blocks");
      for (Eigen::Index b = 0; b < spec.k; ++b) {
        const auto off = Eigen::Index(rng.below(std::uint64_t(block)));
        beta[b * block + off] = amplitude;
      }
      break;
    }
  }
  return beta;
}

std::vector<Eigen::Index> resolvent_set(const Design& X, const Vector& z,
                                        const std::vector<Eigen::Index>& S,
                                        Eigen::Index K) {
  const Eigen::Index p = X.p();
  if (K < Eigen::Index(S.size()) || K >= p) {
    throw std::invalid_argument("resolvent_set: K out of range");
  }
  const Vector corr = X.matrix.transpose() * z;
  std::vector<bool> in_s(std::size_t(p), false);
  for (Eigen::Index i : S) in_s[std::size_t(i)] = true;

  std::vector<Eigen::Index> off;
  off.reserve(std::size_t(p - Eigen::Index(S.size())));
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!in_s[std::size_t(i)]) off.push_back(i);
  }
  std::stable_sort(off.begin(), off.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(corr[a]) > std::abs(corr[b]);
  });

  std::vector<Eigen::Index> result(S);
  result.insert(result.end(), off.begin(),
                off.begin() + (K - Eigen::Index(S.size())));
  std::sort(result.begin(), result.end());
  return result;
}

TrialMetrics compute_metrics(const Vector& beta, const Vector& beta_hat,
                             const Design& X, double sigma, double q,
                             Eigen::Index k, double lambda1) {
  if (beta.size() != beta_hat.size() || X.p() != beta.size()) {
    throw std::invalid_argument("compute_metrics: dimension mismatch");
  }
  return metrics_impl(beta, beta_hat, &X, sigma, q, k, lambda1);
}

Eigen::Index resolvent_size(Eigen::Index k, Eigen::Index n, Eigen::Index p,
                            double q) {
  const auto lower = Eigen::Index(std::ceil(2.0 * double(k) / (1.0 - q)));
  const auto d = Eigen::Index(std::min(
      std::floor(std::sqrt(double(k) * double(n) / std::log(double(p)))),
      std::floor(std::sqrt(double(p)))));
  return std::min(std::max(lower, k + d), p - 1);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const WeightVector lambda = experiment_weights(cfg);
  const double lambda1 = lambda[0];
  const double lasso_lam =
      cfg.lasso_lambda > 0.0
          ? cfg.lasso_lambda
          : cfg.sigma * normal_quantile(1.0 - cfg.q / (2.0 * double(cfg.p)));

  ExperimentResult result;
  result.config = cfg;
  result.trials.assign(cfg.methods.size(),
                       std::vector<TrialMetrics>(std::size_t(cfg.replicates)));

  auto run_replicate = [&](int rep) {
    const TrialInputs trial = make_trial(cfg, rep);
    const bool identity = cfg.design == DesignKind::Identity;
    const Eigen::Index k = cfg.signal.k;

    // Ground-truth diagnostics shared by every method on this replicate.
    Vector corr_z;  // X'z
    if (identity) {
      corr_z = trial.z;
    } else {
      corr_z = trial.X.matrix.transpose() * trial.z;
    }
    const Vector beta_tilde = prox_sorted_l1(trial.beta + corr_z, lambda);

    const Eigen::Index K = k > 0 ? resolvent_size(k, cfg.n, cfg.p, cfg.q) : 0;
    std::vector<bool> in_resolvent;
    if (k > 0 && K > k && K < cfg.p) {
      in_resolvent.assign(std::size_t(cfg.p), false);
      std::vector<Eigen::Index> off;
      for (Eigen::Index i = 0; i < cfg.p; ++i) {
        if (trial.beta[i] == 0.0) off.push_back(i);
      }
      std::stable_sort(off.begin(), off.end(),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return std::abs(corr_z[a]) > std::abs(corr_z[b]);
                       });
      for (Eigen::Index i : trial.signal_support) in_resolvent[std::size_t(i)] = true;
      for (Eigen::Index j = 0; j < K - k; ++j) {
        in_resolvent[std::size_t(off[std::size_t(j)])] = true;
      }
    }

    auto resolvent_holds = [&](const Vector& beta_hat) {
      if (in_resolvent.empty()) return true;
      for (Eigen::Index i = 0; i < cfg.p; ++i) {
        if (in_resolvent[std::size_t(i)]) continue;
        if (declared_nonzero(beta_hat[i], cfg.sigma, lambda1) ||
            declared_nonzero(beta_tilde[i], cfg.sigma, lambda1)) {
          return false;
        }
      }
      return true;
    };

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      Vector beta_hat;
      bool converged = true;
      int iterations = 0;
      double gap = 0.0;
      switch (cfg.methods[m]) {
        case Method::Slope: {
          if (identity) {
            beta_hat = prox_sorted_l1(trial.y, lambda);
          } else {
            const SlopeFit fit = fit_slope(trial.X, trial.y, lambda, cfg.solver);
            beta_hat = fit.beta_hat;
            converged = fit.converged;
            iterations = fit.iterations;
            gap = fit.duality_gap;
          }
          break;
        }
        case Method::Lasso: {
          if (identity) {
            beta_hat = prox_sorted_l1(
                trial.y, WeightVector::constant(cfg.p, lasso_lam));
          } else {
            const SlopeFit fit = lasso_fit(trial.X, trial.y, lasso_lam, cfg.solver);
            beta_hat = fit.beta_hat;
            converged = fit.converged;
            iterations = fit.iterations;
            gap = fit.duality_gap;
          }
          break;
        }
        case Method::FdrHard:
          beta_hat = fdr_hard_threshold(trial.y, cfg.q, cfg.sigma).beta_hat;
          break;
        case Method::SeqFdr:
          beta_hat = sequential_fdr_soft(trial.y, cfg.q, cfg.sigma);
          break;
        case Method::Sure:
          beta_hat = sure_soft_threshold(trial.y, cfg.sigma, {0.0}).beta_hat;
          break;
      }

      TrialMetrics metrics =
          metrics_impl(trial.beta, beta_hat, identity ? nullptr : &trial.X,
                       cfg.sigma, cfg.q, k, lambda1);
      metrics.support_in_resolvent = resolvent_holds(beta_hat);
      metrics.converged = converged;
      metrics.iterations = iterations;
      metrics.duality_gap = gap;
      result.trials[m][std::size_t(rep)] = metrics;
    }
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1 || cfg.replicates == 1) {
    for (int rep = 0; rep < cfg.replicates; ++rep) run_replicate(rep);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < cfg.replicates;
             rep = next.fetch_add(1)) {
          run_replicate(rep);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const auto& rows = result.trials[m];
    std::vector<double> mse, fdp, v, r, tpp, ratio, pred;
    double resolvent_frac = 0.0, vbound_frac = 0.0, conv_frac = 0.0;
    for (const TrialMetrics& t : rows) {
      mse.push_back(t.mse);
      fdp.push_back(t.fdp);
      v.push_back(double(t.false_discoveries));
      r.push_back(double(t.discoveries));
      tpp.push_back(t.tpp);
      ratio.push_back(t.mse_ratio);
      pred.push_back(t.pred_err);
      resolvent_frac += t.support_in_resolvent ? 1.0 : 0.0;
      vbound_frac += t.v_bound_ok ? 1.0 : 0.0;
      conv_frac += t.converged ? 1.0 : 0.0;
    }
    const double nn = double(rows.size());
    MethodSummary s;
    s.mean_mse = mean_of(mse);
    s.se_mse = se_of(mse);
    s.mean_pred_err = mean_of(pred);
    s.mean_fdp = mean_of(fdp);
    s.se_fdp = se_of(fdp);
    s.mean_v = mean_of(v);
    s.se_v = se_of(v);
    s.mean_r = mean_of(r);
    s.mean_tpp = mean_of(tpp);
    s.mean_mse_ratio = mean_of(ratio);
    s.se_mse_ratio = se_of(ratio);
    s.mse_quantiles = {{"q05", quantile_of(mse, 0.05)},
                       {"q25", quantile_of(mse, 0.25)},
                       {"q50", quantile_of(mse, 0.50)},
                       {"q75", quantile_of(mse, 0.75)},
                       {"q95", quantile_of(mse, 0.95)}};
    s.frac_support_in_resolvent = resolvent_frac / nn;
    s.frac_v_bound_ok = vbound_frac / nn;
    s.frac_converged = conv_frac / nn;
    result.summary[method_name(cfg.methods[m])] = s;
  }
  return result;
}

void write_trials_csv(std::ostream& os, const ExperimentResult& result) {
  os << "replicate,method,mse,pred_err,V,R,fdp,tpp,mse_ratio,"
        "support_in_resolvent,v_bound_ok,converged,iterations,duality_gap\n";
  for (std::size_t rep = 0; rep < std::size_t(result.config.replicates); ++rep) {
    for (std::size_t m = 0; m < result.config.methods.size(); ++m) {
      const TrialMetrics& t = result.trials[m][rep];
      os << rep << ',' << method_name(result.config.methods[m]) << ','
         << fmt17(t.mse) << ',' << fmt17(t.pred_err) << ','
         << t.false_discoveries << ',' << t.discoveries << ','
         << fmt17(t.fdp) << ',' << fmt17(t.tpp) << ',' << fmt17(t.mse_ratio)
         << ',' << (t.support_in_resolvent ? 1 : 0) << ','
         << (t.v_bound_ok ? 1 : 0) << ',' << (t.converged ? 1 : 0) << ','
         << t.iterations << ',' << fmt17(t.duality_gap) << '\n';
    }
  }
}

void write_summary_json(std::ostream& os, const ExperimentResult& result) {
  nlohmann::json j;
  j["n"] = result.config.n;
  j["p"] = result.config.p;
  j["k"] = result.config.signal.k;
  j["sigma"] = result.config.sigma;
  j["q"] = result.config.q;
  j["epsilon"] = result.config.epsilon;
  j["replicates"] = result.config.replicates;
  j["seed"] = result.config.seed;
  for (const auto& [name, s] : result.summary) {
    nlohmann::json m;
    m["mean_mse"] = s.mean_mse;
    m["se_mse"] = s.se_mse;
    m["mean_pred_err"] = s.mean_pred_err;
    m["mean_fdp"] = s.mean_fdp;
    m["se_fdp"] = s.se_fdp;
    m["mean_v"] = s.mean_v;
    m["se_v"] = s.se_v;
    m["mean_r"] = s.mean_r;
    m["mean_tpp"] = s.mean_tpp;
    m["mean_mse_ratio"] = s.mean_mse_ratio;
    m["se_mse_ratio"] = s.se_mse_ratio;
    m["mse_quantiles"] = s.mse_quantiles;
    m["frac_support_in_resolvent"] = s.frac_support_in_resolvent;
    m["frac_v_bound_ok"] = s.frac_v_bound_ok;
    m["frac_converged"] = s.frac_converged;
    j["methods"][name] = m;
  }
  os << j.dump(2) << '\n';
}

void write_histograms(std::ostream& fdp_os, std::ostream& v_os,
                      const ExperimentResult& result, Method method) {
  std::size_t m = 0;
  for (; m < result.config.methods.size(); ++m) {
    if (result.config.methods[m] == method) break;
  }
  if (m == result.config.methods.size()) {
    throw std::runtime_error("write_histograms: method not in experiment");
  }
  for (std::size_t rep = 0; rep < result.trials[m].size(); ++rep) {
    fdp_os << rep << ' ' << fmt17(result.trials[m][rep].fdp) << '\n';
    v_os << rep << ' ' << result.trials[m][rep].false_discoveries << '\n';
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    cfg.p = j.at("p").get<Eigen::Index>();
    cfg.n = j.value("n", cfg.p);
    cfg.sigma = j.value("sigma", 1.0);
    const std::string design = j.value("design", "gaussian");
    if (design == "gaussian") {
      cfg.design = DesignKind::Gaussian;
    } else if (design == "identity") {
      cfg.design = DesignKind::Identity;
      cfg.n = cfg.p;
    } else {
      throw std::runtime_error("config: unknown design: " + design);
    }
    cfg.q = j.value("q", 0.1);
    const std::string weights = j.value("weights", "bh");
    if (weights == "bh") {
      cfg.weight_kind = WeightKind::Bh;
    } else if (weights == "sqrtlog") {
      cfg.weight_kind = WeightKind::SqrtLog;
    } else {
      throw std::runtime_error("config: unknown weights: " + weights);
    }
    cfg.epsilon = j.value("epsilon", 0.0);
    cfg.replicates = j.value("replicates", 1);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.methods.clear();
    for (const auto& name : j.value("methods", std::vector<std::string>{"slope"})) {
      cfg.methods.push_back(method_from_name(name));
    }
    const auto& sig = j.at("signal");
    cfg.signal.p = cfg.p;
    cfg.signal.k = sig.at("k").get<Eigen::Index>();
    cfg.signal.q = cfg.q;
    const std::string amp = sig.value("amplitude", "sqrtlog");
    if (amp == "sqrtlog") {
      cfg.signal.amplitude_rule = AmplitudeRule::ConstantSqrtLog;
    } else if (amp == "bhtop") {
      cfg.signal.amplitude_rule = AmplitudeRule::ConstantBhTop;
    } else if (amp == "block") {
      cfg.signal.amplitude_rule = AmplitudeRule::BlockPrior;
    } else {
      throw std::runtime_error("config: unknown amplitude rule: " + amp);
    }
    cfg.signal.multiplier = sig.value("multiplier", 10.0);
    const std::string placement = sig.value("placement", "uniform");
    if (placement == "first") {
      cfg.signal.placement = Placement::FirstK;
    } else if (placement == "uniform") {
      cfg.signal.placement = Placement::UniformRandom;
    } else if (placement == "block") {
      cfg.signal.placement = Placement::BlockUniform;
    } else {
      throw std::runtime_error("config: unknown placement: " + placement);
    }
    cfg.lasso_lambda = j.value("lasso_lambda", 0.0);
    cfg.solver.tol = j.value("tol", 1e-8);
    cfg.solver.max_iter = j.value("max_iter", 20000);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace slope
