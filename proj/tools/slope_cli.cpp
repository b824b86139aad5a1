// Command-line front end: weight schedules, prox evaluation, model fitting,
// Monte Carlo experiments, and a fast self-check of the core invariants.
//
// Exit codes: 0 success, 2 usage/parse/validation error, 3 internal
// invariant violation.

#include "slope/estimators.hpp"
#include "slope/io.hpp"
#include "slope/reference.hpp"
#include "slope/rng.hpp"
#include "slope/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using slope::Design;
using slope::Matrix;
using slope::Vector;
using slope::WeightVector;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

slope::WeightKind parse_kind(const std::string& kind, double epsilon) {
  if (kind == "bh") {
    return epsilon > 0.0 ? slope::WeightKind::InflatedBh : slope::WeightKind::Bh;
  }
  if (kind == "sqrtlog") return slope::WeightKind::SqrtLog;
  throw UsageError("--kind must be 'bh' or 'sqrtlog', got '" + kind + "'");
}

WeightVector make_weights(const std::string& kind, double q, double epsilon,
                          Eigen::Index p, double sigma) {
  if (sigma <= 0.0) throw UsageError("--sigma must be positive");
  if (epsilon < 0.0) throw UsageError("--epsilon must be nonnegative");
  if (kind == "bh" && !(q > 0.0 && q < 1.0)) {
    throw UsageError("--q must lie in (0, 1)");
  }
  slope::WeightSchedule sched;
  sched.kind = parse_kind(kind, epsilon);
  sched.q = q;
  sched.epsilon = epsilon;
  sched.p = p;
  sched.sigma = sigma;
  return sched.materialize();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  return out;
}

void write_weights_csv(std::ostream& os, const WeightVector& lambda) {
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    os << (i + 1) << ',' << slope::format_double(lambda[i]) << '\n';
  }
}

std::string sidecar_path(const std::string& out) {
  const std::filesystem::path p(out);
  std::filesystem::path sidecar = p;
  if (p.extension() == ".csv") {
    sidecar.replace_extension(".json");
  } else {
    sidecar += ".json";
  }
  return sidecar.string();
}

bool is_identity(const Matrix& x) {
  if (x.rows() != x.cols()) return false;
  return x == Matrix::Identity(x.rows(), x.cols());
}

int cmd_weights(const std::string& kind, double q, double epsilon,
                Eigen::Index p, double sigma, const std::string& out) {
  const WeightVector lambda = make_weights(kind, q, epsilon, p, sigma);
  if (out.empty()) {
    write_weights_csv(std::cout, lambda);
  } else {
    auto os = open_out(out);
    write_weights_csv(os, lambda);
  }
  return 0;
}

int cmd_prox(const std::string& y_path, bool header, const std::string& kind,
             double q, double epsilon, double sigma,
             const std::string& lambda_path, const std::string& out) {
  const Vector y = slope::read_vector_csv(y_path, header);
  WeightVector lambda =
      lambda_path.empty()
          ? make_weights(kind, q, epsilon, y.size(), sigma)
          : WeightVector(slope::read_vector_csv(lambda_path, header));
  if (lambda.size() != y.size()) {
    throw UsageError("weight length " + std::to_string(lambda.size()) +
                     " does not match y length " + std::to_string(y.size()));
  }
  const Vector b = slope::prox_sorted_l1_checked(y, lambda);
  if (out.empty()) {
    slope::write_vector_csv(std::cout, b);
  } else {
    slope::write_vector_csv(out, b);
  }
  return 0;
}

int cmd_fit(const std::string& x_path, const std::string& y_path, bool header,
            const std::string& method_name, const std::string& kind, double q,
            double epsilon, double sigma, double lasso_lambda, double tol,
            int max_iter, const std::string& out) {
  const Design X{slope::read_matrix_csv(x_path, header)};
  const Vector y = slope::read_vector_csv(y_path, header);
  if (X.n() != y.size()) {
    throw UsageError("X has " + std::to_string(X.n()) + " rows but y has " +
                     std::to_string(y.size()) + " entries");
  }
  const slope::Method method = slope::method_from_name(method_name);
  const bool identity = is_identity(X.matrix);
  const bool sequence_model = method == slope::Method::FdrHard ||
                              method == slope::Method::SeqFdr ||
                              method == slope::Method::Sure;
  if (sequence_model && !identity) {
    throw UsageError("method '" + method_name +
                     "' is a sequence-model estimator and requires an "
                     "identity design matrix");
  }

  slope::SolverOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;

  Vector beta;
  double gap = 0.0, objective = 0.0;
  int iterations = 0;
  bool converged = true;

  switch (method) {
    case slope::Method::Slope: {
      const WeightVector lambda = make_weights(kind, q, epsilon, X.p(), sigma);
      if (identity) {
        beta = slope::prox_sorted_l1_checked(y, lambda);
        objective = slope::slope_objective(X, y, lambda, beta);
      } else {
        const slope::SlopeFit fit = slope::fit_slope(X, y, lambda, opts);
        beta = fit.beta_hat;
        gap = fit.duality_gap;
        objective = fit.objective;
        iterations = fit.iterations;
        converged = fit.converged;
      }
      break;
    }
    case slope::Method::Lasso: {
      if (lasso_lambda <= 0.0) {
        throw UsageError("method lasso requires --lambda > 0");
      }
      const slope::SlopeFit fit = slope::lasso_fit(X, y, lasso_lambda, opts);
      beta = fit.beta_hat;
      gap = fit.duality_gap;
      objective = fit.objective;
      iterations = fit.iterations;
      converged = fit.converged;
      break;
    }
    case slope::Method::FdrHard: {
      beta = slope::fdr_hard_threshold(y, q, sigma).beta_hat;
      objective = 0.5 * (y - beta).squaredNorm();
      break;
    }
    case slope::Method::SeqFdr: {
      beta = slope::sequential_fdr_soft(y, q, sigma);
      objective = 0.5 * (y - beta).squaredNorm();
      break;
    }
    case slope::Method::Sure: {
      beta = slope::sure_soft_threshold(y, sigma, {0.0}).beta_hat;
      objective = 0.5 * (y - beta).squaredNorm();
      break;
    }
  }

  Eigen::Index support = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (beta[i] != 0.0) ++support;
  }

  nlohmann::json sidecar{{"duality_gap", gap},
                         {"iterations", iterations},
                         {"objective", objective},
                         {"support_size", support},
                         {"converged", converged},
                         {"method", method_name}};
  if (out.empty()) {
    slope::write_vector_csv(std::cout, beta);
    std::cout << sidecar.dump(2) << '\n';
  } else {
    slope::write_vector_csv(out, beta);
    auto os = open_out(sidecar_path(out));
    os << sidecar.dump(2) << '\n';
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::int64_t seed_override, int threads) {
  std::ifstream cfg_in(config_path);
  if (!cfg_in) throw UsageError("cannot open config '" + config_path + "'");
  std::stringstream buf;
  buf << cfg_in.rdbuf();

  slope::ExperimentConfig cfg;
  try {
    cfg = slope::parse_experiment_config(buf.str());
  } catch (const std::exception& e) {
    throw UsageError("config '" + config_path + "': " + e.what());
  }
  if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
  if (threads < 1) throw UsageError("--threads must be at least 1");

  const slope::ExperimentResult result = slope::run_experiment(cfg, threads);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    auto os = open_out((dir / "trials.csv").string());
    slope::write_trials_csv(os, result);
  }
  {
    auto os = open_out((dir / "summary.json").string());
    slope::write_summary_json(os, result);
  }
  for (slope::Method m : cfg.methods) {
    if (m == slope::Method::Slope) {
      auto fdp_os = open_out((dir / "hist_fdp.dat").string());
      auto v_os = open_out((dir / "hist_v.dat").string());
      slope::write_histograms(fdp_os, v_os, result, m);
      break;
    }
  }
  return 0;
}

// Fast property suite: majorization facts, the prox norm bound, and prox
// agreement with the exhaustive reference on small instances.
int cmd_selfcheck() {
  slope::Rng rng(0x5e1fc4ecULL);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "pass" : "FAIL") << "  " << name << '\n';
    if (!ok) ++failures;
  };

  auto random_vec = [&](Eigen::Index p, double scale) {
    Vector v(p);
    for (Eigen::Index i = 0; i < p; ++i) v[i] = scale * rng.normal();
    return v;
  };
  auto random_weights = [&](Eigen::Index p) {
    Vector w(p);
    for (Eigen::Index i = 0; i < p; ++i) w[i] = 2.0 * rng.uniform();
    std::sort(w.data(), w.data() + p, std::greater<double>());
    w[0] += 1e-3;
    return WeightVector(w);
  };

  const int trials = 500;

  // Norm monotonicity under majorization: build b by shrinking prefix sums.
  bool fact31 = true;
  for (int t = 0; t < trials && fact31; ++t) {
    const Eigen::Index p = 1 + Eigen::Index(rng.below(8));
    Vector a = random_vec(p, 3.0);
    Vector mags = slope::sorted_magnitudes(a);
    Vector b(p);
    double shrink = rng.uniform();
    for (Eigen::Index i = 0; i < p; ++i) b[i] = shrink * mags[i];
    if (!slope::majorizes(a, b)) continue;
    fact31 = a.norm() + 1e-12 >= b.norm();
  }
  report("majorization implies norm dominance", fact31);

  bool fact32 = true;
  for (int t = 0; t < trials && fact32; ++t) {
    const Eigen::Index p = 1 + Eigen::Index(rng.below(8));
    const WeightVector lambda = random_weights(p);
    Vector a(p);
    double shrink = 0.9 * rng.uniform();
    for (Eigen::Index i = 0; i < p; ++i) a[i] = shrink * lambda[i];
    if (!slope::majorizes(lambda.values(), a)) {
      fact32 = false;
      break;
    }
    fact32 = slope::prox_sorted_l1_checked(a, lambda).isZero(0.0);
  }
  report("weights majorizing input force prox to zero", fact32);

  bool fact33 = true;
  for (int t = 0; t < trials && fact33; ++t) {
    const Eigen::Index p = 1 + Eigen::Index(rng.below(8));
    const WeightVector lambda = random_weights(p);
    const Vector a = random_vec(p, 3.0);
    const Vector r = a - slope::prox_sorted_l1_checked(a, lambda);
    fact33 = slope::majorizes(lambda.values(), r, 1e-10);
  }
  report("residual a - prox(a) majorized by the weights", fact33);

  bool fact34 = true;
  for (int t = 0; t < trials && fact34; ++t) {
    const Eigen::Index p = 2 + Eigen::Index(rng.below(7));
    const WeightVector lambda = random_weights(p);
    const Vector a = random_vec(p, 3.0);
    const Eigen::Index m = 1 + Eigen::Index(rng.below(std::uint64_t(p - 1)));
    const Vector full = slope::prox_sorted_l1_checked(a, lambda);
    // T = the first m coordinates; compare the tail against the
    // restricted prox with the m largest weights dropped.
    const Vector tail_in = a.tail(p - m);
    const Vector tail_prox =
        slope::prox_sorted_l1_checked(tail_in, lambda.drop_largest(m));
    fact34 = full.tail(p - m).norm() <= tail_prox.norm() + 1e-10;
  }
  report("restricted prox norm bound", fact34);

  bool lemma21 = true;
  for (int t = 0; t < trials && lemma21; ++t) {
    const Eigen::Index p = 1 + Eigen::Index(rng.below(8));
    lemma21 = slope::prox_norm_bound_holds(random_vec(p, 3.0), random_weights(p));
  }
  report("prox norm bounded by soft-thresholded magnitudes", lemma21);

  bool oracle = true;
  for (int t = 0; t < 200 && oracle; ++t) {
    const Eigen::Index p = 1 + Eigen::Index(rng.below(8));
    const WeightVector lambda = random_weights(p);
    const Vector a = random_vec(p, 3.0);
    const Vector fast = slope::prox_sorted_l1_checked(a, lambda);
    const Vector ref = slope::reference::prox_sorted_l1(a, lambda);
    oracle = (fast - ref).norm() <= 1e-8;
  }
  report("prox matches exhaustive small-instance reference", oracle);

  if (failures > 0) {
    std::cout << failures << " selfcheck failure(s)\n";
    return 3;
  }
  std::cout << "all selfchecks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sorted-L1 penalized estimation toolkit"};
  app.require_subcommand(1);

  // weights
  auto* w = app.add_subcommand("weights", "Emit a weight schedule as CSV");
  double w_q = 0.1, w_sigma = 1.0, w_eps = 0.0;
  std::int64_t w_p = 0;
  std::string w_kind = "bh", w_out;
  w->add_option("--q", w_q, "FDR level in (0,1)");
  w->add_option("--p", w_p, "dimension")->required();
  w->add_option("--sigma", w_sigma, "noise standard deviation");
  w->add_option("--kind", w_kind, "bh|sqrtlog");
  w->add_option("--epsilon", w_eps, "inflation factor for bh weights");
  w->add_option("--out", w_out, "output CSV path (stdout if omitted)");

  // prox
  auto* pr = app.add_subcommand("prox", "Proximal operator of the sorted-L1 norm");
  std::string pr_y, pr_lambda, pr_out, pr_kind = "bh";
  double pr_q = 0.1, pr_sigma = 1.0, pr_eps = 0.0;
  bool pr_header = false;
  pr->add_option("--y", pr_y, "input vector CSV")->required();
  pr->add_option("--lambda", pr_lambda, "explicit weight CSV (overrides --kind)");
  pr->add_option("--kind", pr_kind, "bh|sqrtlog");
  pr->add_option("--q", pr_q, "FDR level in (0,1)");
  pr->add_option("--sigma", pr_sigma, "noise standard deviation");
  pr->add_option("--epsilon", pr_eps, "inflation factor for bh weights");
  pr->add_flag("--header", pr_header, "skip one header line in input CSVs");
  pr->add_option("--out", pr_out, "output CSV path (stdout if omitted)");

  // fit
  auto* f = app.add_subcommand("fit", "Fit an estimator to (X, y) from CSV");
  std::string f_x, f_y, f_method = "slope", f_kind = "bh", f_out;
  double f_q = 0.1, f_sigma = 1.0, f_eps = 0.0, f_lambda = 0.0, f_tol = 1e-8;
  int f_max_iter = 20000;
  bool f_header = false;
  f->add_option("--x", f_x, "design matrix CSV")->required();
  f->add_option("--y", f_y, "response vector CSV")->required();
  f->add_option("--method", f_method, "slope|lasso|fdr-hard|seq-fdr|sure");
  f->add_option("--kind", f_kind, "weight schedule for slope: bh|sqrtlog");
  f->add_option("--q", f_q, "FDR level in (0,1)");
  f->add_option("--sigma", f_sigma, "noise standard deviation");
  f->add_option("--epsilon", f_eps, "inflation factor for bh weights");
  f->add_option("--lambda", f_lambda, "penalty level for method lasso");
  f->add_option("--tol", f_tol, "relative duality-gap tolerance");
  f->add_option("--max-iter", f_max_iter, "iteration cap");
  f->add_flag("--header", f_header, "skip one header line in input CSVs");
  f->add_option("--out", f_out,
                "beta CSV path; a .json sidecar is written next to it");

  // simulate
  auto* s = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  std::string s_config, s_out_dir = ".";
  std::int64_t s_seed = -1;
  int s_threads = 1;
  s->add_option("--config", s_config, "experiment config JSON")->required();
  s->add_option("--out-dir", s_out_dir, "output directory");
  s->add_option("--seed", s_seed, "override the config seed");
  s->add_option("--threads", s_threads, "worker threads (output-invariant)");

  // selfcheck
  auto* sc = app.add_subcommand("selfcheck", "Run the fast property suite");
  (void)sc;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (w->parsed()) {
      if (w_p < 1) throw UsageError("--p must be at least 1");
      return cmd_weights(w_kind, w_q, w_eps, Eigen::Index(w_p), w_sigma, w_out);
    }
    if (pr->parsed()) {
      return cmd_prox(pr_y, pr_header, pr_kind, pr_q, pr_eps, pr_sigma,
                      pr_lambda, pr_out);
    }
    if (f->parsed()) {
      return cmd_fit(f_x, f_y, f_header, f_method, f_kind, f_q, f_eps, f_sigma,
                     f_lambda, f_tol, f_max_iter, f_out);
    }
    if (s->parsed()) return cmd_simulate(s_config, s_out_dir, s_seed, s_threads);
    if (sc->parsed()) return cmd_selfcheck();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
