// Command-line front end: coefficient generation, sensitivity accounting,
// closed-form analysis, the convex bound, and the simulation lab.
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "corrnoise/analysis.hpp"
#include "corrnoise/coeffs.hpp"
#include "corrnoise/convex_bound.hpp"
#include "corrnoise/engine.hpp"
#include "corrnoise/kernels.hpp"
#include "corrnoise/simlab.hpp"
#include "corrnoise/spectral.hpp"
#include "corrnoise/toeplitz.hpp"

namespace {

using nlohmann::json;
namespace cn = corrnoise;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fputs(content.c_str(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

json json_or_inf(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

// key,value rows with 17-digit numbers; used by --format csv.
std::string record_as_csv(const json& rec) {
  std::string text;
  for (auto it = rec.begin(); it != rec.end(); ++it) {
    text += it.key();
    text += ',';
    text += it.value().is_number() ? fmt17(it.value().get<double>())
                                   : it.value().dump();
    text += '\n';
  }
  return text;
}

void emit_record(const json& rec, const std::string& format,
                 const std::string& out) {
  if (format == "csv") {
    write_output(out, record_as_csv(rec));
  } else {
    write_output(out, rec.dump(2) + "\n");
  }
}

// "const:<d>", "pow:<a>:<d>", or a file with one eigenvalue per line.
cn::analysis::Spectrum parse_spectrum(const std::string& spec) {
  if (spec.rfind("const:", 0) == 0) {
    return cn::analysis::Spectrum::constant(std::stoul(spec.substr(6)));
  }
  if (spec.rfind("pow:", 0) == 0) {
    const auto rest = spec.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("--spectrum pow:<a>:<d>");
    }
    return cn::analysis::Spectrum::power_decay(std::stod(rest.substr(0, colon)),
                                               std::stoul(rest.substr(colon + 1)));
  }
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("cannot read spectrum file: " + spec);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  return cn::analysis::Spectrum(std::move(vals));
}

// Limiting |B(w)|^2 profile of a coefficient family.
cn::spectral::Fn family_profile(cn::coeffs::Family family, double param) {
  using cn::coeffs::Family;
  using cn::spectral::one_pole_magnitude_sq;
  switch (family) {
    case Family::dpsgd:
      return [](double) { return 1.0; };
    case Family::nu:
    case Family::mean_optimal:
      return [param](double w) {
        return std::sqrt(one_pole_magnitude_sq(param, w));
      };
    case Family::fichtenberger:
      return [](double w) { return std::sqrt(one_pole_magnitude_sq(0.0, w)); };
    case Family::anti_pgd:
      return [](double w) { return one_pole_magnitude_sq(0.0, w); };
    case Family::anti_pgd_damped:
      return [param](double w) { return one_pole_magnitude_sq(param, w); };
  }
  throw std::invalid_argument("bad family");
}

struct CoeffsArgs {
  std::string family = "nu";
  double param = 0.1;
  std::size_t steps = 2048;  // large enough that gamma_T ~ gamma_inf for nu >= 0.01
  std::string out = "-";
  std::uint64_t seed = 0;
};

struct SensitivityArgs {
  std::string family = "nu";
  double param = 0.1;
  std::size_t steps = 2048;
  bool limiting = false;
  std::string out = "-";
  std::string format = "json";
  std::uint64_t seed = 0;
};

struct AnalyzeArgs {
  std::string problem;  // mean | linreg
  std::string family = "dpsgd";
  double param = 0.1;
  std::string spectrum = "const:1";
  double eta = 0.1;
  double rho = 1.0;
  double clip_G = 1.0;
  double sigma_sgd = 0.0;
  std::size_t steps = 2048;
  bool lower = false;
  bool upper = false;
  std::string form = "frequency";
  std::string out = "-";
  std::string format = "json";
  std::uint64_t seed = 0;
};

struct BoundArgs {
  double kappa = 10.0;
  double eta = 0.5;
  double rho = 1.0;
  int d = 1;
  std::string profile = "dpsgd";  // dpsgd | nu:<v> | optimize
  int grid = 1000;
  int t_max = 64;
  int budget = 6;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format = "json";
};

struct SimulateArgs {
  std::string problem = "meanest";  // meanest | linreg
  std::string family = "dpsgd";
  double param = 0.1;
  std::size_t steps = 2048;
  double eta = 0.1;
  double rho = 1.0;
  double clip_G = 1.0;
  double sigma_sgd = 0.0;
  bool no_clip = false;
  std::string spectrum = "const:4";
  double mean = 0.5;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string summary_out = "-";
};

struct SweepArgs {
  std::string axis = "dimension";
  std::vector<double> grid;
  std::string family = "nu";
  double param = 0.0;  // 0 -> auto nu = eta * min lambda_min
  std::size_t d = 128;
  double alpha = 1.0;
  double eta = 0.02;
  double rho = 0.5;
  double sigma_sgd = 0.0;
  std::size_t trials = 8;
  std::size_t t_cap = 200000;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string summary_out = "-";
};

int run_coeffs(const CoeffsArgs& a) {
  const auto family = cn::coeffs::family_from_string(a.family);
  const auto beta = cn::coeffs::make_coeffs(family, a.param, a.steps);
  std::string text;
  for (const double v : beta.values) {
    text += fmt17(v);
    text += '\n';
  }
  write_output(a.out, text);
  return 0;
}

int run_sensitivity(const SensitivityArgs& a) {
  const auto family = cn::coeffs::family_from_string(a.family);
  const auto beta = cn::coeffs::make_coeffs(family, a.param, a.steps);
  json rec;
  rec["family"] = a.family;
  rec["steps"] = a.steps;
  rec["gamma_T"] = cn::toeplitz::sensitivity_T(beta);
  if (a.limiting) {
    cn::spectral::QuadratureSpec quad;
    const double g =
        cn::toeplitz::sensitivity_inf(family_profile(family, a.param), quad);
    rec["gamma_inf"] = json_or_inf(g);
  }
  emit_record(rec, a.format, a.out);
  return 0;
}

int run_analyze(const AnalyzeArgs& a) {
  const auto family = cn::coeffs::family_from_string(a.family);
  const auto profile = family_profile(family, a.param);
  cn::spectral::QuadratureSpec quad;
  json rec;
  rec["problem"] = a.problem;
  rec["family"] = a.family;
  rec["param"] = a.param;
  rec["eta"] = a.eta;
  rec["rho"] = a.rho;
  const bool both = (!a.lower && !a.upper) || (a.lower && a.upper);
  if (a.problem == "mean") {
    cn::analysis::ProblemParams params;
    params.eta = a.eta;
    params.rho = a.rho;
    params.clip_G = a.clip_G;
    params.sigma_sgd = a.sigma_sgd;
    rec["F_inf"] = json_or_inf(cn::analysis::mean_finf(profile, params, quad));
  } else {
    const auto spectrum = parse_spectrum(a.spectrum);
    const auto params = cn::analysis::ProblemParams::standard(
        spectrum, a.eta, a.rho, a.clip_G, a.sigma_sgd);
    rec["d_eff"] = cn::analysis::effective_dim(spectrum);
    if (both || a.upper) {
      if (a.form == "time") {
        const auto beta = cn::coeffs::make_coeffs(family, a.param, a.steps);
        rec["upper"] = json_or_inf(cn::analysis::linreg_finf_upper(
            beta, spectrum, params, cn::analysis::BoundForm::time, quad));
      } else {
        rec["upper"] = json_or_inf(
            cn::analysis::linreg_finf_upper(profile, spectrum, params, quad));
      }
    }
    if (both || a.lower) {
      rec["lower"] = json_or_inf(
          cn::analysis::linreg_finf_lower(profile, spectrum, params, quad));
      rec["floor"] = cn::analysis::universal_floor(spectrum, params);
    }
  }
  emit_record(rec, a.format, a.out);
  return 0;
}

int run_bound(const BoundArgs& a) {
  cn::convex_bound::ConvexClass cls;
  cls.L = 1.0;
  cls.mu = 1.0 / a.kappa;
  cls.eta = a.eta;
  cls.G = 1.0;
  cls.sigma_sgd = 0.0;
  cls.rho = a.rho;
  cls.d = a.d;

  json rec;
  rec["kappa"] = a.kappa;
  rec["eta"] = a.eta;
  rec["profile"] = a.profile;
  rec["grid"] = a.grid;

  auto finish = [&](double bound, bool feasible, int iterations,
                    const cn::convex_bound::MultiplierSeq& lam) {
    rec["feasible"] = feasible;
    rec["bound"] = feasible ? json_or_inf(bound) : json();
    rec["iterations"] = iterations;
    int support = 0;
    for (const double v : lam.lam) {
      if (v > 0.0) ++support;
    }
    rec["lambda_support"] = support;
    emit_record(rec, a.format, a.out);
    return feasible ? 0 : kExitNumerical;
  };

  if (a.budget <= 0) {
    // Zero budget: evaluate the all-zero multiplier sequence as-is.
    cn::convex_bound::MultiplierSeq lam(a.t_max);
    const auto value = cn::convex_bound::bound_value(
        [](double) { return 1.0; }, lam, cls, a.grid);
    return finish(value ? *value : 0.0, value.has_value(), 0, lam);
  }

  if (a.profile == "optimize") {
    // Alternating minimization seeded from the best tuned-nu profile.
    double best_nu = 1.0;
    double best = std::numeric_limits<double>::infinity();
    cn::convex_bound::OptimizeResult best_res{
        cn::convex_bound::MultiplierSeq(a.t_max), 0.0, false, 0};
    for (const double nu : {1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005,
                            0.002, 0.001}) {
      auto prof = [nu](double w) {
        return std::sqrt(cn::spectral::one_pole_magnitude_sq(nu, w));
      };
      const auto res = cn::convex_bound::optimize_lambda(prof, cls, a.grid,
                                                         a.t_max, a.budget,
                                                         a.seed);
      if (res.feasible && res.bound < best) {
        best = res.bound;
        best_nu = nu;
        best_res = res;
      }
    }
    auto init = [best_nu](double w) {
      return std::sqrt(cn::spectral::one_pole_magnitude_sq(best_nu, w));
    };
    const auto alt = cn::convex_bound::optimize_profile(init, cls, a.grid,
                                                        a.t_max, a.budget,
                                                        a.seed);
    if (alt.feasible && alt.bound < best) {
      rec["rounds"] = alt.rounds;
      return finish(alt.bound, true, alt.rounds, alt.lam);
    }
    return finish(best, best_res.feasible, best_res.iterations, best_res.lam);
  }

  cn::spectral::Fn profile;
  if (a.profile == "dpsgd") {
    profile = [](double) { return 1.0; };
  } else if (a.profile.rfind("nu:", 0) == 0) {
    const double nu = std::stod(a.profile.substr(3));
    profile = [nu](double w) {
      return std::sqrt(cn::spectral::one_pole_magnitude_sq(nu, w));
    };
  } else {
    throw std::invalid_argument("--profile must be dpsgd, nu:<v>, or optimize");
  }
  const auto res = cn::convex_bound::optimize_lambda(profile, cls, a.grid,
                                                     a.t_max, a.budget, a.seed);
  return finish(res.bound, res.feasible, res.iterations, res.lam);
}

int run_simulate(const SimulateArgs& a) {
  const auto family = cn::coeffs::family_from_string(a.family);
  const auto beta = cn::coeffs::make_coeffs(family, a.param, a.steps);

  cn::engine::RunConfig cfg;
  cfg.T = a.steps;
  cfg.eta = a.eta;
  cfg.G = a.clip_G;
  cfg.clip_enabled = !a.no_clip;
  cfg.rho = a.rho;
  cfg.beta = beta;
  cfg.seed = a.seed;

  std::unique_ptr<cn::engine::GradOracle> oracle;
  cn::engine::Metric metric;
  if (a.problem == "meanest") {
    cfg.d = 1;
    cn::simlab::MeanEstProblem problem{a.mean, a.sigma_sgd, a.seed};
    oracle = std::make_unique<cn::simlab::MeanEstOracle>(problem, a.seed);
    const double m = a.mean;
    metric = [m](std::span<const double> theta) {
      // Mean-estimation suboptimality is the stationary variance (theta - m)^2.
      return (theta[0] - m) * (theta[0] - m);
    };
  } else {
    auto spectrum = parse_spectrum(a.spectrum);
    cfg.d = spectrum.dim();
    cn::simlab::LinRegProblem problem{spectrum, {}, a.sigma_sgd, a.seed};
    oracle = std::make_unique<cn::simlab::LinRegOracle>(problem, a.seed);
    auto lambda = spectrum.eigenvalues;
    metric = [lambda](std::span<const double> theta) {
      double s = 0.0;
      for (std::size_t j = 0; j < lambda.size(); ++j) {
        s += lambda[j] * theta[j] * theta[j];
      }
      return 0.5 * s;
    };
  }

  const auto log = cn::engine::run(*oracle, cfg, metric);

  std::string csv = "step,suboptimality\n";
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    csv += std::to_string(log.steps[i]);
    csv += ',';
    csv += fmt17(log.metric[i]);
    csv += '\n';
  }
  write_output(a.out, csv);

  double tail = 0.0;
  std::size_t n = 0;
  const std::size_t from = a.steps - a.steps / 4;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    if (log.steps[i] + 1 >= from) {
      tail += log.metric[i];
      ++n;
    }
  }
  json summary;
  summary["problem"] = a.problem;
  summary["family"] = a.family;
  summary["T"] = a.steps;
  summary["sigma_dp"] = log.sigma_dp;
  summary["private"] = log.is_private;
  summary["stationary_estimate"] = n ? tail / n : 0.0;
  summary["epsilon_at_delta_1e-6"] =
      log.is_private ? json(cn::engine::zcdp_to_eps(a.rho, 1e-6)) : json();
  write_output(a.summary_out, summary.dump(2) + "\n");
  return 0;
}

int run_sweep(const SweepArgs& a) {
  cn::simlab::SweepBase base;
  base.d = a.d;
  base.alpha = a.alpha;
  base.eta = a.eta;
  base.rho = a.rho;
  base.sigma_sgd = a.sigma_sgd;
  base.nu = a.param;
  base.trials = a.trials;
  base.t_cap = a.t_cap;
  base.seed = a.seed;
  if (a.family != "nu") {
    throw std::invalid_argument("sweep: only the nu family is supported");
  }
  const auto axis = cn::simlab::axis_from_string(a.axis);
  const auto result = cn::simlab::sweep(axis, a.grid, base);

  std::string csv = "axis_value,algorithm,estimate,stderr,d_eff,theory\n";
  for (const auto& p : result.points) {
    csv += fmt17(p.axis_value);
    csv += ',';
    csv += p.algorithm;
    csv += ',';
    csv += p.diverged ? "diverged" : fmt17(p.estimate);
    csv += ',';
    csv += fmt17(p.stderr_boot);
    csv += ',';
    csv += fmt17(p.d_eff);
    csv += ',';
    csv += fmt17(p.theory);
    csv += '\n';
  }
  write_output(a.out, csv);

  json rep;
  rep["axis"] = a.axis;
  rep["nu"] = result.nu;
  for (const auto& [name, fit] : result.fits) {
    rep["fits"][name] = {{"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"r_squared", fit.r_squared}};
  }
  for (const auto& [name, fit] : result.theory_fits) {
    rep["theory_fits"][name] = {{"slope", fit.slope},
                                {"intercept", fit.intercept},
                                {"r_squared", fit.r_squared}};
  }
  write_output(a.summary_out, rep.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlated-noise private optimization toolkit"};
  app.require_subcommand(1);

  CoeffsArgs ca;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "emit noise coefficients");
  coeffs_cmd->add_option("--family", ca.family, "coefficient family");
  coeffs_cmd->add_option("--param", ca.param, "family parameter (nu or eta)");
  coeffs_cmd->add_option("--steps", ca.steps, "sequence length T");
  coeffs_cmd->add_option("--out", ca.out, "output path (- for stdout)");
  coeffs_cmd->add_option("--seed", ca.seed, "unused; accepted for uniformity");

  SensitivityArgs sa;
  auto* sens_cmd = app.add_subcommand("sensitivity", "gamma_T / gamma_inf");
  sens_cmd->add_option("--family", sa.family, "coefficient family");
  sens_cmd->add_option("--param", sa.param, "family parameter");
  sens_cmd->add_option("--steps", sa.steps, "horizon T");
  sens_cmd->add_flag("--limiting", sa.limiting, "also report gamma_inf");
  sens_cmd->add_option("--out", sa.out, "output path");
  sens_cmd->add_option("--format", sa.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sens_cmd->add_option("--seed", sa.seed, "unused; accepted for uniformity");

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "asymptotic suboptimality");
  analyze_cmd->add_option("problem", aa.problem, "mean | linreg")
      ->required()
      ->check(CLI::IsMember({"mean", "linreg"}));
  analyze_cmd->add_option("--family", aa.family, "coefficient family");
  analyze_cmd->add_option("--param", aa.param, "family parameter");
  analyze_cmd->add_option("--spectrum", aa.spectrum,
                          "const:<d> | pow:<a>:<d> | file");
  analyze_cmd->add_option("--eta", aa.eta, "learning rate");
  analyze_cmd->add_option("--rho", aa.rho, "zCDP budget");
  analyze_cmd->add_option("--clip-G", aa.clip_G, "clip norm");
  analyze_cmd->add_option("--sigma-sgd", aa.sigma_sgd, "gradient noise level");
  analyze_cmd->add_option("--steps", aa.steps, "materialized T (time form)");
  analyze_cmd->add_flag("--lower", aa.lower, "lower bound only");
  analyze_cmd->add_flag("--upper", aa.upper, "upper bound only");
  analyze_cmd->add_option("--form", aa.form, "time | frequency")
      ->check(CLI::IsMember({"time", "frequency"}));
  analyze_cmd->add_option("--out", aa.out, "output path");
  analyze_cmd->add_option("--format", aa.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  analyze_cmd->add_option("--seed", aa.seed, "unused; accepted for uniformity");

  BoundArgs ba;
  auto* bound_cmd = app.add_subcommand("bound", "convex upper bound on F_inf");
  bound_cmd->add_option("--kappa", ba.kappa, "condition number L/mu (L = 1)");
  bound_cmd->add_option("--eta", ba.eta, "learning rate");
  bound_cmd->add_option("--rho", ba.rho, "zCDP budget");
  bound_cmd->add_option("--d", ba.d, "dimension factor");
  bound_cmd->add_option("--profile", ba.profile, "dpsgd | nu:<v> | optimize");
  bound_cmd->add_option("--grid", ba.grid, "frequency grid size");
  bound_cmd->add_option("--t-max", ba.t_max, "multiplier support window");
  bound_cmd->add_option("--budget", ba.budget, "search passes (0: no search)");
  bound_cmd->add_option("--seed", ba.seed, "search seed");
  bound_cmd->add_option("--out", ba.out, "output path");
  bound_cmd->add_option("--format", ba.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));

  SimulateArgs ma;
  auto* sim_cmd = app.add_subcommand("simulate", "run the optimizer loop");
  sim_cmd->add_option("--problem", ma.problem, "meanest | linreg")
      ->check(CLI::IsMember({"meanest", "linreg"}));
  sim_cmd->add_option("--family", ma.family, "coefficient family");
  sim_cmd->add_option("--param", ma.param, "family parameter");
  sim_cmd->add_option("--steps", ma.steps, "horizon T");
  sim_cmd->add_option("--eta", ma.eta, "learning rate");
  sim_cmd->add_option("--rho", ma.rho, "zCDP budget");
  sim_cmd->add_option("--clip-G", ma.clip_G, "clip norm / noise scale");
  sim_cmd->add_flag("--no-clip", ma.no_clip, "disable clipping (non-private)");
  sim_cmd->add_option("--sigma-sgd", ma.sigma_sgd, "gradient noise level");
  sim_cmd->add_option("--spectrum", ma.spectrum, "linreg spectrum");
  sim_cmd->add_option("--mean", ma.mean, "meanest target mean");
  sim_cmd->add_option("--seed", ma.seed, "run seed");
  sim_cmd->add_option("--out", ma.out, "trace CSV path");
  sim_cmd->add_option("--summary-out", ma.summary_out, "JSON summary path");

  SweepArgs wa;
  auto* sweep_cmd = app.add_subcommand("sweep", "stationary-error slope sweep");
  sweep_cmd->add_option("--axis", wa.axis,
                        "dimension | eigen_decay | learning_rate");
  sweep_cmd->add_option("--grid", wa.grid, "axis values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--family", wa.family, "coefficient family (nu)");
  sweep_cmd->add_option("--param", wa.param, "nu (0: auto eta*lambda_min)");
  sweep_cmd->add_option("--d", wa.d, "base dimension");
  sweep_cmd->add_option("--alpha", wa.alpha, "base eigenvalue decay");
  sweep_cmd->add_option("--eta", wa.eta, "base learning rate");
  sweep_cmd->add_option("--rho", wa.rho, "zCDP budget");
  sweep_cmd->add_option("--sigma-sgd", wa.sigma_sgd, "gradient noise level");
  sweep_cmd->add_option("--trials", wa.trials, "trials per point");
  sweep_cmd->add_option("--t-cap", wa.t_cap, "horizon cap");
  sweep_cmd->add_option("--seed", wa.seed, "sweep seed");
  sweep_cmd->add_option("--out", wa.out, "long-format CSV path");
  sweep_cmd->add_option("--summary-out", wa.summary_out, "JSON slope report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (coeffs_cmd->parsed()) return run_coeffs(ca);
    if (sens_cmd->parsed()) return run_sensitivity(sa);
    if (analyze_cmd->parsed()) return run_analyze(aa);
    if (bound_cmd->parsed()) return run_bound(ba);
    if (sim_cmd->parsed()) return run_simulate(ma);
    if (sweep_cmd->parsed()) return run_sweep(wa);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const corrnoise::engine::divergence_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const corrnoise::spectral::numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
