#include "corrnoise/convex_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "corrnoise/rng.hpp"
#include "corrnoise/toeplitz.hpp"

namespace corrnoise::convex_bound {
namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

using cplx = std::complex<double>;

// Entries of P(w) = A*(w) Mtilde_lambda(w) A(w) for the 2x2 scalar blocks
//   A = [[eta, 0], [1 - e^{iw}, -eta]],
//   Mtilde = [[-2 mu L Re(Lam),     mu Lam + L conj(Lam)],
//             [mu conj(Lam) + L Lam, -2 Re(Lam)          ]].
struct PMat {
  double p11;  // real on the diagonal (P Hermitian)
  cplx p12;
  double p22;
};

PMat p_matrix(double omega, const MultiplierSeq& lam, const ConvexClass& cls) {
  const cplx Lam = lambda_dtft(lam, omega);
  const double re = Lam.real();
  const cplx m12 = cls.mu * Lam + cls.L * std::conj(Lam);
  const double m11 = -2.0 * cls.mu * cls.L * re;
  const double m22 = -2.0 * re;
  const cplx e(std::cos(omega), std::sin(omega));
  const cplx a21 = 1.0 - e;  // A(2,1)
  const double eta = cls.eta;

  // Columns of A: a1 = (eta, a21), a2 = (0, -eta).
  // P11 = a1* M a1, P12 = a1* M a2, P22 = a2* M a2 with M = Mtilde.
  const cplx Ma1_1 = m11 * eta + m12 * a21;
  const cplx Ma1_2 = std::conj(m12) * eta + m22 * a21;
  const cplx Ma2_1 = m12 * (-eta);
  const cplx Ma2_2 = m22 * (-eta);

  PMat p;
  p.p11 = (eta * Ma1_1 + std::conj(a21) * Ma1_2).real();
  p.p12 = eta * Ma2_1 + std::conj(a21) * Ma2_2;
  p.p22 = (-eta * Ma2_2).real();
  return p;
}

}  // namespace

MultiplierSeq::MultiplierSeq(int window) : t_max(window) {
  if (window < 0) throw std::invalid_argument("MultiplierSeq: window >= 0");
  lam.assign(2 * static_cast<std::size_t>(window) + 1, 0.0);
}

bool MultiplierSeq::valid(double tol) const {
  double sum = 0.0;
  for (const double v : lam) {
    if (v < -tol) return false;
    sum += v;
  }
  return sum <= 2.0 * at(0) + tol;
}

std::complex<double> lambda_dtft(const MultiplierSeq& lam, double omega) {
  cplx acc(0.0, 0.0);
  for (int t = -lam.t_max; t <= lam.t_max; ++t) {
    const double v = lam.at(t);
    if (v != 0.0) {
      acc += v * cplx(std::cos(omega * t), -std::sin(omega * t));
    }
  }
  return acc;
}

std::optional<double> min_psi(double omega, const MultiplierSeq& lam,
                              const ConvexClass& cls) {
  const PMat p = p_matrix(omega, lam, cls);
  const double n11 = -cls.eta * cls.eta - p.p11;
  const cplx n12 = -p.p12;
  if (n11 < 0.0) return std::nullopt;
  if (n11 == 0.0) {
    if (std::norm(n12) > 0.0) return std::nullopt;  // corner case
    return std::max(0.0, p.p22);
  }
  return std::max(0.0, p.p22 + std::norm(n12) / n11);
}

double min_eig_N(double omega, const MultiplierSeq& lam,
                 const ConvexClass& cls, double psi) {
  const PMat p = p_matrix(omega, lam, cls);
  const double n11 = -cls.eta * cls.eta - p.p11;
  const double n22 = psi - p.p22;
  const double offsq = std::norm(-p.p12);
  const double tr = n11 + n22;
  const double det = n11 * n22 - offsq;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return 0.5 * (tr - disc);
}

std::vector<double> omega_grid(int grid_k) {
  std::vector<double> w(grid_k);
  const double dw = 2.0 * kPi / grid_k;
  for (int j = 0; j < grid_k; ++j) w[j] = -kPi + (j + 0.5) * dw;
  return w;
}

namespace {

// Evaluation state shared by bound_value and the lambda search: the grid,
// the DP weights u_j, and the cosine table for fast symmetric-lambda DTFTs.
struct GridEval {
  ConvexClass cls;
  int grid_k;
  double dw;
  std::vector<double> omegas;   // positive half of the midpoint grid
  std::vector<double> weights;  // u_j = G^2/rho * |B|^2 * gamma^2 + sigma^2
  double prefactor;             // L*d/(2 pi eta^2), doubled half-grid sum

  // Objective for symmetric multipliers given per-omega psi_min; +inf when
  // any grid point is infeasible.
  double objective(const MultiplierSeq& lam) const {
    double s = 0.0;
    for (std::size_t j = 0; j < omegas.size(); ++j) {
      const auto psi = min_psi(omegas[j], lam, cls);
      if (!psi) return kInf;
      s += weights[j] * *psi;
    }
    return prefactor * 2.0 * s * dw;
  }
};

GridEval make_grid_eval(const spectral::Fn& bmagsq, const ConvexClass& cls,
                        int grid_k, double gamma_sq) {
  GridEval ge;
  ge.cls = cls;
  ge.grid_k = grid_k;
  ge.dw = 2.0 * kPi / grid_k;
  const auto grid = omega_grid(grid_k);
  for (const double w : grid) {
    if (w > 0.0) ge.omegas.push_back(w);
  }
  ge.weights.resize(ge.omegas.size());
  const double dp = cls.G * cls.G / cls.rho;
  const double s2 = cls.sigma_sgd * cls.sigma_sgd;
  for (std::size_t j = 0; j < ge.omegas.size(); ++j) {
    ge.weights[j] = dp * bmagsq(ge.omegas[j]) * gamma_sq + s2;
  }
  ge.prefactor = cls.L * cls.d / (2.0 * kPi * cls.eta * cls.eta);
  return ge;
}

double gamma_sq_of(const spectral::Fn& bmagsq) {
  spectral::QuadratureSpec quad;
  const double g = toeplitz::sensitivity_inf(bmagsq, quad);
  return g * g;  // +inf propagates
}

MultiplierSeq spike(int t_max, double value) {
  MultiplierSeq lam(t_max);
  lam.at(0) = value;
  return lam;
}

// Projection used by the coordinate search: clip negatives to 0, then
// rescale the tail so sum lambda <= 2*lambda_0.
void project(MultiplierSeq& lam) {
  for (double& v : lam.lam) v = std::max(0.0, v);
  const double l0 = lam.at(0);
  double tail = 0.0;
  for (int t = -lam.t_max; t <= lam.t_max; ++t) {
    if (t != 0) tail += lam.at(t);
  }
  if (tail > l0 && tail > 0.0) {
    const double scale = l0 / tail;
    for (int t = -lam.t_max; t <= lam.t_max; ++t) {
      if (t != 0) lam.at(t) *= scale;
    }
  }
}

void set_symmetric(MultiplierSeq& lam, int t, double v) {
  lam.at(t) = v;
  lam.at(-t) = v;
}

}  // namespace

std::optional<double> bound_value(const spectral::Fn& bmagsq,
                                  const MultiplierSeq& lam,
                                  const ConvexClass& cls, int grid_k) {
  if (grid_k < 64) throw std::invalid_argument("bound_value: grid_k >= 64");
  if (!lam.valid()) {
    throw std::invalid_argument("bound_value: invalid multiplier sequence");
  }
  const double g2 = gamma_sq_of(bmagsq);
  if (std::isinf(g2)) {
    // Feasibility still depends on lambda alone; the value is infinite.
    const GridEval ge = make_grid_eval([](double) { return 1.0; }, cls, grid_k,
                                       1.0);
    return std::isinf(ge.objective(lam)) ? std::optional<double>()
                                         : std::optional<double>(kInf);
  }
  const GridEval ge = make_grid_eval(bmagsq, cls, grid_k, g2);
  const double v = ge.objective(lam);
  if (std::isinf(v)) return std::nullopt;
  return v;
}

OptimizeResult optimize_lambda(const spectral::Fn& bmagsq,
                               const ConvexClass& cls, int grid_k, int t_max,
                               int budget, std::uint64_t seed) {
  return optimize_lambda(bmagsq, cls, grid_k, t_max, budget, seed,
                         MultiplierSeq(t_max));
}

OptimizeResult optimize_lambda(const spectral::Fn& bmagsq,
                               const ConvexClass& cls, int grid_k, int t_max,
                               int budget, std::uint64_t seed,
                               const MultiplierSeq& init) {
  if (t_max < 1) throw std::invalid_argument("optimize_lambda: t_max >= 1");
  if (grid_k < 64) throw std::invalid_argument("optimize_lambda: grid_k >= 64");
  const double g2 = gamma_sq_of(bmagsq);
  const GridEval ge = make_grid_eval(bmagsq, cls, grid_k,
                                     std::isinf(g2) ? 1.0 : g2);

  MultiplierSeq best(t_max);
  double best_v = kInf;
  int evals = 0;
  auto consider = [&](const MultiplierSeq& lam) {
    ++evals;
    const double v = ge.objective(lam);
    if (v < best_v) {
      best_v = v;
      best = lam;
      return true;
    }
    return false;
  };

  // Warm start (resized into this window) and single-spike initializations.
  if (init.t_max >= 0) {
    MultiplierSeq warm(t_max);
    for (int t = -t_max; t <= t_max; ++t) {
      if (std::abs(t) <= init.t_max) warm.at(t) = init.at(t);
    }
    project(warm);
    consider(warm);
  }
  const double base = 1.0 / (2.0 * cls.mu * cls.L);
  for (const double mult : {1.05, 1.5, 2.0, 3.0, 5.0, 8.0, 16.0, 32.0}) {
    consider(spike(t_max, base * mult));
  }

  if (std::isinf(best_v)) {
    return {best, kInf, false, evals};
  }

  // Projected coordinate descent over the symmetric coordinates with a
  // multiplicative probe set, then seeded random probes.
  const int passes = std::max(1, budget);
  for (int pass = 0; pass < passes; ++pass) {
    const double before = best_v;
    for (int t = 0; t <= t_max; ++t) {
      const double cur = best.at(t);
      const double ref = cur > 0.0 ? cur : 0.05 * best.at(0);
      for (const double m : {0.0, 0.25, 0.5, 0.8, 0.9, 1.1, 1.25, 2.0, 4.0}) {
        MultiplierSeq cand = best;
        set_symmetric(cand, t, ref * m);
        project(cand);
        consider(cand);
      }
    }
    // Random two-coordinate probes keep the search from stalling on axes.
    for (int probe = 0; probe < 8 * t_max; ++probe) {
      const std::uint64_t stepid =
          static_cast<std::uint64_t>(pass) * 100000 + probe;
      const int t1 = static_cast<int>(
          rng::uniform(seed, rng::kSearch, stepid, 0) * (t_max + 1));
      const int t2 = static_cast<int>(
          rng::uniform(seed, rng::kSearch, stepid, 1) * (t_max + 1));
      const double f1 = 0.25 + 1.5 * rng::uniform(seed, rng::kSearch, stepid, 2);
      const double f2 = 0.25 + 1.5 * rng::uniform(seed, rng::kSearch, stepid, 3);
      MultiplierSeq cand = best;
      const double r1 = cand.at(t1) > 0.0 ? cand.at(t1) : 0.05 * cand.at(0);
      const double r2 = cand.at(t2) > 0.0 ? cand.at(t2) : 0.05 * cand.at(0);
      set_symmetric(cand, std::min(t1, t_max), r1 * f1);
      set_symmetric(cand, std::min(t2, t_max), r2 * f2);
      project(cand);
      consider(cand);
    }
    if (best_v > (1.0 - 1e-6) * before) break;  // no meaningful progress
  }

  const double final_bound = std::isinf(g2) && std::isfinite(best_v)
                                 ? kInf
                                 : best_v;
  return {best, final_bound, std::isfinite(best_v), evals};
}

std::vector<double> optimize_B(std::span<const double> psi_grid,
                               const ConvexClass&) {
  if (psi_grid.empty()) throw std::invalid_argument("optimize_B: empty grid");
  for (const double p : psi_grid) {
    if (!(p > 0.0)) {
      throw std::invalid_argument("optimize_B: psi must be positive on grid");
    }
  }
  // |B|^2 ~ 1/sqrt(psi), normalized to 1 at the gridpoint nearest pi (the
  // last entry of the positive-half grid).
  const double ref = psi_grid.back();
  std::vector<double> b(psi_grid.size());
  for (std::size_t j = 0; j < psi_grid.size(); ++j) {
    b[j] = std::sqrt(ref / psi_grid[j]);
  }
  return b;
}

spectral::Fn grid_profile(std::vector<double> values, int grid_k) {
  // values are on the positive half of the midpoint grid.
  const double dw = 2.0 * kPi / grid_k;
  const double first = 0.5 * dw;
  return [values = std::move(values), dw, first](double omega) {
    const double w = std::abs(omega);
    if (w <= first) return values.front();
    const double pos = (w - first) / dw;
    const std::size_t j = static_cast<std::size_t>(pos);
    if (j + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(j);
    return values[j] * (1.0 - frac) + values[j + 1] * frac;
  };
}

AlternatingResult optimize_profile(const spectral::Fn& init_bmagsq,
                                   const ConvexClass& cls, int grid_k,
                                   int t_max, int budget, std::uint64_t seed) {
  AlternatingResult res;
  res.lam = MultiplierSeq(t_max);
  res.bmagsq_grid.clear();

  OptimizeResult lam_res =
      optimize_lambda(init_bmagsq, cls, grid_k, t_max, budget, seed);
  if (!lam_res.feasible) {
    res.feasible = false;
    return res;
  }
  spectral::Fn cur_b = init_bmagsq;
  // Materialize the incumbent profile on the positive half-grid.
  std::vector<double> half;
  for (const double w : omega_grid(grid_k)) {
    if (w > 0.0) half.push_back(init_bmagsq(w));
  }
  res.bmagsq_grid = half;
  res.lam = lam_res.lam;
  res.bound = lam_res.bound;
  res.bound_history.push_back(res.bound);
  res.feasible = true;

  for (int round = 1; round <= 20; ++round) {
    // psi for the incumbent multipliers, floored away from zero for the
    // Cauchy-Schwarz step.
    std::vector<double> psi;
    psi.reserve(half.size());
    double psi_max = 0.0;
    bool ok = true;
    std::vector<double> omegas;
    for (const double w : omega_grid(grid_k)) {
      if (w > 0.0) omegas.push_back(w);
    }
    for (const double w : omegas) {
      const auto p = min_psi(w, res.lam, cls);
      if (!p) {
        ok = false;
        break;
      }
      psi.push_back(*p);
      psi_max = std::max(psi_max, *p);
    }
    if (!ok || psi_max <= 0.0) break;
    for (double& p : psi) p = std::max(p, 1e-10 * psi_max);

    std::vector<double> cand_grid = optimize_B(psi, cls);
    spectral::Fn cand_b = grid_profile(cand_grid, grid_k);
    OptimizeResult cand_lam = optimize_lambda(cand_b, cls, grid_k, t_max,
                                              budget, seed, res.lam);
    res.rounds = round;
    if (!cand_lam.feasible || !(cand_lam.bound < res.bound)) {
      break;  // incumbent rule: never accept a worse round
    }
    const double rel = (res.bound - cand_lam.bound) / res.bound;
    res.bmagsq_grid = std::move(cand_grid);
    res.lam = cand_lam.lam;
    res.bound = cand_lam.bound;
    res.bound_history.push_back(res.bound);
    if (rel < 1e-4) break;
  }
  return res;
}

}  // namespace corrnoise::convex_bound
