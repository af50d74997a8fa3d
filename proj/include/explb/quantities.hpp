#pragma once

// Scalar quantities and tuning rules: per-round spread, relative quadratic
// variation, the second-order quantities driving the regret bounds, the
// learning-rate and bias tuning formulas, and the log-sum-exp potential whose
// Hessian quadratic form the tests use as a numerical oracle.
//
// All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "explb/core.hpp"

namespace explb {

// d(x) = max_i x_i - min_i x_i.
inline double spread(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("spread: empty vector");
  auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  return *mx - *mn;
}

// q(x_{1:T}) = sum_t d(x_t)^2.
inline double relative_quadratic_variation(const RoundMatrix& seq) {
  double q = 0.0;
  for (int t = 0; t < seq.horizon(); ++t) {
    const double d = spread(seq.round(t));
    q += d * d;
  }
  return q;
}

inline double relative_quadratic_variation(const std::vector<std::vector<double>>& seq) {
  double q = 0.0;
  std::size_t n = seq.empty() ? 0 : seq[0].size();
  for (const auto& row : seq) {
    if (row.size() != n)
      throw std::invalid_argument("relative_quadratic_variation: ragged input");
    const double d = spread(std::span<const double>(row.data(), row.size()));
    q += d * d;
  }
  return q;
}

// One round's contribution to the second-order quantity:
//   (1/2) d(lb)^2 + 2 ||s||^2 + 4 max_i(s_i) d(lb).
inline double second_order_round_term(std::span<const double> lower_bounds,
                                      std::span<const double> slacks) {
  if (lower_bounds.size() != slacks.size())
    throw std::invalid_argument("second_order_round_term: size mismatch");
  const double d = spread(lower_bounds);
  double ssq = 0.0, smax = 0.0;
  for (double s : slacks) {
    if (s < 0.0) throw std::invalid_argument("second_order_round_term: negative slack");
    ssq += s * s;
    smax = std::max(smax, s);
  }
  return 0.5 * d * d + 2.0 * ssq + 4.0 * smax * d;
}

struct BoundQuantities {
  double q_lb = 0.0;          // q(lower_bounds) = sum_t d(lb_t)^2
  double sum_sq_slack = 0.0;  // sum_t ||s_t||^2
  double hybrid = 0.0;        // sum_t max_i(s_{i,t}) d(lb_t)
  double Q_theorem = 0.0;     // q_lb/2 + 2 sum_sq_slack + 4 hybrid
  double Q_prime = 0.0;       // 4 (q_lb + sum_sq_slack)
  std::optional<double> Q_uh; // pessimistic unknown-horizon quantity
};

// Evaluates the tight second-order quantity and its simplified relaxation.
// Satisfies (q_lb + sum_sq_slack)/2 <= Q_theorem <= 4 (q_lb + sum_sq_slack).
inline BoundQuantities bound_quantities(const RoundMatrix& lower_bounds, const RoundMatrix& slacks) {
  if (lower_bounds.num_experts() != slacks.num_experts() ||
      lower_bounds.horizon() != slacks.horizon())
    throw std::invalid_argument("bound_quantities: dimension mismatch");
  BoundQuantities b;
  for (int t = 0; t < lower_bounds.horizon(); ++t) {
    const double d = spread(lower_bounds.round(t));
    double ssq = 0.0, smax = 0.0;
    for (double s : slacks.round(t)) {
      if (s < 0.0) throw std::invalid_argument("bound_quantities: negative slack");
      ssq += s * s;
      smax = std::max(smax, s);
    }
    b.q_lb += d * d;
    b.sum_sq_slack += ssq;
    b.hybrid += smax * d;
  }
  b.Q_theorem = 0.5 * b.q_lb + 2.0 * b.sum_sq_slack + 4.0 * b.hybrid;
  b.Q_prime = 4.0 * (b.q_lb + b.sum_sq_slack);
  return b;
}

// Per-round contribution to the pessimistic quantity, computable from the
// lower bounds alone (slacks replaced by 1 - lb). Needs lb in [0,1].
inline double unknown_horizon_round_term(std::span<const double> lower_bounds) {
  const double d = spread(lower_bounds);
  double ssq = 0.0, smax = 0.0;
  for (double lb : lower_bounds) {
    if (lb < 0.0 || lb > 1.0)
      throw std::invalid_argument("unknown_horizon_round_term: lower bound outside [0,1]");
    const double s = 1.0 - lb;
    ssq += s * s;
    smax = std::max(smax, s);
  }
  return 0.5 * d * d + 2.0 * ssq + 4.0 * smax * d;
}

inline double Q_unknown_horizon(const RoundMatrix& lower_bounds) {
  double q = 0.0;
  for (int t = 0; t < lower_bounds.horizon(); ++t)
    q += unknown_horizon_round_term(lower_bounds.round(t));
  return q;
}

// eta = sqrt(4 log N / Q).
inline double tune_eta(double q, int num_experts) {
  if (!(q > 0.0)) throw std::invalid_argument("tune_eta: Q must be positive");
  if (num_experts < 2) throw std::invalid_argument("tune_eta: need at least two experts");
  return std::sqrt(4.0 * std::log(static_cast<double>(num_experts)) / q);
}

enum class EtaPreset { full_info, bandit, mixed, variable_subset };

struct PresetParams {
  int num_experts = 0;
  double q = 0.0;                 // full_info: upper bound on q(l_{1:T})
  long long horizon = 0;          // bandit, variable_subset: T
  long long full_info_rounds = 0; // mixed: T_f
  long long bandit_rounds = 0;    // mixed: T_b
  double sum_missing = 0.0;       // variable_subset: sum_t (N - |S_t|)
};

// The preset's second-order quantity, stated so that tune_eta(Q, N)
// reproduces the scenario's stated learning rate and sqrt(Q log N) its bound:
//   full_info       Q = q / 2
//   bandit          Q = 2 N T
//   mixed           Q = T_f / 2 + 2 N T_b
//   variable_subset Q = 9 T / 2 + 2 sum_t (N - |S_t|)
inline double preset_quantity(EtaPreset preset, const PresetParams& p) {
  const double n = static_cast<double>(p.num_experts);
  switch (preset) {
    case EtaPreset::full_info:
      if (!(p.q > 0.0)) throw std::invalid_argument("preset full_info: q must be positive");
      return 0.5 * p.q;
    case EtaPreset::bandit:
      if (p.horizon < 1) throw std::invalid_argument("preset bandit: horizon must be positive");
      return 2.0 * n * static_cast<double>(p.horizon);
    case EtaPreset::mixed:
      if (p.full_info_rounds < 0 || p.bandit_rounds < 0 ||
          p.full_info_rounds + p.bandit_rounds < 1)
        throw std::invalid_argument("preset mixed: need T_f, T_b >= 0 with T_f + T_b >= 1");
      return 0.5 * static_cast<double>(p.full_info_rounds) +
             2.0 * n * static_cast<double>(p.bandit_rounds);
    case EtaPreset::variable_subset:
      if (p.horizon < 1 || p.sum_missing < 0.0)
        throw std::invalid_argument("preset variable_subset: need T >= 1 and sum_missing >= 0");
      return 4.5 * static_cast<double>(p.horizon) + 2.0 * p.sum_missing;
  }
  throw std::invalid_argument("preset_quantity: unknown preset");
}

inline double tune_eta_preset(EtaPreset preset, const PresetParams& p) {
  return tune_eta(preset_quantity(preset, p), p.num_experts);
}

enum class BetaMode { hp_i, hp_ii, hp_iii };

struct BetaTuning {
  double beta = 0.0;
  double q_used = 0.0;      // Q after any required substitution
  bool q_substituted = false;
};

// Bias tuning for the high-probability learner. Modes hp_i and hp_iii fold
// the union bound in via delta' = delta / (N + 3); hp_iii additionally
// requires Q >= 2T and substitutes max{Q, 2T} before use.
inline BetaTuning tune_beta(double q, int num_experts, double delta, BetaMode mode,
                            std::optional<long long> horizon = std::nullopt) {
  if (!(q > 0.0)) throw std::invalid_argument("tune_beta: Q must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("tune_beta: delta must lie in (0,1)");
  if (num_experts < 1) throw std::invalid_argument("tune_beta: need at least one expert");
  const double log_inv_delta_prime =
      std::log((static_cast<double>(num_experts) + 3.0) / delta);
  switch (mode) {
    case BetaMode::hp_i:
      return {std::sqrt((2.0 / q) * log_inv_delta_prime), q, false};
    case BetaMode::hp_ii:
      return {std::sqrt(2.0 / q), q, false};
    case BetaMode::hp_iii: {
      if (!horizon) throw std::invalid_argument("tune_beta: hp_iii requires the horizon");
      const double q2 = std::max(q, 2.0 * static_cast<double>(*horizon));
      return {std::min(1.0, std::sqrt((2.0 / q2) * log_inv_delta_prime)), q2, q2 != q};
    }
  }
  throw std::invalid_argument("tune_beta: unknown mode");
}

// Phi(z) = -(1/eta) log sum_j p0_j exp(-eta z_j), in shifted form.
// Satisfies Phi(c 1 + z) = c + Phi(z) and Phi(0) = 0.
inline double potential_phi(std::span<const double> z, double eta, const ProbabilityVector& p0) {
  if (!(eta > 0.0)) throw std::invalid_argument("potential_phi: eta must be positive");
  if (static_cast<int>(z.size()) != p0.size())
    throw std::invalid_argument("potential_phi: size mismatch");
  double m = std::numeric_limits<double>::infinity();
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("potential_phi: non-finite entry");
    m = std::min(m, v);
  }
  double s = 0.0;
  for (int i = 0; i < p0.size(); ++i) s += p0[i] * std::exp(-eta * (z[i] - m));
  return m - std::log(s) / eta;
}

// x^T grad^2 Phi(z) x = -eta Var(Y), where Y takes value x_i with probability
// p_i and p = grad Phi(z) is the softmax of -eta z weighted by p0. The
// variance is accumulated as sum p_i (x_i - mean)^2, so the result is never
// pushed above zero by rounding.
inline double hessian_quadratic_form(std::span<const double> z, std::span<const double> x,
                                     double eta, const ProbabilityVector& p0) {
  if (!(eta > 0.0)) throw std::invalid_argument("hessian_quadratic_form: eta must be positive");
  if (z.size() != x.size() || static_cast<int>(z.size()) != p0.size())
    throw std::invalid_argument("hessian_quadratic_form: size mismatch");
  double m = std::numeric_limits<double>::infinity();
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("hessian_quadratic_form: non-finite entry");
    m = std::min(m, v);
  }
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("hessian_quadratic_form: non-finite entry");
  const int n = p0.size();
  std::vector<double> p(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = p0[i] * std::exp(-eta * (z[i] - m));
    total += p[i];
  }
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] /= total;
    mean += p[i] * x[i];
  }
  double var = 0.0;
  for (int i = 0; i < n; ++i) var += p[i] * (x[i] - mean) * (x[i] - mean);
  return -eta * var;
}

// Variance bound (M - m)^2 / 4 for a random variable supported on [m, M].
inline double popoviciu_bound(double m, double M) {
  if (M < m) throw std::invalid_argument("popoviciu_bound: M must be >= m");
  return (M - m) * (M - m) / 4.0;
}

}  // namespace explb
