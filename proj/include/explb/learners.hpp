#pragma once

// The learner family behind one step interface: Hedge (full information),
// Exp3 (bandit), Exp3.LB (lower-bounded losses), Exp3.alpha / Exp3.UB
// (arbitrary side quantities / upper bounds), Exp3.LB.P (high-probability
// variant with a corrected slack estimate), and a doubling-trick wrapper
// around Exp3.LB for unknown horizons.
//
// A step consumes one round of feedback, adds the estimated losses into the
// cumulative estimate, and emits the next distribution, which is always the
// softmax of -eta * cum_est_losses.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "explb/core.hpp"
#include "explb/quantities.hpp"

namespace explb {

enum class Algorithm { hedge, exp3, exp3lb, exp3alpha, exp3ub, exp3lbp, exp3lb_doubling };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::hedge: return "hedge";
    case Algorithm::exp3: return "exp3";
    case Algorithm::exp3lb: return "exp3lb";
    case Algorithm::exp3alpha: return "exp3alpha";
    case Algorithm::exp3ub: return "exp3ub";
    case Algorithm::exp3lbp: return "exp3lbp";
    case Algorithm::exp3lb_doubling: return "exp3lb_doubling";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::hedge, Algorithm::exp3, Algorithm::exp3lb, Algorithm::exp3alpha,
                      Algorithm::exp3ub, Algorithm::exp3lbp, Algorithm::exp3lb_doubling})
    if (s == algorithm_name(a)) return a;
  throw std::invalid_argument(
      "unknown algorithm \"" + s +
      "\" (expected hedge|exp3|exp3lb|exp3alpha|exp3ub|exp3lbp|exp3lb_doubling)");
}

struct LearnerState {
  Algorithm algorithm = Algorithm::exp3lb;
  double eta = 1.0;
  double beta = 0.0;  // used by exp3lbp only
  std::vector<double> cum_est_losses;
  int round = 0;  // completed rounds
};

inline LearnerState make_learner(Algorithm algorithm, int num_experts, double eta,
                                 double beta = 0.0) {
  if (algorithm == Algorithm::exp3lb_doubling)
    throw std::invalid_argument("make_learner: use make_doubling_learner for the wrapper");
  if (num_experts < 1) throw std::invalid_argument("make_learner: need at least one expert");
  if (!(eta > 0.0)) throw std::invalid_argument("make_learner: eta must be positive");
  if (beta < 0.0) throw std::invalid_argument("make_learner: beta must be nonnegative");
  return {algorithm, eta, beta, std::vector<double>(num_experts, 0.0), 0};
}

// The distribution the learner plays next; uniform before any feedback.
inline ProbabilityVector current_distribution(const LearnerState& s) {
  return distribution_from_cumloss(s.eta, s.cum_est_losses);
}

// Importance-weighted estimate: chosen coordinate gets loss / p, others 0.
inline std::vector<double> exp3_estimate(int chosen, double chosen_loss,
                                         const ProbabilityVector& p) {
  if (chosen < 0 || chosen >= p.size()) throw std::out_of_range("exp3_estimate: bad index");
  if (!std::isfinite(chosen_loss)) throw std::invalid_argument("exp3_estimate: non-finite loss");
  std::vector<double> est(p.size(), 0.0);
  est[chosen] = chosen_loss / p[chosen];
  return est;
}

// Lower bounds everywhere; the chosen coordinate adds the importance-weighted
// observed slack (loss - lb) / p.
inline std::vector<double> exp3lb_estimate(int chosen, double chosen_loss,
                                           std::span<const double> lower_bounds,
                                           const ProbabilityVector& p) {
  if (chosen < 0 || chosen >= p.size()) throw std::out_of_range("exp3lb_estimate: bad index");
  if (static_cast<int>(lower_bounds.size()) != p.size())
    throw std::invalid_argument("exp3lb_estimate: size mismatch");
  if (!std::isfinite(chosen_loss)) throw std::invalid_argument("exp3lb_estimate: non-finite loss");
  if (lower_bounds[chosen] > chosen_loss)
    throw std::invalid_argument("exp3lb_estimate: observed slack is negative");
  std::vector<double> est(lower_bounds.begin(), lower_bounds.end());
  est[chosen] += (chosen_loss - lower_bounds[chosen]) / p[chosen];
  return est;
}

// Same shape with arbitrary side quantities alpha; valid while
// alpha[chosen] <= chosen_loss.
inline std::vector<double> exp3alpha_estimate(int chosen, double chosen_loss,
                                              std::span<const double> alphas,
                                              const ProbabilityVector& p) {
  if (chosen < 0 || chosen >= p.size()) throw std::out_of_range("exp3alpha_estimate: bad index");
  if (static_cast<int>(alphas.size()) != p.size())
    throw std::invalid_argument("exp3alpha_estimate: size mismatch");
  if (!std::isfinite(chosen_loss))
    throw std::invalid_argument("exp3alpha_estimate: non-finite loss");
  if (alphas[chosen] > chosen_loss)
    throw std::invalid_argument("exp3alpha_estimate: alpha exceeds the observed loss");
  std::vector<double> est(alphas.begin(), alphas.end());
  est[chosen] += (chosen_loss - alphas[chosen]) / p[chosen];
  return est;
}

// Upper-bound model: alpha_i = upper_i - cap, which keeps loss - alpha in
// [0, cap] by the instance invariant. Composing with exp3alpha_estimate gives
// the Exp3.UB learner.
inline std::vector<double> exp3ub_alphas(std::span<const double> upper_bounds, double slack_cap) {
  std::vector<double> alphas(upper_bounds.begin(), upper_bounds.end());
  for (double& a : alphas) a -= slack_cap;
  return alphas;
}

// Multiplicative shrinkage of the importance-weighted slack,
//   x = bs (1 - p) / (p (1 - bs) + bs (1 - p)),   bs = beta * slack.
// bs = 1 forces x = 1 for every p; at p = 1 the value is the continuity
// limit 0 for bs < 1.
inline double correction_factor(double p, double beta_s) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("correction_factor: p must lie in (0,1]");
  if (!(beta_s >= 0.0 && beta_s <= 1.0))
    throw std::invalid_argument("correction_factor: beta*s must lie in [0,1]");
  if (beta_s == 0.0) return 0.0;
  if (beta_s == 1.0) return 1.0;
  return beta_s * (1.0 - p) / (p * (1.0 - beta_s) + beta_s * (1.0 - p));
}

// Exp3.LB.P estimate: lower bounds everywhere; the chosen coordinate adds the
// corrected slack s (1 - x) / p. With beta = 0 this is exp3lb_estimate.
inline std::vector<double> exp3lbp_estimate(int chosen, double chosen_loss,
                                            std::span<const double> lower_bounds,
                                            const ProbabilityVector& p, double beta) {
  if (chosen < 0 || chosen >= p.size()) throw std::out_of_range("exp3lbp_estimate: bad index");
  if (static_cast<int>(lower_bounds.size()) != p.size())
    throw std::invalid_argument("exp3lbp_estimate: size mismatch");
  if (beta < 0.0) throw std::invalid_argument("exp3lbp_estimate: beta must be nonnegative");
  const double s = chosen_loss - lower_bounds[chosen];
  if (s < 0.0) throw std::invalid_argument("exp3lbp_estimate: observed slack is negative");
  const double bs = beta * s;
  if (bs > 1.0) throw std::invalid_argument("exp3lbp_estimate: beta * slack exceeds 1");
  const double x = correction_factor(p[chosen], bs);
  std::vector<double> est(lower_bounds.begin(), lower_bounds.end());
  est[chosen] += s * (1.0 - x) / p[chosen];
  return est;
}

struct StepResult {
  LearnerState state;
  ProbabilityVector next_distribution;
  std::vector<double> estimated_losses;
};

// One round: dispatch to the algorithm's estimator, accumulate, emit the next
// softmax distribution. Hedge consumes the full-loss feedback variant; the
// others consume lower-bound feedback (exp3alpha reads the per-round vector
// as its alphas) except exp3ub, which consumes upper-bound feedback.
inline StepResult learner_step(const LearnerState& state, const RoundFeedback& feedback) {
  const int n = static_cast<int>(state.cum_est_losses.size());
  const ProbabilityVector p = current_distribution(state);
  std::vector<double> est;
  switch (state.algorithm) {
    case Algorithm::hedge: {
      const auto* f = std::get_if<FullLossFeedback>(&feedback);
      if (!f) throw std::invalid_argument("learner_step: hedge expects full-loss feedback");
      if (static_cast<int>(f->losses.size()) != n)
        throw std::invalid_argument("learner_step: loss vector size mismatch");
      for (double v : f->losses)
        if (!std::isfinite(v)) throw std::invalid_argument("learner_step: non-finite loss");
      est = f->losses;
      break;
    }
    case Algorithm::exp3: {
      const auto* f = std::get_if<LowerBoundFeedback>(&feedback);
      if (!f) throw std::invalid_argument("learner_step: exp3 expects lower-bound feedback");
      est = exp3_estimate(f->chosen, f->chosen_loss, p);
      break;
    }
    case Algorithm::exp3lb: {
      const auto* f = std::get_if<LowerBoundFeedback>(&feedback);
      if (!f) throw std::invalid_argument("learner_step: exp3lb expects lower-bound feedback");
      est = exp3lb_estimate(f->chosen, f->chosen_loss, f->lower_bounds, p);
      break;
    }
    case Algorithm::exp3alpha: {
      const auto* f = std::get_if<LowerBoundFeedback>(&feedback);
      if (!f) throw std::invalid_argument("learner_step: exp3alpha expects per-round alphas");
      est = exp3alpha_estimate(f->chosen, f->chosen_loss, f->lower_bounds, p);
      break;
    }
    case Algorithm::exp3ub: {
      const auto* f = std::get_if<UpperBoundFeedback>(&feedback);
      if (!f) throw std::invalid_argument("learner_step: exp3ub expects upper-bound feedback");
      const std::vector<double> alphas = exp3ub_alphas(f->upper_bounds, f->slack_cap);
      est = exp3alpha_estimate(f->chosen, f->chosen_loss, alphas, p);
      break;
    }
    case Algorithm::exp3lbp: {
      const auto* f = std::get_if<LowerBoundFeedback>(&feedback);
      if (!f) throw std::invalid_argument("learner_step: exp3lbp expects lower-bound feedback");
      est = exp3lbp_estimate(f->chosen, f->chosen_loss, f->lower_bounds, p, state.beta);
      break;
    }
    case Algorithm::exp3lb_doubling:
      throw std::invalid_argument("learner_step: use doubling_step for the wrapper");
  }
  LearnerState next = state;
  for (int i = 0; i < n; ++i) next.cum_est_losses[i] += est[i];
  next.round += 1;
  ProbabilityVector dist = current_distribution(next);
  return {std::move(next), std::move(dist), std::move(est)};
}

// Doubling-trick wrapper around Exp3.LB for unknown horizons in the [0,1]
// loss regime. The running quantity is the observable pessimistic per-round
// term (slack replaced by 1 - lb); when it exceeds the current guess, the
// guess doubles until it covers the total and the inner learner restarts
// with a retuned eta.
struct DoublingState {
  LearnerState inner;
  double current_guess = 0.0;
  double accumulated = 0.0;
  int epoch = 0;  // completed restarts
};

// Initial guess 4 log N, so the first epoch runs with eta = 1.
inline DoublingState make_doubling_learner(int num_experts) {
  if (num_experts < 1) throw std::invalid_argument("make_doubling_learner: need >= 1 expert");
  double g0 = 1.0, eta = 1.0;
  if (num_experts >= 2) {
    g0 = 4.0 * std::log(static_cast<double>(num_experts));
    eta = tune_eta(g0, num_experts);
  }
  return {make_learner(Algorithm::exp3lb, num_experts, eta), g0, 0.0, 0};
}

struct DoublingStepResult {
  DoublingState state;
  ProbabilityVector next_distribution;
  std::vector<double> estimated_losses;  // empty on restart rounds
  bool restarted = false;
};

inline DoublingStepResult doubling_step(const DoublingState& state,
                                        const RoundFeedback& feedback) {
  const auto* f = std::get_if<LowerBoundFeedback>(&feedback);
  if (!f) throw std::invalid_argument("doubling_step: expects lower-bound feedback");
  const double term = unknown_horizon_round_term(
      std::span<const double>(f->lower_bounds.data(), f->lower_bounds.size()));
  DoublingState next = state;
  next.accumulated += term;
  if (next.accumulated > next.current_guess) {
    while (next.accumulated > next.current_guess) next.current_guess *= 2.0;
    next.epoch += 1;
    const int n = static_cast<int>(state.inner.cum_est_losses.size());
    const double eta = n >= 2 ? tune_eta(next.current_guess, n) : 1.0;
    next.inner = make_learner(Algorithm::exp3lb, n, eta);
    return {std::move(next), ProbabilityVector::uniform(n), {}, true};
  }
  StepResult r = learner_step(next.inner, feedback);
  next.inner = std::move(r.state);
  return {std::move(next), std::move(r.next_distribution), std::move(r.estimated_losses), false};
}

}  // namespace explb
