#pragma once

// Episode runner and Monte Carlo machinery: learner-configuration resolution
// (learning rates, bias, and the applicable theoretical bound), the episode
// loop, the pseudo-regret estimator, the bound comparator, and the estimate
// concentration check.
//
// Replicate r always draws from stream seed ^ r and results are merged in
// replicate order, so reports are independent of scheduling.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "explb/core.hpp"
#include "explb/environments.hpp"
#include "explb/learners.hpp"
#include "explb/quantities.hpp"

namespace explb {

struct LearnerConfig {
  Algorithm algorithm = Algorithm::exp3lb;
  std::optional<double> eta;            // explicit learning rate; empty means "auto"
  std::optional<EtaPreset> eta_preset;  // scenario preset; overrides auto tuning
  std::optional<double> beta;           // explicit bias (exp3lbp only)
  std::optional<BetaMode> beta_mode;    // tuned bias (exp3lbp only)
  std::optional<double> beta_delta;     // delta for beta_mode; default: experiment delta
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  LearnerConfig learner;
  int replicates = 1;
  std::uint64_t seed = 0;
  double delta = 0.05;
  std::string out_dir = "out";
};

// A learner configuration with every number pinned down against a concrete
// instance, plus the bound that applies to the run.
struct ResolvedLearner {
  Algorithm algorithm = Algorithm::exp3lb;
  int num_experts = 0;
  int horizon = 0;
  double eta = 1.0;
  double beta = 0.0;
  BoundQuantities quantities;       // of the instance (alpha-based for exp3ub)
  double q_tuning = 0.0;            // quantity the tuning actually used
  bool q_substituted = false;       // hp_iii replaced Q by max{Q, 2T}
  std::string bound_kind;
  double theoretical_bound = 0.0;
  std::vector<double> per_round_q;  // per-round contributions to q_tuning
  double delta = 0.05;
  std::optional<double> doubling_initial_guess;
};

namespace detail {

struct MixedCounts {
  long long full_info = 0;
  long long bandit = 0;
};

// Classifies each round of a mixed instance. A round whose lower bounds equal
// its losses counts as full information (an all-zero-loss round satisfies
// both readings and contributes zero to the quantity either way).
inline MixedCounts derive_mixed_counts(const GameInstance& inst) {
  MixedCounts c;
  for (int t = 0; t < inst.horizon; ++t) {
    bool full = true, trivial = true;
    for (int i = 0; i < inst.num_experts; ++i) {
      if (inst.lower_bounds(t, i) != inst.losses(t, i)) full = false;
      if (inst.lower_bounds(t, i) != 0.0) trivial = false;
    }
    if (full)
      ++c.full_info;
    else if (trivial)
      ++c.bandit;
    else
      throw std::invalid_argument("mixed preset: round " + std::to_string(t + 1) +
                                  " is neither full-information nor bandit");
  }
  return c;
}

// sum_t (N - |S_t|), reading expert i as inside S_t iff its lower bound
// equals its loss.
inline double derive_sum_missing(const GameInstance& inst) {
  double missing = 0.0;
  for (int t = 0; t < inst.horizon; ++t)
    for (int i = 0; i < inst.num_experts; ++i)
      if (inst.lower_bounds(t, i) != inst.losses(t, i)) missing += 1.0;
  return missing;
}

inline RoundMatrix slack_matrix(const RoundMatrix& losses, const RoundMatrix& bounds) {
  RoundMatrix s(losses.num_experts(), losses.horizon());
  for (int t = 0; t < losses.horizon(); ++t)
    for (int i = 0; i < losses.num_experts(); ++i) s(t, i) = losses(t, i) - bounds(t, i);
  return s;
}

}  // namespace detail

// Explicit pre-O regret displays from the high-probability analysis, with the
// union bound folded in via delta' = delta / (N + 3).
inline double hp_regret_display_i(double q, int num_experts, double delta) {
  const double log_n = std::log(static_cast<double>(num_experts));
  const double log_idp = std::log((static_cast<double>(num_experts) + 3.0) / delta);
  return (1.0 + 0.5 / std::sqrt(2.0)) * std::sqrt(q * log_n) +
         (std::sqrt(2.0) + 1.5) * std::sqrt(q * log_idp);
}

inline double hp_regret_display_ii(double q, int num_experts, double delta) {
  const double log_n = std::log(static_cast<double>(num_experts));
  const double log_idp = std::log((static_cast<double>(num_experts) + 3.0) / delta);
  return std::sqrt(q * log_n) + std::sqrt(q / 2.0) * (1.0 + log_idp) +
         (1.0 + std::sqrt(log_n / 2.0)) * std::sqrt(q * log_idp / 4.0) +
         std::sqrt(q * log_idp);
}

// The bound value for a prefix of rounds whose quantity contributions sum to
// q_prefix; rounds_done is needed only by the hp_iii substitution and the
// order-reference kinds.
inline double bound_at(const ResolvedLearner& rl, double q_prefix, long long rounds_done) {
  const double log_n = std::log(static_cast<double>(rl.num_experts));
  if (rl.bound_kind == "hp_i" || rl.bound_kind == "hp_reference")
    return hp_regret_display_i(q_prefix, rl.num_experts, rl.delta);
  if (rl.bound_kind == "hp_ii")
    return hp_regret_display_ii(q_prefix, rl.num_experts, rl.delta);
  if (rl.bound_kind == "hp_iii")
    return hp_regret_display_i(std::max(q_prefix, 2.0 * static_cast<double>(rounds_done)),
                               rl.num_experts, rl.delta);
  if (rl.bound_kind == "doubling_reference")
    return std::sqrt(std::max(q_prefix, 1.0) * log_n);
  // Second-order and preset kinds: log(N)/eta + eta q / 4, which
  // collapses to sqrt(q log N) at the tuned learning rate.
  return log_n / rl.eta + rl.eta * q_prefix / 4.0;
}

// Pins eta, beta, the tuning quantity, and the applicable bound for a
// concrete instance. Auto tuning falls back to eta = 1 for degenerate games
// (a single expert, or a quantity of zero) where any learning rate is
// optimal.
inline ResolvedLearner resolve_learner(const LearnerConfig& cfg, const GameInstance& inst,
                                       double delta) {
  const int n = inst.num_experts;
  const long long T = inst.horizon;
  ResolvedLearner rl;
  rl.algorithm = cfg.algorithm;
  rl.num_experts = n;
  rl.horizon = inst.horizon;
  rl.delta = cfg.beta_delta.value_or(delta);

  const bool is_ub = cfg.algorithm == Algorithm::exp3ub;
  if (is_ub && !inst.upper_bounds)
    throw std::invalid_argument("exp3ub requires an instance with upper bounds");
  if (!is_ub && inst.upper_bounds)
    throw std::invalid_argument(std::string(algorithm_name(cfg.algorithm)) +
                                " cannot run on an upper-bound instance");

  // Reference bounds matrix: lower bounds, or alpha = upper - cap for exp3ub.
  RoundMatrix ref = inst.lower_bounds;
  if (is_ub) {
    ref = *inst.upper_bounds;
    for (int t = 0; t < inst.horizon; ++t)
      for (int i = 0; i < n; ++i) ref(t, i) -= (*inst.slack_caps)[t];
  }
  const RoundMatrix slacks = detail::slack_matrix(inst.losses, ref);
  rl.quantities = bound_quantities(ref, slacks);

  if (cfg.eta_preset &&
      (cfg.algorithm == Algorithm::exp3ub || cfg.algorithm == Algorithm::exp3lbp ||
       cfg.algorithm == Algorithm::exp3lb_doubling))
    throw std::invalid_argument("eta presets apply to hedge/exp3/exp3lb/exp3alpha only");
  if ((cfg.beta || cfg.beta_mode) && cfg.algorithm != Algorithm::exp3lbp)
    throw std::invalid_argument("beta applies to exp3lbp only");

  // Tuning quantity, per-round contributions, and bound kind.
  rl.per_round_q.reserve(inst.horizon);
  if (cfg.algorithm == Algorithm::exp3lb_doubling) {
    for (int t = 0; t < inst.horizon; ++t)
      rl.per_round_q.push_back(unknown_horizon_round_term(inst.lower_bounds.round(t)));
    double q_uh = 0.0;
    for (double v : rl.per_round_q) q_uh += v;
    rl.quantities.Q_uh = q_uh;
    rl.q_tuning = q_uh;
    rl.bound_kind = "doubling_reference";
  } else if (cfg.eta_preset) {
    PresetParams params;
    params.num_experts = n;
    params.horizon = T;
    double per_round_fixed = 0.0;
    switch (*cfg.eta_preset) {
      case EtaPreset::full_info:
        params.q = relative_quadratic_variation(inst.losses);
        rl.bound_kind = "full_info_preset";
        break;
      case EtaPreset::bandit:
        rl.bound_kind = "bandit_preset";
        per_round_fixed = 2.0 * n;
        break;
      case EtaPreset::mixed: {
        const auto counts = detail::derive_mixed_counts(inst);
        params.full_info_rounds = counts.full_info;
        params.bandit_rounds = counts.bandit;
        rl.bound_kind = "mixed_preset";
        break;
      }
      case EtaPreset::variable_subset:
        params.sum_missing = detail::derive_sum_missing(inst);
        rl.bound_kind = "subset_preset";
        break;
    }
    rl.q_tuning = preset_quantity(*cfg.eta_preset, params);
    for (int t = 0; t < inst.horizon; ++t) {
      switch (*cfg.eta_preset) {
        case EtaPreset::full_info: {
          const double d = spread(inst.losses.round(t));
          rl.per_round_q.push_back(0.5 * d * d);
          break;
        }
        case EtaPreset::bandit:
          rl.per_round_q.push_back(per_round_fixed);
          break;
        case EtaPreset::mixed: {
          bool full = true;
          for (int i = 0; i < n; ++i)
            if (inst.lower_bounds(t, i) != inst.losses(t, i)) full = false;
          rl.per_round_q.push_back(full ? 0.5 : 2.0 * n);
          break;
        }
        case EtaPreset::variable_subset: {
          double missing = 0.0;
          for (int i = 0; i < n; ++i)
            if (inst.lower_bounds(t, i) != inst.losses(t, i)) missing += 1.0;
          rl.per_round_q.push_back(4.5 + 2.0 * missing);
          break;
        }
      }
    }
  } else {
    for (int t = 0; t < inst.horizon; ++t)
      rl.per_round_q.push_back(second_order_round_term(ref.round(t), slacks.round(t)));
    rl.q_tuning = rl.quantities.Q_theorem;
    rl.bound_kind = is_ub ? "second_order_alpha" : "second_order";
  }

  // Bias for the high-probability learner, which may substitute the tuning
  // quantity (hp_iii requires Q >= 2T).
  if (cfg.algorithm == Algorithm::exp3lbp) {
    if (cfg.beta && cfg.beta_mode)
      throw std::invalid_argument("give either beta or beta_mode, not both");
    if (cfg.beta) {
      if (*cfg.beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
      rl.beta = *cfg.beta;
      rl.bound_kind = "hp_reference";
    } else if (cfg.beta_mode) {
      if (!(rl.q_tuning > 0.0))
        throw std::invalid_argument("beta tuning needs a positive quantity");
      const BetaTuning bt = tune_beta(rl.q_tuning, n, rl.delta, *cfg.beta_mode, T);
      rl.beta = bt.beta;
      rl.q_tuning = bt.q_used;
      rl.q_substituted = bt.q_substituted;
      switch (*cfg.beta_mode) {
        case BetaMode::hp_i: rl.bound_kind = "hp_i"; break;
        case BetaMode::hp_ii: rl.bound_kind = "hp_ii"; break;
        case BetaMode::hp_iii: rl.bound_kind = "hp_iii"; break;
      }
    } else {
      rl.beta = 0.0;  // degenerates to exp3lb
      rl.bound_kind = "second_order";
    }
  }

  // Learning rate. The doubling wrapper retunes internally at every restart,
  // so a fixed eta cannot apply to it.
  if (cfg.eta && cfg.algorithm == Algorithm::exp3lb_doubling)
    throw std::invalid_argument("the doubling wrapper tunes eta itself");
  if (cfg.eta) {
    if (!(*cfg.eta > 0.0)) throw std::invalid_argument("eta must be positive");
    rl.eta = *cfg.eta;
  } else if (cfg.algorithm == Algorithm::exp3lb_doubling) {
    rl.eta = n >= 2 ? tune_eta(make_doubling_learner(n).current_guess, n) : 1.0;
  } else if (n < 2 || !(rl.q_tuning > 0.0)) {
    rl.eta = 1.0;  // degenerate game, any learning rate is optimal
  } else {
    rl.eta = tune_eta(rl.q_tuning, n);
  }

  if (cfg.algorithm == Algorithm::exp3lb_doubling)
    rl.doubling_initial_guess = make_doubling_learner(n).current_guess;

  rl.theoretical_bound = bound_at(rl, rl.q_tuning, T);
  return rl;
}

// Runs the T-round protocol: sample an action from the current distribution,
// observe feedback, step the learner. on_round(t, p_t, action, realized,
// estimated, cum_estimated, alg_cumloss) fires after every round; the
// estimate vector is empty on doubling-restart rounds. Returns L_{A,T}.
template <class OnRound>
double play_episode(const GameInstance& inst, const ResolvedLearner& rl, std::uint64_t seed,
                    OnRound&& on_round) {
  const int n = inst.num_experts, T = inst.horizon;
  RandomStream rng(seed);
  double alg_loss = 0.0;
  if (rl.algorithm == Algorithm::exp3lb_doubling) {
    DoublingState st = make_doubling_learner(n);
    ProbabilityVector p = current_distribution(st.inner);
    for (int t = 0; t < T; ++t) {
      const int a = sample_action(p, rng);
      const double realized = inst.losses(t, a);
      alg_loss += realized;
      DoublingStepResult r = doubling_step(st, feedback_for(inst, t, a));
      st = std::move(r.state);
      on_round(t, p, a, realized, r.estimated_losses, st.inner.cum_est_losses, alg_loss);
      p = std::move(r.next_distribution);
    }
  } else {
    LearnerState st = make_learner(rl.algorithm, n, rl.eta, rl.beta);
    ProbabilityVector p = current_distribution(st);
    for (int t = 0; t < T; ++t) {
      const int a = sample_action(p, rng);
      const double realized = inst.losses(t, a);
      alg_loss += realized;
      RoundFeedback fb;
      if (rl.algorithm == Algorithm::hedge) {
        const auto col = inst.losses.round(t);
        fb = FullLossFeedback{std::vector<double>(col.begin(), col.end())};
      } else {
        fb = feedback_for(inst, t, a);
      }
      StepResult r = learner_step(st, fb);
      st = std::move(r.state);
      on_round(t, p, a, realized, r.estimated_losses, st.cum_est_losses, alg_loss);
      p = std::move(r.next_distribution);
    }
  }
  return alg_loss;
}

// Full per-round record of one episode; deterministic in (instance, learner,
// seed).
inline RunTrace run_episode(const GameInstance& inst, const ResolvedLearner& rl,
                            std::uint64_t seed) {
  RunTrace tr;
  tr.distributions.reserve(inst.horizon);
  tr.actions.reserve(inst.horizon);
  tr.realized_losses.reserve(inst.horizon);
  tr.estimated_losses.reserve(inst.horizon);
  tr.cum_estimated_losses.reserve(inst.horizon);
  tr.algorithm_loss = play_episode(
      inst, rl, seed,
      [&](int, const ProbabilityVector& p, int a, double realized,
          const std::vector<double>& est, const std::vector<double>& cum, double) {
        tr.distributions.push_back(p);
        tr.actions.push_back(a);
        tr.realized_losses.push_back(realized);
        tr.estimated_losses.push_back(
            est.empty() ? std::vector<double>(inst.num_experts, 0.0) : est);
        tr.cum_estimated_losses.push_back(cum);
      });
  return tr;
}

struct EpisodeStats {
  double algorithm_loss = 0.0;
  std::vector<double> final_cum_est;
  std::vector<double> alg_cumloss;  // filled only when requested
};

inline EpisodeStats run_episode_stats(const GameInstance& inst, const ResolvedLearner& rl,
                                      std::uint64_t seed, bool want_curve) {
  EpisodeStats out;
  if (want_curve) out.alg_cumloss.reserve(inst.horizon);
  const int last = inst.horizon - 1;
  out.algorithm_loss = play_episode(
      inst, rl, seed,
      [&](int t, const ProbabilityVector&, int, double, const std::vector<double>&,
          const std::vector<double>& cum, double alg_cumloss) {
        if (want_curve) out.alg_cumloss.push_back(alg_cumloss);
        if (t == last) out.final_cum_est = cum;
      });
  return out;
}

// Runs fn(0..count-1) on a small thread pool; every index writes only its own
// slot, so the caller's merge order is what determines the result.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = std::max(1, std::min<int>(count, hw == 0 ? 1 : static_cast<int>(hw)));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next(0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

struct RegretReport {
  double mean_pseudo_regret = 0.0;
  std::optional<double> std_error;  // absent when replicates == 1
  std::vector<double> per_replicate_regret;
  double theoretical_bound = 0.0;
  std::string bound_kind;
  BoundQuantities quantities;
  double eta_used = 0.0;
  double beta_used = 0.0;
  std::optional<double> violation_fraction;
  // run metadata
  std::string algorithm;
  int num_experts = 0;
  int horizon = 0;
  int replicates = 0;
  std::uint64_t seed = 0;
  double delta = 0.05;
  double q_tuning = 0.0;
  bool q_substituted = false;
  int best_expert = 0;
  double best_expert_cum_loss = 0.0;
  std::optional<double> doubling_initial_guess;
  std::string doubling_accumulator;  // fixed convention, recorded for reproducibility
};

struct RegretCurve {
  std::vector<double> mean_regret;
  std::vector<double> std_error;
  std::vector<double> bound;
};

struct EstimateResult {
  RegretReport report;
  RegretCurve curve;
};

// Monte Carlo pseudo-regret estimate. The losses are deterministic given the
// scenario seed, so each replicate's regret is L_{A,T} minus the best
// expert's true cumulative loss. Replicates run in parallel and are merged in
// index order.
inline EstimateResult estimate_pseudo_regret(const ExperimentConfig& cfg,
                                             bool want_curve = true) {
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");

  GameInstance inst = generate_instance(cfg.scenario);
  // WLOG shift so every round's smallest lower bound is zero; a no-op for the
  // built-in generators. The upper-bound model has no such normalization.
  if (!inst.upper_bounds) inst = normalize_instance(inst);
  const ResolvedLearner rl = resolve_learner(cfg.learner, inst, cfg.delta);
  const BestExpert best = best_expert_loss(inst);
  const std::vector<double> best_curve =
      want_curve ? per_round_best_cumloss(inst) : std::vector<double>();

  const int R = cfg.replicates;
  const int T = inst.horizon;
  EstimateResult res;
  RegretReport& rep = res.report;
  rep.per_replicate_regret.resize(R);

  std::vector<double> sum_t, sumsq_t;
  if (want_curve) {
    sum_t.assign(T, 0.0);
    sumsq_t.assign(T, 0.0);
  }

  const int batch = std::min(R, 256);
  std::vector<EpisodeStats> tmp(batch);
  for (int base = 0; base < R; base += batch) {
    const int m = std::min(batch, R - base);
    parallel_for(m, [&](int k) {
      tmp[k] = run_episode_stats(inst, rl, cfg.seed ^ static_cast<std::uint64_t>(base + k),
                                 want_curve);
    });
    for (int k = 0; k < m; ++k) {
      rep.per_replicate_regret[base + k] = tmp[k].algorithm_loss - best.cum_loss;
      if (want_curve)
        for (int t = 0; t < T; ++t) {
          const double x = tmp[k].alg_cumloss[t] - best_curve[t];
          sum_t[t] += x;
          sumsq_t[t] += x * x;
        }
    }
  }

  double mean = 0.0;
  for (double r : rep.per_replicate_regret) mean += r;
  mean /= R;
  rep.mean_pseudo_regret = mean;
  if (R >= 2) {
    double ss = 0.0;
    for (double r : rep.per_replicate_regret) ss += (r - mean) * (r - mean);
    rep.std_error = std::sqrt(ss / (R - 1)) / std::sqrt(static_cast<double>(R));
  }

  rep.theoretical_bound = rl.theoretical_bound;
  rep.bound_kind = rl.bound_kind;
  rep.quantities = rl.quantities;
  rep.eta_used = rl.eta;
  rep.beta_used = rl.beta;
  rep.algorithm = algorithm_name(rl.algorithm);
  rep.num_experts = inst.num_experts;
  rep.horizon = T;
  rep.replicates = R;
  rep.seed = cfg.seed;
  rep.delta = cfg.delta;
  rep.q_tuning = rl.q_tuning;
  rep.q_substituted = rl.q_substituted;
  rep.best_expert = best.expert;
  rep.best_expert_cum_loss = best.cum_loss;
  if (rl.doubling_initial_guess) {
    rep.doubling_initial_guess = rl.doubling_initial_guess;
    rep.doubling_accumulator = "pessimistic_observable";
  }

  if (want_curve) {
    res.curve.mean_regret.resize(T);
    res.curve.std_error.resize(T);
    res.curve.bound.resize(T);
    double q_prefix = 0.0;
    for (int t = 0; t < T; ++t) {
      const double m_t = sum_t[t] / R;
      res.curve.mean_regret[t] = m_t;
      double var = R >= 2 ? (sumsq_t[t] - sum_t[t] * sum_t[t] / R) / (R - 1) : 0.0;
      if (var < 0.0) var = 0.0;
      res.curve.std_error[t] = std::sqrt(var / R);
      q_prefix += rl.per_round_q[t];
      res.curve.bound[t] = bound_at(rl, q_prefix, t + 1);
    }
  }
  return res;
}

struct BoundCheck {
  bool pass = false;
  double margin = 0.0;  // theoretical_bound - mean_pseudo_regret
};

// Pass iff the Monte Carlo mean respects the bound up to three standard
// errors of noise allowance.
inline BoundCheck bound_check(const RegretReport& r) {
  const double se = r.std_error.value_or(0.0);
  return {r.mean_pseudo_regret <= r.theoretical_bound + 3.0 * se,
          r.theoretical_bound - r.mean_pseudo_regret};
}

// Empirical check of the estimate concentration bound: runs R Exp3.LB.P
// episodes and counts how often the designated expert's final estimated
// cumulative loss exceeds its true cumulative loss by more than
// log(1/delta) / beta. The guarantee is a violation probability of at most
// delta.
inline double concentration_check(const GameInstance& inst, double beta, double delta,
                                  int replicates, int expert = 0, std::uint64_t seed = 0) {
  if (!(beta > 0.0)) throw std::invalid_argument("concentration_check: beta must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("concentration_check: delta must lie in (0,1)");
  if (replicates < 1) throw std::invalid_argument("concentration_check: replicates must be >= 1");
  if (expert < 0 || expert >= inst.num_experts)
    throw std::out_of_range("concentration_check: expert out of range");
  if (inst.upper_bounds)
    throw std::invalid_argument("concentration_check: lower-bound instances only");

  double max_slack = 0.0;
  for (int t = 0; t < inst.horizon; ++t)
    for (int i = 0; i < inst.num_experts; ++i)
      max_slack = std::max(max_slack, inst.losses(t, i) - inst.lower_bounds(t, i));
  if (beta * max_slack > 1.0)
    throw std::invalid_argument("concentration_check: beta * max slack exceeds 1");

  ResolvedLearner rl;
  rl.algorithm = Algorithm::exp3lbp;
  rl.num_experts = inst.num_experts;
  rl.horizon = inst.horizon;
  rl.beta = beta;
  const RoundMatrix slacks = detail::slack_matrix(inst.losses, inst.lower_bounds);
  const double q = bound_quantities(inst.lower_bounds, slacks).Q_theorem;
  rl.eta = (inst.num_experts >= 2 && q > 0.0) ? tune_eta(q, inst.num_experts) : 1.0;

  double true_loss = 0.0;
  for (int t = 0; t < inst.horizon; ++t) true_loss += inst.losses(t, expert);
  const double threshold = true_loss + std::log(1.0 / delta) / beta;

  std::vector<char> violated(replicates, 0);
  parallel_for(replicates, [&](int r) {
    const EpisodeStats st =
        run_episode_stats(inst, rl, seed ^ static_cast<std::uint64_t>(r), false);
    violated[r] = st.final_cum_est[expert] > threshold ? 1 : 0;
  });
  long long count = 0;
  for (char v : violated) count += v;
  return static_cast<double>(count) / static_cast<double>(replicates);
}

// Order statistic used for high-probability checks: the smallest sample value
// that is >= the requested fraction of the sample.
inline double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("empirical_quantile: level must lie in (0,1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<long long>(values.size());
  long long k = static_cast<long long>(std::ceil(level * static_cast<double>(n)));
  if (k < 1) k = 1;
  if (k > n) k = n;
  return values[static_cast<std::size_t>(k - 1)];
}

}  // namespace explb
