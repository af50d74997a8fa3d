#pragma once

// Adversary generators. Each scenario kind materializes one feedback regime
// as a concrete GameInstance:
//   full_info        lb = loss for every cell
//   bandit           lb = 0
//   mixed            each round entirely full-information or entirely bandit
//   variable_subset  lb_i = loss_i for i in S_t, else 0
//   generic_lb       soft decomposition lb = loss - f * u * loss
//   upper_bound      upper = loss + cap * v, slack cap M_t = cap, lb = 0
// Generators are pure in (spec, seed); instances are immutable afterwards.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "explb/core.hpp"
#include "explb/json_io.hpp"

namespace explb {

enum class ScenarioKind { full_info, bandit, mixed, variable_subset, generic_lb, upper_bound };
enum class LossModel { uniform_iid, bernoulli_gap, adversarial_handcrafted };

inline const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::full_info: return "full_info";
    case ScenarioKind::bandit: return "bandit";
    case ScenarioKind::mixed: return "mixed";
    case ScenarioKind::variable_subset: return "variable_subset";
    case ScenarioKind::generic_lb: return "generic_lb";
    case ScenarioKind::upper_bound: return "upper_bound";
  }
  return "?";
}

inline ScenarioKind parse_scenario_kind(const std::string& s) {
  for (ScenarioKind k : {ScenarioKind::full_info, ScenarioKind::bandit, ScenarioKind::mixed,
                         ScenarioKind::variable_subset, ScenarioKind::generic_lb,
                         ScenarioKind::upper_bound})
    if (s == scenario_kind_name(k)) return k;
  throw std::invalid_argument("unknown scenario kind \"" + s + "\"");
}

inline const char* loss_model_name(LossModel m) {
  switch (m) {
    case LossModel::uniform_iid: return "uniform_iid";
    case LossModel::bernoulli_gap: return "bernoulli_gap";
    case LossModel::adversarial_handcrafted: return "adversarial_handcrafted";
  }
  return "?";
}

inline LossModel parse_loss_model(const std::string& s) {
  for (LossModel m : {LossModel::uniform_iid, LossModel::bernoulli_gap,
                      LossModel::adversarial_handcrafted})
    if (s == loss_model_name(m)) return m;
  throw std::invalid_argument("unknown loss model \"" + s + "\"");
}

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::bandit;
  int num_experts = 2;
  int horizon = 100;
  LossModel loss_model = LossModel::uniform_iid;
  std::uint64_t seed = 0;

  // bernoulli_gap: expert 0 has mean mu - gap, every other expert mean mu.
  double mu = 0.5;
  double gap = 0.1;

  // mixed: counts (full_info_rounds = -1 means T/2) or explicit 0/1 flags.
  long long full_info_rounds = -1;
  long long bandit_rounds = -1;
  std::optional<std::vector<int>> full_info_flags;

  // variable_subset: fixed |S_t| (-1 draws a size uniformly in {0..N} each
  // round) or explicit 0-based subsets.
  int subset_size = -1;
  std::optional<std::vector<std::vector<int>>> subsets;

  // generic_lb: lb = loss - slack_fraction * u * loss with u ~ U[0,1); losses
  // drawn from [loss_min, loss_max], which must stay nonnegative so the rule
  // keeps lb <= loss.
  double slack_fraction = 0.5;
  double loss_min = 0.0;
  double loss_max = 1.0;

  // upper_bound: upper = loss + slack_cap * v with v ~ U[0,1), M_t = slack_cap.
  double slack_cap = 0.2;

  // adversarial_handcrafted: path to a GameInstance JSON whose loss matrix is
  // replayed; lower/upper bounds are rebuilt from the scenario kind.
  std::string instance_path;
};

namespace detail {

inline void fill_losses(const ScenarioSpec& spec, RandomStream& rng, RoundMatrix& losses) {
  const int n = spec.num_experts, T = spec.horizon;
  switch (spec.loss_model) {
    case LossModel::uniform_iid: {
      const bool scaled = spec.kind == ScenarioKind::generic_lb;
      const double lo = scaled ? spec.loss_min : 0.0;
      const double hi = scaled ? spec.loss_max : 1.0;
      for (int t = 0; t < T; ++t)
        for (int i = 0; i < n; ++i) losses(t, i) = lo + (hi - lo) * rng.next_unit();
      break;
    }
    case LossModel::bernoulli_gap: {
      const double best_mean = spec.mu - spec.gap;
      if (best_mean < 0.0 || spec.mu > 1.0 || spec.gap < 0.0)
        throw std::invalid_argument("bernoulli_gap: need 0 <= mu - gap and mu <= 1");
      for (int t = 0; t < T; ++t)
        for (int i = 0; i < n; ++i) {
          const double mean = i == 0 ? best_mean : spec.mu;
          losses(t, i) = rng.next_unit() < mean ? 1.0 : 0.0;
        }
      break;
    }
    case LossModel::adversarial_handcrafted: {
      if (spec.instance_path.empty())
        throw std::invalid_argument("adversarial_handcrafted: instance_path is required");
      const GameInstance file = load_instance_file(spec.instance_path);
      if (file.num_experts != n || file.horizon != T)
        throw std::invalid_argument("adversarial_handcrafted: file dimensions (" +
                                    std::to_string(file.num_experts) + "x" +
                                    std::to_string(file.horizon) +
                                    ") do not match the scenario");
      losses = file.losses;
      break;
    }
  }
}

// Seeded Fisher-Yates; one stream step per swap.
inline void shuffle_indices(std::vector<int>& idx, RandomStream& rng) {
  for (int k = static_cast<int>(idx.size()) - 1; k > 0; --k)
    std::swap(idx[k], idx[rng.next_below(k + 1)]);
}

}  // namespace detail

// Deterministic in the spec's seed. Draw order: all losses (round-major),
// then the kind-specific draws, also round-major.
inline GameInstance generate_instance(const ScenarioSpec& spec) {
  if (spec.num_experts < 1) throw std::invalid_argument("scenario: num_experts must be positive");
  if (spec.horizon < 1) throw std::invalid_argument("scenario: horizon must be positive");
  const int n = spec.num_experts, T = spec.horizon;

  RandomStream rng(spec.seed);
  GameInstance inst;
  inst.num_experts = n;
  inst.horizon = T;
  inst.losses = RoundMatrix(n, T);
  inst.lower_bounds = RoundMatrix(n, T, 0.0);
  detail::fill_losses(spec, rng, inst.losses);

  switch (spec.kind) {
    case ScenarioKind::full_info:
      inst.lower_bounds = inst.losses;
      break;

    case ScenarioKind::bandit:
      break;  // trivial lower bounds

    case ScenarioKind::mixed: {
      std::vector<int> flags;
      if (spec.full_info_flags) {
        flags = *spec.full_info_flags;
        if (static_cast<int>(flags.size()) != T)
          throw std::invalid_argument("mixed: full_info_flags length must equal the horizon");
        const long long tf = std::count(flags.begin(), flags.end(), 1);
        if (spec.full_info_rounds >= 0 && spec.full_info_rounds != tf)
          throw std::invalid_argument("mixed: full_info_rounds disagrees with the flags");
      } else {
        long long tf = spec.full_info_rounds >= 0 ? spec.full_info_rounds : T / 2;
        if (spec.bandit_rounds >= 0 && spec.full_info_rounds >= 0 &&
            spec.full_info_rounds + spec.bandit_rounds != T)
          throw std::invalid_argument("mixed: full_info_rounds + bandit_rounds must equal T");
        if (spec.bandit_rounds >= 0 && spec.full_info_rounds < 0) tf = T - spec.bandit_rounds;
        if (tf < 0 || tf > T)
          throw std::invalid_argument("mixed: full_info_rounds must lie in [0, T]");
        flags.assign(T, 0);
        std::fill(flags.begin(), flags.begin() + static_cast<std::size_t>(tf), 1);
        detail::shuffle_indices(flags, rng);
      }
      for (int t = 0; t < T; ++t)
        if (flags[t])
          for (int i = 0; i < n; ++i) inst.lower_bounds(t, i) = inst.losses(t, i);
      break;
    }

    case ScenarioKind::variable_subset: {
      if (spec.subsets) {
        if (static_cast<int>(spec.subsets->size()) != T)
          throw std::invalid_argument("variable_subset: subsets length must equal the horizon");
        for (int t = 0; t < T; ++t)
          for (int i : (*spec.subsets)[t]) {
            if (i < 0 || i >= n)
              throw std::invalid_argument("variable_subset: expert index out of range");
            inst.lower_bounds(t, i) = inst.losses(t, i);
          }
      } else {
        if (spec.subset_size > n)
          throw std::invalid_argument("variable_subset: subset_size exceeds num_experts");
        std::vector<int> idx(n);
        for (int t = 0; t < T; ++t) {
          const int k = spec.subset_size >= 0 ? spec.subset_size : rng.next_below(n + 1);
          std::iota(idx.begin(), idx.end(), 0);
          detail::shuffle_indices(idx, rng);
          for (int j = 0; j < k; ++j) inst.lower_bounds(t, idx[j]) = inst.losses(t, idx[j]);
        }
      }
      break;
    }

    case ScenarioKind::generic_lb: {
      if (!(spec.slack_fraction >= 0.0 && spec.slack_fraction <= 1.0))
        throw std::invalid_argument("generic_lb: slack_fraction must lie in [0,1]");
      if (spec.loss_min < 0.0 || spec.loss_max <= spec.loss_min)
        throw std::invalid_argument("generic_lb: need 0 <= loss_min < loss_max");
      for (int t = 0; t < T; ++t)
        for (int i = 0; i < n; ++i) {
          const double l = inst.losses(t, i);
          inst.lower_bounds(t, i) = l - spec.slack_fraction * rng.next_unit() * l;
        }
      break;
    }

    case ScenarioKind::upper_bound: {
      if (spec.slack_cap < 0.0)
        throw std::invalid_argument("upper_bound: slack_cap must be nonnegative");
      RoundMatrix ub(n, T);
      for (int t = 0; t < T; ++t)
        for (int i = 0; i < n; ++i)
          ub(t, i) = inst.losses(t, i) + spec.slack_cap * rng.next_unit();
      inst.upper_bounds = std::move(ub);
      inst.slack_caps = std::vector<double>(T, spec.slack_cap);
      break;
    }
  }

  ValidationResult v = validate_instance(inst);
  if (!v.ok) throw std::logic_error("generate_instance produced an invalid instance: " + v.message);
  return inst;
}

// What the learner sees at round t after choosing an expert: its own loss and
// the full bound column. Unchosen losses are never part of the record.
inline RoundFeedback feedback_for(const GameInstance& inst, int t, int chosen) {
  if (t < 0 || t >= inst.horizon) throw std::out_of_range("feedback_for: round out of range");
  if (chosen < 0 || chosen >= inst.num_experts)
    throw std::out_of_range("feedback_for: expert out of range");
  if (inst.upper_bounds) {
    const auto col = inst.upper_bounds->round(t);
    return UpperBoundFeedback{chosen, inst.losses(t, chosen),
                              std::vector<double>(col.begin(), col.end()),
                              (*inst.slack_caps)[t]};
  }
  const auto col = inst.lower_bounds.round(t);
  return LowerBoundFeedback{chosen, inst.losses(t, chosen),
                            std::vector<double>(col.begin(), col.end())};
}

struct BestExpert {
  int expert = 0;       // argmin of cumulative true loss; ties to the smallest index
  double cum_loss = 0.0;
};

inline BestExpert best_expert_loss(const GameInstance& inst) {
  BestExpert best;
  for (int i = 0; i < inst.num_experts; ++i) {
    double total = 0.0;
    for (int t = 0; t < inst.horizon; ++t) total += inst.losses(t, i);
    if (i == 0 || total < best.cum_loss) best = {i, total};
  }
  return best;
}

// min_i of the cumulative true loss after each round; the pseudo-regret
// baseline for curves.
inline std::vector<double> per_round_best_cumloss(const GameInstance& inst) {
  std::vector<double> cum(inst.num_experts, 0.0);
  std::vector<double> best(inst.horizon);
  for (int t = 0; t < inst.horizon; ++t) {
    for (int i = 0; i < inst.num_experts; ++i) cum[i] += inst.losses(t, i);
    best[t] = *std::min_element(cum.begin(), cum.end());
  }
  return best;
}

}  // namespace explb
