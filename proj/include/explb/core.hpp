#pragma once

// Core domain types for the best-expert game with lower-bounded loss
// feedback: game instances, probability vectors, per-round feedback records,
// episode traces, and the instance normalization that makes all lower bounds
// nonnegative without changing any algorithm's regret.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "explb/random.hpp"

namespace explb {

// N x T matrix stored round-major: the N expert entries of round t are
// contiguous, since the game loop consumes one round at a time.
class RoundMatrix {
 public:
  RoundMatrix() = default;

  RoundMatrix(int num_experts, int horizon, double fill = 0.0)
      : num_experts_(num_experts),
        horizon_(horizon),
        data_(static_cast<std::size_t>(num_experts) * static_cast<std::size_t>(horizon), fill) {
    if (num_experts < 1 || horizon < 0)
      throw std::invalid_argument("RoundMatrix: need num_experts >= 1 and horizon >= 0");
  }

  // Builds from one row per expert (the JSON orientation).
  static RoundMatrix from_expert_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("RoundMatrix: no expert rows");
    const int n = static_cast<int>(rows.size());
    const int t_len = static_cast<int>(rows[0].size());
    for (const auto& r : rows)
      if (static_cast<int>(r.size()) != t_len)
        throw std::invalid_argument("RoundMatrix: ragged expert rows");
    RoundMatrix m(n, t_len);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < t_len; ++t) m(t, i) = rows[i][t];
    return m;
  }

  std::vector<std::vector<double>> expert_rows() const {
    std::vector<std::vector<double>> rows(num_experts_, std::vector<double>(horizon_));
    for (int i = 0; i < num_experts_; ++i)
      for (int t = 0; t < horizon_; ++t) rows[i][t] = (*this)(t, i);
    return rows;
  }

  int num_experts() const { return num_experts_; }
  int horizon() const { return horizon_; }

  double operator()(int t, int i) const { return data_[idx(t, i)]; }
  double& operator()(int t, int i) { return data_[idx(t, i)]; }

  std::span<const double> round(int t) const {
    check_round(t);
    return {data_.data() + static_cast<std::size_t>(t) * num_experts_,
            static_cast<std::size_t>(num_experts_)};
  }
  std::span<double> round(int t) {
    check_round(t);
    return {data_.data() + static_cast<std::size_t>(t) * num_experts_,
            static_cast<std::size_t>(num_experts_)};
  }

 private:
  std::size_t idx(int t, int i) const {
    return static_cast<std::size_t>(t) * num_experts_ + static_cast<std::size_t>(i);
  }
  void check_round(int t) const {
    if (t < 0 || t >= horizon_) throw std::out_of_range("RoundMatrix: round index out of range");
  }

  int num_experts_ = 0;
  int horizon_ = 0;
  std::vector<double> data_;
};

// The adversary's full oblivious assignment. In the lower-bound model only
// losses and lower_bounds are set; the upper-bound model additionally carries
// upper_bounds and the per-round caps M_t on max_i(upper - loss).
struct GameInstance {
  int num_experts = 0;
  int horizon = 0;
  RoundMatrix losses;
  RoundMatrix lower_bounds;
  std::optional<RoundMatrix> upper_bounds;
  std::optional<std::vector<double>> slack_caps;
};

struct ValidationResult {
  bool ok = true;
  std::string message;
  // First violating cell, 0-based; -1 when not applicable.
  int expert = -1;
  int round = -1;
};

namespace detail {
inline ValidationResult invalid(std::string msg, int expert = -1, int round = -1) {
  return {false, std::move(msg), expert, round};
}
inline std::string cell(int expert, int round) {
  // 1-based in messages, matching the usual (i, t) convention.
  return "(expert " + std::to_string(expert + 1) + ", round " + std::to_string(round + 1) + ")";
}
}  // namespace detail

// Accepts iff all GameInstance invariants hold; scans rounds outermost and
// reports the first violating cell.
inline ValidationResult validate_instance(const GameInstance& inst) {
  using detail::invalid;
  if (inst.num_experts < 1) return invalid("num_experts must be positive");
  if (inst.horizon < 1) return invalid("horizon must be positive");
  const int n = inst.num_experts, T = inst.horizon;
  auto dims_ok = [&](const RoundMatrix& m) {
    return m.num_experts() == n && m.horizon() == T;
  };
  if (!dims_ok(inst.losses)) return invalid("losses dimensions do not match instance");
  if (!dims_ok(inst.lower_bounds)) return invalid("lower_bounds dimensions do not match instance");
  if (inst.upper_bounds.has_value() != inst.slack_caps.has_value())
    return invalid("upper_bounds and slack_caps must be given together");
  if (inst.upper_bounds && !dims_ok(*inst.upper_bounds))
    return invalid("upper_bounds dimensions do not match instance");
  if (inst.slack_caps && static_cast<int>(inst.slack_caps->size()) != T)
    return invalid("slack_caps length must equal the horizon");

  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      const double l = inst.losses(t, i);
      const double lb = inst.lower_bounds(t, i);
      if (!std::isfinite(l) || !std::isfinite(lb))
        return invalid("non-finite entry at " + detail::cell(i, t), i, t);
      if (lb > l)
        return invalid("lower bound exceeds loss at " + detail::cell(i, t), i, t);
      if (inst.upper_bounds) {
        const double ub = (*inst.upper_bounds)(t, i);
        const double cap = (*inst.slack_caps)[t];
        if (!std::isfinite(ub) || !std::isfinite(cap))
          return invalid("non-finite upper bound data at " + detail::cell(i, t), i, t);
        if (ub < l)
          return invalid("upper bound below loss at " + detail::cell(i, t), i, t);
        if (ub - l > cap)
          return invalid("upper-bound slack exceeds cap at " + detail::cell(i, t), i, t);
      }
    }
  }
  return {};
}

// Subtracts c_t = min_i lower_bounds(t, i) from every loss and bound of round
// t, so min_i lower_bounds(t, i) = 0 afterwards. Slacks, per-round spreads,
// and all pairwise loss differences within a round are unchanged, hence so is
// the regret of any algorithm. Idempotent.
inline GameInstance normalize_instance(const GameInstance& inst) {
  ValidationResult v = validate_instance(inst);
  if (!v.ok) throw std::invalid_argument("normalize_instance: " + v.message);
  GameInstance out = inst;
  for (int t = 0; t < inst.horizon; ++t) {
    const auto lb = inst.lower_bounds.round(t);
    const double c = *std::min_element(lb.begin(), lb.end());
    for (int i = 0; i < inst.num_experts; ++i) {
      out.losses(t, i) -= c;
      out.lower_bounds(t, i) -= c;
      if (out.upper_bounds) (*out.upper_bounds)(t, i) -= c;
    }
  }
  return out;
}

// Distribution over experts; entries strictly positive, summing to 1.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw std::invalid_argument("ProbabilityVector: empty");
    double sum = 0.0;
    for (double v : w_) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("ProbabilityVector: entries must be strictly positive");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("ProbabilityVector: entries must sum to 1");
  }

  static ProbabilityVector uniform(int n) {
    if (n < 1) throw std::invalid_argument("ProbabilityVector: n must be positive");
    return ProbabilityVector(std::vector<double>(n, 1.0 / n));
  }

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& weights() const { return w_; }
  std::span<const double> span() const { return {w_.data(), w_.size()}; }

 private:
  std::vector<double> w_;
};

// What the learner observes in the lower-bound model: its own realized loss
// plus every expert's lower bound. By construction this record cannot carry
// any unchosen loss.
struct LowerBoundFeedback {
  int chosen = 0;
  double chosen_loss = 0.0;
  std::vector<double> lower_bounds;
};

// Upper-bound model: every expert's upper bound plus the cap on upper - loss.
struct UpperBoundFeedback {
  int chosen = 0;
  double chosen_loss = 0.0;
  std::vector<double> upper_bounds;
  double slack_cap = 0.0;
};

// Full-information variant consumed by Hedge: the entire loss vector.
struct FullLossFeedback {
  std::vector<double> losses;
};

using RoundFeedback = std::variant<LowerBoundFeedback, UpperBoundFeedback, FullLossFeedback>;

// Draws index i with probability p[i] by inverse CDF; consumes exactly one
// stream step.
inline int sample_action(const ProbabilityVector& p, RandomStream& rng) {
  const double u = rng.next_unit();
  double cum = 0.0;
  const int n = p.size();
  for (int i = 0; i < n; ++i) {
    cum += p[i];
    if (u < cum) return i;
  }
  return n - 1;  // u landed in the rounding gap below 1
}

// Softmax of -eta * cum_est_losses, computed in shifted form so the result is
// finite for arbitrarily large cumulative losses. Entries that underflow are
// bumped to the smallest positive double; this is a representability fix, not
// an exploration floor.
inline ProbabilityVector distribution_from_cumloss(double eta,
                                                   std::span<const double> cum_est_losses) {
  if (!(eta > 0.0)) throw std::invalid_argument("distribution_from_cumloss: eta must be positive");
  if (cum_est_losses.empty())
    throw std::invalid_argument("distribution_from_cumloss: empty loss vector");
  double m = std::numeric_limits<double>::infinity();
  for (double v : cum_est_losses) {
    if (!std::isfinite(v))
      throw std::invalid_argument("distribution_from_cumloss: non-finite entry");
    m = std::min(m, v);
  }
  std::vector<double> w(cum_est_losses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-eta * (cum_est_losses[i] - m));
    total += w[i];
  }
  for (double& v : w) {
    v /= total;
    if (v <= 0.0) v = std::numeric_limits<double>::denorm_min();
  }
  return ProbabilityVector(std::move(w));
}

// Per-round record of one episode plus the final cumulative algorithm loss.
struct RunTrace {
  std::vector<ProbabilityVector> distributions;            // p_t used at round t
  std::vector<int> actions;                                // I_t
  std::vector<double> realized_losses;                     // loss of the chosen expert
  std::vector<std::vector<double>> estimated_losses;       // per-round estimates
  std::vector<std::vector<double>> cum_estimated_losses;   // running sums after round t
  double algorithm_loss = 0.0;                             // L_{A,T}
};

}  // namespace explb
