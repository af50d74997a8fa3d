#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "explb/learners.hpp"
#include "explb/random.hpp"

using namespace explb;

TEST_CASE("hedge accumulates true losses into the softmax", "[learners]") {
  // identical losses keep the distribution uniform forever
  LearnerState st = make_learner(Algorithm::hedge, 3, 0.8);
  for (int t = 0; t < 10; ++t) {
    StepResult r = learner_step(st, RoundFeedback(FullLossFeedback{{0.4, 0.4, 0.4}}));
    st = r.state;
    for (int i = 0; i < 3; ++i)
      CHECK(r.next_distribution[i] == Catch::Approx(1.0 / 3.0).margin(1e-14));
  }

  // one round, eta = ln 2, losses (0,1) -> (2/3, 1/3)
  LearnerState h2 = make_learner(Algorithm::hedge, 2, std::log(2.0));
  const StepResult r = learner_step(h2, RoundFeedback(FullLossFeedback{{0.0, 1.0}}));
  CHECK(r.next_distribution[0] == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(r.next_distribution[1] == Catch::Approx(1.0 / 3.0).margin(1e-15));

  // adding a constant to a round's losses leaves the next distribution alone
  LearnerState a = make_learner(Algorithm::hedge, 2, 0.6);
  LearnerState b = make_learner(Algorithm::hedge, 2, 0.6);
  const StepResult ra = learner_step(a, RoundFeedback(FullLossFeedback{{0.1, 0.9}}));
  const StepResult rb = learner_step(b, RoundFeedback(FullLossFeedback{{5.1, 5.9}}));
  for (int i = 0; i < 2; ++i)
    CHECK(ra.next_distribution[i] == Catch::Approx(rb.next_distribution[i]).margin(1e-12));
}

TEST_CASE("exp3 estimate is the importance-weighted chosen loss", "[learners]") {
  const ProbabilityVector p(std::vector<double>{0.25, 0.75});
  const std::vector<double> est = exp3_estimate(0, 0.5, p);
  CHECK(est[0] == Catch::Approx(2.0).margin(1e-15));
  CHECK(est[1] == 0.0);
  CHECK(exp3_estimate(1, 0.0, p) == std::vector<double>{0.0, 0.0});

  // conditional unbiasedness by enumeration over the chosen index
  const std::vector<double> losses{0.2, 0.9};
  for (int k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (int chosen = 0; chosen < 2; ++chosen)
      mean += p[chosen] * exp3_estimate(chosen, losses[chosen], p)[k];
    CHECK(mean == Catch::Approx(losses[k]).margin(1e-15));
  }
}

TEST_CASE("exp3lb estimate adds the weighted observed slack to the bounds", "[learners]") {
  const ProbabilityVector p(std::vector<double>{0.25, 0.75});
  const std::vector<double> lb{0.1, 0.2};
  const std::vector<double> est = exp3lb_estimate(0, 0.5, lb, p);
  CHECK(est[0] == Catch::Approx(1.7).margin(1e-15));
  CHECK(est[1] == Catch::Approx(0.2).margin(1e-15));

  // full information: zero slack, output equals the bounds for any choice
  for (int chosen = 0; chosen < 2; ++chosen)
    CHECK(exp3lb_estimate(chosen, lb[chosen], lb, p) == lb);

  // trivial bounds: bitwise identical to the bandit estimator
  const std::vector<double> zeros{0.0, 0.0};
  for (int chosen = 0; chosen < 2; ++chosen)
    CHECK(exp3lb_estimate(chosen, 0.37, zeros, p) == exp3_estimate(chosen, 0.37, p));

  CHECK_THROWS_AS(exp3lb_estimate(0, 0.05, lb, p), std::invalid_argument);
}

TEST_CASE("exp3alpha generalizes both estimators", "[learners]") {
  const ProbabilityVector p(std::vector<double>{0.5, 0.5});
  const std::vector<double> lb{0.1, 0.2};
  for (int chosen = 0; chosen < 2; ++chosen) {
    CHECK(exp3alpha_estimate(chosen, 0.6, lb, p) == exp3lb_estimate(chosen, 0.6, lb, p));
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(exp3alpha_estimate(chosen, 0.6, zeros, p) == exp3_estimate(chosen, 0.6, p));
  }

  // negative alphas are fine as long as alpha[chosen] <= loss
  const std::vector<double> alphas{-0.2, 0.1};
  const std::vector<double> est = exp3alpha_estimate(1, 0.4, alphas, p);
  CHECK(est[0] == Catch::Approx(-0.2).margin(1e-15));
  CHECK(est[1] == Catch::Approx(0.7).margin(1e-15));
  CHECK_THROWS_AS(exp3alpha_estimate(0, -0.5, alphas, p), std::invalid_argument);
}

TEST_CASE("upper bounds map to alphas by subtracting the cap", "[learners]") {
  CHECK(exp3ub_alphas(std::vector<double>{1.0, 1.0}, 1.0) == std::vector<double>{0.0, 0.0});
  const std::vector<double> a = exp3ub_alphas(std::vector<double>{0.6, 0.9}, 0.2);
  CHECK(a[0] == Catch::Approx(0.4).margin(1e-15));
  CHECK(a[1] == Catch::Approx(0.7).margin(1e-15));
  // the uniform shift keeps the spread
  CHECK(a[1] - a[0] == Catch::Approx(0.3).margin(1e-15));
}

TEST_CASE("correction factor formula and corner cases", "[learners]") {
  CHECK(correction_factor(0.3, 0.0) == 0.0);
  CHECK(correction_factor(0.3, 1.0) == 1.0);
  CHECK(correction_factor(0.9, 1.0) == 1.0);
  CHECK(correction_factor(0.5, 0.5) == Catch::Approx(0.5).margin(1e-15));
  // p = 1 is the continuity limit
  CHECK(correction_factor(1.0, 0.7) == 0.0);
  CHECK(correction_factor(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(correction_factor(0.5, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(correction_factor(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("correction factor identities hold on a grid", "[learners]") {
  for (int a = 0; a < 50; ++a) {
    const double p = 0.01 + (0.98 * a) / 49.0;
    for (int b = 0; b <= 50; ++b) {
      const double bs = b / 50.0;
      const double x = correction_factor(p, bs);
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      CHECK(std::abs(x - bs * ((1.0 - x) / p + 2.0 * x - 1.0)) <= 1e-12);
      CHECK(bs * ((1.0 - x) / p - 1.0) <= 1.0 + 1e-12);
      CHECK(p * x * bs <= bs * bs + 1e-12);
      CHECK(bs * (1.0 - x) * (1.0 - x) / p <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("exp3lbp estimate shrinks the slack by the correction factor", "[learners]") {
  const ProbabilityVector p(std::vector<double>{0.5, 0.5});
  const std::vector<double> lb{0.1, 0.2};

  // beta = 0 falls back to exp3lb exactly
  for (int chosen = 0; chosen < 2; ++chosen)
    CHECK(exp3lbp_estimate(chosen, 0.6, lb, p, 0.0) == exp3lb_estimate(chosen, 0.6, lb, p));

  // beta * slack = 1 wipes the slack term
  CHECK(exp3lbp_estimate(0, 1.1, lb, p, 1.0) == lb);

  // worked case: s = 0.5, beta = 1 -> x = 0.5, added term s(1-x)/p = 0.5
  const std::vector<double> est = exp3lbp_estimate(0, 0.6, lb, p, 1.0);
  CHECK(est[0] == Catch::Approx(0.6).margin(1e-15));
  CHECK(est[1] == Catch::Approx(0.2).margin(1e-15));

  CHECK_THROWS_AS(exp3lbp_estimate(0, 1.2, lb, p, 1.0), std::invalid_argument);
}

TEST_CASE("exp3lbp estimates are biased downward", "[learners]") {
  RandomStream rng(81);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + rng.next_below(6);
    std::vector<double> w(n), lb(n), loss(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = rng.next_unit() + 1e-3;
      wsum += w[i];
      lb[i] = rng.next_unit();
      loss[i] = lb[i] + rng.next_unit();
    }
    for (double& v : w) v /= wsum;
    const ProbabilityVector p(w);
    const double beta = rng.next_unit();  // beta * slack <= 1 since slack < 1
    std::vector<double> mean(n, 0.0);
    for (int chosen = 0; chosen < n; ++chosen) {
      const std::vector<double> est = exp3lbp_estimate(chosen, loss[chosen], lb, p, beta);
      for (int k = 0; k < n; ++k) mean[k] += p[chosen] * est[k];
    }
    for (int k = 0; k < n; ++k) {
      const double x = correction_factor(p[k], beta * (loss[k] - lb[k]));
      CHECK(mean[k] <= loss[k] + 1e-12);
      // the gap is exactly s_k x_k
      CHECK(mean[k] == Catch::Approx(loss[k] - (loss[k] - lb[k]) * x).margin(1e-12));
      if (x == 0.0) CHECK(mean[k] == Catch::Approx(loss[k]).margin(1e-12));
    }
  }
}

TEST_CASE("learner_step dispatches and validates feedback types", "[learners]") {
  LearnerState st = make_learner(Algorithm::exp3lb, 2, 1.0);
  CHECK(current_distribution(st)[0] == Catch::Approx(0.5).margin(1e-15));

  CHECK_THROWS_AS(learner_step(st, RoundFeedback(FullLossFeedback{{0.1, 0.2}})),
                  std::invalid_argument);

  // fresh state plays uniform p = (0.5, 0.5): estimate = 0.1 + 0.4/0.5
  const StepResult r =
      learner_step(st, RoundFeedback(LowerBoundFeedback{0, 0.5, {0.1, 0.2}}));
  CHECK(r.state.round == 1);
  CHECK(r.state.cum_est_losses[0] == Catch::Approx(0.9).margin(1e-15));
  CHECK(r.state.cum_est_losses[1] == Catch::Approx(0.2).margin(1e-15));

  LearnerState ub = make_learner(Algorithm::exp3ub, 2, 1.0);
  CHECK_THROWS_AS(learner_step(ub, RoundFeedback(LowerBoundFeedback{0, 0.5, {0.0, 0.0}})),
                  std::invalid_argument);
  const StepResult ru =
      learner_step(ub, RoundFeedback(UpperBoundFeedback{0, 0.5, {0.8, 0.9}, 0.4}));
  // alpha = (0.4, 0.5); estimate = alpha + (0.1/0.5) at the chosen index
  CHECK(ru.state.cum_est_losses[0] == Catch::Approx(0.4 + 0.2).margin(1e-15));
  CHECK(ru.state.cum_est_losses[1] == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("learner updates keep cumulative estimates finite", "[learners]") {
  RandomStream rng(91);
  for (Algorithm algo : {Algorithm::exp3, Algorithm::exp3lb, Algorithm::exp3lbp}) {
    LearnerState st = make_learner(algo, 4, 0.3, algo == Algorithm::exp3lbp ? 0.5 : 0.0);
    for (int t = 0; t < 500; ++t) {
      const ProbabilityVector p = current_distribution(st);
      RandomStream sampler(rng.next_u64());
      const int a = sample_action(p, sampler);
      std::vector<double> lb(4);
      for (double& v : lb) v = 0.5 * rng.next_unit();
      const double loss = lb[a] + rng.next_unit() * 0.5;
      st = learner_step(st, RoundFeedback(LowerBoundFeedback{a, loss, lb})).state;
      for (double v : st.cum_est_losses) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("doubling wrapper restarts when the guess is exceeded", "[learners]") {
  const int n = 4;
  DoublingState st = make_doubling_learner(n);
  CHECK(st.current_guess == Catch::Approx(4.0 * std::log(4.0)).margin(1e-12));
  CHECK(st.inner.eta == Catch::Approx(1.0).margin(1e-12));
  CHECK(st.epoch == 0);

  // bandit feedback: per-round pessimistic term is exactly 2N
  RandomStream rng(13);
  double q_uh = 0.0;
  int T = 200;
  for (int t = 0; t < T; ++t) {
    const std::vector<double> lb(n, 0.0);
    const int a = sample_action(current_distribution(st.inner), rng);
    DoublingStepResult r =
        doubling_step(st, RoundFeedback(LowerBoundFeedback{a, 0.5, lb}));
    if (r.restarted) {
      CHECK(r.estimated_losses.empty());
      for (double v : r.state.inner.cum_est_losses) CHECK(v == 0.0);
    }
    st = r.state;
    q_uh += 2.0 * n;
    CHECK(st.accumulated == Catch::Approx(q_uh).margin(1e-9));
    CHECK(st.current_guess >= st.accumulated);
  }
  const double g0 = 4.0 * std::log(4.0);
  const int max_epochs = static_cast<int>(std::ceil(std::log2(q_uh / g0))) + 1;
  CHECK(st.epoch >= 1);
  CHECK(st.epoch <= max_epochs);
  CHECK(st.inner.eta == Catch::Approx(tune_eta(st.current_guess, n)).margin(1e-12));

  // the accumulator needs bounds in [0,1]
  CHECK_THROWS_AS(
      doubling_step(st, RoundFeedback(LowerBoundFeedback{0, 2.0, {1.5, 0.0, 0.0, 0.0}})),
      std::invalid_argument);
}

TEST_CASE("doubling accumulator matches the full-information substitution", "[learners]") {
  // with lb = losses in [0,1], the per-round term is
  // d(l)^2/2 + 2 sum (1-l_i)^2 + 4 max(1-l_i) d(l)
  const std::vector<double> l{0.2, 0.7, 0.5};
  const double d = 0.5;
  double mid = 0.0, mx = 0.0;
  for (double v : l) {
    mid += (1.0 - v) * (1.0 - v);
    mx = std::max(mx, 1.0 - v);
  }
  const double expect = 0.5 * d * d + 2.0 * mid + 4.0 * mx * d;
  CHECK(unknown_horizon_round_term(l) == Catch::Approx(expect).margin(1e-15));
}

TEST_CASE("algorithm names round-trip", "[learners]") {
  for (Algorithm a : {Algorithm::hedge, Algorithm::exp3, Algorithm::exp3lb, Algorithm::exp3alpha,
                      Algorithm::exp3ub, Algorithm::exp3lbp, Algorithm::exp3lb_doubling})
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("exp4"), std::invalid_argument);
}
