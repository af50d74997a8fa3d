#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "explb/harness.hpp"
#include "explb/reporting.hpp"

using namespace explb;

namespace {
ScenarioSpec quick_spec(ScenarioKind kind, int n, int T, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = kind;
  s.num_experts = n;
  s.horizon = T;
  s.seed = seed;
  return s;
}
}  // namespace

TEST_CASE("auto tuning uses the instance quantity", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::bandit, 4, 100, 3));
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::exp3lb;
  const ResolvedLearner rl = resolve_learner(cfg, inst, 0.05);
  CHECK(rl.bound_kind == "second_order");
  CHECK(rl.eta == Catch::Approx(tune_eta(rl.quantities.Q_theorem, 4)).margin(1e-15));
  CHECK(rl.theoretical_bound ==
        Catch::Approx(std::sqrt(rl.quantities.Q_theorem * std::log(4.0))).epsilon(1e-12));
  CHECK(rl.per_round_q.size() == 100);
  double total = 0.0;
  for (double v : rl.per_round_q) total += v;
  CHECK(total == Catch::Approx(rl.q_tuning).epsilon(1e-12));
}

TEST_CASE("preset resolution derives counts from the instance", "[harness]") {
  ScenarioSpec spec = quick_spec(ScenarioKind::mixed, 4, 100, 9);
  spec.full_info_rounds = 40;
  const GameInstance inst = generate_instance(spec);
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::exp3lb;
  cfg.eta_preset = EtaPreset::mixed;
  const ResolvedLearner rl = resolve_learner(cfg, inst, 0.05);
  CHECK(rl.bound_kind == "mixed_preset");
  const double q = 40.0 / 2.0 + 2.0 * 4.0 * 60.0;
  CHECK(rl.q_tuning == Catch::Approx(q).margin(1e-12));
  CHECK(rl.eta == Catch::Approx(std::sqrt(8.0 * std::log(4.0) / (40.0 + 16.0 * 60.0)))
                      .margin(1e-12));
  CHECK(rl.theoretical_bound == Catch::Approx(std::sqrt(q * std::log(4.0))).epsilon(1e-12));

  ScenarioSpec vs = quick_spec(ScenarioKind::variable_subset, 3, 4, 9);
  vs.subsets = std::vector<std::vector<int>>{{0}, {0, 1}, {}, {0, 1, 2}};
  const GameInstance vsi = generate_instance(vs);
  LearnerConfig vcfg;
  vcfg.algorithm = Algorithm::exp3lb;
  vcfg.eta_preset = EtaPreset::variable_subset;
  const ResolvedLearner vrl = resolve_learner(vcfg, vsi, 0.05);
  CHECK(vrl.bound_kind == "subset_preset");
  // sum of missing experts = 2 + 1 + 3 + 0
  CHECK(vrl.q_tuning == Catch::Approx(4.5 * 4.0 + 2.0 * 6.0).margin(1e-12));
}

TEST_CASE("hp_iii substitution feeds both beta and eta", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::full_info, 4, 200, 5));
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::exp3lbp;
  cfg.beta_mode = BetaMode::hp_iii;
  cfg.beta_delta = 0.05;
  const ResolvedLearner rl = resolve_learner(cfg, inst, 0.05);
  // full information: Q = q(l)/2 stays far below 2T, so the substitution kicks in
  CHECK(rl.q_substituted);
  CHECK(rl.q_tuning == Catch::Approx(400.0).margin(1e-12));
  CHECK(rl.eta == Catch::Approx(tune_eta(400.0, 4)).margin(1e-15));
  CHECK(rl.bound_kind == "hp_iii");
  CHECK(rl.theoretical_bound ==
        Catch::Approx(hp_regret_display_i(400.0, 4, 0.05)).epsilon(1e-12));
}

TEST_CASE("configuration misuse is rejected", "[harness]") {
  const GameInstance lb = generate_instance(quick_spec(ScenarioKind::bandit, 3, 10, 1));
  const GameInstance ub = generate_instance(quick_spec(ScenarioKind::upper_bound, 3, 10, 1));
  LearnerConfig cfg;

  cfg.algorithm = Algorithm::exp3ub;
  CHECK_THROWS_AS(resolve_learner(cfg, lb, 0.05), std::invalid_argument);
  CHECK_NOTHROW(resolve_learner(cfg, ub, 0.05));

  cfg.algorithm = Algorithm::exp3lb;
  CHECK_THROWS_AS(resolve_learner(cfg, ub, 0.05), std::invalid_argument);

  cfg.beta = 0.1;  // beta on a non-hp learner
  CHECK_THROWS_AS(resolve_learner(cfg, lb, 0.05), std::invalid_argument);

  LearnerConfig pre;
  pre.algorithm = Algorithm::exp3lbp;
  pre.eta_preset = EtaPreset::bandit;
  CHECK_THROWS_AS(resolve_learner(pre, lb, 0.05), std::invalid_argument);

  LearnerConfig dbl;
  dbl.algorithm = Algorithm::exp3lb_doubling;
  dbl.eta = 0.5;  // the wrapper retunes at every restart
  CHECK_THROWS_AS(resolve_learner(dbl, lb, 0.05), std::invalid_argument);
}

TEST_CASE("episodes are deterministic and a single expert has zero regret", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::bandit, 1, 30, 2));
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::exp3lb;
  const ResolvedLearner rl = resolve_learner(cfg, inst, 0.05);
  const RunTrace t1 = run_episode(inst, rl, 77);
  const RunTrace t2 = run_episode(inst, rl, 77);
  CHECK(t1.actions == t2.actions);
  CHECK(t1.realized_losses == t2.realized_losses);
  CHECK(t1.algorithm_loss == t2.algorithm_loss);
  CHECK(t1.algorithm_loss == Catch::Approx(best_expert_loss(inst).cum_loss).margin(1e-12));
}

TEST_CASE("traces have horizon length and running cumulative sums", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::generic_lb, 4, 40, 19));
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::exp3lb;
  const ResolvedLearner rl = resolve_learner(cfg, inst, 0.05);
  const RunTrace tr = run_episode(inst, rl, 55);
  REQUIRE(tr.actions.size() == 40);
  REQUIRE(tr.distributions.size() == 40);
  REQUIRE(tr.estimated_losses.size() == 40);
  REQUIRE(tr.cum_estimated_losses.size() == 40);
  std::vector<double> running(4, 0.0);
  double alg = 0.0;
  for (int t = 0; t < 40; ++t) {
    for (int i = 0; i < 4; ++i) {
      running[i] += tr.estimated_losses[t][i];
      CHECK(tr.cum_estimated_losses[t][i] == Catch::Approx(running[i]).margin(1e-12));
    }
    CHECK(tr.realized_losses[t] == inst.losses(t, tr.actions[t]));
    alg += tr.realized_losses[t];
  }
  CHECK(tr.algorithm_loss == Catch::Approx(alg).margin(1e-12));
}

TEST_CASE("full information makes the estimates exact", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::full_info, 5, 60, 4));
  LearnerConfig cfg;
  cfg.algorithm = Algorithm::exp3lb;
  const ResolvedLearner rl = resolve_learner(cfg, inst, 0.05);
  const RunTrace tr = run_episode(inst, rl, 123);
  for (int i = 0; i < 5; ++i) {
    double true_cum = 0.0;
    for (int t = 0; t < 60; ++t) true_cum += inst.losses(t, i);
    CHECK(tr.cum_estimated_losses.back()[i] == Catch::Approx(true_cum).margin(1e-12));
  }
}

TEST_CASE("degenerate limits reproduce exp3 and hedge step for step", "[harness]") {
  const GameInstance bandit = generate_instance(quick_spec(ScenarioKind::bandit, 5, 120, 17));
  LearnerConfig lb_cfg, e3_cfg;
  lb_cfg.algorithm = Algorithm::exp3lb;
  e3_cfg.algorithm = Algorithm::exp3;
  const ResolvedLearner rl_lb = resolve_learner(lb_cfg, bandit, 0.05);
  const ResolvedLearner rl_e3 = resolve_learner(e3_cfg, bandit, 0.05);
  CHECK(rl_lb.eta == rl_e3.eta);
  const RunTrace a = run_episode(bandit, rl_lb, 9);
  const RunTrace b = run_episode(bandit, rl_e3, 9);
  CHECK(a.actions == b.actions);
  for (std::size_t t = 0; t < a.distributions.size(); ++t)
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(a.distributions[t][i] - b.distributions[t][i]) <= 1e-12);

  const GameInstance full = generate_instance(quick_spec(ScenarioKind::full_info, 5, 120, 18));
  LearnerConfig h_cfg;
  h_cfg.algorithm = Algorithm::hedge;
  const ResolvedLearner rl_lbf = resolve_learner(lb_cfg, full, 0.05);
  const ResolvedLearner rl_h = resolve_learner(h_cfg, full, 0.05);
  const RunTrace c = run_episode(full, rl_lbf, 31);
  const RunTrace d = run_episode(full, rl_h, 31);
  CHECK(c.actions == d.actions);
  CHECK(c.algorithm_loss == d.algorithm_loss);  // identical regret, same seed
  for (std::size_t t = 0; t < c.distributions.size(); ++t)
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(c.distributions[t][i] - d.distributions[t][i]) <= 1e-12);
}

TEST_CASE("identical experts give zero pseudo-regret", "[harness]") {
  namespace fs = std::filesystem;
  fs::create_directories("test_tmp");
  GameInstance flat;
  flat.num_experts = 3;
  flat.horizon = 25;
  flat.losses = RoundMatrix(3, 25);
  for (int t = 0; t < 25; ++t)
    for (int i = 0; i < 3; ++i) flat.losses(t, i) = 0.1 + 0.03 * t;
  flat.lower_bounds = RoundMatrix(3, 25, 0.0);
  save_instance_file(flat, "test_tmp/flat.json");

  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::bandit, 3, 25, 0);
  cfg.scenario.loss_model = LossModel::adversarial_handcrafted;
  cfg.scenario.instance_path = "test_tmp/flat.json";
  cfg.learner.algorithm = Algorithm::exp3lb;
  cfg.replicates = 40;
  cfg.seed = 5;
  const RegretReport rep = estimate_pseudo_regret(cfg, false).report;
  CHECK(rep.mean_pseudo_regret == Catch::Approx(0.0).margin(1e-10));
  CHECK(rep.std_error.value() <= 1e-12);
}

TEST_CASE("bandit preset attaches the zeroth-order bound", "[harness]") {
  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::bandit, 2, 1000, 77);
  cfg.learner.algorithm = Algorithm::exp3lb;
  cfg.learner.eta_preset = EtaPreset::bandit;
  cfg.replicates = 50;
  cfg.seed = 3;
  const RegretReport rep = estimate_pseudo_regret(cfg, false).report;
  CHECK(rep.bound_kind == "bandit_preset");
  CHECK(rep.theoretical_bound == Catch::Approx(52.655376954683184).epsilon(1e-9));
  CHECK(bound_check(rep).pass);
}

TEST_CASE("a single replicate reports no standard error", "[harness]") {
  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::bandit, 3, 20, 6);
  cfg.learner.algorithm = Algorithm::exp3;
  cfg.replicates = 1;
  const RegretReport rep = estimate_pseudo_regret(cfg, false).report;
  CHECK_FALSE(rep.std_error.has_value());
  CHECK(rep.per_replicate_regret.size() == 1);
}

TEST_CASE("replicate results do not depend on execution order", "[harness]") {
  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::generic_lb, 4, 60, 41);
  cfg.learner.algorithm = Algorithm::exp3lb;
  cfg.replicates = 32;
  cfg.seed = 12;
  const RegretReport rep = estimate_pseudo_regret(cfg, false).report;

  // recompute each replicate serially in reverse order
  GameInstance inst = normalize_instance(generate_instance(cfg.scenario));
  const ResolvedLearner rl = resolve_learner(cfg.learner, inst, cfg.delta);
  const BestExpert best = best_expert_loss(inst);
  std::vector<double> regret(32);
  for (int r = 31; r >= 0; --r) {
    const EpisodeStats st =
        run_episode_stats(inst, rl, cfg.seed ^ static_cast<std::uint64_t>(r), false);
    regret[r] = st.algorithm_loss - best.cum_loss;
  }
  CHECK(regret == rep.per_replicate_regret);
}

TEST_CASE("bound_check compares mean against bound with noise allowance", "[harness]") {
  RegretReport rep;
  rep.mean_pseudo_regret = 10.0;
  rep.theoretical_bound = 50.0;
  rep.std_error = 1.0;
  BoundCheck bc = bound_check(rep);
  CHECK(bc.pass);
  CHECK(bc.margin == Catch::Approx(40.0).margin(1e-15));

  rep.mean_pseudo_regret = 50.0;  // equality passes
  CHECK(bound_check(rep).pass);

  rep.mean_pseudo_regret = 54.0;  // bound + 4 sigma fails
  CHECK_FALSE(bound_check(rep).pass);
  rep.mean_pseudo_regret = 52.5;  // within 3 sigma passes
  CHECK(bound_check(rep).pass);
}

TEST_CASE("upper-bound learner passes its second-order bound", "[harness]") {
  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::upper_bound, 4, 300, 23);
  cfg.scenario.slack_cap = 0.3;
  cfg.learner.algorithm = Algorithm::exp3ub;
  cfg.replicates = 100;
  cfg.seed = 8;
  const RegretReport rep = estimate_pseudo_regret(cfg, false).report;
  CHECK(rep.bound_kind == "second_order_alpha");
  CHECK(bound_check(rep).pass);
}

TEST_CASE("concentration is exact under full information", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::full_info, 3, 40, 31));
  // zero slack: estimates equal true losses deterministically
  CHECK(concentration_check(inst, 0.5, 0.2, 200, 0, 4) == 0.0);

  const GameInstance bandit = generate_instance(quick_spec(ScenarioKind::bandit, 3, 100, 32));
  const double frac = concentration_check(bandit, 0.3, 0.5, 400, 1, 9);
  CHECK(frac <= 0.5 + 3.0 * std::sqrt(0.25 / 400.0));
  CHECK_THROWS_AS(concentration_check(bandit, 1.5, 0.5, 10), std::invalid_argument);
}

TEST_CASE("experiment configs parse from JSON with precise errors", "[harness]") {
  const nlohmann::json j = {
      {"scenario",
       {{"kind", "mixed"},
        {"num_experts", 6},
        {"horizon", 500},
        {"loss_model", "uniform_iid"},
        {"full_info_rounds", 250},
        {"seed", 99}}},
      {"learner",
       {{"algorithm", "exp3lbp"}, {"eta", "auto"}, {"beta", {{"mode", "hp_iii"}, {"delta", 0.02}}}}},
      {"replicates", 64},
      {"seed", 11},
      {"delta", 0.05},
      {"out", "results"}};
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.scenario.kind == ScenarioKind::mixed);
  CHECK(cfg.scenario.num_experts == 6);
  CHECK(cfg.learner.algorithm == Algorithm::exp3lbp);
  CHECK(cfg.learner.beta_mode == BetaMode::hp_iii);
  CHECK(cfg.learner.beta_delta == Catch::Approx(0.02));
  CHECK_FALSE(cfg.learner.eta.has_value());
  CHECK(cfg.replicates == 64);
  CHECK(cfg.out_dir == "results");

  nlohmann::json bad = j;
  bad["scenario"]["typo_key"] = 1;
  CHECK_THROWS_WITH(config_from_json(bad),
                    Catch::Matchers::ContainsSubstring("typo_key"));

  bad = j;
  bad["learner"]["eta"] = "fast";
  CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);

  namespace fs = std::filesystem;
  fs::create_directories("test_tmp");
  {
    std::ofstream out("test_tmp/malformed.json");
    out << "{\n  \"scenario\": oops\n}\n";
  }
  CHECK_THROWS_WITH(load_config_file("test_tmp/malformed.json"),
                    Catch::Matchers::ContainsSubstring("malformed.json:2:"));
}

TEST_CASE("csv outputs follow the documented schemas", "[harness]") {
  const GameInstance inst = generate_instance(quick_spec(ScenarioKind::bandit, 1, 5, 3));
  LearnerConfig lc;
  lc.algorithm = Algorithm::exp3lb;
  const ResolvedLearner rl = resolve_learner(lc, inst, 0.05);
  const RunTrace tr = run_episode(inst, rl, 1);
  std::ostringstream trace_csv;
  write_trace_csv(trace_csv, tr, per_round_best_cumloss(inst));
  std::istringstream lines(trace_csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,action,realized_loss,p_1,cum_regret");
  std::string row;
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    CHECK(row.substr(row.rfind(',') + 1) == "0");  // one expert: regret identically zero
  }
  CHECK(rows == 5);

  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::bandit, 3, 10, 3);
  cfg.learner.algorithm = Algorithm::exp3lb;
  cfg.replicates = 8;
  const EstimateResult res = estimate_pseudo_regret(cfg, true);
  std::ostringstream curve_csv;
  write_curve_csv(curve_csv, res.curve);
  std::istringstream clines(curve_csv.str());
  std::getline(clines, header);
  CHECK(header == "round,mean_regret,stderr,bound");
  CHECK(res.curve.mean_regret.size() == 10);
  // the final curve point agrees with the report
  CHECK(res.curve.mean_regret.back() ==
        Catch::Approx(res.report.mean_pseudo_regret).margin(1e-12));
  CHECK(res.curve.bound.back() == Catch::Approx(res.report.theoretical_bound).margin(1e-9));
}

TEST_CASE("reports serialize their quantities and metadata", "[harness]") {
  ExperimentConfig cfg;
  cfg.scenario = quick_spec(ScenarioKind::bandit, 4, 50, 21);
  cfg.learner.algorithm = Algorithm::exp3lb_doubling;
  cfg.replicates = 4;
  const RegretReport rep = estimate_pseudo_regret(cfg, false).report;
  const nlohmann::json j = report_to_json(rep);
  CHECK(j.at("bound_kind") == "doubling_reference");
  CHECK(j.at("quantities").contains("Q_uh"));
  CHECK(j.at("quantities").at("Q_uh").get<double>() == Catch::Approx(2.0 * 4.0 * 50.0));
  CHECK(j.at("doubling").at("initial_guess").get<double>() ==
        Catch::Approx(4.0 * std::log(4.0)));
  CHECK(j.at("doubling").at("accumulator") == "pessimistic_observable");
  CHECK(j.at("per_replicate_regret").size() == 4);
}
