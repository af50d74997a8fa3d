// Command-line front end: play single episodes, run Monte Carlo regret
// estimates, sweep a scenario parameter, and run the verification suite.
//
// Exit codes: 0 success / all checks passed, 1 check failure, 2 invalid
// input. All file outputs go under --out.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "explb/verify.hpp"

namespace fs = std::filesystem;
using namespace explb;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::string out_dir;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonOpts& o, bool config_required) {
  auto* c = sub->add_option("--config", o.config_path, "JSON experiment config");
  if (config_required) c->required();
  sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  sub->add_option("--replicates", o.replicates, "replicate count (overrides the config)");
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_flag("--quiet", o.quiet, "suppress progress output");
}

ExperimentConfig load_with_overrides(const CommonOpts& o) {
  ExperimentConfig cfg = load_config_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.replicates) cfg.replicates = *o.replicates;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  return cfg;
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "out" : dir);
  fs::create_directories(p);
  return p;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_run(const CommonOpts& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  GameInstance inst = generate_instance(cfg.scenario);
  if (!inst.upper_bounds) inst = normalize_instance(inst);
  const ResolvedLearner rl = resolve_learner(cfg.learner, inst, cfg.delta);
  const RunTrace trace = run_episode(inst, rl, cfg.seed);
  const std::vector<double> best = per_round_best_cumloss(inst);

  const fs::path dir = ensure_out_dir(cfg.out_dir);
  std::ostringstream csv;
  write_trace_csv(csv, trace, best);
  write_text_file(dir / "trace.csv", csv.str());
  if (!o.quiet)
    std::cout << "episode: algorithm=" << algorithm_name(rl.algorithm)
              << " eta=" << fmt_double(rl.eta) << " loss=" << fmt_double(trace.algorithm_loss)
              << " -> " << (dir / "trace.csv").string() << "\n";
  return 0;
}

int cmd_estimate(const CommonOpts& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const EstimateResult res = estimate_pseudo_regret(cfg, true);

  const fs::path dir = ensure_out_dir(cfg.out_dir);
  write_text_file(dir / "report.json", report_to_json(res.report).dump(2) + "\n");
  std::ostringstream csv;
  write_curve_csv(csv, res.curve);
  write_text_file(dir / "regret_curve.csv", csv.str());

  if (!o.quiet) {
    const BoundCheck bc = bound_check(res.report);
    std::cout << "mean_pseudo_regret=" << fmt_double(res.report.mean_pseudo_regret)
              << " std_error="
              << (res.report.std_error ? fmt_double(*res.report.std_error) : std::string("n/a"))
              << " bound[" << res.report.bound_kind
              << "]=" << fmt_double(res.report.theoretical_bound)
              << " margin=" << fmt_double(bc.margin) << " -> " << (dir / "report.json").string()
              << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& param, const std::string& values_csv) {
  std::ifstream in(o.config_path);
  if (!in) throw std::invalid_argument("cannot open config file " + o.config_path);
  nlohmann::json base = nlohmann::json::parse(in);

  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    values.push_back(std::stod(tok));
  }
  if (values.empty()) throw std::invalid_argument("sweep: --values is empty");

  std::vector<SweepRow> rows;
  for (double v : values) {
    nlohmann::json patched = base;
    if (v == static_cast<long long>(v))
      patched["scenario"][param] = static_cast<long long>(v);
    else
      patched["scenario"][param] = v;
    ExperimentConfig cfg = config_from_json(patched);
    if (o.seed) cfg.seed = *o.seed;
    if (o.replicates) cfg.replicates = *o.replicates;
    const RegretReport rep = estimate_pseudo_regret(cfg, false).report;
    rows.push_back({v, rep.mean_pseudo_regret, rep.std_error.value_or(0.0),
                    rep.theoretical_bound});
    if (!o.quiet)
      std::cout << param << "=" << fmt_double(v)
                << " mean_regret=" << fmt_double(rep.mean_pseudo_regret)
                << " bound=" << fmt_double(rep.theoretical_bound) << "\n";
  }

  const fs::path dir = ensure_out_dir(!o.out_dir.empty()
                                          ? o.out_dir
                                          : base.value("out", std::string("out")));
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text_file(dir / "sweep.csv", csv.str());
  if (!o.quiet) std::cout << "-> " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_verify(const CommonOpts& o, int hp_replicates, int doubling_replicates) {
  VerifyOptions opts;
  opts.seed = o.seed.value_or(7);
  if (o.replicates) opts.bound_replicates = *o.replicates;
  opts.hp_replicates = hp_replicates;
  opts.doubling_replicates = doubling_replicates;
  opts.quiet = o.quiet;  // quiet keeps only the summary line

  const std::vector<CheckResult> results = run_verify_suite(opts, &std::cout);
  if (!o.out_dir.empty()) {
    const fs::path dir = ensure_out_dir(o.out_dir);
    write_text_file(dir / "verify_report.json", verify_results_to_json(results).dump(2) + "\n");
  }
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"best-expert learners with lower-bounded loss feedback"};
  app.require_subcommand(1);

  CommonOpts run_o, est_o, ver_o, swp_o;
  std::string sweep_param = "horizon";
  std::string sweep_values;
  int hp_replicates = 10000;
  int doubling_replicates = 200;

  auto* sub_run = app.add_subcommand("run", "play one episode and write the trace CSV");
  add_common(sub_run, run_o, true);

  auto* sub_est =
      app.add_subcommand("estimate", "Monte Carlo pseudo-regret estimate with bound comparison");
  add_common(sub_est, est_o, true);

  auto* sub_ver = app.add_subcommand("verify", "run the full property and bound suite");
  add_common(sub_ver, ver_o, false);
  sub_ver->add_option("--hp-replicates", hp_replicates,
                      "replicates for the concentration and quantile checks");
  sub_ver->add_option("--doubling-replicates", doubling_replicates,
                      "replicates per horizon for the doubling check");

  auto* sub_swp = app.add_subcommand("sweep", "grid over a scenario parameter");
  add_common(sub_swp, swp_o, true);
  sub_swp->add_option("--param", sweep_param, "scenario key to vary (default: horizon)");
  sub_swp->add_option("--values", sweep_values, "comma-separated grid values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sub_run->parsed()) return cmd_run(run_o);
    if (sub_est->parsed()) return cmd_estimate(est_o);
    if (sub_ver->parsed()) return cmd_verify(ver_o, hp_replicates, doubling_replicates);
    if (sub_swp->parsed()) return cmd_sweep(swp_o, sweep_param, sweep_values);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
