#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drainguard/config.hpp"
#include "drainguard/csv.hpp"
#include "drainguard/experiments.hpp"
#include "drainguard/guardrail.hpp"
#include "drainguard/persist.hpp"

namespace drainguard {

inline std::string report_row(const DrainabilityReport& r) {
  std::string drops;
  for (std::size_t i = 0; i < r.q_drop_per_type.size(); ++i)
    drops += (i ? ";" : "") + format_shortest(r.q_drop_per_type[i]);
  return "residual_floor=" + format_shortest(r.residual_floor) +
         ",service_rate=" + format_shortest(r.service_rate) +
         ",slack=" + format_shortest(r.slack) +
         ",drainable=" + (r.drainable ? "true" : "false") +
         ",q_drop=" + format_shortest(r.q_drop) + ",q_drop_per_type=" + drops +
         ",demand_cap=" + format_shortest(r.demand_cap) +
         ",lipschitz_bound=" + format_shortest(r.lipschitz_bound) +
         ",step_ok=" + (r.step_ok ? "true" : "false");
}

// Exit codes: 0 success, 1 config or computation error, 2 usage error.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"drainguard: GPU pricing and scaling model with a drainability guardrail"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON config file (defaults to the baseline)");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the output directory");

  double p = 0.0, s = 0.0, q0 = 0.0;
  int horizon = 0;
  std::size_t steps = 100;
  bool unshielded = false;

  auto* certify_cmd = app.add_subcommand("certify", "drainability report for a fixed pair");
  certify_cmd->add_option("--p", p, "price")->required();
  certify_cmd->add_option("--s", s, "active capacity")->required();

  auto* op_cmd = app.add_subcommand("operating-point", "fixed point of the backlog recursion");
  op_cmd->add_option("--p", p, "price")->required();
  op_cmd->add_option("--s", s, "active capacity")->required();

  auto* build_cmd = app.add_subcommand("build-tables", "build and save a transition table");
  build_cmd->add_flag("--unshielded", unshielded, "build the table without the shield");

  auto* vi_cmd = app.add_subcommand("plan-vi", "value iteration on the shielded table");
  auto* dp_cmd = app.add_subcommand("plan-dp", "finite-horizon backward DP");
  dp_cmd->add_option("--H", horizon, "horizon")->required()->check(CLI::PositiveNumber);

  auto* exp1_cmd = app.add_subcommand("exp1", "relative value gap vs horizon");
  auto* exp2_cmd = app.add_subcommand("exp2", "off-grid gap and backlog traces");
  auto* exp3_cmd = app.add_subcommand("exp3", "shield ablation in Q-learning");
  auto* exp4_cmd = app.add_subcommand("exp4", "burst demand shift test");
  auto* all_cmd = app.add_subcommand("all", "all experiments plus manifest");

  auto* sim_cmd = app.add_subcommand("simulate", "fixed-pair backlog trajectory as CSV");
  sim_cmd->add_option("--steps", steps, "number of steps")->required();
  sim_cmd->add_option("--p", p, "price")->capture_default_str();
  sim_cmd->add_option("--s", s, "active capacity")->capture_default_str();
  sim_cmd->add_option("--q0", q0, "initial backlog")->capture_default_str();
  p = 4.0, s = 4.0;

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    Workspace ws(cfg, &err);
    const auto& params = ws.params();
    const auto& pop = ws.population();

    if (*certify_cmd) {
      out << report_row(certify(pop, p, s, params)) << '\n';
    } else if (*op_cmd) {
      const auto op = operating_point(pop, p, s, params);
      out << "q_star=" << format_shortest(op.q_star)
          << ",at_zero=" << (op.at_zero ? "true" : "false") << ",iterations=" << op.iterations
          << ",residual=" << format_shortest(op.residual) << '\n';
    } else if (*build_cmd) {
      ensure_dir(ws.out_dir());
      const auto path = ws.out_dir() / Workspace::table_file(!unshielded);
      save_table(path, build_table(ws.grid(), pop, params, !unshielded), ws.hash());
      out << "wrote " << path.string() << '\n';
    } else if (*vi_cmd) {
      const auto r = value_iteration(ws.table(true), params.gamma, cfg.planning.vi_tol,
                                     cfg.planning.vi_max_sweeps);
      ensure_dir(ws.out_dir());
      const auto path = ws.out_dir() / Workspace::vi_file();
      save_values(path, StoredValues{params.gamma, true, 0, r.solution}, ws.hash());
      out << "sweeps=" << r.sweeps << ",residual=" << format_shortest(r.residuals.back())
          << '\n'
          << "wrote " << path.string() << '\n';
    } else if (*dp_cmd) {
      const auto& table = ws.table(true);
      auto r = backward_dp(table, params.gamma, horizon);
      ensure_dir(ws.out_dir());
      const auto path = ws.out_dir() / ("values_dp_H" + std::to_string(horizon) + ".bin");
      save_values(path,
                  StoredValues{params.gamma, true, static_cast<std::int32_t>(horizon),
                               ValueFunction{std::move(r.values), std::move(r.policy)}},
                  ws.hash());
      out << "H=" << horizon
          << ",truncation_bound=" << format_shortest(truncation_bound(table, params.gamma, horizon))
          << '\n'
          << "wrote " << path.string() << '\n';
    } else if (*exp1_cmd) {
      run_exp1(ws);
      out << "wrote " << (ws.out_dir() / "exp1_gap.csv").string() << '\n';
    } else if (*exp2_cmd) {
      run_exp2(ws);
      out << "wrote " << (ws.out_dir() / "exp2_gap.csv").string() << ", "
          << (ws.out_dir() / "exp2_traj.csv").string() << '\n';
    } else if (*exp3_cmd) {
      run_exp3(ws);
      out << "wrote " << (ws.out_dir() / "exp3_safety.csv").string() << '\n';
    } else if (*exp4_cmd) {
      run_exp4(ws);
      out << "wrote " << (ws.out_dir() / "exp4_burst.csv").string() << '\n';
    } else if (*all_cmd) {
      run_all(ws);
      out << "wrote " << (ws.out_dir() / "manifest.txt").string() << '\n';
    } else if (*sim_cmd) {
      const auto traj = simulate_fixed_pair(q0, pop, p, s, params, steps);
      out << "t,q\n";
      for (std::size_t t = 0; t < traj.size(); ++t)
        out << t << ',' << format_number(traj[t]) << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace drainguard
