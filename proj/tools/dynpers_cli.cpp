// Command-line driver: run a single agent, compare agents, or run ablations.
//
//   dynpers run     --preset drift --steps 50000 --out results/run
//   dynpers compare --preset drift --out results/compare
//   dynpers ablate  --preset changepoint --ablation fixed-lr --out results/abl

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dynpers/config.hpp"
#include "dynpers/harness.hpp"

namespace {

struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::optional<std::int64_t> replicas;
  std::optional<std::int64_t> delay;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (key = value lines)");
  cmd->add_option("--preset", opts.preset,
                  "Scenario: stationary, drift, changepoint, fatigue-stress");
  cmd->add_option("--seed", opts.seed, "Base seed; replica r uses seed + r");
  cmd->add_option("--steps", opts.steps, "Steps per replica");
  cmd->add_option("--replicas", opts.replicas, "Number of replicas");
  cmd->add_option("--delay", opts.delay, "Feedback delay in steps");
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--set", opts.overrides, "Extra key=value override")
      ->take_all();
}

// Preset, then config file, then flags.
dynpers::ExperimentConfig build_config(const CommonOptions& opts) {
  dynpers::ExperimentConfig config;
  if (opts.config_path) {
    dynpers::apply_config_file(config, *opts.config_path, opts.preset);
  } else if (opts.preset) {
    dynpers::apply_preset(config, *opts.preset);
  }
  if (opts.seed) config.seed = *opts.seed;
  if (opts.steps) config.steps = *opts.steps;
  if (opts.replicas) config.replicas = *opts.replicas;
  if (opts.delay) config.delay = *opts.delay;
  if (opts.out) config.output = *opts.out;
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw dynpers::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    dynpers::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

void print_report(const dynpers::AgentReport& r) {
  const auto& s = r.summary;
  std::cout << fmt::format(
      "{:<28} sat={:.4f} exp_sat={:.4f} regret={:.2f} slope={:.3f} "
      "req={:.4f} comply={:.4f}\n",
      r.agent, s.mean_satisfaction, s.mean_expected_satisfaction,
      s.final_regret, r.regret_slope, s.request_rate, s.compliance_rate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-feedback personalization simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, compare_opts, ablate_opts;
  std::optional<std::string> agent;
  std::vector<std::string> ablations;

  auto* run = app.add_subcommand("run", "Run one agent and write per-step CSV");
  add_common(run, run_opts);
  run->add_option("--agent", agent, "dp, sp, pu, cas, sol or oracle");

  auto* compare = app.add_subcommand("compare", "Seed-matched agent comparison");
  add_common(compare, compare_opts);

  auto* ablate = app.add_subcommand("ablate", "Single-component ablations of dp");
  add_common(ablate, ablate_opts);
  ablate->add_option("--ablation", ablations,
                     "no-gate, fixed-lr, no-momentum, no-prioritization "
                     "(default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto config = build_config(run_opts);
      if (agent) config.agent.kind = dynpers::parse_agent_kind(*agent);
      print_report(dynpers::run_experiment(config));
    } else if (*compare) {
      const auto config = build_config(compare_opts);
      const auto comparison = dynpers::compare_agents(config, config.compare_agents);
      dynpers::write_comparison(comparison, config.output);
      for (const auto& r : comparison.agents) print_report(r);
      for (const auto& t : comparison.tests) {
        std::cout << fmt::format("sign test dp vs {:<6} wins={} losses={} ties={} p={:.3g}\n",
                                 t.baseline, t.wins, t.losses, t.ties, t.p_value);
      }
    } else if (*ablate) {
      const auto config = build_config(ablate_opts);
      std::vector<dynpers::Ablation> which;
      for (const auto& name : ablations) which.push_back(dynpers::parse_ablation(name));
      if (which.empty()) {
        which = {dynpers::Ablation::kNoGate, dynpers::Ablation::kFixedLr,
                 dynpers::Ablation::kNoMomentum,
                 dynpers::Ablation::kNoPrioritization};
      }
      std::vector<dynpers::AblationReport> reports;
      for (auto a : which) {
        reports.push_back(dynpers::run_ablation(config, a));
        print_report(reports.back().base);
        print_report(reports.back().ablated);
      }
      dynpers::write_ablation(reports, config.output);
    }
  } catch (const dynpers::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
