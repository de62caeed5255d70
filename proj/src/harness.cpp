#include "dynpers/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "dynpers/policy.hpp"

namespace dynpers {

DelayQueue::DelayQueue(std::int64_t delay) : delay_(delay) {
  if (delay_ < 0) throw ConfigError("delay must be >= 0");
}

void DelayQueue::push(const FeedbackEvent& event) {
  due_[event.step + delay_].push_back(event);
  ++size_;
}

std::vector<FeedbackEvent> DelayQueue::pop_due(std::int64_t now) {
  std::vector<FeedbackEvent> out;
  while (!due_.empty() && due_.begin()->first <= now) {
    auto& bucket = due_.begin()->second;
    out.insert(out.end(), bucket.begin(), bucket.end());
    size_ -= bucket.size();
    due_.erase(due_.begin());
  }
  return out;
}

std::vector<FeedbackEvent> DelayQueue::drain() {
  return pop_due(std::numeric_limits<std::int64_t>::max());
}

ReplicaSeeds derive_seeds(std::uint64_t base_seed, std::int64_t replica) {
  const std::uint64_t s = base_seed + static_cast<std::uint64_t>(replica);
  std::seed_seq seq{static_cast<std::uint32_t>(s & 0xffffffffu),
                    static_cast<std::uint32_t>(s >> 32)};
  std::array<std::uint32_t, 6> words{};
  seq.generate(words.begin(), words.end());
  auto join = [&](int i) {
    return (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
  };
  return {join(0), join(1), join(2)};
}

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, AgentKind kind,
                                  const Environment& env,
                                  const ReplicaSeeds& seeds) {
  const Eigen::Index actions = config.env.num_actions;
  const Eigen::Index dim = config.env.ctx_dim;
  const AgentConfig& a = config.agent;
  switch (kind) {
    case AgentKind::kDynamic: {
      EngineConfig engine{config.optimizer, config.gate,
                          config.effective_privacy(), seeds.noise};
      return std::make_unique<DynamicAgent>(actions, dim, std::move(engine));
    }
    case AgentKind::kStaticProfile:
      return std::make_unique<BatchProfileAgent>(
          "sp", actions, dim,
          BatchSettings{a.sp_warmup_steps, a.sp_refit_interval, a.batch_passes,
                        a.batch_lr});
    case AgentKind::kPeriodic:
      return std::make_unique<BatchProfileAgent>(
          "pu", actions, dim,
          BatchSettings{a.pu_refit_interval, a.pu_refit_interval,
                        a.batch_passes, a.batch_lr});
    case AgentKind::kContextAware:
      return make_context_aware_static(actions, dim, a.cas_buckets_per_dim,
                                       a.cas_active_dims, a.cas_warmup_steps);
    case AgentKind::kSimpleOnline:
      return make_simple_online(actions, dim, a.sol_fixed_lr,
                                a.sol_request_every);
    case AgentKind::kOracle:
      return std::make_unique<OracleAgent>(env);
  }
  throw ConfigError("unknown agent kind");
}

ReplicaResult run_replica(const ExperimentConfig& config, AgentKind kind,
                          std::int64_t replica) {
  config.validate();
  const ReplicaSeeds seeds = derive_seeds(config.seed, replica);
  EnvConfig env_config = config.env;
  env_config.seed = seeds.env;
  Environment env(env_config);
  auto agent = make_agent(config, kind, env, seeds);
  Rng agent_rng(seeds.agent);
  DelayQueue queue(config.delay);
  RegretLedger ledger;

  ReplicaResult result;
  result.replica = replica;
  const auto steps = static_cast<std::size_t>(config.steps);
  result.records.reserve(steps);
  result.delivered_at.assign(steps, -1);

  auto deliver = [&](const std::vector<FeedbackEvent>& events, std::int64_t now) {
    for (const FeedbackEvent& e : events) {
      agent->ingest(e);
      result.delivered_at[static_cast<std::size_t>(e.step)] = now;
    }
  };

  for (std::int64_t t = 0; t < config.steps; ++t) {
    const Observation obs = env.observe();
    const Decision decision = agent->select(obs, agent_rng);
    const ActionDistribution probs = agent->policy(obs.ctx);
    const Eigen::VectorXd oracle = env.oracle_all(obs.ctx);
    const double inst = ledger.record(instantaneous_regret(oracle, probs));

    const FeedbackEvent event = env.act(obs.ctx, decision.action, decision.request);
    queue.push(event);
    deliver(queue.pop_due(t), t);

    MetricsRecord r;
    r.replica = replica;
    r.step = t;
    r.action = decision.action;
    r.satisfaction = event.implicit;
    r.expected_satisfaction = probs.dot(oracle);
    r.regret_inst = inst;
    r.regret_cum = ledger.cumulative();
    r.requested = event.requested;
    r.complied = event.complied;
    r.entropy = entropy(probs);
    r.lr = agent->learning_rate();
    result.records.push_back(r);
  }
  // Late events still reach the agent, each at its own due step.
  for (const FeedbackEvent& e : queue.drain()) {
    agent->ingest(e);
    result.delivered_at[static_cast<std::size_t>(e.step)] = e.step + config.delay;
  }
  result.summary = summarize(result.records);
  return result;
}

double regret_slope(const std::vector<double>& cum_regret) {
  const auto n = static_cast<double>(cum_regret.size());
  if (cum_regret.size() < 100) return std::numeric_limits<double>::quiet_NaN();
  const double lo = std::max(1.0, n / 100.0);
  std::vector<std::pair<double, double>> series;
  std::int64_t last = -1;
  constexpr int kPoints = 50;
  for (int i = 0; i < kPoints; ++i) {
    const double t = lo * std::pow(n / lo, static_cast<double>(i) / (kPoints - 1));
    const auto step = static_cast<std::int64_t>(std::llround(t));
    if (step == last || step < 1) continue;
    last = step;
    const double value = cum_regret[static_cast<std::size_t>(step - 1)];
    if (!(value > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    series.emplace_back(static_cast<double>(step), value);
  }
  return fit_power_law_exponent(series);
}

AgentReport run_agent(const ExperimentConfig& config, AgentKind kind,
                      std::vector<ReplicaResult>* keep) {
  config.validate();
  const auto replicas = static_cast<std::size_t>(config.replicas);
  std::vector<ReplicaResult> results(replicas);
  std::vector<std::vector<double>> cum(replicas);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < replicas; r = next++) {
      try {
        results[r] = run_replica(config, kind, static_cast<std::int64_t>(r));
        cum[r].reserve(results[r].records.size());
        for (const MetricsRecord& rec : results[r].records) {
          cum[r].push_back(rec.regret_cum);
        }
        if (!keep) {
          results[r].records = {};
          results[r].delivered_at = {};
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, replicas);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  AgentReport report;
  report.agent = to_string(kind);
  report.mean_cum_regret.assign(static_cast<std::size_t>(config.steps), 0.0);
  for (std::size_t r = 0; r < replicas; ++r) {
    report.per_replica.push_back(results[r].summary);
    for (std::size_t t = 0; t < cum[r].size(); ++t) {
      report.mean_cum_regret[t] += cum[r][t];
    }
  }
  for (double& v : report.mean_cum_regret) v /= static_cast<double>(replicas);
  report.summary = merge_summaries(report.per_replica);
  report.regret_slope = regret_slope(report.mean_cum_regret);
  if (keep) *keep = std::move(results);
  return report;
}

SignTest sign_test(const std::string& baseline, const std::vector<double>& ours,
                   const std::vector<double>& theirs) {
  if (ours.size() != theirs.size()) {
    throw std::invalid_argument("sign_test: unpaired samples");
  }
  SignTest test;
  test.baseline = baseline;
  for (std::size_t i = 0; i < ours.size(); ++i) {
    if (ours[i] > theirs[i]) {
      ++test.wins;
    } else if (ours[i] < theirs[i]) {
      ++test.losses;
    } else {
      ++test.ties;
    }
  }
  const std::size_t n = test.wins + test.losses;
  if (n == 0) return test;
  const std::size_t k = std::min(test.wins, test.losses);
  // P(X <= k) for X ~ Binomial(n, 1/2), accumulated in log space.
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) -
                            static_cast<double>(n) * std::log(2.0);
    tail += std::exp(log_term);
  }
  test.p_value = std::min(1.0, 2.0 * tail);
  return test;
}

namespace {

std::vector<double> replica_satisfaction(const AgentReport& report) {
  std::vector<double> out;
  for (const SummaryStats& s : report.per_replica) out.push_back(s.mean_satisfaction);
  return out;
}

}  // namespace

Comparison compare_agents(const ExperimentConfig& config,
                          const std::vector<AgentKind>& kinds) {
  Comparison comparison;
  for (AgentKind kind : kinds) comparison.agents.push_back(run_agent(config, kind));
  const auto dp = std::find_if(
      comparison.agents.begin(), comparison.agents.end(),
      [](const AgentReport& r) { return r.agent == to_string(AgentKind::kDynamic); });
  if (dp != comparison.agents.end()) {
    const auto ours = replica_satisfaction(*dp);
    for (const AgentReport& other : comparison.agents) {
      comparison.tests.push_back(
          sign_test(other.agent, ours, replica_satisfaction(other)));
    }
  }
  return comparison;
}

AblationReport run_ablation(const ExperimentConfig& base, Ablation ablation) {
  ExperimentConfig base_dp = base;
  base_dp.agent.kind = AgentKind::kDynamic;
  AblationReport report;
  report.ablation = ablation;
  report.base = run_agent(base_dp, AgentKind::kDynamic);
  report.ablated =
      run_agent(apply_ablation(base_dp, ablation), AgentKind::kDynamic);
  report.ablated.agent = "dp/" + to_string(ablation);
  return report;
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.10g}", x);
}

std::filesystem::path prepare_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + out_dir + "'");
  }
  return dir;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

std::string summary_fields(const SummaryStats& s, double slope) {
  return fmt::format("{},{},{},{},{},{}", s.replicas, num(s.mean_satisfaction),
                     num(s.final_regret), num(slope), num(s.request_rate),
                     num(s.compliance_rate));
}

}  // namespace

std::string step_csv_row(const MetricsRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", r.replica, r.step,
                     r.action, num(r.satisfaction), num(r.expected_satisfaction),
                     num(r.regret_inst), num(r.regret_cum),
                     r.requested ? 1 : 0, r.complied ? 1 : 0, num(r.entropy),
                     num(r.lr));
}

std::string summary_csv_row(const AgentReport& report) {
  return report.agent + "," + summary_fields(report.summary, report.regret_slope);
}

AgentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto dir = prepare_dir(config.output);
  const auto summary_path = dir / "summary.csv";
  // Open outputs before the run so an unwritable target fails fast.
  auto summary = open_csv(summary_path);

  std::vector<ReplicaResult> replicas;
  AgentReport report = run_agent(config, config.agent.kind,
                                 config.write_steps ? &replicas : nullptr);
  if (config.write_steps) {
    const auto steps_path = dir / "steps.csv";
    auto steps = open_csv(steps_path);
    steps << kStepCsvHeader << '\n';
    for (const ReplicaResult& r : replicas) {
      for (const MetricsRecord& rec : r.records) steps << step_csv_row(rec) << '\n';
    }
    check_written(steps, steps_path);
  }
  summary << kSummaryCsvHeader << '\n' << summary_csv_row(report) << '\n';
  check_written(summary, summary_path);
  return report;
}

void write_comparison(const Comparison& comparison, const std::string& out_dir) {
  const auto dir = prepare_dir(out_dir);
  const auto summary_path = dir / "summary.csv";
  auto summary = open_csv(summary_path);
  summary << kSummaryCsvHeader << '\n';
  for (const AgentReport& r : comparison.agents) {
    summary << summary_csv_row(r) << '\n';
  }
  check_written(summary, summary_path);

  const auto tests_path = dir / "sign_tests.csv";
  auto tests = open_csv(tests_path);
  tests << "reference,baseline,wins,losses,ties,p_value\n";
  for (const SignTest& t : comparison.tests) {
    tests << fmt::format("dp,{},{},{},{},{}\n", t.baseline, t.wins, t.losses,
                         t.ties, num(t.p_value));
  }
  check_written(tests, tests_path);
}

void write_ablation(const std::vector<AblationReport>& reports,
                    const std::string& out_dir) {
  const auto dir = prepare_dir(out_dir);
  const auto path = dir / "ablation.csv";
  auto out = open_csv(path);
  out << "ablation,variant," << std::string(kSummaryCsvHeader).substr(6) << '\n';
  for (const AblationReport& r : reports) {
    const std::string name = to_string(r.ablation);
    out << name << ",base," << summary_fields(r.base.summary, r.base.regret_slope)
        << '\n';
    out << name << ",ablated,"
        << summary_fields(r.ablated.summary, r.ablated.regret_slope) << '\n';
    const SummaryStats& a = r.ablated.summary;
    const SummaryStats& b = r.base.summary;
    out << name << ",delta,"
        << fmt::format("{},{},{},{},{},{}", a.replicas,
                       num(a.mean_satisfaction - b.mean_satisfaction),
                       num(a.final_regret - b.final_regret),
                       num(r.ablated.regret_slope - r.base.regret_slope),
                       num(a.request_rate - b.request_rate),
                       num(a.compliance_rate - b.compliance_rate))
        << '\n';
  }
  check_written(out, path);
}

}  // namespace dynpers
