#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dynpers/agents.hpp"
#include "dynpers/config.hpp"
#include "dynpers/metrics.hpp"

namespace dynpers {

// Holds events until their delivery step (generation step + delay). Events due
// on the same step come out in insertion order.
class DelayQueue {
 public:
  explicit DelayQueue(std::int64_t delay);

  void push(const FeedbackEvent& event);
  std::vector<FeedbackEvent> pop_due(std::int64_t now);
  // Everything still queued, in delivery order.
  std::vector<FeedbackEvent> drain();

  std::int64_t delay() const { return delay_; }
  std::size_t size() const { return size_; }

 private:
  std::int64_t delay_;
  std::size_t size_ = 0;
  std::map<std::int64_t, std::vector<FeedbackEvent>> due_;
};

struct ReplicaSeeds {
  std::uint64_t env;
  std::uint64_t agent;
  std::uint64_t noise;
};

// Independent environment / agent / privacy-noise streams for a replica,
// derived from base_seed + replica.
ReplicaSeeds derive_seeds(std::uint64_t base_seed, std::int64_t replica);

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, AgentKind kind,
                                  const Environment& env,
                                  const ReplicaSeeds& seeds);

struct ReplicaResult {
  std::int64_t replica = 0;
  SummaryStats summary;
  std::vector<MetricsRecord> records;
  // delivered_at[t] is the step at which the event generated at t reached the
  // agent.
  std::vector<std::int64_t> delivered_at;
};

ReplicaResult run_replica(const ExperimentConfig& config, AgentKind kind,
                          std::int64_t replica);

struct AgentReport {
  std::string agent;
  SummaryStats summary;                 // merged over replicas
  std::vector<SummaryStats> per_replica;
  std::vector<double> mean_cum_regret;  // replica-averaged, per step
  double regret_slope = 0.0;            // NaN when regret is not positive
};

// Runs every replica for one agent. Replicas are distributed over worker
// threads; results are ordered by replica index.
AgentReport run_agent(const ExperimentConfig& config, AgentKind kind,
                      std::vector<ReplicaResult>* keep = nullptr);

// Log-log slope of the mean cumulative regret over t in [steps/100, steps].
double regret_slope(const std::vector<double>& cum_regret);

struct SignTest {
  std::string baseline;
  std::size_t wins = 0;    // replicas where the reference agent is better
  std::size_t losses = 0;
  std::size_t ties = 0;
  double p_value = 1.0;    // two-sided exact binomial
};

SignTest sign_test(const std::string& baseline, const std::vector<double>& ours,
                   const std::vector<double>& theirs);

struct Comparison {
  std::vector<AgentReport> agents;
  std::vector<SignTest> tests;  // dp against each other agent, when dp present
};

Comparison compare_agents(const ExperimentConfig& config,
                          const std::vector<AgentKind>& kinds);

struct AblationReport {
  Ablation ablation = Ablation::kNone;
  AgentReport base;
  AgentReport ablated;
};

AblationReport run_ablation(const ExperimentConfig& base, Ablation ablation);

// CSV column orders.
inline constexpr const char* kStepCsvHeader =
    "replica,step,action,satisfaction,expected_satisfaction,regret_inst,"
    "regret_cum,requested,complied,entropy,lr";
inline constexpr const char* kSummaryCsvHeader =
    "agent,seeds,mean_satisfaction,final_regret,regret_slope,request_rate,"
    "compliance_rate";

std::string step_csv_row(const MetricsRecord& r);
std::string summary_csv_row(const AgentReport& report);

// Writes <out>/steps.csv (optional) and <out>/summary.csv for a single-agent
// run. Throws std::runtime_error when the directory cannot be written.
AgentReport run_experiment(const ExperimentConfig& config);

void write_comparison(const Comparison& comparison, const std::string& out_dir);
void write_ablation(const std::vector<AblationReport>& reports,
                    const std::string& out_dir);

}  // namespace dynpers
