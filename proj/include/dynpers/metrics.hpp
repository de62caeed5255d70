#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "dynpers/types.hpp"

namespace dynpers {

// max_a f(a) - sum_a pi(a) f(a)
double instantaneous_regret(const Eigen::VectorXd& oracle_values,
                            const ActionDistribution& dist);

class RegretLedger {
 public:
  // Records one step; tiny negative values from rounding are clamped to 0.
  double record(double instantaneous);

  double cumulative() const { return cumulative_; }
  const std::vector<double>& per_step() const { return per_step_; }

 private:
  std::vector<double> per_step_;
  double cumulative_ = 0.0;
};

double precision_at_k(std::span<const ActionId> ranked,
                      const std::set<ActionId>& relevant, std::size_t k);

// DCG with discount 1 / log2(i + 1) for 1-based rank i, normalized by the DCG
// of the gains sorted descending. All-zero gains score 1.
double ndcg_at_k(std::span<const ActionId> ranked, const Eigen::VectorXd& gains,
                 std::size_t k);

// The k actions with the largest gains; ties by ascending id.
std::set<ActionId> oracle_top_k(const Eigen::VectorXd& gains, std::size_t k);

// Least-squares slope of log(value) against log(t).
double fit_power_law_exponent(std::span<const std::pair<double, double>> series);

struct MetricsRecord {
  std::int64_t replica = 0;
  std::int64_t step = 0;
  ActionId action = 0;
  double satisfaction = 0.0;           // realized implicit feedback
  double expected_satisfaction = 0.0;  // E_{a~pi} f(a, x)
  double regret_inst = 0.0;
  double regret_cum = 0.0;
  bool requested = false;
  bool complied = false;
  double entropy = 0.0;
  double lr = 0.0;
};

struct SummaryStats {
  std::size_t replicas = 1;
  std::size_t steps = 0;
  double mean_satisfaction = 0.0;
  double mean_expected_satisfaction = 0.0;
  double mean_regret = 0.0;
  double final_regret = 0.0;
  double request_rate = 0.0;
  double compliance_rate = 1.0;  // 1 by convention when nothing was requested
  std::size_t requests = 0;
  std::size_t compliances = 0;
};

SummaryStats summarize(std::span<const MetricsRecord> records);

// Associative merge of per-replica summaries: means are step-weighted, final
// regret is averaged over replicas.
SummaryStats merge_summaries(std::span<const SummaryStats> parts);

}  // namespace dynpers
