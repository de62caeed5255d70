#include "dynpers/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dynpers {

double instantaneous_regret(const Eigen::VectorXd& oracle_values,
                            const ActionDistribution& dist) {
  if (oracle_values.size() != dist.size() || dist.size() == 0) {
    throw std::invalid_argument("instantaneous_regret: length mismatch");
  }
  return oracle_values.maxCoeff() - dist.dot(oracle_values);
}

double RegretLedger::record(double instantaneous) {
  const double r = std::max(instantaneous, 0.0);
  per_step_.push_back(r);
  cumulative_ += r;
  return r;
}

double precision_at_k(std::span<const ActionId> ranked,
                      const std::set<ActionId>& relevant, std::size_t k) {
  if (k == 0 || k > ranked.size()) {
    throw std::out_of_range("precision_at_k: k outside [1, ranked size]");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += relevant.count(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

namespace {

double dcg(std::span<const ActionId> order, const Eigen::VectorXd& gains,
           std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    total += gains(static_cast<Eigen::Index>(order[i])) /
             std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

std::vector<ActionId> by_gain_desc(const Eigen::VectorXd& gains) {
  std::vector<ActionId> order(static_cast<std::size_t>(gains.size()));
  std::iota(order.begin(), order.end(), ActionId{0});
  std::stable_sort(order.begin(), order.end(), [&](ActionId a, ActionId b) {
    return gains(static_cast<Eigen::Index>(a)) >
           gains(static_cast<Eigen::Index>(b));
  });
  return order;
}

}  // namespace

double ndcg_at_k(std::span<const ActionId> ranked, const Eigen::VectorXd& gains,
                 std::size_t k) {
  if (k == 0 || k > ranked.size() ||
      k > static_cast<std::size_t>(gains.size())) {
    throw std::out_of_range("ndcg_at_k: k outside [1, ranked size]");
  }
  for (ActionId a : ranked) {
    if (a >= static_cast<ActionId>(gains.size())) {
      throw std::out_of_range("ndcg_at_k: ranked id has no gain");
    }
  }
  const auto ideal = by_gain_desc(gains);
  const double ideal_dcg = dcg(ideal, gains, k);
  if (ideal_dcg == 0.0) return 1.0;
  return dcg(ranked, gains, k) / ideal_dcg;
}

std::set<ActionId> oracle_top_k(const Eigen::VectorXd& gains, std::size_t k) {
  auto order = by_gain_desc(gains);
  if (k > order.size()) k = order.size();
  return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)};
}

double fit_power_law_exponent(
    std::span<const std::pair<double, double>> series) {
  if (series.size() < 10) {
    throw std::invalid_argument("fit_power_law_exponent: need >= 10 points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, value] : series) {
    if (!(t > 0.0) || !(value > 0.0)) {
      throw std::domain_error(
          "fit_power_law_exponent: t and value must be positive");
    }
    const double x = std::log(t);
    const double y = std::log(value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto n = static_cast<double>(series.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) {
    throw std::invalid_argument("fit_power_law_exponent: degenerate t values");
  }
  return (n * sxy - sx * sy) / denom;
}

SummaryStats summarize(std::span<const MetricsRecord> records) {
  SummaryStats s;
  s.steps = records.size();
  if (records.empty()) return s;
  for (const MetricsRecord& r : records) {
    s.mean_satisfaction += r.satisfaction;
    s.mean_expected_satisfaction += r.expected_satisfaction;
    s.mean_regret += r.regret_inst;
    s.requests += r.requested ? 1 : 0;
    s.compliances += r.complied ? 1 : 0;
  }
  const auto n = static_cast<double>(records.size());
  s.mean_satisfaction /= n;
  s.mean_expected_satisfaction /= n;
  s.mean_regret /= n;
  s.final_regret = records.back().regret_cum;
  s.request_rate = static_cast<double>(s.requests) / n;
  s.compliance_rate =
      s.requests == 0 ? 1.0
                      : static_cast<double>(s.compliances) /
                            static_cast<double>(s.requests);
  return s;
}

SummaryStats merge_summaries(std::span<const SummaryStats> parts) {
  SummaryStats out;
  out.replicas = 0;
  double sat = 0, exp_sat = 0, reg = 0, final_reg = 0;
  for (const SummaryStats& p : parts) {
    const auto w = static_cast<double>(p.steps);
    out.replicas += p.replicas;
    out.steps += p.steps;
    out.requests += p.requests;
    out.compliances += p.compliances;
    sat += w * p.mean_satisfaction;
    exp_sat += w * p.mean_expected_satisfaction;
    reg += w * p.mean_regret;
    final_reg += static_cast<double>(p.replicas) * p.final_regret;
  }
  if (out.steps > 0) {
    const auto n = static_cast<double>(out.steps);
    out.mean_satisfaction = sat / n;
    out.mean_expected_satisfaction = exp_sat / n;
    out.mean_regret = reg / n;
    out.request_rate = static_cast<double>(out.requests) / n;
  }
  if (out.replicas > 0) {
    out.final_regret = final_reg / static_cast<double>(out.replicas);
  }
  out.compliance_rate =
      out.requests == 0 ? 1.0
                        : static_cast<double>(out.compliances) /
                              static_cast<double>(out.requests);
  return out;
}

}  // namespace dynpers
