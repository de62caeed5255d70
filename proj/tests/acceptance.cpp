// Acceptance gate: runs every end-to-end criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dynpers/agents.hpp"
#include "dynpers/engine.hpp"
#include "dynpers/harness.hpp"
#include "dynpers/metrics.hpp"
#include "dynpers/policy.hpp"
#include "dynpers/privacy.hpp"

namespace {

using namespace dynpers;

constexpr std::int64_t kSeeds = 20;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("criterion {:>2} [{}] {}: {}\n", id, pass ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

ExperimentConfig preset(const std::string& name, std::int64_t steps = 50000) {
  ExperimentConfig c = preset_config(name);
  c.steps = steps;
  c.replicas = kSeeds;
  c.seed = 1;
  c.write_steps = false;
  return c;
}

std::vector<double> per_seed(const AgentReport& r, double SummaryStats::*field) {
  std::vector<double> out;
  for (const auto& s : r.per_replica) out.push_back(s.*field);
  return out;
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// ---------------------------------------------------------------------------
// 1, 2: regret and convergence rates on the stationary preset.

void rates() {
  const auto cfg = preset("stationary", 100000);
  const auto rep = run_agent(cfg, AgentKind::kDynamic);
  const auto& cum = rep.mean_cum_regret;

  std::vector<std::pair<double, double>> series;
  for (int i = 0; i < 50; ++i) {
    const double t = 1e3 * std::pow(100.0, i / 49.0);
    const auto step = static_cast<std::size_t>(std::llround(t));
    series.emplace_back(static_cast<double>(step), cum[step - 1]);
  }
  const double slope = fit_power_law_exponent(series);
  report(1, "regret sublinearity", slope <= 0.65,
         fmt::format("cumulative regret exponent {:.3f} over t in [1e3, 1e5] (need <= 0.65)",
                     slope));

  // Window-averaged suboptimality; instantaneous regret is J(theta*) - J(theta_t)
  // at the step's context.
  constexpr std::size_t w = 500;
  std::vector<std::pair<double, double>> subopt;
  for (std::size_t start = 1000; start + w <= cum.size(); start += w) {
    const double avg = (cum[start + w - 1] - cum[start - 1]) / static_cast<double>(w);
    subopt.emplace_back(static_cast<double>(start) + w / 2.0, avg);
  }
  const double rate = fit_power_law_exponent(subopt);
  report(2, "convergence rate", rate >= -0.8 && rate <= -0.3,
         fmt::format("suboptimality exponent {:.3f} (need in [-0.8, -0.3])", rate));
}

// ---------------------------------------------------------------------------
// 3, 7: change-point recovery and ablations on the changepoint preset.

struct Recovery {
  bool recovered = false;
  std::int64_t steps = 0;  // change point to end of first recovered window
  double plateau = 0.0;
};

Recovery recovery_of(const ReplicaResult& r, std::int64_t change, std::int64_t total) {
  constexpr std::int64_t w = 500;
  auto window_mean = [&](std::int64_t from, std::int64_t to) {
    double s = 0;
    for (std::int64_t t = from; t < to; ++t) s += r.records[static_cast<std::size_t>(t)].satisfaction;
    return s / static_cast<double>(to - from);
  };
  Recovery out;
  out.plateau = window_mean(change - 5000, change);
  out.steps = total - change;
  for (std::int64_t start = change; start + w <= total; start += w) {
    if (window_mean(start, start + w) >= 0.9 * out.plateau) {
      out.recovered = true;
      out.steps = start + w - change;
      break;
    }
  }
  return out;
}

std::vector<Recovery> recoveries(const ExperimentConfig& cfg) {
  std::vector<Recovery> out;
  const std::int64_t change = cfg.env.change_points.front();
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    out.push_back(recovery_of(run_replica(cfg, AgentKind::kDynamic, r), change, cfg.steps));
  }
  return out;
}

double mean_recovery(const std::vector<Recovery>& rs) {
  double s = 0;
  for (const auto& r : rs) s += static_cast<double>(r.steps);
  return s / static_cast<double>(rs.size());
}

void changepoint_and_ablations() {
  const auto cfg = preset("changepoint");
  const auto base = recoveries(cfg);
  int ok = 0;
  for (const auto& r : base) ok += r.recovered && r.steps <= 15000;
  report(3, "change-point recovery", ok >= 16,
         fmt::format("{}/{} seeds back to 90% of plateau within 15000 steps (need >= 16); "
                     "mean recovery {:.0f} steps",
                     ok, base.size(), mean_recovery(base)));

  const auto fixed = recoveries(apply_ablation(cfg, Ablation::kFixedLr));
  const double base_rec = mean_recovery(base), fixed_rec = mean_recovery(fixed);

  const auto base_rep = run_agent(cfg, AgentKind::kDynamic);
  const auto noprio = run_agent(apply_ablation(cfg, Ablation::kNoPrioritization),
                                AgentKind::kDynamic);
  const double req_base = base_rep.summary.request_rate;
  const double req_abl = noprio.summary.request_rate;
  const auto sat_base = per_seed(base_rep, &SummaryStats::mean_satisfaction);
  const auto sat_abl = per_seed(noprio, &SummaryStats::mean_satisfaction);
  const auto test = sign_test("no-prioritization", sat_abl, sat_base);
  const bool ablation_gains = test.wins > test.losses && test.p_value < 0.05;

  const bool pass_fixed = fixed_rec > base_rec;
  const bool pass_prio = req_abl > req_base && !ablation_gains;
  report(7, "ablations", pass_fixed && pass_prio,
         fmt::format("fixed-lr mean recovery {:.0f} vs base {:.0f} steps ({}); "
                     "no-prioritization request rate {:.4f} vs {:.4f}, satisfaction "
                     "{:.4f} vs {:.4f}, sign test {}-{} p={:.3g} ({})",
                     fixed_rec, base_rec, pass_fixed ? "slower" : "not slower", req_abl,
                     req_base, mean(sat_abl), mean(sat_base), test.wins, test.losses,
                     test.p_value, pass_prio ? "ok" : "violated"));
}

// ---------------------------------------------------------------------------
// 4, 5, 8: seed-matched baseline comparisons, drift effect, delay.

void comparisons() {
  const auto drift = preset("drift");
  const auto cmp = compare_agents(drift, {AgentKind::kDynamic, AgentKind::kSimpleOnline,
                                          AgentKind::kPeriodic, AgentKind::kStaticProfile});
  std::vector<double> means;
  for (const auto& a : cmp.agents) {
    means.push_back(mean(per_seed(a, &SummaryStats::mean_satisfaction)));
  }
  const auto& vs_sp = cmp.tests.back();
  const bool ordered = means[0] > means[1] && means[1] > means[2] && means[2] > means[3];
  const bool significant = vs_sp.wins > vs_sp.losses && vs_sp.p_value < 0.05;
  report(4, "baseline ordering on drift", ordered && significant,
         fmt::format("dp {:.4f}, sol {:.4f}, pu {:.4f}, sp {:.4f} (need dp > sol > pu > sp: {}); "
                     "dp vs sp sign test {}-{} p={:.3g}",
                     means[0], means[1], means[2], means[3], ordered ? "yes" : "no",
                     vs_sp.wins, vs_sp.losses, vs_sp.p_value));

  const auto stationary = preset("stationary");
  const auto dp_st = run_agent(stationary, AgentKind::kDynamic);
  const auto sp_st = run_agent(stationary, AgentKind::kStaticProfile);
  auto relative = [](const AgentReport& dp, const AgentReport& sp) {
    const auto a = per_seed(dp, &SummaryStats::mean_satisfaction);
    const auto b = per_seed(sp, &SummaryStats::mean_satisfaction);
    std::vector<double> r;
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(a[i] / b[i] - 1.0);
    return r;
  };
  const auto rel_drift = relative(cmp.agents[0], cmp.agents[3]);
  const auto rel_st = relative(dp_st, sp_st);
  const double gain_drift = mean(rel_drift), gain_st = mean(rel_st);
  const auto paired = sign_test("stationary", rel_drift, rel_st);
  report(5, "drift-segment effect", gain_drift > gain_st,
         fmt::format("dp over sp: {:+.2f}% on drift vs {:+.2f}% on stationary "
                     "(paired {}-{}, p={:.3g})",
                     100 * gain_drift, 100 * gain_st, paired.wins, paired.losses,
                     paired.p_value));

  std::vector<double> finals = {dp_st.summary.final_regret};
  for (std::int64_t d : {5, 20, 100}) {
    auto c = stationary;
    c.delay = d;
    finals.push_back(run_agent(c, AgentKind::kDynamic).summary.final_regret);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < finals.size(); ++i) inversions += finals[i] < finals[i - 1];
  report(8, "delayed feedback", inversions <= 1,
         fmt::format("final regret d=0 {:.1f}, d=5 {:.1f}, d=20 {:.1f}, d=100 {:.1f}; "
                     "{} inversion(s) (allow 1)",
                     finals[0], finals[1], finals[2], finals[3], inversions));
}

// ---------------------------------------------------------------------------
// 6: fatigue.

void fatigue() {
  const auto cfg = preset("fatigue-stress");
  const auto dp = run_agent(cfg, AgentKind::kDynamic);
  const auto sol = run_agent(cfg, AgentKind::kSimpleOnline);
  const auto& a = dp.summary;
  const auto& b = sol.summary;
  const double reduction = 1.0 - a.request_rate / b.request_rate;
  const bool pass = reduction >= 0.30 &&
                    a.mean_satisfaction >= 0.98 * b.mean_satisfaction &&
                    a.compliance_rate > b.compliance_rate;
  report(6, "fatigue reduction", pass,
         fmt::format("request rate {:.4f} vs {:.4f} ({:.1f}% lower, need >= 30%); "
                     "satisfaction {:.4f} vs {:.4f}; compliance {:.3f} vs {:.3f}",
                     a.request_rate, b.request_rate, 100 * reduction, a.mean_satisfaction,
                     b.mean_satisfaction, a.compliance_rate, b.compliance_rate));
}

// ---------------------------------------------------------------------------
// 9: per-update cost against |A| * d.

void complexity() {
  using Clock = std::chrono::steady_clock;
  std::vector<double> x, y;
  for (Eigen::Index actions : {4, 8, 16, 32, 64, 128, 256}) {
    for (Eigen::Index dim : {4, 8, 16, 32, 64, 128}) {
      const double size = static_cast<double>(actions * dim);
      const auto n = static_cast<std::int64_t>(std::max(200.0, 4e6 / size));
      std::mt19937_64 ctx_rng(3);
      std::vector<ContextVector> ctxs;
      for (int i = 0; i < 64; ++i) {
        ContextVector c(dim);
        std::uniform_real_distribution<double> unit(-1, 1);
        for (Eigen::Index j = 0; j < dim; ++j) c(j) = unit(ctx_rng);
        ctxs.push_back(c);
      }
      double best = INFINITY;
      for (int rep = 0; rep < 3; ++rep) {
        AdaptiveEngine engine(actions, dim, {});
        Rng rng(7);
        const auto start = Clock::now();
        for (std::int64_t t = 0; t < n; ++t) {
          engine.step({ctxs[static_cast<std::size_t>(t % 64)], 1.0}, rng);
          FeedbackEvent e;
          e.step = t;
          e.implicit = 0.5;
          engine.ingest(e);
        }
        const std::chrono::duration<double, std::micro> el = Clock::now() - start;
        best = std::min(best, el.count() / static_cast<double>(n));
      }
      x.push_back(size);
      y.push_back(best);
    }
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  report(9, "complexity scaling", r2 > 0.9,
         fmt::format("per-update time = {:.3f} us + {:.5f} us * |A|d, R^2 = {:.4f} "
                     "over {} grid points (need > 0.9)",
                     my - sxy / sxx * mx, sxy / sxx, r2, x.size()));
}

// ---------------------------------------------------------------------------
// 10: unit-level oracles.

void oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> bad;

  // Finite differences of log pi.
  double worst_fd = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int a = 2 + static_cast<int>(unit(rng) * 7), d = 1 + static_cast<int>(unit(rng) * 6);
    PolicyParams w(a, d);
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < d; ++j) w(i, j) = normal(rng);
    ContextVector x(d);
    for (int j = 0; j < d; ++j) x(j) = 2 * unit(rng) - 1;
    const auto act = static_cast<ActionId>(unit(rng) * a);
    auto log_pi = [&](const PolicyParams& p) {
      const Eigen::VectorXd s = p * x;
      const double top = s.maxCoeff();
      return s(static_cast<Eigen::Index>(act)) - top - std::log((s.array() - top).exp().sum());
    };
    const auto g = log_prob_gradient(w, x, act);
    PolicyParams fd(a, d);
    const double h = 1e-5;
    for (int i = 0; i < a; ++i) {
      for (int j = 0; j < d; ++j) {
        PolicyParams up = w, down = w;
        up(i, j) += h;
        down(i, j) -= h;
        fd(i, j) = (log_pi(up) - log_pi(down)) / (2 * h);
      }
    }
    worst_fd = std::max(worst_fd, (fd - g).norm() / std::max(g.norm(), 1e-12));
  }
  if (!(worst_fd < 1e-5)) bad.push_back("gradient");

  // Welford against two passes.
  VarianceTracker tracker;
  std::vector<double> xs(1000000);
  for (auto& v : xs) {
    v = unit(rng);
    tracker.observe(v);
  }
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0;
  for (double v : xs) ss += (v - m) * (v - m);
  const double var_err = std::abs(tracker.variance() - ss / static_cast<double>(xs.size()));
  if (!(var_err < 1e-10)) bad.push_back("variance");

  // Regret and NDCG against brute force.
  double worst_regret = 0, worst_ndcg = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd f(5), p(5);
    for (int i = 0; i < 5; ++i) {
      f(i) = unit(rng);
      p(i) = unit(rng);
    }
    p /= p.sum();
    double expect = 0, top = 0;
    for (int i = 0; i < 5; ++i) {
      expect += p(i) * f(i);
      top = std::max(top, f(i));
    }
    worst_regret = std::max(worst_regret, std::abs(instantaneous_regret(f, p) - (top - expect)));
    std::vector<ActionId> ranked = {0, 1, 2, 3, 4};
    std::shuffle(ranked.begin(), ranked.end(), rng);
    const std::size_t k = 1 + static_cast<std::size_t>(unit(rng) * 5);
    std::vector<double> sorted(f.data(), f.data() + 5);
    std::sort(sorted.rbegin(), sorted.rend());
    double dcg = 0, ideal = 0;
    for (std::size_t i = 0; i < k; ++i) {
      dcg += f(static_cast<Eigen::Index>(ranked[i])) / std::log2(i + 2.0);
      ideal += sorted[i] / std::log2(i + 2.0);
    }
    worst_ndcg = std::max(worst_ndcg, std::abs(ndcg_at_k(ranked, f, k) - dcg / ideal));
  }
  if (!(worst_regret < 1e-12)) bad.push_back("regret");
  if (!(worst_ndcg < 1e-12)) bad.push_back("ndcg");

  // Clip idempotence.
  double worst_clip = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    PolicyParams g(4, 3);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = 3 * normal(rng);
    const double bound = 0.1 + 2 * unit(rng);
    const auto once = clip_gradient(g, bound);
    worst_clip = std::max(worst_clip, (clip_gradient(once, bound) - once).cwiseAbs().maxCoeff());
    if (once.norm() > bound * (1 + 1e-12)) worst_clip = INFINITY;
  }
  if (!(worst_clip < 1e-15)) bad.push_back("clip");

  // Gaussian noise moments.
  PolicyParams g(1, 1);
  g << 0.25;
  const double sigma = 1.7;
  Rng noise(5);
  const int n = 100000;
  std::vector<double> draws(n);
  for (auto& v : draws) v = add_noise(g, sigma, noise)(0, 0);
  const double nm = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  double nss = 0;
  for (double v : draws) nss += (v - nm) * (v - nm);
  const double nvar = nss / (n - 1);
  if (!(std::abs(nm - 0.25) < 4 * sigma / std::sqrt(double(n)))) bad.push_back("noise mean");
  if (!(std::abs(nvar / (sigma * sigma) - 1) < 0.05)) bad.push_back("noise variance");

  const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
  std::string failed;
  for (const auto& b : bad) failed += (failed.empty() ? "" : ", ") + b;
  report(10, "unit-level oracles", bad.empty() && el.count() < 60.0,
         fmt::format("fd rel err {:.2e}, variance err {:.2e}, regret err {:.2e}, ndcg err "
                     "{:.2e}, clip drift {:.1e}, noise mean {:.4f} var ratio {:.4f}, {:.1f}s{}",
                     worst_fd, var_err, worst_regret, worst_ndcg, worst_clip, nm,
                     nvar / (sigma * sigma), el.count(),
                     failed.empty() ? "" : "; failed: " + failed));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> parts = {rates, changepoint_and_ablations,
                                                    comparisons, fatigue, complexity, oracles};
  for (const auto& part : parts) {
    try {
      part();
    } catch (const std::exception& e) {
      ++failures;
      fmt::print("error: {}\n", e.what());
    }
  }
  const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
  fmt::print("{} criterion check(s) failed; total {:.0f}s\n", failures, el.count());
  return failures == 0 ? 0 : 1;
}
