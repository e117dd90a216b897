#ifndef QHEDGE_SIM_HPP_
#define QHEDGE_SIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "qhedge/error_variance.hpp"
#include "qhedge/fs.hpp"

namespace qhedge {

double normal_cdf(double x);

double bs_call_price(double s, double strike, double tau, double sigma);
double bs_put_price(double s, double strike, double tau, double sigma);
double bs_call_delta(double s, double strike, double tau, double sigma);
double bs_put_delta(double s, double strike, double tau, double sigma);

// Volatility the log-normal comparator is allowed to know:
// sqrt(Var(log S_T) / T).
double bs_matched_sigma(const AdditiveModel& model);

// Discrete feedback recursion of the variance-optimal strategy along
// one simulated path (spot at the rebalance dates).  Returns the
// terminal hedging error V_T - payoff(S_T).
double vo_hedge_path(const FsTables& tables, const ContourMeasure& measure,
                     std::span<const double> spot, double v0);

// Log-normal delta hedge at matched total variance sigma^2 (T - t),
// zero rates, starting from the given capital.
double bs_hedge_path(PayoffKind kind, double strike, double sigma, double horizon,
                     std::span<const double> spot, double capital);

struct HedgeExperiment {
  AdditiveModel model;
  ContourMeasure payoff;
  int rebalances = 12;
  int refine = 16;
  long paths = 5000;
  std::uint64_t base_seed = 42;
  bool run_vo = true;
  bool run_bs = true;
  int threads = 1;
  double quad_tol = 1e-8;
};

struct StrategyStats {
  double initial_capital = 0.0;
  double bias = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
  // m4 / m2^2 of the error sample; the variance of the std estimator
  // scales with (kurtosis - 1) / (4 n).
  double kurtosis = 3.0;
};

struct HedgeResult {
  bool has_vo = false;
  bool has_bs = false;
  StrategyStats vo;
  StrategyStats bs;
  std::vector<double> vo_errors;
  std::vector<double> bs_errors;
};

// Runs both strategies on a common set of simulated paths (one seed per
// path index, so results do not depend on the thread count).
HedgeResult run_experiment(const HedgeExperiment& experiment);

struct SweepRow {
  double strike;
  double v0_vo;
  double v0_bs;
  double hedge0_vo;
  double delta0_bs;
};

// Initial capital and initial hedge ratio of both strategies across
// strikes; contour quadrature only, no simulation.
std::vector<SweepRow> strike_sweep(const AdditiveModel& model, PayoffKind kind,
                                   const std::vector<double>& strikes, int rebalances = 12,
                                   int refine = 16, double quad_tol = 1e-8);

StrategyStats summarize_errors(const std::vector<double>& errors, double initial_capital);

}  // namespace qhedge

#endif  // QHEDGE_SIM_HPP_
