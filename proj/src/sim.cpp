#include "qhedge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "qhedge/errors.hpp"
#include "qhedge/rng.hpp"

namespace qhedge {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double bs_d1(double s, double strike, double tau, double sigma) {
  return (std::log(s / strike) + 0.5 * sigma * sigma * tau) / (sigma * std::sqrt(tau));
}

}  // namespace

double bs_call_price(double s, double strike, double tau, double sigma) {
  if (tau <= 0.0 || sigma <= 0.0) return std::max(s - strike, 0.0);
  double d1 = bs_d1(s, strike, tau, sigma);
  double d2 = d1 - sigma * std::sqrt(tau);
  return s * normal_cdf(d1) - strike * normal_cdf(d2);
}

double bs_put_price(double s, double strike, double tau, double sigma) {
  if (tau <= 0.0 || sigma <= 0.0) return std::max(strike - s, 0.0);
  double d1 = bs_d1(s, strike, tau, sigma);
  double d2 = d1 - sigma * std::sqrt(tau);
  return strike * normal_cdf(-d2) - s * normal_cdf(-d1);
}

double bs_call_delta(double s, double strike, double tau, double sigma) {
  if (tau <= 0.0 || sigma <= 0.0) return s >= strike ? 1.0 : 0.0;
  return normal_cdf(bs_d1(s, strike, tau, sigma));
}

double bs_put_delta(double s, double strike, double tau, double sigma) {
  return bs_call_delta(s, strike, tau, sigma) - 1.0;
}

double bs_matched_sigma(const AdditiveModel& model) {
  double var_T = moments(model.driver()).variance *
                     model.loading().squared_integral(model.horizon()) +
                 model.sigma_long() * model.sigma_long() * model.horizon();
  return std::sqrt(var_T / model.horizon());
}

double vo_hedge_path(const FsTables& tables, const ContourMeasure& measure,
                     std::span<const double> spot, double v0) {
  const TimeGrid& grid = tables.grid();
  if (spot.size() != static_cast<std::size_t>(grid.rebalances) + 1)
    throw ParameterError("path length does not match the rebalance grid");
  double gains = 0.0;
  for (int i = 0; i < grid.rebalances; ++i) {
    std::size_t ri = static_cast<std::size_t>(grid.refined_index(i));
    double s = spot[static_cast<std::size_t>(i)];
    double h = tables.claim_value(s, ri);
    double xi = tables.hedge_integrand(s, ri);
    double phi = xi + tables.lambda(ri) / s * (h - v0 - gains);
    gains += phi * (spot[static_cast<std::size_t>(i) + 1] - s);
  }
  return v0 + gains - measure.payoff(spot.back());
}

double bs_hedge_path(PayoffKind kind, double strike, double sigma, double horizon,
                     std::span<const double> spot, double capital) {
  if (kind == PayoffKind::Custom)
    throw ParameterError("the log-normal comparator needs a call or put payoff");
  const int n = static_cast<int>(spot.size()) - 1;
  double gains = 0.0;
  for (int i = 0; i < n; ++i) {
    double tau = horizon * (1.0 - static_cast<double>(i) / n);
    double s = spot[static_cast<std::size_t>(i)];
    double delta = kind == PayoffKind::Call ? bs_call_delta(s, strike, tau, sigma)
                                            : bs_put_delta(s, strike, tau, sigma);
    gains += delta * (spot[static_cast<std::size_t>(i) + 1] - s);
  }
  double payoff = kind == PayoffKind::Call ? std::max(spot.back() - strike, 0.0)
                                           : std::max(strike - spot.back(), 0.0);
  return capital + gains - payoff;
}

StrategyStats summarize_errors(const std::vector<double>& errors, double initial_capital) {
  StrategyStats stats;
  stats.initial_capital = initial_capital;
  const std::size_t n = errors.size();
  if (n == 0) return stats;
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double e : errors) {
    double d = e - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  stats.bias = mean;
  stats.stddev = n > 1 ? std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1)) : 0.0;
  stats.std_error = stats.stddev / std::sqrt(static_cast<double>(n));
  stats.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 3.0;
  return stats;
}

HedgeResult run_experiment(const HedgeExperiment& experiment) {
  const AdditiveModel& model = experiment.model;
  const ContourMeasure& measure = experiment.payoff;
  if (experiment.paths < 1 || experiment.rebalances < 1)
    throw ParameterError("experiment needs at least one path and one rebalance date");

  ValidationReport report = validate(model);
  if (!report.ok()) {
    std::ostringstream os;
    os << "model fails validation:";
    for (const auto& item : report.items)
      if (item.required && !item.passed) os << " [" << item.name << ": " << item.detail << "]";
    throw ModelError(os.str());
  }
  ensure_admissible(measure, model);

  TimeGrid grid(model.horizon(), experiment.rebalances, experiment.refine);
  QuadratureOptions opts = quadrature_options_for(model, measure, grid, experiment.quad_tol);
  ContourQuadrature quadrature = discretize(measure, opts);
  FsTables tables = build_tables(model, quadrature, grid);
  const double v0 = initial_capital(tables, model.s0());

  const bool with_bs = experiment.run_bs && measure.kind() != PayoffKind::Custom;
  double sigma_bs = 0.0, capital_bs = 0.0;
  if (with_bs) {
    sigma_bs = bs_matched_sigma(model);
    capital_bs = measure.kind() == PayoffKind::Call
                     ? bs_call_price(model.s0(), measure.strike(), model.horizon(), sigma_bs)
                     : bs_put_price(model.s0(), measure.strike(), model.horizon(), sigma_bs);
  }

  HedgeResult result;
  result.has_vo = experiment.run_vo;
  result.has_bs = with_bs;
  const std::size_t n_paths = static_cast<std::size_t>(experiment.paths);
  if (result.has_vo) result.vo_errors.assign(n_paths, 0.0);
  if (result.has_bs) result.bs_errors.assign(n_paths, 0.0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RngEngine engine = make_path_engine(experiment.base_seed, p);
      std::vector<double> path = sample_path(model, grid, engine);
      if (result.has_vo) result.vo_errors[p] = vo_hedge_path(tables, measure, path, v0);
      if (result.has_bs)
        result.bs_errors[p] = bs_hedge_path(measure.kind(), measure.strike(), sigma_bs,
                                            model.horizon(), path, capital_bs);
    }
  };
  int n_threads = std::max(1, experiment.threads);
  if (n_threads == 1 || n_paths < 64) {
    work(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (n_paths + n_threads - 1) / static_cast<std::size_t>(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      std::size_t b = std::min(n_paths, static_cast<std::size_t>(t) * chunk);
      std::size_t e = std::min(n_paths, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  if (result.has_vo) result.vo = summarize_errors(result.vo_errors, v0);
  if (result.has_bs) result.bs = summarize_errors(result.bs_errors, capital_bs);
  return result;
}

std::vector<SweepRow> strike_sweep(const AdditiveModel& model, PayoffKind kind,
                                   const std::vector<double>& strikes, int rebalances, int refine,
                                   double quad_tol) {
  std::vector<SweepRow> rows;
  const double sigma_bs = bs_matched_sigma(model);
  TimeGrid grid(model.horizon(), rebalances, refine);
  for (double strike : strikes) {
    double abscissa = choose_abscissa(kind, model);
    ContourMeasure measure = kind == PayoffKind::Call ? ContourMeasure::call(strike, abscissa)
                                                      : ContourMeasure::put(strike, abscissa);
    QuadratureOptions opts = quadrature_options_for(model, measure, grid, quad_tol);
    ContourQuadrature quadrature = discretize(measure, opts);
    FsTables tables = build_tables(model, quadrature, grid);
    SweepRow row;
    row.strike = strike;
    row.v0_vo = initial_capital(tables, model.s0());
    row.hedge0_vo = tables.hedge_integrand(model.s0(), 0);
    if (kind == PayoffKind::Call) {
      row.v0_bs = bs_call_price(model.s0(), strike, model.horizon(), sigma_bs);
      row.delta0_bs = bs_call_delta(model.s0(), strike, model.horizon(), sigma_bs);
    } else {
      row.v0_bs = bs_put_price(model.s0(), strike, model.horizon(), sigma_bs);
      row.delta0_bs = bs_put_delta(model.s0(), strike, model.horizon(), sigma_bs);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qhedge
