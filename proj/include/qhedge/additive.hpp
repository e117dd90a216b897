#ifndef QHEDGE_ADDITIVE_HPP_
#define QHEDGE_ADDITIVE_HPP_

#include <string>
#include <utility>
#include <vector>

#include "qhedge/levy.hpp"

namespace qhedge {

// Deterministic loading l(t) multiplying the Levy driver.  Must be
// bounded away from zero on [0, horizon].
class LoadingFunction {
 public:
  enum class Kind { Constant, ExpDecay, PiecewiseConstant };

  static LoadingFunction constant(double value);
  // l(t) = sigma_s * exp(-mean_reversion * (delivery - t))
  static LoadingFunction exp_decay(double sigma_s, double mean_reversion, double delivery);
  // Left-continuous step function; knots are (t_k, value on [t_k, t_{k+1})).
  static LoadingFunction piecewise_constant(std::vector<std::pair<double, double>> knots);

  double operator()(double t) const;
  double inf_on(double horizon) const;
  double sup_on(double horizon) const;
  // Exact integral of l(t)^2 over [0, t0].
  double squared_integral(double t0) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  Kind kind() const { return kind_; }
  double sigma_s() const { return sigma_s_; }
  double mean_reversion() const { return mean_reversion_; }
  double delivery() const { return delivery_; }
  const std::vector<std::pair<double, double>>& step_knots() const { return knots_; }

 private:
  LoadingFunction() = default;
  Kind kind_ = Kind::Constant;
  double value_ = 1.0;
  double sigma_s_ = 0.0, mean_reversion_ = 0.0, delivery_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

// Piecewise-linear deterministic trend with m(0) = 0.
class TrendFunction {
 public:
  TrendFunction();  // identically zero
  explicit TrendFunction(std::vector<std::pair<double, double>> knots);
  double value(double t) const;
  double slope(double t) const;
  bool is_zero() const { return zero_; }
  bool has_constant_slope() const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  bool zero_ = true;
  std::vector<std::pair<double, double>> knots_;
};

// Log-price X_t = m(t) + \int_0^t l(s) dLambda_s + sigma_long W_t,
// spot S_t = s0 exp(X_t).
class AdditiveModel {
 public:
  AdditiveModel(LevyLaw driver, LoadingFunction loading, double sigma_long, TrendFunction trend,
                double horizon, double s0);

  const LevyLaw& driver() const { return driver_; }
  const LoadingFunction& loading() const { return loading_; }
  double sigma_long() const { return sigma_long_; }
  const TrendFunction& trend() const { return trend_; }
  double horizon() const { return horizon_; }
  double s0() const { return s0_; }
  // Densities are constant in t exactly when the loading is constant
  // and the trend slope is.
  bool is_time_homogeneous() const;

 private:
  LevyLaw driver_;
  LoadingFunction loading_;
  double sigma_long_;
  TrendFunction trend_;
  double horizon_;
  double s0_;
};

// Rebalance dates 0 = t_0 < ... < t_N = horizon plus a refinement
// factor for time integrals and path sub-stepping.
struct TimeGrid {
  TimeGrid(double horizon, int rebalances, int refine);
  int rebalances;
  int refine;
  std::vector<double> knots;  // refined, rebalances*refine + 1 points
  std::size_t size() const { return knots.size(); }
  int refined_index(int rebalance_index) const { return rebalance_index * refine; }
  double rebalance_time(int i) const { return knots[static_cast<std::size_t>(refined_index(i))]; }
};

// Cumulant of X_t at z; adaptive panel quadrature in time to relative
// tolerance 1e-10 (exact closed form for constant loadings).
complexd kappa_t(const AdditiveModel& model, complexd z, double t);

// d kappa_t(z) / dt = z m'(t) + z^2 sigma_long^2 / 2 + kappa(z l(t)).
complexd kappa_density(const AdditiveModel& model, complexd z, double t);

// d rho / dt = sigma_long^2 + kappa(2 l(t)) - 2 kappa(l(t)); throws
// ModelError if not strictly positive (degenerate increments).
double rho_density(const AdditiveModel& model, double t);

// Mean-variance trade-off K_t = int_0^t (d kappa_u(1)/d rho_u)^2 d rho_u,
// accumulated by the trapezoidal rule on an internal refined grid.
double mvt(const AdditiveModel& model, double t);

struct ValidationItem {
  std::string name;
  bool passed;
  bool required;  // informational items do not affect ok()
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool ok() const;
};

// Checks the model assumptions: 2 l inside the driver strip, no
// deterministic increments, strictly increasing variance clock, finite
// mean-variance trade-off.  Never throws; returns a report.
ValidationReport validate(const AdditiveModel& model);

// Simulates S at the rebalance dates.  Time-varying loadings are
// sub-stepped on the refined grid with left-endpoint evaluation against
// exact driver increments; constant loadings use one exact increment
// per rebalance interval.
std::vector<double> sample_path(const AdditiveModel& model, const TimeGrid& grid, RngEngine& rng);

}  // namespace qhedge

#endif  // QHEDGE_ADDITIVE_HPP_
