#include "qhedge/additive.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "qhedge/errors.hpp"

namespace qhedge {

LoadingFunction LoadingFunction::constant(double value) {
  if (!(value > 0.0)) throw ParameterError("constant loading must be positive");
  LoadingFunction l;
  l.kind_ = Kind::Constant;
  l.value_ = value;
  return l;
}

LoadingFunction LoadingFunction::exp_decay(double sigma_s, double mean_reversion,
                                           double delivery) {
  if (!(sigma_s > 0.0)) throw ParameterError("exp_decay loading requires sigma_s > 0");
  if (mean_reversion < 0.0) throw ParameterError("mean reversion rate must be >= 0");
  LoadingFunction l;
  l.kind_ = Kind::ExpDecay;
  l.sigma_s_ = sigma_s;
  l.mean_reversion_ = mean_reversion;
  l.delivery_ = delivery;
  return l;
}

LoadingFunction LoadingFunction::piecewise_constant(
    std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw ParameterError("piecewise loading needs at least one knot");
  if (knots.front().first != 0.0) throw ParameterError("piecewise loading must start at t = 0");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].second > 0.0)) throw ParameterError("loading values must be positive");
    if (i > 0 && !(knots[i].first > knots[i - 1].first))
      throw ParameterError("loading knots must be strictly increasing in t");
  }
  LoadingFunction l;
  l.kind_ = Kind::PiecewiseConstant;
  l.knots_ = std::move(knots);
  return l;
}

double LoadingFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::ExpDecay:
      return sigma_s_ * std::exp(-mean_reversion_ * (delivery_ - t));
    case Kind::PiecewiseConstant: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                 [](double x, const auto& k) { return x < k.first; });
      if (it == knots_.begin()) return knots_.front().second;
      return std::prev(it)->second;
    }
  }
  return value_;
}

double LoadingFunction::inf_on(double horizon) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::ExpDecay:
      // increasing in t when mean_reversion >= 0 and delivery >= horizon
      return std::min((*this)(0.0), (*this)(horizon));
    case Kind::PiecewiseConstant: {
      double lo = knots_.front().second;
      for (const auto& k : knots_)
        if (k.first < horizon) lo = std::min(lo, k.second);
      return lo;
    }
  }
  return value_;
}

double LoadingFunction::sup_on(double horizon) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::ExpDecay:
      return std::max((*this)(0.0), (*this)(horizon));
    case Kind::PiecewiseConstant: {
      double hi = knots_.front().second;
      for (const auto& k : knots_)
        if (k.first < horizon) hi = std::max(hi, k.second);
      return hi;
    }
  }
  return value_;
}

double LoadingFunction::squared_integral(double t0) const {
  switch (kind_) {
    case Kind::Constant:
      return value_ * value_ * t0;
    case Kind::ExpDecay: {
      if (mean_reversion_ == 0.0) return sigma_s_ * sigma_s_ * t0;
      double two_mr = 2.0 * mean_reversion_;
      return sigma_s_ * sigma_s_ *
             (std::exp(-two_mr * (delivery_ - t0)) - std::exp(-two_mr * delivery_)) / two_mr;
    }
    case Kind::PiecewiseConstant: {
      double acc = 0.0;
      for (std::size_t i = 0; i < knots_.size(); ++i) {
        double a = knots_[i].first;
        if (a >= t0) break;
        double b = (i + 1 < knots_.size()) ? std::min(knots_[i + 1].first, t0) : t0;
        acc += knots_[i].second * knots_[i].second * (b - a);
      }
      return acc;
    }
  }
  return 0.0;
}

TrendFunction::TrendFunction() : zero_(true) { knots_ = {{0.0, 0.0}}; }

TrendFunction::TrendFunction(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) {
    zero_ = true;
    knots_ = {{0.0, 0.0}};
    return;
  }
  if (knots.front().first != 0.0 || knots.front().second != 0.0)
    throw ParameterError("trend must start at (0, 0)");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i].first > knots[i - 1].first))
      throw ParameterError("trend knots must be strictly increasing in t");
  knots_ = std::move(knots);
  zero_ = std::all_of(knots_.begin(), knots_.end(), [](const auto& k) { return k.second == 0.0; });
}

double TrendFunction::value(double t) const {
  if (zero_ || knots_.size() == 1) return 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const auto& k) { return x < k.first; });
  if (it == knots_.begin()) return knots_.front().second;
  if (it == knots_.end()) {
    // extend the last segment's slope
    const auto& a = knots_[knots_.size() - 2];
    const auto& b = knots_.back();
    double s = (b.second - a.second) / (b.first - a.first);
    return b.second + s * (t - b.first);
  }
  const auto& a = *std::prev(it);
  const auto& b = *it;
  double w = (t - a.first) / (b.first - a.first);
  return a.second + w * (b.second - a.second);
}

double TrendFunction::slope(double t) const {
  if (zero_ || knots_.size() == 1) return 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const auto& k) { return x < k.first; });
  std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
  if (hi == 0) hi = 1;
  if (hi >= knots_.size()) hi = knots_.size() - 1;
  const auto& a = knots_[hi - 1];
  const auto& b = knots_[hi];
  return (b.second - a.second) / (b.first - a.first);
}

bool TrendFunction::has_constant_slope() const { return zero_ || knots_.size() <= 2; }

AdditiveModel::AdditiveModel(LevyLaw driver, LoadingFunction loading, double sigma_long,
                             TrendFunction trend, double horizon, double s0)
    : driver_(std::move(driver)),
      loading_(std::move(loading)),
      sigma_long_(sigma_long),
      trend_(std::move(trend)),
      horizon_(horizon),
      s0_(s0) {
  if (!(horizon_ > 0.0)) throw ParameterError("model horizon must be positive");
  if (!(s0_ > 0.0)) throw ParameterError("initial spot must be positive");
  if (sigma_long_ < 0.0) throw ParameterError("sigma_long must be >= 0");
  if (!(loading_.inf_on(horizon_) > 0.0))
    throw ParameterError("loading must be bounded away from zero on [0, horizon]");
}

bool AdditiveModel::is_time_homogeneous() const {
  return loading_.is_constant() && trend_.has_constant_slope();
}

TimeGrid::TimeGrid(double horizon, int rebalances_, int refine_)
    : rebalances(rebalances_), refine(refine_) {
  if (rebalances < 1 || refine < 1) throw ParameterError("time grid needs N >= 1 and M >= 1");
  if (!(horizon > 0.0)) throw ParameterError("time grid horizon must be positive");
  int n = rebalances * refine;
  knots.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) knots[static_cast<std::size_t>(i)] = horizon * i / n;
  knots.back() = horizon;
}

namespace {

// Adaptive Simpson on [a, b] for a complex integrand.
complexd adaptive_simpson(const std::function<complexd(double)>& f, double a, double b, complexd fa,
                          complexd fm, complexd fb, complexd whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  complexd flm = f(lm), frm = f(rm);
  complexd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  complexd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  complexd delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

complexd integrate_adaptive(const std::function<complexd(double)>& f, double a, double b,
                            double tol) {
  if (b <= a) return complexd(0.0);
  complexd fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  complexd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double scale = std::max({std::abs(fa), std::abs(fm), std::abs(fb), 1e-30}) * (b - a);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, std::max(tol * scale, 1e-16), 40);
}

constexpr double kKappaTol = 1e-10;  // relative, for the adaptive time quadrature

}  // namespace

complexd kappa_t(const AdditiveModel& model, complexd z, double t) {
  if (t < 0.0 || t > model.horizon() + 1e-12) throw ParameterError("time outside [0, horizon]");
  if (t == 0.0 || z == complexd(0.0)) return complexd(0.0);
  complexd gaussian_and_trend =
      z * model.trend().value(t) + 0.5 * z * z * model.sigma_long() * model.sigma_long() * t;
  const LevyLaw& law = model.driver();
  const LoadingFunction& l = model.loading();
  if (l.is_constant()) return gaussian_and_trend + t * kappa(law, z * l(0.0));
  // Domain check at the loading extremes covers all of [0, t] by convexity.
  (void)kappa(law, z * l.inf_on(t));
  (void)kappa(law, z * l.sup_on(t));
  if (l.kind() == LoadingFunction::Kind::PiecewiseConstant) {
    // The integrand is a step function in t; sum the steps exactly.
    complexd acc(0.0);
    const auto& knots = l.step_knots();
    for (std::size_t i = 0; i < knots.size(); ++i) {
      double a = knots[i].first;
      if (a >= t) break;
      double b = (i + 1 < knots.size()) ? std::min(knots[i + 1].first, t) : t;
      acc += (b - a) * kappa(law, z * knots[i].second);
    }
    return gaussian_and_trend + acc;
  }
  std::function<complexd(double)> f = [&](double s) { return kappa(law, z * l(s)); };
  return gaussian_and_trend + integrate_adaptive(f, 0.0, t, kKappaTol);
}

complexd kappa_density(const AdditiveModel& model, complexd z, double t) {
  complexd gaussian_and_trend =
      z * model.trend().slope(t) + 0.5 * z * z * model.sigma_long() * model.sigma_long();
  return gaussian_and_trend + kappa(model.driver(), z * model.loading()(t));
}

double rho_density(const AdditiveModel& model, double t) {
  double lt = model.loading()(t);
  double k2 = kappa(model.driver(), complexd(2.0 * lt)).real();
  double k1 = kappa(model.driver(), complexd(lt)).real();
  double r = model.sigma_long() * model.sigma_long() + k2 - 2.0 * k1;
  if (!(r > 0.0)) {
    std::ostringstream os;
    os << "variance clock density is " << r << " at t = " << t
       << "; the model has deterministic increments";
    throw ModelError(os.str());
  }
  return r;
}

double mvt(const AdditiveModel& model, double t) {
  if (t < 0.0) throw ParameterError("mvt requires t >= 0");
  if (t == 0.0) return 0.0;
  auto integrand = [&](double u) {
    double r = rho_density(model, u);
    double k1d = kappa_density(model, complexd(1.0), u).real();
    double lam = k1d / r;
    return lam * lam * r;
  };
  if (model.is_time_homogeneous()) return integrand(0.0) * t;
  const int steps = 512;
  double acc = 0.0, prev = integrand(0.0);
  for (int i = 1; i <= steps; ++i) {
    double u = t * i / steps;
    double cur = integrand(u);
    acc += 0.5 * (prev + cur) * (t / steps);
    prev = cur;
  }
  return acc;
}

bool ValidationReport::ok() const {
  for (const auto& item : items)
    if (item.required && !item.passed) return false;
  return true;
}

ValidationReport validate(const AdditiveModel& model) {
  ValidationReport report;
  const double T = model.horizon();
  const DomainStrip strip = domain(model.driver());
  const double l_inf = model.loading().inf_on(T);
  const double l_sup = model.loading().sup_on(T);

  {
    std::ostringstream os;
    os << "inf l = " << l_inf << ", sup l = " << l_sup << " on [0, " << T << "]";
    report.items.push_back({"loading-bounded", l_inf > 0.0 && std::isfinite(l_sup), true, os.str()});
  }
  {
    bool pass = strip.contains(2.0 * l_inf) && strip.contains(2.0 * l_sup);
    std::ostringstream os;
    os << "2 l in " << strip.str() << " for l in [" << l_inf << ", " << l_sup << "]";
    report.items.push_back({"two-in-domain", pass, true, os.str()});
  }
  {
    // No deterministic increments: either an independent Gaussian part,
    // or kappa(2x) - 2 kappa(x) > 0 along the loading range.
    bool pass = model.sigma_long() > 0.0;
    std::string detail;
    if (pass) {
      detail = "sigma_long > 0";
    } else {
      try {
        double a = kappa(model.driver(), complexd(2.0 * l_inf)).real() -
                   2.0 * kappa(model.driver(), complexd(l_inf)).real();
        double b = kappa(model.driver(), complexd(2.0 * l_sup)).real() -
                   2.0 * kappa(model.driver(), complexd(l_sup)).real();
        pass = a > 0.0 && b > 0.0;
        std::ostringstream os;
        os << "kappa(2l) - 2 kappa(l) in {" << a << ", " << b << "}";
        detail = os.str();
      } catch (const DomainError& e) {
        pass = false;
        detail = e.what();
      }
    }
    report.items.push_back({"non-degenerate", pass, true, detail});
  }
  {
    bool pass = true;
    double rmin = 0.0;
    std::string detail;
    try {
      rmin = rho_density(model, 0.0);
      for (int i = 1; i <= 64; ++i) rmin = std::min(rmin, rho_density(model, T * i / 64.0));
      std::ostringstream os;
      os << "min variance-clock density = " << rmin;
      detail = os.str();
      pass = rmin > 0.0;
    } catch (const Error& e) {
      pass = false;
      detail = e.what();
    }
    report.items.push_back({"variance-clock-increasing", pass, true, detail});
  }
  {
    bool pass = true;
    std::string detail;
    try {
      double k = mvt(model, T);
      pass = std::isfinite(k);
      std::ostringstream os;
      os << "K_T = " << k;
      detail = os.str();
    } catch (const Error& e) {
      pass = false;
      detail = e.what();
    }
    report.items.push_back({"structure-condition", pass, true, detail});
  }
  if (model.driver().kind() == LevyLaw::Kind::Nig &&
      model.loading().kind() == LoadingFunction::Kind::ExpDecay) {
    const auto& p = model.driver().nig_params();
    double bound = 0.5 * (p.alpha - p.beta);
    bool pass = model.loading().sigma_s() <= bound;
    std::ostringstream os;
    os << "sufficient condition sigma_s <= (alpha - beta)/2: " << model.loading().sigma_s()
       << (pass ? " <= " : " > ") << bound;
    report.items.push_back({"nig-short-vol-sufficient", pass, false, os.str()});
  }
  return report;
}

std::vector<double> sample_path(const AdditiveModel& model, const TimeGrid& grid, RngEngine& rng) {
  const int n_reb = grid.rebalances;
  std::vector<double> spot(static_cast<std::size_t>(n_reb) + 1);
  const double s0 = model.s0();
  const double sl = model.sigma_long();
  std::normal_distribution<double> normal(0.0, 1.0);

  double x_driver = 0.0;  // \int l dLambda so far
  double x_gauss = 0.0;   // sigma_long W_t
  spot[0] = s0;
  const bool exact = model.loading().is_constant();
  for (int i = 0; i < n_reb; ++i) {
    double t0 = grid.rebalance_time(i);
    double t1 = grid.rebalance_time(i + 1);
    if (exact) {
      double dt = t1 - t0;
      x_driver += model.loading()(t0) * sample_increment(model.driver(), dt, rng);
      if (sl > 0.0) x_gauss += sl * std::sqrt(dt) * normal(rng);
    } else {
      for (int k = 0; k < grid.refine; ++k) {
        std::size_t idx = static_cast<std::size_t>(grid.refined_index(i) + k);
        double a = grid.knots[idx];
        double b = grid.knots[idx + 1];
        double dt = b - a;
        x_driver += model.loading()(a) * sample_increment(model.driver(), dt, rng);
        if (sl > 0.0) x_gauss += sl * std::sqrt(dt) * normal(rng);
      }
    }
    spot[static_cast<std::size_t>(i) + 1] =
        s0 * std::exp(model.trend().value(t1) + x_driver + x_gauss);
  }
  return spot;
}

}  // namespace qhedge
