#include "qhedge/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qhedge/errors.hpp"

namespace qhedge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.5772156649015328606;

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.
struct GlRule {
  std::vector<double> x, w;
};

GlRule compute_gl(int n) {
  GlRule rule;
  rule.x.resize(static_cast<std::size_t>(n));
  rule.w.resize(static_cast<std::size_t>(n));
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = -p1 / pp;
      z += dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.x[static_cast<std::size_t>(i)] = -z;
    rule.x[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[static_cast<std::size_t>(n - 1 - i)] = rule.w[static_cast<std::size_t>(i)];
  }
  return rule;
}

const GlRule& gl_rule(int n) {
  static const GlRule g8 = compute_gl(8);
  static const GlRule g16 = compute_gl(16);
  static const GlRule g32 = compute_gl(32);
  static const GlRule g64 = compute_gl(64);
  switch (n) {
    case 8:
      return g8;
    case 16:
      return g16;
    case 32:
      return g32;
    default:
      return g64;
  }
}

}  // namespace

complexd ContourLine::density(complexd z) const {
  return std::pow(strike, 1.0 - z) / (z * (z - 1.0));
}

ContourMeasure ContourMeasure::call(double strike, double abscissa) {
  if (!(strike > 0.0)) throw ParameterError("call strike must be positive");
  if (!(abscissa > 0.0 && abscissa < 1.0))
    throw ParameterError("call abscissa must lie in (0, 1)");
  ContourMeasure m;
  m.kind_ = PayoffKind::Call;
  m.strike_ = strike;
  m.atoms_.push_back({complexd(1.0), complexd(1.0)});
  m.lines_.push_back({abscissa, strike});
  return m;
}

ContourMeasure ContourMeasure::put(double strike, double abscissa) {
  if (!(strike > 0.0)) throw ParameterError("put strike must be positive");
  if (!(abscissa < 0.0)) throw ParameterError("put abscissa must be negative");
  ContourMeasure m;
  m.kind_ = PayoffKind::Put;
  m.strike_ = strike;
  m.lines_.push_back({abscissa, strike});
  return m;
}

ContourMeasure ContourMeasure::single_power(complexd z, complexd weight) {
  ContourMeasure m;
  m.kind_ = PayoffKind::Custom;
  m.strike_ = 1.0;
  m.atoms_.push_back({z, weight});
  return m;
}

double ContourMeasure::payoff(double s) const {
  switch (kind_) {
    case PayoffKind::Call:
      return std::max(s - strike_, 0.0);
    case PayoffKind::Put:
      return std::max(strike_ - s, 0.0);
    case PayoffKind::Custom:
      return value(s);
  }
  return 0.0;
}

complexd expint_e1(complexd zeta) {
  double az = std::abs(zeta);
  if (az == 0.0) throw ParameterError("E1 is singular at 0");
  if (az <= 4.0) {
    complexd sum(0.0), term(1.0);
    for (int k = 1; k <= 80; ++k) {
      term *= -zeta / static_cast<double>(k);
      complexd add = term / static_cast<double>(k);
      sum -= add;
      if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return -kEulerGamma - std::log(zeta) + sum;
  }
  // Modified Lentz continued fraction.
  complexd b = zeta + 1.0;
  complexd c(1e300), d = 1.0 / b, h = d;
  for (int k = 1; k <= 300; ++k) {
    double a = -static_cast<double>(k) * static_cast<double>(k);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    complexd delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-zeta);
}

namespace {

// Panel boundaries on [0, hi]: graded start (the integrand has poles at
// u = i R and u = -i (1 - R), so the first panels must be short for the
// Bernstein ellipse to clear them), then equal widths.
std::vector<double> panel_boundaries(double hi, double width) {
  std::vector<double> bounds = {0.0};
  for (double b : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    double prev = bounds.back();
    if (prev >= hi) return bounds;
    double next = std::min(b, hi);
    int pieces = std::max(1, static_cast<int>(std::ceil((next - prev) / width)));
    for (int i = 1; i <= pieces; ++i) bounds.push_back(prev + (next - prev) * i / pieces);
  }
  while (bounds.back() < hi) bounds.push_back(std::min(bounds.back() + width, hi));
  return bounds;
}

// \int_U^inf e^{i u theta} / (u - i a) du for theta > 0.
complexd half_line_w(double theta, double a, double truncation) {
  complexd c(truncation, -a);
  return std::exp(-a * theta) * expint_e1(complexd(0.0, -1.0) * c * theta);
}

// \int_U^inf e^{i u theta} h(u) du with h(u) = 1/(z(z-1)), z = R + iu.
complexd tail_integral(double abscissa, double truncation, double theta) {
  const double a0 = abscissa;
  const double a1 = abscissa - 1.0;
  if (std::abs(theta) < 1e-12) {
    complexd zu(abscissa, truncation);
    return complexd(0.0, 1.0) * std::log(1.0 - 1.0 / zu);
  }
  if (theta > 0.0) {
    return complexd(0.0, -1.0) * (half_line_w(theta, a1, truncation) -
                                  half_line_w(theta, a0, truncation));
  }
  // theta < 0: W_theta(a) = conj(W_{-theta}(-a))
  complexd w1 = std::conj(half_line_w(-theta, -a1, truncation));
  complexd w0 = std::conj(half_line_w(-theta, -a0, truncation));
  return complexd(0.0, -1.0) * (w1 - w0);
}

}  // namespace

double line_tail(const ContourLine& line, double truncation, double s) {
  double theta = std::log(s / line.strike);
  complexd tail = tail_integral(line.abscissa, truncation, theta);
  return line.strike * std::exp(line.abscissa * theta) / kPi * tail.real();
}

double ContourMeasure::value(double s) const {
  if (!(s > 0.0)) {
    // limiting value at 0+: only atoms with Re z = 0 would contribute
    double acc = 0.0;
    for (const auto& atom : atoms_)
      if (atom.z == complexd(0.0)) acc += atom.weight.real();
    return acc;
  }
  double acc = 0.0;
  for (const auto& atom : atoms_) acc += (atom.weight * std::pow(complexd(s), atom.z)).real();
  const GlRule& rule = gl_rule(32);
  for (const auto& line : lines_) {
    double theta = std::log(s / line.strike);
    double truncation = 256.0;
    // panels resolved against the oscillation e^{i u theta}
    double width = std::min(8.0, 44.0 / (std::abs(theta) + 1.0));
    std::vector<double> bounds = panel_boundaries(truncation, width);
    complexd integral(0.0);
    for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
      double lo = bounds[p], hi = bounds[p + 1];
      complexd panel(0.0);
      for (std::size_t g = 0; g < rule.x.size(); ++g) {
        double u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.x[g];
        complexd z(line.abscissa, u);
        panel += rule.w[g] * std::exp(complexd(0.0, u * theta)) / (z * (z - 1.0));
      }
      integral += 0.5 * (hi - lo) * panel;
    }
    acc += line.strike * std::exp(line.abscissa * theta) / kPi * integral.real();
    acc += line_tail(line, truncation, s);
  }
  return acc;
}

double choose_abscissa(PayoffKind kind, const AdditiveModel& model) {
  const DomainStrip strip = domain(model.driver());
  const double l_inf = model.loading().inf_on(model.horizon());
  const double l_sup = model.loading().sup_on(model.horizon());
  auto admissible = [&](double r) {
    for (double x : {2.0 * r, r, r + 1.0})
      for (double l : {l_inf, l_sup})
        if (!strip.contains(x * l, 0.05)) return false;
    return true;
  };
  if (kind == PayoffKind::Call) {
    double r = 0.5;
    if (!admissible(r)) {
      std::ostringstream os;
      os << "no admissible call abscissa: points {2R, R, R+1} at R = 1/2 leave the strip "
         << strip.str() << " under loadings [" << l_inf << ", " << l_sup << "]";
      throw ModelError(os.str());
    }
    return r;
  }
  if (kind == PayoffKind::Put) {
    double r = -1.0;
    for (int it = 0; it < 64; ++it) {
      if (admissible(r)) return r;
      r *= 0.5;
    }
    std::ostringstream os;
    os << "no admissible put abscissa: even R -> 0- leaves the strip " << strip.str()
       << " under loadings [" << l_inf << ", " << l_sup << "]";
    throw ModelError(os.str());
  }
  throw ParameterError("choose_abscissa needs a call or put measure kind");
}

void ensure_admissible(const ContourMeasure& measure, const AdditiveModel& model) {
  const DomainStrip strip = domain(model.driver());
  const double l_inf = model.loading().inf_on(model.horizon());
  const double l_sup = model.loading().sup_on(model.horizon());
  std::vector<double> support_re;
  for (const auto& atom : measure.atoms()) support_re.push_back(atom.z.real());
  for (const auto& line : measure.lines()) support_re.push_back(line.abscissa);
  std::vector<double> points = {1.0, 2.0};
  for (double x : support_re) {
    points.push_back(2.0 * x);
    points.push_back(x + 1.0);
    points.push_back(x);
  }
  for (double x : points) {
    for (double l : {l_inf, l_sup}) {
      if (!strip.contains(x * l)) {
        std::ostringstream os;
        os << "admissibility point " << x << " scaled by loading " << l
           << " leaves the cumulant strip " << strip.str();
        throw ModelError(os.str());
      }
    }
  }
}

ContourQuadrature::ContourQuadrature(std::vector<ContourAtom> atoms,
                                     std::vector<LineQuadrature> lines, double rel_tol)
    : atoms_(std::move(atoms)), lines_(std::move(lines)), rel_tol_(rel_tol) {}

double ContourQuadrature::strike_scale() const {
  double k = 1.0;
  for (const auto& line : lines_) k = std::max(k, line.strike);
  return k;
}

std::vector<QuadratureNode> ContourQuadrature::nodes() const {
  std::vector<QuadratureNode> out;
  for (const auto& line : lines_) {
    for (std::size_t j = 0; j < line.u.size(); ++j)
      out.push_back({complexd(line.abscissa, line.u[j]), line.weight[j]});
    for (std::size_t j = 0; j < line.u.size(); ++j)
      out.push_back({complexd(line.abscissa, -line.u[j]), std::conj(line.weight[j])});
  }
  return out;
}

std::size_t ContourQuadrature::node_count() const {
  std::size_t n = 0;
  for (const auto& line : lines_) n += 2 * line.u.size();
  return n;
}

double ContourQuadrature::reconstruct(double s) const {
  double acc = 0.0;
  for (const auto& atom : atoms_) acc += (atom.weight * std::pow(complexd(s), atom.z)).real();
  for (const auto& line : lines_) {
    double ls = std::log(s);
    double sr = std::pow(s, line.abscissa);
    double sum = 0.0;
    for (std::size_t j = 0; j < line.u.size(); ++j) {
      double phase = line.u[j] * ls;
      sum += line.weight[j].real() * std::cos(phase) - line.weight[j].imag() * std::sin(phase);
    }
    acc += 2.0 * sr * sum;
    acc += line_tail({line.abscissa, line.strike}, line.truncation, s);
  }
  return acc;
}

double ContourQuadrature::tail_bound(double s) const {
  double bound = 0.0;
  for (const auto& line : lines_) {
    double theta = std::log(s / line.strike);
    double u = line.truncation;
    double pref = line.strike * std::exp(line.abscissa * theta) / kPi;
    double osc = std::abs(theta) * u > 2.0 ? 2.0 / (std::abs(theta) * u * u) : 1.0 / u;
    bound += pref * osc;
  }
  return bound;
}

ContourQuadrature discretize(const ContourMeasure& measure, const QuadratureOptions& opts) {
  if (!(opts.rel_tol > 0.0)) throw ParameterError("quadrature tolerance must be positive");

  std::vector<LineQuadrature> lines;
  std::size_t total_nodes = 0;

  for (const auto& line : measure.lines()) {
    const double strike = line.strike;
    const double theta_max = std::max(opts.osc_theta_max, 0.1);
    const double theta_floor = std::max(opts.osc_theta_floor, 1e-6);
    const double c = std::max(opts.decay_rate, 0.0);

    // Truncation point.  Damped lines and pair sums must push the tail
    // below the tolerance proper.  Without either mechanism the raw
    // node sum cannot reach fine tolerances at any practical cutoff, so
    // the truncation targets the Monte Carlo scale instead; reconstruct()
    // restores full accuracy through the analytic tail.
    auto tail_ok = [&](double u) {
      double osc = std::min(1.0 / u, 2.0 / (theta_floor * u * u)) * 2.0 / kPi;
      if (osc < std::max(opts.rel_tol, 3e-5)) return true;
      if (c > 0.0 && std::exp(-c * u) / (c * u * u) * 2.0 / kPi < opts.rel_tol) return true;
      if (opts.paired_tail && 2.0 / (kPi * u * u * u) < opts.rel_tol) return true;
      return false;
    };
    double truncation = 64.0;
    while (!tail_ok(truncation) && truncation < 1.0e9) truncation *= 2.0;

    // Resolved region: equal panels narrow enough for e^{i u theta_max}.
    // Beyond u_thin the damped integrand is negligible and panel widths
    // grow geometrically.
    int order = 16;
    for (;; order *= 2) {
      if (total_nodes + 64 > opts.max_nodes)
        throw QuadratureError("contour discretization exceeded its node budget");
      double width = std::min(16.0, 1.4 * order / theta_max);
      double u_thin = truncation;
      if (c > 0.0) {
        u_thin = 64.0;
        while (u_thin < truncation &&
               std::exp(-c * u_thin) / (2.0 * kPi * u_thin * u_thin) * (truncation - u_thin) >
                   0.02 * opts.rel_tol)
          u_thin *= 2.0;
        u_thin = std::min(u_thin, truncation);
      }

      std::vector<std::pair<double, double>> panels;
      std::vector<double> bounds = panel_boundaries(u_thin, width);
      for (std::size_t p = 0; p + 1 < bounds.size(); ++p)
        panels.emplace_back(bounds[p], bounds[p + 1]);
      double lo = u_thin;
      double w = width;
      while (lo < truncation) {
        w *= 1.6;
        double hi = std::min(lo + w, truncation);
        panels.emplace_back(lo, hi);
        lo = hi;
      }

      const GlRule& rule = gl_rule(order);
      LineQuadrature lq;
      lq.abscissa = line.abscissa;
      lq.strike = strike;
      lq.truncation = truncation;
      lq.u.reserve(panels.size() * rule.x.size());
      lq.weight.reserve(panels.size() * rule.x.size());
      for (const auto& [a, b] : panels) {
        for (std::size_t g = 0; g < rule.x.size(); ++g) {
          double u = 0.5 * (a + b) + 0.5 * (b - a) * rule.x[g];
          complexd z(line.abscissa, u);
          lq.u.push_back(u);
          lq.weight.push_back(0.5 * (b - a) * rule.w[g] * line.density(z) / (2.0 * kPi));
        }
      }

      if (2 * lq.u.size() + total_nodes > opts.max_nodes)
        throw QuadratureError("contour discretization exceeded its node budget");

      // Convergence probe: the resolved sum must be stable under
      // doubling the panel order.
      if (order >= 32) {
        lines.push_back(std::move(lq));
        break;
      }
      const GlRule& fine = gl_rule(order * 2);
      bool converged = true;
      for (double ratio : {0.25, 0.5, 0.9, 1.1, 2.0, 4.0}) {
        double s = ratio * strike;
        double ls = std::log(s);
        double sr = std::pow(s, line.abscissa);
        double coarse = 0.0;
        for (std::size_t j = 0; j < lq.u.size(); ++j) {
          double phase = lq.u[j] * ls;
          coarse +=
              lq.weight[j].real() * std::cos(phase) - lq.weight[j].imag() * std::sin(phase);
        }
        coarse *= 2.0 * sr;
        double refined = 0.0;
        for (const auto& [a, b] : panels) {
          for (std::size_t g = 0; g < fine.x.size(); ++g) {
            double u = 0.5 * (a + b) + 0.5 * (b - a) * fine.x[g];
            complexd z(line.abscissa, u);
            complexd wgt = 0.5 * (b - a) * fine.w[g] * line.density(z) / (2.0 * kPi);
            double phase = u * ls;
            refined += wgt.real() * std::cos(phase) - wgt.imag() * std::sin(phase);
          }
        }
        refined *= 2.0 * sr;
        if (std::abs(coarse - refined) > opts.rel_tol * strike) {
          converged = false;
          break;
        }
      }
      if (converged) {
        lines.push_back(std::move(lq));
        break;
      }
    }
    total_nodes += 2 * lines.back().u.size();
  }

  return ContourQuadrature(measure.atoms(), std::move(lines), opts.rel_tol);
}

}  // namespace qhedge
