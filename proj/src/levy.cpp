#include "qhedge/levy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qhedge/errors.hpp"

namespace qhedge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void throw_out_of_domain(const LevyLaw& law, complexd z) {
  std::ostringstream os;
  os << "Re(z) = " << z.real() << " outside cumulant strip " << domain(law).str() << " of "
     << law.describe();
  throw DomainError(os.str());
}

}  // namespace

bool DomainStrip::contains(double x, double margin) const {
  double lo = lower, hi = upper;
  if (margin > 0.0) {
    if (std::isfinite(lo)) lo += margin * std::abs(lo);
    if (std::isfinite(hi)) hi -= margin * std::abs(hi);
  }
  if (x < lo || (x == lo && (!lower_closed || margin > 0.0))) return false;
  if (x > hi || (x == hi && (!upper_closed || margin > 0.0))) return false;
  return true;
}

std::string DomainStrip::str() const {
  std::ostringstream os;
  os << (lower_closed && std::isfinite(lower) ? '[' : ']');
  if (std::isfinite(lower))
    os << lower;
  else
    os << "-inf";
  os << ", ";
  if (std::isfinite(upper))
    os << upper;
  else
    os << "+inf";
  os << (upper_closed && std::isfinite(upper) ? ']' : '[');
  return os.str();
}

LevyLaw LevyLaw::nig(double alpha, double beta, double delta, double mu) {
  if (!(alpha > 0.0) || !(alpha > std::abs(beta)))
    throw ParameterError("NIG requires alpha > |beta| >= 0");
  if (!(delta > 0.0)) throw ParameterError("NIG requires delta > 0");
  return LevyLaw(Kind::Nig, NigParams{alpha, beta, delta, mu});
}

LevyLaw LevyLaw::vg(double alpha, double beta, double delta, double mu) {
  if (!(alpha > 0.0)) throw ParameterError("VG requires alpha > 0");
  if (delta == 0.0) throw ParameterError("VG requires delta != 0");
  return LevyLaw(Kind::Vg, VgParams{alpha, beta, delta, mu});
}

LevyLaw LevyLaw::poisson(double intensity) {
  if (!(intensity > 0.0)) throw ParameterError("Poisson requires intensity > 0");
  return LevyLaw(Kind::Poisson, PoissonParams{intensity});
}

LevyLaw LevyLaw::brownian(double drift, double sigma) {
  if (sigma < 0.0) throw ParameterError("Brownian requires sigma >= 0");
  return LevyLaw(Kind::Brownian, BrownianParams{drift, sigma});
}

std::string LevyLaw::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Nig: {
      const auto& p = nig_params();
      os << "NIG(alpha=" << p.alpha << ", beta=" << p.beta << ", delta=" << p.delta
         << ", mu=" << p.mu << ")";
      break;
    }
    case Kind::Vg: {
      const auto& p = vg_params();
      os << "VG(alpha=" << p.alpha << ", beta=" << p.beta << ", delta=" << p.delta
         << ", mu=" << p.mu << ")";
      break;
    }
    case Kind::Poisson:
      os << "Poisson(intensity=" << poisson_params().intensity << ")";
      break;
    case Kind::Brownian: {
      const auto& p = brownian_params();
      os << "Brownian(drift=" << p.drift << ", sigma=" << p.sigma << ")";
      break;
    }
  }
  return os.str();
}

DomainStrip domain(const LevyLaw& law) {
  switch (law.kind()) {
    case LevyLaw::Kind::Nig: {
      const auto& p = law.nig_params();
      return DomainStrip{-p.alpha - p.beta, p.alpha - p.beta, true, true};
    }
    case LevyLaw::Kind::Vg: {
      const auto& p = law.vg_params();
      double root = std::sqrt(p.beta * p.beta + 2.0 * p.alpha);
      // Open strip: the Log argument crosses zero on the boundary.
      return DomainStrip{-p.beta - root, -p.beta + root, false, false};
    }
    case LevyLaw::Kind::Poisson:
    case LevyLaw::Kind::Brownian:
      return DomainStrip{-kInf, kInf, false, false};
  }
  throw ParameterError("unreachable law kind");
}

complexd kappa(const LevyLaw& law, complexd z) {
  if (!domain(law).contains(z.real())) throw_out_of_domain(law, z);
  switch (law.kind()) {
    case LevyLaw::Kind::Nig: {
      const auto& p = law.nig_params();
      double gamma0 = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
      complexd bz = p.beta + z;
      complexd gamma_z = std::sqrt(complexd(p.alpha * p.alpha) - bz * bz);
      return p.mu * z + p.delta * (gamma0 - gamma_z);
    }
    case LevyLaw::Kind::Vg: {
      const auto& p = law.vg_params();
      complexd q = p.alpha - p.beta * z - 0.5 * z * z;
      return p.mu * z + p.delta * std::log(complexd(p.alpha) / q);
    }
    case LevyLaw::Kind::Poisson: {
      return law.poisson_params().intensity * (std::exp(z) - 1.0);
    }
    case LevyLaw::Kind::Brownian: {
      const auto& p = law.brownian_params();
      return p.drift * z + 0.5 * p.sigma * p.sigma * z * z;
    }
  }
  throw ParameterError("unreachable law kind");
}

Moments moments(const LevyLaw& law) {
  // Cumulants c1..c4 of the time-1 marginal.
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  switch (law.kind()) {
    case LevyLaw::Kind::Nig: {
      const auto& p = law.nig_params();
      double g = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
      double a2 = p.alpha * p.alpha;
      c1 = p.mu + p.delta * p.beta / g;
      c2 = p.delta * a2 / (g * g * g);
      c3 = 3.0 * p.delta * p.beta * a2 / std::pow(g, 5);
      c4 = 3.0 * p.delta * a2 * (a2 + 4.0 * p.beta * p.beta) / std::pow(g, 7);
      break;
    }
    case LevyLaw::Kind::Vg: {
      const auto& p = law.vg_params();
      double a = p.alpha, b = p.beta;
      c1 = p.mu + p.delta * b / a;
      c2 = p.delta * (a + b * b) / (a * a);
      c3 = p.delta * (3.0 * b / (a * a) + 2.0 * b * b * b / (a * a * a));
      c4 = p.delta * (3.0 / (a * a) + 12.0 * b * b / (a * a * a) +
                      6.0 * std::pow(b, 4) / std::pow(a, 4));
      break;
    }
    case LevyLaw::Kind::Poisson: {
      double lp = law.poisson_params().intensity;
      c1 = c2 = c3 = c4 = lp;
      break;
    }
    case LevyLaw::Kind::Brownian: {
      const auto& p = law.brownian_params();
      c1 = p.drift;
      c2 = p.sigma * p.sigma;
      break;
    }
  }
  Moments m;
  m.mean = c1;
  m.variance = c2;
  m.skewness = c2 > 0 ? c3 / std::pow(c2, 1.5) : 0.0;
  m.excess_kurtosis = c2 > 0 ? c4 / (c2 * c2) : 0.0;
  return m;
}

LevyLaw rescale_tails(const LevyLaw& law, double tail_coefficient) {
  if (law.kind() != LevyLaw::Kind::Nig)
    throw ParameterError("rescale_tails is defined for NIG laws only");
  if (!(tail_coefficient > 0.0)) throw ParameterError("tail coefficient must be positive");

  const Moments m = moments(law);
  const double a = law.nig_params().alpha * tail_coefficient;
  const double v = m.variance;
  const double s = m.skewness;

  // With alpha' fixed and delta' eliminated through the variance
  // equation, skewness reduces to 3 b / ((a^2 - b^2) sqrt(v)).
  auto skew_of = [&](double b) { return 3.0 * b / ((a * a - b * b) * std::sqrt(v)); };

  double b_lo = -a * (1.0 - 1e-12), b_hi = a * (1.0 - 1e-12);
  if (skew_of(b_lo) > s || skew_of(b_hi) < s)
    throw ParameterError("target skewness unattainable after tail rescaling");
  // Bisection: skew_of is increasing on (-a, a).
  for (int it = 0; it < 200 && b_hi - b_lo > 1e-12 * a; ++it) {
    double mid = 0.5 * (b_lo + b_hi);
    (skew_of(mid) < s ? b_lo : b_hi) = mid;
  }
  double b = 0.5 * (b_lo + b_hi);
  double g = std::sqrt(a * a - b * b);
  double d = v * g * g * g / (a * a);
  double mu = m.mean - d * b / g;
  return LevyLaw::nig(a, b, d, mu);
}

namespace {

// Inverse-Gaussian draw with the given mean and shape via the
// Michael-Schucany-Haas transform; exact and rejection-free.
double sample_inverse_gaussian(double mean, double shape, RngEngine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double y = normal(rng);
  y *= y;
  double r = 0.5 * mean / shape;
  double x = mean + mean * y * r - r * std::sqrt(mean * y * (4.0 * shape + mean * y));
  if (unif(rng) > mean / (mean + x)) x = mean * mean / x;
  return x;
}

}  // namespace

double sample_increment(const LevyLaw& law, double dt, RngEngine& rng) {
  if (!(dt > 0.0)) throw ParameterError("sample_increment requires dt > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (law.kind()) {
    case LevyLaw::Kind::Nig: {
      const auto& p = law.nig_params();
      double gamma0 = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
      double dd = p.delta * dt;
      double subord = sample_inverse_gaussian(dd / gamma0, dd * dd, rng);
      return p.mu * dt + p.beta * subord + std::sqrt(subord) * normal(rng);
    }
    case LevyLaw::Kind::Vg: {
      const auto& p = law.vg_params();
      if (!(p.delta > 0.0))
        throw ParameterError("VG sampling requires delta > 0 (gamma subordination)");
      std::gamma_distribution<double> gamma_dist(p.delta * dt, 1.0 / p.alpha);
      double subord = gamma_dist(rng);
      return p.mu * dt + p.beta * subord + std::sqrt(subord) * normal(rng);
    }
    case LevyLaw::Kind::Poisson: {
      std::poisson_distribution<long> pois(law.poisson_params().intensity * dt);
      return static_cast<double>(pois(rng));
    }
    case LevyLaw::Kind::Brownian: {
      const auto& p = law.brownian_params();
      return p.drift * dt + p.sigma * std::sqrt(dt) * normal(rng);
    }
  }
  throw ParameterError("unreachable law kind");
}

}  // namespace qhedge
