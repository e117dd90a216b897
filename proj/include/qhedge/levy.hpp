#ifndef QHEDGE_LEVY_HPP_
#define QHEDGE_LEVY_HPP_

#include <complex>
#include <random>
#include <string>
#include <variant>

#include "qhedge/rng.hpp"

namespace qhedge {

using complexd = std::complex<double>;

// Vertical strip {z : lower <= Re z <= upper} on which a cumulant
// function is finite.  Ends may be infinite and open or closed.
struct DomainStrip {
  double lower;
  double upper;
  bool lower_closed = true;
  bool upper_closed = true;

  // margin shrinks the strip by the given fraction of the distance from
  // each finite end to the origin.
  bool contains(double x, double margin = 0.0) const;
  std::string str() const;
};

struct NigParams {
  double alpha, beta, delta, mu;
};
struct VgParams {
  double alpha, beta, delta, mu;
};
struct PoissonParams {
  double intensity;
};
struct BrownianParams {
  double drift, sigma;
};

// One of the supported base Levy marginals.  Parameters are per-year.
class LevyLaw {
 public:
  enum class Kind { Nig, Vg, Poisson, Brownian };

  static LevyLaw nig(double alpha, double beta, double delta, double mu);
  static LevyLaw vg(double alpha, double beta, double delta, double mu);
  static LevyLaw poisson(double intensity);
  static LevyLaw brownian(double drift, double sigma);

  Kind kind() const { return kind_; }
  const NigParams& nig_params() const { return std::get<NigParams>(params_); }
  const VgParams& vg_params() const { return std::get<VgParams>(params_); }
  const PoissonParams& poisson_params() const { return std::get<PoissonParams>(params_); }
  const BrownianParams& brownian_params() const { return std::get<BrownianParams>(params_); }

  std::string describe() const;

 private:
  LevyLaw(Kind k, std::variant<NigParams, VgParams, PoissonParams, BrownianParams> p)
      : kind_(k), params_(std::move(p)) {}
  Kind kind_;
  std::variant<NigParams, VgParams, PoissonParams, BrownianParams> params_;
};

// Cumulant generating function of the time-1 marginal, kappa(z) with
// exp(t*kappa(z)) = E[exp(z X_t)].  Principal-branch log and sqrt
// throughout, so kappa(conj z) == conj(kappa(z)) on the strip.
// Throws DomainError when Re z leaves domain(law).
complexd kappa(const LevyLaw& law, complexd z);

// Strip of admissible Re z for kappa.
DomainStrip domain(const LevyLaw& law);

struct Moments {
  double mean;
  double variance;
  double skewness;
  double excess_kurtosis;
};

// First four standardized moments of the time-1 marginal (closed forms).
Moments moments(const LevyLaw& law);

// NIG tail rescaling: alpha' = C*alpha with (beta', delta', mu') chosen
// so the first three moments are unchanged.  delta' and mu' are
// eliminated in closed form; beta' comes from a bracketed root solve on
// the skewness equation (tolerance 1e-12).
LevyLaw rescale_tails(const LevyLaw& law, double tail_coefficient);

// One exact draw of the increment over dt: NIG via inverse-Gaussian
// subordination (Michael-Schucany-Haas transform), VG via gamma
// subordination, Poisson via counting, Brownian via a Gaussian draw.
double sample_increment(const LevyLaw& law, double dt, RngEngine& rng);

}  // namespace qhedge

#endif  // QHEDGE_LEVY_HPP_
