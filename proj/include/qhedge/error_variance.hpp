#ifndef QHEDGE_ERROR_VARIANCE_HPP_
#define QHEDGE_ERROR_VARIANCE_HPP_

#include "qhedge/fs.hpp"

namespace qhedge {

// Pair kernel of the residual-risk formula:
//   J0(y, z) = s0^{y+z} \int_0^T beta(y,z,t)
//              exp(kappa_t(y+z) + alpha(y,z,t)) d rho_t
// with
//   alpha(y,z,t) = [eta(z,T)-eta(z,t)] + [eta(y,T)-eta(y,t)] - (K_T - K_t),
//   beta(y,z,t)  = d rho_t(y,z)/d rho_t - gamma(y,t) gamma(z,t).
// Trapezoidal time integration on the tables' grid.  Throws ModelError
// if y + z leaves the model's effective domain.
complexd j0_kernel(const AdditiveModel& model, const FsTables& tables, complexd y, complexd z);

// Variance of the terminal hedging error of the variance-optimal
// strategy: the double contour sum of w_y w_z J0(y, z) over the tables'
// nodes and atoms.  Real by conjugate pairing; throws NumericalError if
// the result is negative beyond -1e-8 * strike^2.
double hedging_error_variance(const AdditiveModel& model, const ContourMeasure& measure,
                              const FsTables& tables, int threads = 1);

// Contour options tuned for the J0 pair sum: the truncated mass decays
// like the cube of the cutoff (paired weights) on top of the damping
// the time integral provides over half the horizon.
QuadratureOptions error_quadrature_options_for(const AdditiveModel& model,
                                               const ContourMeasure& measure, double rel_tol);

}  // namespace qhedge

#endif  // QHEDGE_ERROR_VARIANCE_HPP_
