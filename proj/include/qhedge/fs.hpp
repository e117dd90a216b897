#ifndef QHEDGE_FS_HPP_
#define QHEDGE_FS_HPP_

#include <iosfwd>
#include <vector>

#include "qhedge/additive.hpp"
#include "qhedge/contour.hpp"

namespace qhedge {

// Pure-hedge loading gamma(z, t) = d rho_t(z, 1) / d rho_t, evaluated
// as a ratio of dt-densities:
//   [z sigma_l^2 + kappa((z+1) l_t) - kappa(z l_t) - kappa(l_t)] / (d rho/dt).
complexd fs_gamma(const AdditiveModel& model, complexd z, double t);

// d eta(z, t)/dt = d kappa_t(z)/dt - gamma(z, t) d kappa_t(1)/dt.
complexd fs_eta_density(const AdditiveModel& model, complexd z, double t);

// lambda_t = d kappa_t(1) / d rho_t.
double fs_lambda(const AdditiveModel& model, double t);

// Per-node, per-time tables of everything the hedger needs.  Nodes are
// the upper-half contour nodes; the mirrored conjugate nodes are
// implied (tables at conj(z) are the conjugated tables at z).
class FsTables {
 public:
  FsTables(const AdditiveModel& model, const ContourQuadrature& quadrature, TimeGrid grid);

  const TimeGrid& grid() const { return grid_; }
  std::size_t times() const { return grid_.size(); }
  std::size_t half_nodes() const { return node_z_.size(); }
  std::size_t atom_count() const { return atom_z_.size(); }

  // Full-index accessors, j in [0, 2*half_nodes): indices >= half_nodes
  // address the mirrored conjugate nodes.
  complexd node(std::size_t j) const;
  complexd gamma(std::size_t j, std::size_t i) const;
  complexd eta_tail(std::size_t j, std::size_t i) const;
  complexd amplified_weight(std::size_t j, std::size_t i) const;

  double lambda(std::size_t i) const { return lambda_[i]; }
  double mvt(std::size_t i) const { return mvt_[i]; }
  double rho_increment(std::size_t i) const { return rho_inc_[i]; }
  double rho_density_at(std::size_t i) const { return rho_dens_[i]; }

  // H_{t_i}(s) and xi_{t_i}(s); conjugate summation, real by
  // construction.
  double claim_value(double s, std::size_t i) const;
  double hedge_integrand(double s, std::size_t i) const;
  // Full complex sum (diagnostic; the imaginary part is a roundoff
  // residual).
  complexd claim_value_complex(double s, std::size_t i) const;

  // Bound on |H_T(s) - payoff(s)| from truncation and panel tolerance.
  double terminal_tolerance(double s) const;

  double strike_scale() const { return strike_scale_; }
  double rel_tol() const { return rel_tol_; }

  void write_csv(std::ostream& os) const;

 private:
  friend double hedging_error_variance(const AdditiveModel&, const ContourMeasure&,
                                       const FsTables&, int);
  TimeGrid grid_;
  bool homogeneous_;
  double rel_tol_;
  double strike_scale_;

  struct LineMeta {
    double abscissa, strike, truncation;
    std::size_t offset, count;  // into the node arrays
  };
  std::vector<LineMeta> lines_;
  std::vector<complexd> node_z_;       // half nodes, all lines
  std::vector<complexd> base_weight_;  // quadrature weights for the half nodes

  // [node][time] flattened as j * times + i
  std::vector<complexd> gamma_;
  std::vector<complexd> eta_tail_;
  std::vector<complexd> amp_weight_;

  std::vector<complexd> atom_z_;
  std::vector<complexd> atom_weight_;
  std::vector<complexd> atom_gamma_;     // [atom][time]
  std::vector<complexd> atom_eta_tail_;  // [atom][time]

  std::vector<double> lambda_, mvt_, rho_dens_, rho_inc_;
};

FsTables build_tables(const AdditiveModel& model, const ContourQuadrature& quadrature,
                      const TimeGrid& grid);

// V_0 = H_0(s0).
double initial_capital(const FsTables& tables, double s0);

// Quadrature options tuned to the model: the decay rate is measured
// from the cumulant damping available one rebalance step before expiry,
// and the oscillation range covers the strikes and the spot diffusion.
QuadratureOptions quadrature_options_for(const AdditiveModel& model,
                                         const ContourMeasure& measure, const TimeGrid& grid,
                                         double rel_tol = 1e-8);

}  // namespace qhedge

#endif  // QHEDGE_FS_HPP_
