#include "qhedge/fs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qhedge/errors.hpp"

namespace qhedge {

complexd fs_gamma(const AdditiveModel& model, complexd z, double t) {
  double lt = model.loading()(t);
  double sl2 = model.sigma_long() * model.sigma_long();
  const LevyLaw& law = model.driver();
  complexd num = z * sl2 + kappa(law, (z + 1.0) * lt) - kappa(law, z * lt) -
                 kappa(law, complexd(lt));
  return num / rho_density(model, t);
}

complexd fs_eta_density(const AdditiveModel& model, complexd z, double t) {
  return kappa_density(model, z, t) -
         fs_gamma(model, z, t) * kappa_density(model, complexd(1.0), t).real();
}

double fs_lambda(const AdditiveModel& model, double t) {
  return kappa_density(model, complexd(1.0), t).real() / rho_density(model, t);
}

namespace {

void check_quadrature_admissible(const AdditiveModel& model, const ContourQuadrature& quadrature) {
  ContourMeasure probe = ContourMeasure::single_power(complexd(1.0));
  // Rebuild the admissibility point set from the quadrature's lines and
  // atoms and reuse the measure-level check.
  const DomainStrip strip = domain(model.driver());
  const double l_inf = model.loading().inf_on(model.horizon());
  const double l_sup = model.loading().sup_on(model.horizon());
  std::vector<double> support_re = {1.0, 2.0};
  for (const auto& atom : quadrature.atoms()) {
    support_re.push_back(2.0 * atom.z.real());
    support_re.push_back(atom.z.real() + 1.0);
  }
  for (const auto& line : quadrature.lines()) {
    support_re.push_back(2.0 * line.abscissa);
    support_re.push_back(line.abscissa + 1.0);
  }
  for (double x : support_re)
    for (double l : {l_inf, l_sup})
      if (!strip.contains(x * l)) {
        std::ostringstream os;
        os << "inadmissible contour: point " << x << " scaled by loading " << l
           << " leaves the strip " << strip.str();
        throw ModelError(os.str());
      }
}

}  // namespace

FsTables::FsTables(const AdditiveModel& model, const ContourQuadrature& quadrature, TimeGrid grid)
    : grid_(std::move(grid)),
      homogeneous_(model.is_time_homogeneous()),
      rel_tol_(quadrature.rel_tol()),
      strike_scale_(quadrature.strike_scale()) {
  check_quadrature_admissible(model, quadrature);

  const std::size_t nt = grid_.size();
  for (const auto& line : quadrature.lines()) {
    LineMeta meta;
    meta.abscissa = line.abscissa;
    meta.strike = line.strike;
    meta.truncation = line.truncation;
    meta.offset = node_z_.size();
    meta.count = line.u.size();
    lines_.push_back(meta);
    for (std::size_t j = 0; j < line.u.size(); ++j) {
      node_z_.emplace_back(line.abscissa, line.u[j]);
      base_weight_.push_back(line.weight[j]);
    }
  }
  for (const auto& atom : quadrature.atoms()) {
    atom_z_.push_back(atom.z);
    atom_weight_.push_back(atom.weight);
  }

  // Time-local scalars.
  lambda_.resize(nt);
  rho_dens_.resize(nt);
  mvt_.assign(nt, 0.0);
  rho_inc_.assign(nt > 0 ? nt - 1 : 0, 0.0);
  std::vector<double> k1_dens(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    double t = grid_.knots[i];
    rho_dens_[i] = rho_density(model, t);
    k1_dens[i] = kappa_density(model, complexd(1.0), t).real();
    lambda_[i] = k1_dens[i] / rho_dens_[i];
  }
  for (std::size_t i = 0; i + 1 < nt; ++i) {
    double dt = grid_.knots[i + 1] - grid_.knots[i];
    rho_inc_[i] = 0.5 * (rho_dens_[i] + rho_dens_[i + 1]) * dt;
    double a = lambda_[i] * lambda_[i] * rho_dens_[i];
    double b = lambda_[i + 1] * lambda_[i + 1] * rho_dens_[i + 1];
    mvt_[i + 1] = mvt_[i] + 0.5 * (a + b) * dt;
  }

  const std::size_t nn = node_z_.size();
  gamma_.resize(nn * nt);
  eta_tail_.resize(nn * nt);
  amp_weight_.resize(nn * nt);
  std::vector<complexd> eta_dens(nt);
  for (std::size_t j = 0; j < nn; ++j) {
    complexd z = node_z_[j];
    if (homogeneous_) {
      complexd g = fs_gamma(model, z, 0.0);
      complexd ed = fs_eta_density(model, z, 0.0);
      for (std::size_t i = 0; i < nt; ++i) {
        gamma_[j * nt + i] = g;
        eta_dens[i] = ed;
      }
    } else {
      for (std::size_t i = 0; i < nt; ++i) {
        double t = grid_.knots[i];
        complexd g = fs_gamma(model, z, t);
        gamma_[j * nt + i] = g;
        eta_dens[i] = kappa_density(model, z, t) - g * k1_dens[i];
      }
    }
    eta_tail_[j * nt + nt - 1] = complexd(0.0);
    for (std::size_t i = nt - 1; i-- > 0;) {
      double dt = grid_.knots[i + 1] - grid_.knots[i];
      eta_tail_[j * nt + i] =
          eta_tail_[j * nt + i + 1] + 0.5 * (eta_dens[i] + eta_dens[i + 1]) * dt;
    }
    for (std::size_t i = 0; i < nt; ++i)
      amp_weight_[j * nt + i] = base_weight_[j] * std::exp(eta_tail_[j * nt + i]);
  }

  const std::size_t na = atom_z_.size();
  atom_gamma_.resize(na * nt);
  atom_eta_tail_.resize(na * nt);
  for (std::size_t a = 0; a < na; ++a) {
    complexd z = atom_z_[a];
    for (std::size_t i = 0; i < nt; ++i) {
      double t = grid_.knots[i];
      atom_gamma_[a * nt + i] = fs_gamma(model, z, homogeneous_ ? 0.0 : t);
      eta_dens[i] = fs_eta_density(model, z, homogeneous_ ? 0.0 : t);
    }
    atom_eta_tail_[a * nt + nt - 1] = complexd(0.0);
    for (std::size_t i = nt - 1; i-- > 0;) {
      double dt = grid_.knots[i + 1] - grid_.knots[i];
      atom_eta_tail_[a * nt + i] =
          atom_eta_tail_[a * nt + i + 1] + 0.5 * (eta_dens[i] + eta_dens[i + 1]) * dt;
    }
  }
}

complexd FsTables::node(std::size_t j) const {
  std::size_t h = half_nodes();
  return j < h ? node_z_[j] : std::conj(node_z_[j - h]);
}

complexd FsTables::gamma(std::size_t j, std::size_t i) const {
  std::size_t h = half_nodes();
  return j < h ? gamma_[j * times() + i] : std::conj(gamma_[(j - h) * times() + i]);
}

complexd FsTables::eta_tail(std::size_t j, std::size_t i) const {
  std::size_t h = half_nodes();
  return j < h ? eta_tail_[j * times() + i] : std::conj(eta_tail_[(j - h) * times() + i]);
}

complexd FsTables::amplified_weight(std::size_t j, std::size_t i) const {
  std::size_t h = half_nodes();
  return j < h ? amp_weight_[j * times() + i] : std::conj(amp_weight_[(j - h) * times() + i]);
}

double FsTables::claim_value(double s, std::size_t i) const {
  const std::size_t nt = times();
  double acc = 0.0;
  for (std::size_t a = 0; a < atom_z_.size(); ++a) {
    complexd amp = atom_weight_[a] * std::exp(atom_eta_tail_[a * nt + i]);
    acc += (amp * std::pow(complexd(s), atom_z_[a])).real();
  }
  const double ls = std::log(s);
  for (const auto& line : lines_) {
    double sr = std::pow(s, line.abscissa);
    double sum = 0.0;
    for (std::size_t j = line.offset; j < line.offset + line.count; ++j) {
      const complexd& w = amp_weight_[j * nt + i];
      double phase = node_z_[j].imag() * ls;
      sum += w.real() * std::cos(phase) - w.imag() * std::sin(phase);
    }
    acc += 2.0 * sr * sum;
  }
  return acc;
}

double FsTables::hedge_integrand(double s, std::size_t i) const {
  const std::size_t nt = times();
  double acc = 0.0;
  for (std::size_t a = 0; a < atom_z_.size(); ++a) {
    complexd amp =
        atom_weight_[a] * std::exp(atom_eta_tail_[a * nt + i]) * atom_gamma_[a * nt + i];
    acc += (amp * std::pow(complexd(s), atom_z_[a] - 1.0)).real();
  }
  const double ls = std::log(s);
  for (const auto& line : lines_) {
    double sr = std::pow(s, line.abscissa - 1.0);
    double sum = 0.0;
    for (std::size_t j = line.offset; j < line.offset + line.count; ++j) {
      complexd w = amp_weight_[j * nt + i] * gamma_[j * nt + i];
      double phase = node_z_[j].imag() * ls;
      sum += w.real() * std::cos(phase) - w.imag() * std::sin(phase);
    }
    acc += 2.0 * sr * sum;
  }
  return acc;
}

complexd FsTables::claim_value_complex(double s, std::size_t i) const {
  complexd acc(0.0);
  const std::size_t nt = times();
  for (std::size_t a = 0; a < atom_z_.size(); ++a)
    acc += atom_weight_[a] * std::exp(atom_eta_tail_[a * nt + i]) *
           std::pow(complexd(s), atom_z_[a]);
  for (std::size_t j = 0; j < 2 * half_nodes(); ++j)
    acc += amplified_weight(j, i) * std::pow(complexd(s), node(j));
  return acc;
}

double FsTables::terminal_tolerance(double s) const {
  double bound = 3.0 * rel_tol_ * strike_scale_;
  for (const auto& line : lines_) {
    double theta = std::log(s / line.strike);
    double u = line.truncation;
    double pref = line.strike * std::exp(line.abscissa * theta) / 3.141592653589793;
    bound += pref * (std::abs(theta) * u > 2.0 ? 2.0 / (std::abs(theta) * u * u) : 1.0 / u);
  }
  return bound;
}

void FsTables::write_csv(std::ostream& os) const {
  os << "# qhedge fs-tables csv v1\n";
  os << "line,abscissa,u,t,gamma_re,gamma_im,eta_tail_re,eta_tail_im\n";
  const std::size_t nt = times();
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const auto& line = lines_[l];
    for (std::size_t j = line.offset; j < line.offset + line.count; ++j) {
      for (std::size_t i = 0; i < nt; ++i) {
        const complexd& g = gamma_[j * nt + i];
        const complexd& e = eta_tail_[j * nt + i];
        os << l << ',' << line.abscissa << ',' << node_z_[j].imag() << ',' << grid_.knots[i]
           << ',' << g.real() << ',' << g.imag() << ',' << e.real() << ',' << e.imag() << '\n';
      }
    }
  }
}

FsTables build_tables(const AdditiveModel& model, const ContourQuadrature& quadrature,
                      const TimeGrid& grid) {
  return FsTables(model, quadrature, grid);
}

double initial_capital(const FsTables& tables, double s0) {
  return tables.claim_value(s0, 0);
}

QuadratureOptions quadrature_options_for(const AdditiveModel& model,
                                         const ContourMeasure& measure, const TimeGrid& grid,
                                         double rel_tol) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;

  // Oscillation range: strikes against the spot plus a diffusion
  // allowance of four standard deviations of log S_T.
  double theta = 0.5;
  double s0 = model.s0();
  for (const auto& line : measure.lines())
    theta = std::max(theta, std::abs(std::log(s0 / line.strike)));
  double var_T = moments(model.driver()).variance * model.loading().squared_integral(
                                                        model.horizon()) +
                 model.sigma_long() * model.sigma_long() * model.horizon();
  theta += 4.0 * std::sqrt(var_T) + 0.5;
  opts.osc_theta_max = theta;

  // Damping rate: modulus decay of exp(kappa over the last rebalance
  // step) probed at a large imaginary argument.
  double abscissa = 0.5;
  if (!measure.lines().empty()) abscissa = measure.lines().front().abscissa;
  double dt_min = model.horizon() / grid.rebalances;
  double t_last = model.horizon() - dt_min;
  const double probe_u = 500.0;
  complexd z(abscissa, probe_u);
  complexd tail = kappa_t(model, z, model.horizon()) - kappa_t(model, z, t_last);
  double rate = -tail.real() / probe_u;
  opts.decay_rate = std::max(0.0, 0.8 * rate);
  return opts;
}

}  // namespace qhedge
