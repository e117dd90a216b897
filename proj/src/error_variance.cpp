#include "qhedge/error_variance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <vector>

#include "qhedge/errors.hpp"

namespace qhedge {

namespace {

void check_pair_domain(const AdditiveModel& model, complexd y, complexd z) {
  const DomainStrip strip = domain(model.driver());
  double x = y.real() + z.real();
  for (double l : {model.loading().inf_on(model.horizon()), model.loading().sup_on(model.horizon())}) {
    if (!strip.contains(x * l)) {
      std::ostringstream os;
      os << "pairwise admissibility: Re(y+z) = " << x << " scaled by loading " << l
         << " leaves the strip " << strip.str();
      throw ModelError(os.str());
    }
  }
}

}  // namespace

complexd j0_kernel(const AdditiveModel& model, const FsTables& tables, complexd y, complexd z) {
  check_pair_domain(model, y, z);
  const TimeGrid& grid = tables.grid();
  const std::size_t nt = grid.size();
  const double sl2 = model.sigma_long() * model.sigma_long();
  const LevyLaw& law = model.driver();
  const double k_T = tables.mvt(nt - 1);

  // eta tails for y and z accumulated backward alongside the forward
  // cumulant of y+z.
  std::vector<complexd> eta_y(nt), eta_z(nt), kap_sum(nt);
  std::vector<complexd> ed_y(nt), ed_z(nt), kd_sum(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    double t = grid.knots[i];
    ed_y[i] = fs_eta_density(model, y, t);
    ed_z[i] = fs_eta_density(model, z, t);
    kd_sum[i] = kappa_density(model, y + z, t);
  }
  eta_y[nt - 1] = eta_z[nt - 1] = complexd(0.0);
  for (std::size_t i = nt - 1; i-- > 0;) {
    double dt = grid.knots[i + 1] - grid.knots[i];
    eta_y[i] = eta_y[i + 1] + 0.5 * (ed_y[i] + ed_y[i + 1]) * dt;
    eta_z[i] = eta_z[i + 1] + 0.5 * (ed_z[i] + ed_z[i + 1]) * dt;
  }
  kap_sum[0] = complexd(0.0);
  for (std::size_t i = 0; i + 1 < nt; ++i) {
    double dt = grid.knots[i + 1] - grid.knots[i];
    kap_sum[i + 1] = kap_sum[i] + 0.5 * (kd_sum[i] + kd_sum[i + 1]) * dt;
  }

  const complexd spot_power = std::exp((y + z) * std::log(model.s0()));
  complexd acc(0.0);
  complexd prev_f(0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    double t = grid.knots[i];
    double lt = model.loading()(t);
    double r = tables.rho_density_at(i);
    complexd beta = (sl2 * y * z + kappa(law, (y + z) * lt) - kappa(law, y * lt) -
                     kappa(law, z * lt)) /
                        r -
                    fs_gamma(model, y, t) * fs_gamma(model, z, t);
    complexd expo = kap_sum[i] + eta_y[i] + eta_z[i] - (k_T - tables.mvt(i));
    complexd f = beta * std::exp(expo);
    if (i > 0) acc += 0.5 * (prev_f + f) * tables.rho_increment(i - 1);
    prev_f = f;
  }
  return spot_power * acc;
}

namespace {

struct PairContext {
  const AdditiveModel* model;
  const FsTables* tables;
  // per half-node, per-time kappa(z l_t); mirrors are conjugates
  std::vector<complexd> kappa_node;
  std::size_t nt;
  std::size_t half;
  bool homogeneous;
  double log_s0;
  double sl2;
  double k_T;
};

// Kernel for one ordered pair (y, z) given by half indices and
// conjugation flags.  Trapezoid against the rho increments; the
// homogeneous case walks exp(A + B t_i) with one multiply per step.
complexd pair_kernel(const PairContext& ctx, std::size_t jy, bool conj_y, std::size_t jz,
                     bool conj_z) {
  const FsTables& tb = *ctx.tables;
  const AdditiveModel& model = *ctx.model;
  const std::size_t nt = ctx.nt;
  auto node = [&](std::size_t j, bool c) {
    complexd v = tb.node(j);
    return c ? std::conj(v) : v;
  };
  auto kap_n = [&](std::size_t j, bool c, std::size_t i) {
    complexd v = ctx.kappa_node[j * nt + i];
    return c ? std::conj(v) : v;
  };
  auto gam = [&](std::size_t j, bool c, std::size_t i) {
    complexd v = tb.gamma(j, i);
    return c ? std::conj(v) : v;
  };
  auto eta = [&](std::size_t j, bool c, std::size_t i) {
    complexd v = tb.eta_tail(j, i);
    return c ? std::conj(v) : v;
  };

  const complexd y = node(jy, conj_y);
  const complexd z = node(jz, conj_z);
  const complexd w = y + z;
  const complexd spot_power = std::exp(w * ctx.log_s0);
  const LevyLaw& law = model.driver();

  if (ctx.homogeneous) {
    double lt = model.loading()(0.0);
    double r = tb.rho_density_at(0);
    complexd kw = kappa(law, w * lt);
    complexd beta =
        (ctx.sl2 * y * z + kw - kap_n(jy, conj_y, 0) - kap_n(jz, conj_z, 0)) / r -
        gam(jy, conj_y, 0) * gam(jz, conj_z, 0);
    if (beta == complexd(0.0)) return complexd(0.0);
    // exponent = t kappa_dens(w) + (T - t)(eta_d(y) + eta_d(z) - lambda^2 r)
    complexd kdw = kappa_density(model, w, 0.0);
    double horizon = tb.grid().knots.back();
    double lam = tb.lambda(0);
    complexd eta_sum_dens =
        (eta(jy, conj_y, 0) + eta(jz, conj_z, 0)) / horizon;  // densities, tails are linear
    complexd a = horizon * (eta_sum_dens - lam * lam * r);
    complexd b = kdw - eta_sum_dens + lam * lam * r;
    double step = tb.grid().knots[1] - tb.grid().knots[0];
    complexd q = std::exp(b * step);
    complexd f = std::exp(a);  // value at t_0
    complexd acc(0.0);
    for (std::size_t i = 0; i + 1 < nt; ++i) {
      complexd next = f * q;
      acc += 0.5 * (f + next) * tb.rho_increment(i);
      f = next;
    }
    return spot_power * beta * acc;
  }

  complexd acc(0.0);
  complexd prev_f(0.0);
  complexd kap_cum(0.0);
  complexd prev_kd = kappa_density(model, w, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    double t = tb.grid().knots[i];
    double lt = model.loading()(t);
    double r = tb.rho_density_at(i);
    if (i > 0) {
      complexd kd = kappa_density(model, w, t);
      kap_cum += 0.5 * (prev_kd + kd) * (t - tb.grid().knots[i - 1]);
      prev_kd = kd;
    }
    complexd beta =
        (ctx.sl2 * y * z + kappa(law, w * lt) - kap_n(jy, conj_y, i) - kap_n(jz, conj_z, i)) / r -
        gam(jy, conj_y, i) * gam(jz, conj_z, i);
    complexd expo = kap_cum + eta(jy, conj_y, i) + eta(jz, conj_z, i) - (ctx.k_T - tb.mvt(i));
    complexd f = beta * std::exp(expo);
    if (i > 0) acc += 0.5 * (prev_f + f) * tb.rho_increment(i - 1);
    prev_f = f;
  }
  return spot_power * acc;
}

}  // namespace

QuadratureOptions error_quadrature_options_for(const AdditiveModel& model,
                                               const ContourMeasure& measure, double rel_tol) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.paired_tail = true;
  double theta = 0.5 + std::abs(std::log(model.s0() / std::max(1e-12, measure.lines().empty()
                                                                           ? model.s0()
                                                                           : measure.lines()
                                                                                 .front()
                                                                                 .strike)));
  opts.osc_theta_max = theta;
  double abscissa = measure.lines().empty() ? 0.5 : measure.lines().front().abscissa;
  const double probe_u = 200.0;
  complexd z(abscissa, probe_u);
  complexd half = kappa_t(model, z, model.horizon()) -
                  kappa_t(model, z, 0.5 * model.horizon());
  opts.decay_rate = std::max(0.0, 0.8 * (-half.real() / probe_u));
  return opts;
}

double hedging_error_variance(const AdditiveModel& model, const ContourMeasure& measure,
                              const FsTables& tables, int threads) {
  const std::size_t half = tables.half_nodes();
  const std::size_t nt = tables.times();

  for (const auto& line : measure.lines()) check_pair_domain(model, complexd(line.abscissa),
                                                             complexd(line.abscissa));
  for (const auto& atom : measure.atoms()) check_pair_domain(model, atom.z, atom.z);

  PairContext ctx;
  ctx.model = &model;
  ctx.tables = &tables;
  ctx.nt = nt;
  ctx.half = half;
  ctx.homogeneous = model.is_time_homogeneous();
  ctx.log_s0 = std::log(model.s0());
  ctx.sl2 = model.sigma_long() * model.sigma_long();
  ctx.k_T = tables.mvt(nt - 1);
  ctx.kappa_node.resize(half * nt);
  for (std::size_t j = 0; j < half; ++j) {
    complexd z = tables.node(j);
    if (ctx.homogeneous) {
      complexd v = kappa(model.driver(), z * model.loading()(0.0));
      for (std::size_t i = 0; i < nt; ++i) ctx.kappa_node[j * nt + i] = v;
    } else {
      for (std::size_t i = 0; i < nt; ++i)
        ctx.kappa_node[j * nt + i] =
            kappa(model.driver(), z * model.loading()(tables.grid().knots[i]));
    }
  }

  auto weight = [&](std::size_t j) {
    return tables.amplified_weight(j, nt - 1);  // eta tail is zero at T: base weight
  };

  // Line-line block: sum over half x half with the two conjugation
  // patterns; the other two patterns are complex conjugates, so the
  // total is twice the real part.  Accumulate per outer index so the
  // reduction order is independent of the thread count.
  std::vector<double> partial(half, 0.0);
  auto work = [&](std::size_t j_begin, std::size_t j_end) {
    for (std::size_t j = j_begin; j < j_end; ++j) {
      complexd wy = weight(j);
      double local = 0.0;
      for (std::size_t k = 0; k < half; ++k) {
        complexd wz = weight(k);
        complexd plus = pair_kernel(ctx, j, false, k, false);
        complexd minus = pair_kernel(ctx, j, false, k, true);
        local += 2.0 * (wy * wz * plus).real();
        local += 2.0 * (wy * std::conj(wz) * minus).real();
      }
      partial[j] = local;
    }
  };
  int n_threads = std::max(1, threads);
  if (n_threads == 1 || half < 16) {
    work(0, half);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (half + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      std::size_t b = std::min(half, static_cast<std::size_t>(t) * chunk);
      std::size_t e = std::min(half, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  double total = 0.0;
  for (std::size_t j = 0; j < half; ++j) total += partial[j];

  // Atom-line and atom-atom blocks.
  const std::size_t na = tables.atom_count();
  for (std::size_t a = 0; a < na; ++a) {
    complexd za(0.0), wa(0.0);
    {
      // atoms are stored in measure order in the tables
      za = measure.atoms()[a].z;
      wa = measure.atoms()[a].weight;
    }
    // atom-atom
    for (std::size_t b = 0; b < na; ++b) {
      complexd zb = measure.atoms()[b].z;
      complexd wb = measure.atoms()[b].weight;
      total += (wa * wb * j0_kernel(model, tables, za, zb)).real();
    }
    // atom-line (both orders, hence the factor 2)
    for (std::size_t j = 0; j < half; ++j) {
      complexd wz = weight(j);
      complexd k_plus = j0_kernel(model, tables, za, tables.node(j));
      complexd k_minus = j0_kernel(model, tables, za, std::conj(tables.node(j)));
      total += 2.0 * (wa * wz * k_plus).real();
      total += 2.0 * (wa * std::conj(wz) * k_minus).real();
    }
  }

  double scale = tables.strike_scale();
  if (total < -1e-8 * scale * scale) {
    std::ostringstream os;
    os << "hedging error variance came out negative: " << total;
    throw NumericalError(os.str());
  }
  return std::max(total, 0.0);
}

}  // namespace qhedge
