#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qhedge/errors.hpp"
#include "qhedge/fs.hpp"

using namespace qhedge;

namespace {

AdditiveModel poisson_model(double intensity = 1.0) {
  return AdditiveModel(LevyLaw::poisson(intensity), LoadingFunction::constant(1.0), 0.0,
                       TrendFunction(), 0.25, 100.0);
}

AdditiveModel nig_levy_model(double tail_scale, double horizon = 0.25) {
  LevyLaw law = rescale_tails(LevyLaw::nig(38.46, -3.85, 6.40, 0.64), tail_scale);
  return AdditiveModel(law, LoadingFunction::constant(1.0), 0.0, TrendFunction(), horizon, 100.0);
}

AdditiveModel electricity_model(double sigma_long = 0.0) {
  return AdditiveModel(LevyLaw::nig(15.81, -1.581, 15.57, 1.56),
                       LoadingFunction::exp_decay(0.5747, 3.0, 0.25), sigma_long, TrendFunction(),
                       0.25, 100.0);
}

// X_t = W_psi(t) through the loading sqrt(psi').
AdditiveModel time_change_model() {
  std::vector<std::pair<double, double>> steps = {
      {0.0, std::sqrt(0.5)}, {0.08, std::sqrt(1.6)}, {0.18, std::sqrt(0.9)}};
  return AdditiveModel(LevyLaw::brownian(0.0, 1.0), LoadingFunction::piecewise_constant(steps),
                       0.0, TrendFunction(), 0.25, 100.0);
}

FsTables make_tables(const AdditiveModel& model, const ContourMeasure& measure, int rebalances,
                     int refine, QuadratureOptions opts) {
  TimeGrid grid(model.horizon(), rebalances, refine);
  return build_tables(model, discretize(measure, opts), grid);
}

}  // namespace

TEST_CASE("pure-hedge loading closed forms") {
  SUBCASE("Poisson") {
    AdditiveModel m = poisson_model();
    const double em1 = std::exp(1.0) - 1.0;
    for (complexd z : {complexd(0.5, 3.0), complexd(-1.0, 10.0), complexd(2.0)}) {
      complexd expected = (std::exp(z) - 1.0) / em1;
      for (double t : {0.0, 0.1, 0.2}) {
        CHECK(std::abs(fs_gamma(m, z, t) - expected) <= 1e-13 * (1.0 + std::abs(expected)));
        CHECK(std::abs(fs_eta_density(m, z, t)) <= 1e-13);
      }
    }
    CHECK(fs_lambda(m, 0.1) == doctest::Approx(0.5819767068693265).epsilon(1e-13));
  }
  SUBCASE("time-changed Gaussian") {
    AdditiveModel m = time_change_model();
    for (complexd z : {complexd(0.5, 3.0), complexd(-1.0, 1.0)}) {
      for (double t : {0.05, 0.12, 0.22}) {
        CHECK(std::abs(fs_gamma(m, z, t) - z) <= 1e-12 * (1.0 + std::abs(z)));
        double psi_slope = std::pow(m.loading()(t), 2);
        complexd expected_eta = 0.5 * psi_slope * (z * z - z);
        CHECK(std::abs(fs_eta_density(m, z, t) - expected_eta) <=
              1e-12 * (1.0 + std::abs(expected_eta)));
        CHECK(fs_lambda(m, t) == doctest::Approx(0.5).epsilon(1e-13));
      }
    }
  }
  SUBCASE("identities at z = 1 and z = 0") {
    for (const AdditiveModel& m :
         {poisson_model(), nig_levy_model(0.08), electricity_model(0.12), time_change_model()}) {
      for (double t : {0.0, 0.1, 0.24}) {
        CHECK(std::abs(fs_gamma(m, complexd(1.0), t) - 1.0) <= 1e-14);
        CHECK(std::abs(fs_eta_density(m, complexd(1.0), t)) <= 1e-14);
        CHECK(std::abs(fs_gamma(m, complexd(0.0), t)) <= 1e-14);
      }
    }
  }
  SUBCASE("stationary formulas match the density-ratio path") {
    // direct transcription of the constant-loading ratios
    AdditiveModel m = nig_levy_model(0.08);
    const LevyLaw& law = m.driver();
    double k1 = kappa(law, complexd(1.0)).real();
    double k2 = kappa(law, complexd(2.0)).real();
    double rho = k2 - 2.0 * k1;
    for (complexd z : {complexd(0.5, 7.0), complexd(-1.0, 2.5)}) {
      complexd g = (kappa(law, z + 1.0) - kappa(law, z) - k1) / rho;
      complexd eta = kappa(law, z) - g * k1;
      CHECK(std::abs(fs_gamma(m, z, 0.17) - g) <= 1e-12 * (1.0 + std::abs(g)));
      CHECK(std::abs(fs_eta_density(m, z, 0.17) - eta) <= 1e-12 * (1.0 + std::abs(eta)));
      CHECK(fs_lambda(m, 0.17) == doctest::Approx(k1 / rho).epsilon(1e-12));
    }
  }
}

TEST_CASE("table construction") {
  AdditiveModel m = nig_levy_model(0.08);
  ContourMeasure call = ContourMeasure::call(99.0);
  TimeGrid grid(m.horizon(), 12, 8);
  QuadratureOptions opts = quadrature_options_for(m, call, grid, 1e-8);
  FsTables tables = build_tables(m, discretize(call, opts), grid);
  const std::size_t h = tables.half_nodes();
  const std::size_t nt = tables.times();
  REQUIRE(h > 0);

  SUBCASE("conjugate pairing is exact") {
    for (std::size_t j : {std::size_t(0), h / 2, h - 1}) {
      for (std::size_t i : {std::size_t(0), nt / 2, nt - 1}) {
        CHECK(tables.gamma(j + h, i) == std::conj(tables.gamma(j, i)));
        CHECK(tables.eta_tail(j + h, i) == std::conj(tables.eta_tail(j, i)));
        CHECK(tables.amplified_weight(j + h, i) == std::conj(tables.amplified_weight(j, i)));
        CHECK(tables.node(j + h) == std::conj(tables.node(j)));
      }
    }
  }
  SUBCASE("eta tail vanishes at expiry and is linear for a Levy model") {
    for (std::size_t j = 0; j < h; j += 7) {
      CHECK(tables.eta_tail(j, nt - 1) == complexd(0.0));
      complexd dens = fs_eta_density(m, tables.node(j), 0.0);
      for (std::size_t i = 0; i < nt; i += 11) {
        double tau = m.horizon() - tables.grid().knots[i];
        CHECK(std::abs(tables.eta_tail(j, i) - dens * tau) <=
              1e-12 * (1.0 + std::abs(dens) * tau));
      }
    }
  }
  SUBCASE("gamma columns are time-constant for a Levy model") {
    for (std::size_t j = 0; j < h; j += 5)
      for (std::size_t i = 1; i < nt; i += 13)
        CHECK(tables.gamma(j, i) == tables.gamma(j, 0));
  }
  SUBCASE("lambda and the trade-off process") {
    double k1 = kappa(m.driver(), complexd(1.0)).real();
    double rho = kappa(m.driver(), complexd(2.0)).real() - 2.0 * k1;
    CHECK(tables.lambda(0) == doctest::Approx(k1 / rho).epsilon(1e-12));
    CHECK(tables.mvt(0) == 0.0);
    CHECK(tables.mvt(nt - 1) ==
          doctest::Approx(k1 * k1 / rho * m.horizon()).epsilon(1e-12));
    for (std::size_t i = 1; i < nt; ++i) CHECK(tables.mvt(i) >= tables.mvt(i - 1));
  }
  SUBCASE("contour realness of the complex sum") {
    for (double s : {60.0, 99.0, 140.0}) {
      for (std::size_t i : {std::size_t(0), nt / 2, nt - 1}) {
        complexd v = tables.claim_value_complex(s, i);
        CHECK(std::abs(v.imag()) <= 1e-10 * (1.0 + std::abs(v.real())));
        CHECK(tables.claim_value(s, i) == doctest::Approx(v.real()).epsilon(1e-11));
      }
    }
  }
  SUBCASE("csv dump is flag-shaped") {
    std::ostringstream os;
    tables.write_csv(os);
    CHECK(os.str().rfind("# qhedge fs-tables csv v1", 0) == 0);
    CHECK(os.str().find("gamma_re") != std::string::npos);
  }
}

TEST_CASE("Poisson tables have no amplification") {
  AdditiveModel m = poisson_model();
  ContourMeasure call = ContourMeasure::call(99.0);
  FsTables tables = make_tables(m, call, 6, 4, quadrature_options_for(m, call, TimeGrid(0.25, 6, 4), 1e-7));
  for (std::size_t j = 0; j < tables.half_nodes(); j += 3)
    for (std::size_t i = 0; i < tables.times(); i += 5)
      CHECK(std::abs(tables.eta_tail(j, i)) <= 1e-12);
}

TEST_CASE("single-atom claim") {
  AdditiveModel m = nig_levy_model(0.08);
  ContourMeasure atom = ContourMeasure::single_power(complexd(1.0));
  FsTables tables = make_tables(m, atom, 4, 4, QuadratureOptions{});
  CHECK(initial_capital(tables, 100.0) == doctest::Approx(100.0).epsilon(1e-12));
  for (double s : {55.0, 100.0, 180.0}) {
    for (std::size_t i : {std::size_t(0), tables.times() - 1}) {
      CHECK(tables.claim_value(s, i) == doctest::Approx(s).epsilon(1e-12));
      CHECK(tables.hedge_integrand(s, i) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("initial capital") {
  SUBCASE("heavy-tail NIG call against an independent quadrature") {
    // 7.121677 comes from an adaptive-quadrature evaluation of the same
    // contour integral in an independent implementation.
    AdditiveModel m = nig_levy_model(0.08);
    ContourMeasure call = ContourMeasure::call(99.0);
    TimeGrid grid(m.horizon(), 12, 8);
    FsTables tables =
        build_tables(m, discretize(call, quadrature_options_for(m, call, grid, 1e-8)), grid);
    CHECK(initial_capital(tables, 100.0) == doctest::Approx(7.121677).epsilon(2e-5));
  }
  SUBCASE("far strike") {
    AdditiveModel m = nig_levy_model(0.08);
    ContourMeasure call = ContourMeasure::call(150.0);
    TimeGrid grid(m.horizon(), 12, 8);
    FsTables tables =
        build_tables(m, discretize(call, quadrature_options_for(m, call, grid, 1e-8)), grid);
    CHECK(initial_capital(tables, 100.0) == doctest::Approx(0.423634).epsilon(1e-4));
  }
  SUBCASE("halving the tolerance moves the capital by less than it") {
    AdditiveModel m = nig_levy_model(0.2);
    ContourMeasure call = ContourMeasure::call(99.0);
    TimeGrid grid(m.horizon(), 12, 8);
    double coarse = initial_capital(
        build_tables(m, discretize(call, quadrature_options_for(m, call, grid, 1e-6)), grid),
        100.0);
    double fine = initial_capital(
        build_tables(m, discretize(call, quadrature_options_for(m, call, grid, 0.5e-6)), grid),
        100.0);
    CHECK(std::abs(coarse - fine) <= 1e-6 * 99.0);
  }
}

TEST_CASE("terminal consistency with the payoff") {
  for (bool put : {false, true}) {
    AdditiveModel m = nig_levy_model(0.14);
    double strike = 99.0;
    ContourMeasure measure =
        put ? ContourMeasure::put(strike, choose_abscissa(PayoffKind::Put, m))
            : ContourMeasure::call(strike);
    TimeGrid grid(m.horizon(), 6, 4);
    QuadratureOptions opts = quadrature_options_for(m, measure, grid, 1e-8);
    opts.osc_theta_max = std::log(4.0) + 0.2;
    FsTables tables = build_tables(m, discretize(measure, opts), grid);
    std::size_t last = tables.times() - 1;
    for (int i = 0; i <= 32; ++i) {
      double s = strike * (0.25 + 3.75 * i / 32.0);
      CHECK(std::abs(tables.claim_value(s, last) - measure.payoff(s)) <=
            tables.terminal_tolerance(s));
    }
  }
}

TEST_CASE("pure-hedge nonnegativity along the contour") {
  // d rho_t(z)/d rho_t - |gamma(z,t)|^2 >= 0 for z on the contour
  for (const AdditiveModel& m : {nig_levy_model(0.08), electricity_model(0.1)}) {
    ContourMeasure call = ContourMeasure::call(99.0);
    TimeGrid grid(m.horizon(), 4, 4);
    FsTables tables =
        build_tables(m, discretize(call, quadrature_options_for(m, call, grid, 1e-7)), grid);
    for (std::size_t j = 0; j < tables.half_nodes(); j += 9) {
      complexd z = tables.node(j);
      for (double t : {0.0, 0.12, 0.27 * 0.9}) {
        double lt = m.loading()(t);
        double sl2 = m.sigma_long() * m.sigma_long();
        double two_re = 2.0 * z.real();
        double num = sl2 * std::norm(z) +
                     kappa(m.driver(), complexd(two_re * lt)).real() -
                     2.0 * kappa(m.driver(), z * lt).real();
        double density_ratio = num / rho_density(m, t);
        double g2 = std::norm(fs_gamma(m, z, t));
        CHECK(density_ratio - g2 >= -1e-12);
      }
    }
  }
}

TEST_CASE("inadmissible quadratures are rejected") {
  AdditiveModel tight(LevyLaw::nig(1.5, 0.2, 1.0, 0.0), LoadingFunction::constant(1.0), 0.0,
                      TrendFunction(), 0.25, 100.0);
  ContourMeasure put = ContourMeasure::put(99.0, -1.0);
  TimeGrid grid(0.25, 4, 4);
  ContourQuadrature quad = discretize(put, QuadratureOptions{});
  CHECK_THROWS_AS(build_tables(tight, quad, grid), ModelError);
}
