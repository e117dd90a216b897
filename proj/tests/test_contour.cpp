#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "qhedge/contour.hpp"
#include "qhedge/errors.hpp"

using namespace qhedge;

TEST_CASE("exponential integral") {
  // frozen reference values (Abramowitz & Stegun 5.1)
  CHECK(expint_e1(complexd(1.0)).real() == doctest::Approx(0.21938393439552).epsilon(1e-12));
  CHECK(expint_e1(complexd(1.0)).imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(expint_e1(complexd(10.0)).real() == doctest::Approx(4.15696892968532e-6).epsilon(1e-10));
  // numerical check along rays against a brute-force integral
  for (complexd c : {complexd(0.0, -3.0), complexd(0.5, -8.0), complexd(-0.4, -40.0)}) {
    // E1(c) = int_0^inf e^{-(c + x)} / (c + x) dx
    complexd acc(0.0);
    const int n = 400000;
    const double h = 60.0 / n;
    for (int i = 0; i < n; ++i) {
      double x = (i + 0.5) * h;
      acc += std::exp(-(c + x)) / (c + x) * h;
    }
    complexd e1 = expint_e1(c);
    CHECK(std::abs(e1 - acc) <= 1e-8 * (1.0 + std::abs(acc)));
  }
}

TEST_CASE("line tails against a brute-force window") {
  // tail(U) - tail(V) is the integral over [U, V]; compare that window
  // with a dense midpoint sum (the infinite remainders cancel).
  ContourLine line{0.5, 99.0};
  const double window_lo = 50.0, window_hi = 2.0e4;
  for (double s : {99.0, 70.0, 150.0, 99.5}) {
    double theta = std::log(s / line.strike);
    double acc = 0.0;
    const long n = 40000000;
    const double h = (window_hi - window_lo) / n;
    std::complex<double> rot = std::exp(complexd(0.0, h * theta));
    std::complex<double> phase = std::exp(complexd(0.0, (window_lo + 0.5 * h) * theta));
    for (long i = 0; i < n; ++i) {
      double u = window_lo + (i + 0.5) * h;
      complexd z(line.abscissa, u);
      acc += (phase / (z * (z - 1.0))).real();
      phase *= rot;
    }
    double brute = line.strike * std::exp(line.abscissa * theta) / M_PI * acc * h;
    double window = line_tail(line, window_lo, s) - line_tail(line, window_hi, s);
    CHECK(window == doctest::Approx(brute).epsilon(1e-6).scale(1e-6));
  }
}

TEST_CASE("call measure reconstruction") {
  const double strike = 99.0;
  ContourMeasure call = ContourMeasure::call(strike);
  SUBCASE("at the kink") { CHECK(std::abs(call.value(strike)) <= 1e-6 * strike); }
  SUBCASE("in the money matches the dense Riemann oracle") {
    double s = 2.0 * strike;
    double oracle = s + oracles::line_riemann(0.5, strike, s);
    CHECK(oracle == doctest::Approx(strike).epsilon(1e-6));
    CHECK(call.value(s) == doctest::Approx(strike).epsilon(1e-6));
  }
  SUBCASE("deep out of the money") {
    CHECK(std::abs(call.value(1e-3 * strike) - 0.0) <= 1e-6 * strike);
  }
}

TEST_CASE("put measure reconstruction") {
  const double strike = 99.0;
  ContourMeasure put = ContourMeasure::put(strike);
  CHECK(std::abs(put.value(strike)) <= 1e-6 * strike);
  double s = 0.5 * strike;
  double oracle = oracles::line_riemann(-1.0, strike, s);
  CHECK(oracle == doctest::Approx(0.5 * strike).epsilon(1e-6));
  CHECK(put.value(s) == doctest::Approx(0.5 * strike).epsilon(1e-6));
  CHECK(std::abs(put.value(10.0 * strike)) <= 1e-6 * strike);
}

TEST_CASE("put-call consistency") {
  const double strike = 80.0;
  ContourMeasure call = ContourMeasure::call(strike);
  ContourMeasure put = ContourMeasure::put(strike);
  for (int i = 0; i <= 32; ++i) {
    double s = strike * (0.25 + 3.75 * i / 32.0);
    CHECK(std::abs(call.value(s) - put.value(s) - (s - strike)) <= 2e-6 * strike);
  }
}

TEST_CASE("measure construction guards") {
  CHECK_THROWS_AS(ContourMeasure::call(99.0, 1.5), ParameterError);
  CHECK_THROWS_AS(ContourMeasure::call(99.0, 0.0), ParameterError);
  CHECK_THROWS_AS(ContourMeasure::put(99.0, 0.25), ParameterError);
  CHECK_THROWS_AS(ContourMeasure::call(-5.0), ParameterError);
}

namespace {

AdditiveModel nig_levy_model(double tail_scale) {
  LevyLaw law = rescale_tails(LevyLaw::nig(38.46, -3.85, 6.40, 0.64), tail_scale);
  return AdditiveModel(law, LoadingFunction::constant(1.0), 0.0, TrendFunction(), 0.25, 100.0);
}

}  // namespace

TEST_CASE("abscissa selection") {
  SUBCASE("full-plane driver keeps the defaults") {
    AdditiveModel pois(LevyLaw::poisson(1.0), LoadingFunction::constant(1.0), 0.0,
                       TrendFunction(), 0.25, 100.0);
    CHECK(choose_abscissa(PayoffKind::Call, pois) == doctest::Approx(0.5));
    CHECK(choose_abscissa(PayoffKind::Put, pois) == doctest::Approx(-1.0));
  }
  SUBCASE("heavy-tailed NIG keeps the default put abscissa") {
    CHECK(choose_abscissa(PayoffKind::Put, nig_levy_model(0.08)) == doctest::Approx(-1.0));
  }
  SUBCASE("narrow strip shrinks the put abscissa") {
    // strip is [-1.3, 1.7]; 2R = -2 is outside, -1 and -0.5 still are
    AdditiveModel tight(LevyLaw::nig(1.5, 0.2, 1.0, 0.0), LoadingFunction::constant(1.0), 0.0,
                        TrendFunction(), 0.25, 100.0);
    double r = choose_abscissa(PayoffKind::Put, tight);
    CHECK(r < 0.0);
    CHECK(r > -1.0);
    DomainStrip strip = domain(tight.driver());
    CHECK(strip.contains(2.0 * r, 0.05));
  }
  SUBCASE("admissibility check names the strip") {
    AdditiveModel tight(LevyLaw::nig(1.5, 0.2, 1.0, 0.0), LoadingFunction::constant(1.0), 0.0,
                        TrendFunction(), 0.25, 100.0);
    ContourMeasure put = ContourMeasure::put(99.0, -1.0);
    CHECK_THROWS_AS(ensure_admissible(put, tight), ModelError);
  }
}

TEST_CASE("discretization") {
  const double strike = 99.0;
  ContourMeasure call = ContourMeasure::call(strike);
  QuadratureOptions opts;
  opts.rel_tol = 1e-8;
  ContourQuadrature quad = discretize(call, opts);

  SUBCASE("conjugate closure") {
    auto nodes = quad.nodes();
    REQUIRE(!nodes.empty());
    std::size_t half = nodes.size() / 2;
    for (std::size_t j = 0; j < half; ++j) {
      CHECK(nodes[j + half].z == std::conj(nodes[j].z));
      CHECK(nodes[j + half].weight == std::conj(nodes[j].weight));
    }
  }
  SUBCASE("real reconstruction with tiny imaginary residue") {
    auto nodes = quad.nodes();
    for (double s : {25.0, 99.0, 170.0, 396.0}) {
      complexd acc(0.0);
      for (const auto& node : nodes) acc += node.weight * std::pow(complexd(s), node.z);
      CHECK(std::abs(acc.imag()) <= 1e-12 * (1.0 + std::abs(acc.real())));
    }
  }
  SUBCASE("reconstruction matches the dense oracle") {
    // The step-1e-3 Riemann oracle itself carries ~1e-7 * strike of
    // discretization error, so it certifies the micro level only.
    for (double s : {49.5, 198.0}) {
      double oracle = s + oracles::line_riemann(0.5, strike, s);
      CHECK(std::abs(quad.reconstruct(s) - oracle) <= 1e-6 * strike);
    }
  }
  SUBCASE("reconstruction matches the adaptive evaluation at tolerance") {
    for (double s : {49.5, 85.0, 99.0, 110.0, 198.0, 350.0}) {
      CHECK(std::abs(quad.reconstruct(s) - call.value(s)) <= 2.0 * opts.rel_tol * strike);
    }
  }
  SUBCASE("payoff reconstruction across the grid") {
    for (int i = 0; i <= 32; ++i) {
      double s = strike * (0.25 + 3.75 * i / 32.0);
      CHECK(std::abs(quad.reconstruct(s) - call.payoff(s)) <= 1e-6 * strike);
    }
  }
  SUBCASE("halving the tolerance is self-consistent") {
    QuadratureOptions fine = opts;
    fine.rel_tol = 0.5e-8;
    ContourQuadrature quad2 = discretize(call, fine);
    for (double s : {59.4, 99.0, 148.5}) {
      CHECK(std::abs(quad.reconstruct(s) - quad2.reconstruct(s)) <= opts.rel_tol * strike);
    }
  }
  SUBCASE("node budget overflow raises") {
    QuadratureOptions tiny = opts;
    tiny.max_nodes = 64;
    CHECK_THROWS_AS(discretize(call, tiny), QuadratureError);
  }
}

TEST_CASE("kernel density decay") {
  ContourLine line{0.5, 99.0};
  double bound = std::pow(99.0, 0.5) / 1.0;  // K^{1-R} with slack
  for (double u = 2.0; u <= 1e4; u *= 3.0) {
    complexd g = line.density(complexd(0.5, u));
    CHECK(std::abs(g) <= bound / (u * u));
  }
}

TEST_CASE("damped quadrature stays faithful where damping holds") {
  // With a decay hint the truncation shortens but reconstruction keeps
  // its accuracy at moderate moneyness thanks to the analytic tail.
  ContourMeasure call = ContourMeasure::call(99.0);
  QuadratureOptions opts;
  opts.rel_tol = 1e-8;
  opts.decay_rate = 0.02;
  ContourQuadrature quad = discretize(call, opts);
  CHECK(quad.node_count() < discretize(call).node_count());
  for (double s : {80.0, 99.0, 120.0}) {
    CHECK(std::abs(quad.reconstruct(s) - call.payoff(s)) <= 2e-5 * 99.0);
  }
}
