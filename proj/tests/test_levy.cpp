#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qhedge/errors.hpp"
#include "qhedge/levy.hpp"

using namespace qhedge;

namespace {
const LevyLaw kStandardNig = LevyLaw::nig(38.46, -3.85, 6.40, 0.64);
}

TEST_CASE("kappa closed forms") {
  LevyLaw pois = LevyLaw::poisson(1.0);
  CHECK(kappa(pois, complexd(0.0)) == complexd(0.0));
  CHECK(kappa(pois, complexd(1.0)).real() == doctest::Approx(1.718281828459045).epsilon(1e-14));
  CHECK(kappa(pois, complexd(1.0)).imag() == 0.0);

  LevyLaw bm = LevyLaw::brownian(0.1, 0.3);
  CHECK(kappa(bm, complexd(2.0)).real() == doctest::Approx(0.2 + 0.5 * 0.09 * 4.0));

  LevyLaw vg = LevyLaw::vg(5.0, 1.0, 2.0, -0.1);
  CHECK(kappa(vg, complexd(0.0)) == complexd(0.0));
}

TEST_CASE("domains") {
  CHECK(domain(LevyLaw::poisson(1.0)).contains(1e12));
  CHECK(domain(LevyLaw::brownian(0.0, 1.0)).contains(-1e12));

  DomainStrip nig = domain(kStandardNig);
  CHECK(nig.lower == doctest::Approx(-34.61).epsilon(1e-12));
  CHECK(nig.upper == doctest::Approx(42.31).epsilon(1e-12));
  CHECK(nig.contains(2.0));
  CHECK(nig.contains(42.31));
  CHECK(!nig.contains(42.32));

  DomainStrip vg = domain(LevyLaw::vg(5.0, 1.0, 2.0, 0.0));
  double root = std::sqrt(1.0 + 10.0);
  CHECK(vg.lower == doctest::Approx(-1.0 - root));
  CHECK(vg.upper == doctest::Approx(-1.0 + root));
  CHECK(!vg.contains(vg.upper));  // open strip

  CHECK_THROWS_AS((void)kappa(kStandardNig, complexd(50.0)), DomainError);
  try {
    (void)kappa(kStandardNig, complexd(50.0));
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("42.31") != std::string::npos);
  }
}

TEST_CASE("moments against finite differences of kappa") {
  for (const LevyLaw& law :
       {kStandardNig, LevyLaw::vg(5.0, 1.0, 2.0, -0.1), LevyLaw::poisson(2.5),
        LevyLaw::brownian(0.05, 0.4)}) {
    Moments m = moments(law);
    auto k = [&](double x) { return kappa(law, complexd(x)).real(); };
    double c1 = oracles::fd_derivative(k, 1, 1e-4);
    double c2 = oracles::fd_derivative(k, 2, 1e-3);
    double c3 = oracles::fd_derivative(k, 3, 1e-2);
    double c4 = oracles::fd_derivative(k, 4, 2e-2);
    CHECK(m.mean == doctest::Approx(c1).epsilon(1e-6).scale(1.0));
    CHECK(m.variance == doctest::Approx(c2).epsilon(1e-6));
    CHECK(m.skewness == doctest::Approx(c3 / std::pow(c2, 1.5)).epsilon(2e-4).scale(1.0));
    CHECK(m.excess_kurtosis == doctest::Approx(c4 / (c2 * c2)).epsilon(2e-3).scale(1e-2));
  }
}

TEST_CASE("standard NIG moments") {
  Moments m = moments(kStandardNig);
  CHECK(std::abs(m.mean) < 5e-3);
  CHECK(m.variance == doctest::Approx(0.41 * 0.41).epsilon(0.01));
  CHECK(m.skewness == doctest::Approx(-0.02).scale(1.0).epsilon(0.25));
  CHECK(m.excess_kurtosis == doctest::Approx(0.01).scale(1.0).epsilon(0.3));

  Moments p = moments(LevyLaw::poisson(3.0));
  CHECK(p.variance == doctest::Approx(3.0));
  CHECK(p.skewness == doctest::Approx(3.0 / std::pow(3.0, 1.5)));
}

TEST_CASE("tail rescaling") {
  SUBCASE("identity at C = 1") {
    LevyLaw same = rescale_tails(kStandardNig, 1.0);
    CHECK(same.nig_params().alpha == doctest::Approx(38.46).epsilon(1e-9));
    CHECK(same.nig_params().beta == doctest::Approx(-3.85).epsilon(1e-7));
    CHECK(same.nig_params().delta == doctest::Approx(6.40).epsilon(1e-7));
    CHECK(same.nig_params().mu == doctest::Approx(0.64).epsilon(1e-7));
  }
  SUBCASE("table values") {
    LevyLaw heavy = rescale_tails(kStandardNig, 0.08);
    CHECK(heavy.nig_params().alpha == doctest::Approx(3.08).epsilon(0.004));
    CHECK(moments(heavy).excess_kurtosis == doctest::Approx(1.87).epsilon(0.011));
    LevyLaw light = rescale_tails(kStandardNig, 2.0);
    CHECK(light.nig_params().alpha == doctest::Approx(76.92).epsilon(1e-9));
    CHECK(moments(light).excess_kurtosis == doctest::Approx(4e-3).scale(1.0).epsilon(0.25));
  }
  SUBCASE("first three moments preserved") {
    Moments base = moments(kStandardNig);
    for (double c : {0.08, 0.14, 0.2, 2.0, 5.0}) {
      Moments m = moments(rescale_tails(kStandardNig, c));
      CHECK(m.mean == doctest::Approx(base.mean).epsilon(1e-9).scale(1.0));
      CHECK(m.variance == doctest::Approx(base.variance).epsilon(1e-9));
      CHECK(m.skewness == doctest::Approx(base.skewness).epsilon(1e-7));
    }
  }
}

TEST_CASE("conjugate symmetry and realness") {
  std::mt19937_64 rng(7);
  for (const LevyLaw& law :
       {kStandardNig, LevyLaw::vg(5.0, 1.0, 2.0, -0.1), LevyLaw::poisson(2.0),
        LevyLaw::brownian(0.1, 0.5)}) {
    DomainStrip strip = domain(law);
    double lo = std::max(strip.lower, -20.0), hi = std::min(strip.upper, 20.0);
    std::uniform_real_distribution<double> re(lo + 1e-6 * (hi - lo), hi - 1e-6 * (hi - lo));
    std::uniform_real_distribution<double> im(-50.0, 50.0);
    for (int i = 0; i < 200; ++i) {
      complexd z(re(rng), im(rng));
      complexd a = kappa(law, z);
      complexd b = kappa(law, std::conj(z));
      CHECK(std::abs(std::conj(a) - b) <= 1e-13 * (1.0 + std::abs(a)));
      complexd real_arg = kappa(law, complexd(z.real()));
      CHECK(real_arg.imag() == 0.0);
    }
    CHECK(kappa(law, complexd(0.0)) == complexd(0.0));
  }
}

TEST_CASE("strict variance inequality") {
  for (const LevyLaw& law :
       {kStandardNig, LevyLaw::vg(5.0, 1.0, 2.0, -0.1), LevyLaw::poisson(0.5),
        LevyLaw::brownian(0.0, 0.3)}) {
    DomainStrip strip = domain(law);
    for (double g = 0.05; 2.0 * g < std::min(strip.upper, 40.0); g += 0.35) {
      double lhs = kappa(law, complexd(2.0 * g)).real() - 2.0 * kappa(law, complexd(g)).real();
      CHECK(lhs > 0.0);
    }
  }
}

TEST_CASE("sampler consistency with the cumulant") {
  // Empirical log E[exp(z X_dt)] must match dt * kappa(z) within three
  // Monte Carlo standard errors.
  const long n = 1000000;
  struct Probe {
    LevyLaw law;
    double dt;
    double z;
  };
  const Probe probes[] = {
      {kStandardNig, 1.0, 1.0},
      {kStandardNig, 0.25, -2.0},
      {LevyLaw::vg(5.0, 1.0, 2.0, -0.1), 0.5, 1.0},
      {LevyLaw::poisson(2.0), 0.5, 1.0},
      {LevyLaw::brownian(0.1, 0.4), 0.25, 2.0},
  };
  int idx = 0;
  for (const Probe& probe : probes) {
    RngEngine rng(100 + idx++);
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
      double x = std::exp(probe.z * sample_increment(probe.law, probe.dt, rng));
      sum += x;
      sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    double se = std::sqrt(var / n);
    double expected = std::exp(probe.dt * kappa(probe.law, complexd(probe.z)).real());
    CHECK(std::abs(mean - expected) <= 3.0 * se);
  }
}

TEST_CASE("sampler moments") {
  const long n = 1000000;
  SUBCASE("Brownian symmetry") {
    RngEngine rng(1);
    double sigma = 0.4, dt = 0.1, sum = 0.0;
    LevyLaw law = LevyLaw::brownian(0.0, sigma);
    for (long i = 0; i < n; ++i) sum += sample_increment(law, dt, rng);
    CHECK(std::abs(sum / n) <= 4.0 * sigma * std::sqrt(dt / n));
  }
  SUBCASE("NIG variance") {
    RngEngine rng(2);
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
      double x = sample_increment(kStandardNig, 1.0, rng);
      sum += x;
      sum2 += x * x;
    }
    double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(0.41 * 0.41).epsilon(0.01));
  }
  SUBCASE("Poisson mean") {
    RngEngine rng(3);
    double sum = 0.0;
    LevyLaw law = LevyLaw::poisson(2.0);
    for (long i = 0; i < n; ++i) sum += sample_increment(law, 0.5, rng);
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(LevyLaw::nig(1.0, 2.0, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(LevyLaw::nig(1.0, 0.5, -1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(LevyLaw::vg(-1.0, 0.0, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(LevyLaw::poisson(0.0), ParameterError);
  CHECK_THROWS_AS(LevyLaw::brownian(0.0, -1.0), ParameterError);
  CHECK_THROWS_AS(rescale_tails(LevyLaw::poisson(1.0), 0.5), ParameterError);
  CHECK_THROWS_AS(rescale_tails(kStandardNig, -1.0), ParameterError);
}
